"""AP deployment sampling on finite regions and AP-user distances.

Regions are centered at the origin; the reference user sits at the origin
so that spatial averages over deployments describe a randomly located user.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np


@dataclass(frozen=True)
class Disk:
    """Disk of the given radius (meters), centered at the origin."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    def area(self):
        return pi * self.radius**2

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.hypot(points[:, 0], points[:, 1]) <= self.radius * (1 + 1e-12)

    def sample(self, n, rng):
        """n i.i.d. uniform points, radial inversion sampling."""
        r = self.radius * np.sqrt(rng.random(n))
        theta = 2 * pi * rng.random(n)
        return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


@dataclass(frozen=True)
class Square:
    """Axis-aligned square with the given side (meters), centered at the origin."""

    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError(f"square side must be positive, got {self.side}")

    def area(self):
        return self.side**2

    def contains(self, points):
        points = np.atleast_2d(points)
        half = self.side / 2 * (1 + 1e-12)
        return (np.abs(points[:, 0]) <= half) & (np.abs(points[:, 1]) <= half)

    def sample(self, n, rng):
        return self.side * (rng.random((n, 2)) - 0.5)


Region = Disk | Square


@dataclass
class NetworkRealization:
    """AP positions and the per-AP antenna count for one spatial draw.

    ``ap_positions`` is an (L, 2) array in meters; the total antenna count
    is M = L * n_per_ap.
    """

    ap_positions: np.ndarray
    n_per_ap: int
    region: Region = field(repr=False)

    def __post_init__(self):
        self.ap_positions = np.asarray(self.ap_positions, dtype=np.float64).reshape(-1, 2)
        if self.n_per_ap < 1:
            raise ValueError("n_per_ap must be a positive integer")

    @property
    def n_aps(self):
        return self.ap_positions.shape[0]

    @property
    def n_antennas(self):
        return self.n_aps * self.n_per_ap

    def validate(self):
        """Check the containment invariant (samplers guarantee it by construction)."""
        if self.n_aps and not self.region.contains(self.ap_positions).all():
            raise ValueError("AP positions fall outside the region")
        return self


def sample_ppp(region, intensity, n_per_ap, rng):
    """Homogeneous PPP draw: L ~ Poisson(intensity * area), positions i.i.d. uniform.

    intensity is in APs per square meter; L = 0 is a legal empty realization.
    """
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    n = int(rng.poisson(intensity * region.area()))
    return NetworkRealization(region.sample(n, rng), n_per_ap, region)


def sample_uniform_fixed(region, n_aps, n_per_ap, rng):
    """Exactly n_aps positions, i.i.d. uniform over the region."""
    if n_aps < 0:
        raise ValueError("n_aps must be non-negative")
    return NetworkRealization(region.sample(int(n_aps), rng), n_per_ap, region)


def distances(realization, user):
    """Euclidean AP-user distances, ordered like ap_positions."""
    user = np.asarray(user, dtype=np.float64)
    pos = realization.ap_positions
    return np.hypot(pos[:, 0] - user[0], pos[:, 1] - user[1])
