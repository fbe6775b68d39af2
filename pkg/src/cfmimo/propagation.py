"""Large-scale propagation: pathloss laws, log-normal shadowing, link budget.

Two laws are supported: the bounded single-slope law min(1, r**-alpha) and a
three-slope law with exponents 0 / 2 / 3.5 below d0, between d0 and d1, and
beyond d1. Both are finite at r = 0.
"""

from dataclasses import dataclass
from math import log10

import numpy as np

from cfmimo import backend
from cfmimo.errors import ShadowingNotConfiguredError
from cfmimo.geometry import distances


@dataclass(frozen=True)
class SingleSlope:
    """min(1, r**-alpha); alpha > 1 so far-field sums stay integrable."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 1:
            raise ValueError(f"single-slope exponent must exceed 1, got {self.alpha}")


@dataclass(frozen=True)
class ThreeSlope:
    """Breakpoints d0 < d1 in meters; c_db is the link-budget constant in dB."""

    d0: float
    d1: float
    c_db: float = 0.0

    def __post_init__(self):
        if not 0 < self.d0 < self.d1:
            raise ValueError(f"need 0 < d0 < d1, got d0={self.d0}, d1={self.d1}")

    @property
    def c_linear(self):
        return 10 ** (self.c_db / 10)


@dataclass(frozen=True)
class Shadowing:
    """Log-normal shadowing with std sigma_db, disabled within cutoff_m of the AP."""

    sigma_db: float
    cutoff_m: float = 50.0

    def __post_init__(self):
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be non-negative")
        if self.cutoff_m <= 0:
            raise ValueError("cutoff_m must be positive")


@dataclass(frozen=True)
class PropagationModel:
    law: SingleSlope | ThreeSlope
    shadowing: Shadowing | None = None


@dataclass
class LargeScaleProfile:
    """Per-(AP, user) large-scale coefficients for a fixed realization.

    ``beta`` has shape (L, K), one row per AP. Antennas of one AP are
    co-located, so the per-antenna matrix just repeats each row n_per_ap
    times.
    """

    beta: np.ndarray
    n_per_ap: int
    realization: object = None
    user_positions: np.ndarray | None = None

    def __post_init__(self):
        self.beta = np.atleast_2d(np.asarray(self.beta, dtype=np.float64))

    @property
    def n_aps(self):
        return self.beta.shape[0]

    @property
    def n_users(self):
        return self.beta.shape[1]

    def per_antenna(self):
        """(M, K) coefficients with each AP row replicated n_per_ap times."""
        return np.repeat(self.beta, self.n_per_ap, axis=0)


def pathloss(model, r):
    """Linear pathloss gain at distance(s) r in meters."""
    law = model.law if isinstance(model, PropagationModel) else model
    r_arr = np.ascontiguousarray(np.atleast_1d(r), dtype=np.float64)
    if (r_arr < 0).any():
        raise ValueError("distances must be non-negative")
    if isinstance(law, SingleSlope):
        out = backend.singleslope_pathloss(r_arr.ravel(), law.alpha)
    else:
        out = backend.threeslope_pathloss(r_arr.ravel(), law.d0, law.d1, law.c_linear)
    out = out.reshape(r_arr.shape)
    return float(out[0]) if np.isscalar(r) or np.ndim(r) == 0 else out


def shadowing_factor(model, r, rng):
    """Linear shadowing factor(s): 10**(sigma*z/10) beyond the cutoff, 1 inside it."""
    shadow = model.shadowing if isinstance(model, PropagationModel) else model
    if shadow is None:
        raise ShadowingNotConfiguredError("model has no shadowing parameters")
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    z = rng.standard_normal(r_arr.shape)
    fac = np.where(r_arr > shadow.cutoff_m, 10 ** (shadow.sigma_db * z / 10), 1.0)
    return float(fac[0]) if np.isscalar(r) or np.ndim(r) == 0 else fac


def large_scale_profile(realization, users, model, rng=None):
    """beta[i, k] = pathloss(r_ik) * shadowing_factor(r_ik) for every AP-user pair.

    Shadowing draws are independent per pair; rng is required only when the
    model carries shadowing.
    """
    users = np.atleast_2d(np.asarray(users, dtype=np.float64))
    n_users = users.shape[0]
    beta = np.empty((realization.n_aps, n_users))
    for k in range(n_users):
        r = distances(realization, users[k])
        col = pathloss(model, r)
        if isinstance(model, PropagationModel) and model.shadowing is not None:
            if rng is None:
                raise ShadowingNotConfiguredError("shadowing enabled but no rng passed")
            col = col * shadowing_factor(model, r, rng)
        beta[:, k] = col
    return LargeScaleProfile(beta, realization.n_per_ap, realization, users)


def constant_c(f_mhz, h_ap_m, h_user_m):
    """Link-budget constant in dB for the three-slope law.

    Hata-family constant; includes the +105 dB km-to-m correction and the
    +94 dB noise normalization, so unit transmit power is measured in mW
    against unit noise variance. Frequency is in MHz.
    """
    if f_mhz <= 0 or h_ap_m <= 0 or h_user_m <= 0:
        raise ValueError("frequency and antenna heights must be positive")
    return (
        105
        + 94
        - 46.3
        - 33.9 * log10(f_mhz)
        + 13.82 * log10(h_ap_m)
        + (1.1 * log10(f_mhz) - 0.7) * h_user_m
        - (1.56 * log10(f_mhz) - 0.8)
    )
