"""Per-realization hardening and orthogonality metrics and empirical CDFs.

X_ch quantifies how much the channel gain fluctuates around its conditional
mean (small = hardened); X_fp quantifies how far two users' channel vectors
are from orthogonal (small = favorable). Both live in (0, 1/N] and are
invariant to a common scaling of the large-scale coefficients, so shadowed
profiles implement the shadowed variants automatically.
"""

from bisect import bisect_right
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from cfmimo import backend
from cfmimo.errors import EmptyRealizationError

METRIC_KINDS = ("Xch", "Xfp", "XchShadow", "XfpShadow", "ChannelGain", "Rate")


@dataclass(frozen=True)
class MetricSample:
    value: float
    kind: str = "Xch"

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")


def x_ch(profile, user=0, n_per_ap=None):
    """Hardening metric: sum beta^2 / (N (sum beta)^2) for one user."""
    if profile.n_aps == 0:
        raise EmptyRealizationError("X_ch is undefined for an empty deployment")
    n = profile.n_per_ap if n_per_ap is None else n_per_ap
    s1, s2 = backend.beta_sums(np.ascontiguousarray(profile.beta[:, user]))
    return s2 / (n * s1 * s1)


def x_fp(profile, user_k=0, user_j=1, n_per_ap=None):
    """Orthogonality metric: sum beta_k*beta_j / (N sum beta_k sum beta_j)."""
    if profile.n_aps == 0:
        raise EmptyRealizationError("X_fp is undefined for an empty deployment")
    if user_k == user_j:
        raise ValueError("X_fp needs two distinct users")
    n = profile.n_per_ap if n_per_ap is None else n_per_ap
    sk, sj, skj = backend.cross_sums(
        np.ascontiguousarray(profile.beta[:, user_k]),
        np.ascontiguousarray(profile.beta[:, user_j]),
    )
    return skj / (n * sk * sj)


def var_bound_check(profile, user_k=0, user_j=1, n_per_ap=None):
    """Conditional variance of the normalized inner product and its 1/L-type bound.

    The variance equals X_fp; the bound L / (N L^2 avg_k avg_j) holds whenever
    every coefficient is at most 1 (true for both pathloss laws with C = 1).
    """
    if profile.n_aps == 0:
        raise EmptyRealizationError("bound check needs at least one AP")
    n = profile.n_per_ap if n_per_ap is None else n_per_ap
    n_aps = profile.n_aps
    variance = x_fp(profile, user_k, user_j, n)
    avg_k = profile.beta[:, user_k].mean()
    avg_j = profile.beta[:, user_j].mean()
    bound = n_aps / (n * n_aps**2 * avg_k * avg_j)
    return variance, bound


@dataclass
class EmpiricalCdf:
    """Sorted samples with step-function evaluation and inverse."""

    values: np.ndarray

    def __post_init__(self):
        values = np.sort(np.asarray(self.values, dtype=np.float64))
        if values.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        self.values = values

    @property
    def n_samples(self):
        return self.values.size

    def query(self, x):
        """P[X <= x] = (# samples <= x) / R."""
        if np.ndim(x) == 0:
            return bisect_right(self.values, x) / self.values.size
        return np.searchsorted(self.values, np.asarray(x), side="right") / self.values.size

    def quantile(self, p):
        """Smallest sample v with query(v) >= p, for p in (0, 1]."""
        if not 0 < p <= 1:
            raise ValueError("quantile level must lie in (0, 1]")
        return float(self.values[ceil(p * self.values.size) - 1])

    def stderr(self, x):
        """Binomial standard error of query(x)."""
        p = self.query(x)
        return sqrt(p * (1 - p) / self.values.size)


def cdf_estimate(samples):
    """Aggregate metric draws into an empirical CDF; accepts floats or MetricSamples."""
    values = [s.value if isinstance(s, MetricSample) else float(s) for s in samples]
    return EmpiricalCdf(np.asarray(values))
