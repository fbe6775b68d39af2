"""Small-scale fading, channel-gain realizations, and the exact N=1 oracle.

Two equivalent sampling paths exist: per-antenna complex fading (needed by
the rate experiments) and per-AP Gamma(N, 1) power sums (cheaper for the
metric experiments). Their equivalence is exact, not statistical, and is
covered by tests.
"""

import numpy as np

from cfmimo import backend
from cfmimo.errors import EmptyRealizationError, NearDuplicateRatesError


def draw_fading(n_antennas, n_users, rng):
    """(M, K) i.i.d. circularly-symmetric complex Gaussian, unit variance."""
    shape = (n_antennas, n_users)
    return np.sqrt(0.5) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def channel_matrix(profile, h):
    """g = sqrt(beta) * h with beta expanded to one row per antenna."""
    return np.sqrt(profile.per_antenna()) * h


def draw_gamma_sums(n_aps, n_per_ap, rng):
    """Per-AP fading power sums H_i ~ Gamma(N, 1).

    Built as sums of N unit exponentials so the draw is exactly the sum of
    the per-antenna |h|^2 terms it stands in for.
    """
    if n_per_ap == 1:
        return rng.standard_exponential(n_aps)
    return rng.standard_exponential((n_aps, n_per_ap)).sum(axis=1)


def gamma_sums_from_fading(h, n_per_ap, user=None):
    """Collapse per-antenna |h|^2 into per-AP sums; (L,) for one user or (L, K)."""
    h = np.asarray(h)
    p = np.abs(h) ** 2 if h.ndim > 1 else np.abs(h)[:, None] ** 2
    n_aps = p.shape[0] // n_per_ap
    sums = p.reshape(n_aps, n_per_ap, -1).sum(axis=1)
    if user is not None:
        return sums[:, user]
    return sums if np.asarray(h).ndim > 1 else sums[:, 0]


def channel_gain(profile, gamma_sums, user=0):
    """||g_k||^2 = sum_i H_i * beta_{i,k} for one user."""
    beta = profile.beta[:, user]
    gamma_sums = np.ascontiguousarray(gamma_sums, dtype=np.float64)
    if beta.shape != gamma_sums.shape:
        raise ValueError(f"shape mismatch: beta {beta.shape} vs H {gamma_sums.shape}")
    return backend.weighted_gain(np.ascontiguousarray(beta), gamma_sums)


def conditional_moments(profile, user=0, n_per_ap=None):
    """Mean and variance of ||g_k||^2 given the deployment: (N*sum beta, N*sum beta^2)."""
    if profile.n_aps == 0:
        raise EmptyRealizationError("conditional moments need at least one AP")
    n = profile.n_per_ap if n_per_ap is None else n_per_ap
    s1, s2 = backend.beta_sums(np.ascontiguousarray(profile.beta[:, user]))
    return n * s1, n * s2


def hypoexp_cdf(rates, x):
    """Exact CDF of a sum of independent exponentials with distinct rates.

    Standard partial-fraction form: F(x) = sum_i w_i (1 - exp(-mu_i x)) with
    w_i = prod_{j != i} mu_j / (mu_j - mu_i). Valid for the N=1 conditional
    channel gain, whose rates are the inverse pathloss values.
    """
    mu = np.asarray(rates, dtype=np.float64)
    if mu.ndim != 1 or mu.size == 0:
        raise ValueError("rates must be a non-empty 1-D sequence")
    if (mu <= 0).any():
        raise ValueError("rates must be positive")
    sorted_mu = np.sort(mu)
    gaps = np.diff(sorted_mu) / sorted_mu[1:]
    if mu.size > 1 and gaps.min() < 1e-9:
        raise NearDuplicateRatesError(
            "relative rate gap below 1e-9; perturb the rates or fall back to Monte Carlo"
        )
    diff = mu[None, :] - mu[:, None]
    np.fill_diagonal(diff, 1.0)
    weights = np.prod(mu[None, :] / diff, axis=1, where=~np.eye(mu.size, dtype=bool))
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = ((1.0 - np.exp(-np.outer(x_arr, mu))) @ weights)
    out = np.where(x_arr <= 0, 0.0, out)
    return float(out[0]) if np.ndim(x) == 0 else out
