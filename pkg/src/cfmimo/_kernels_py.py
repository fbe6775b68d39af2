"""Pure-numpy implementations of the hot per-trial reductions.

Mirror of the compiled ``cfmimo._kernels`` extension; ``cfmimo.backend``
picks whichever is importable. Randomness never lives here, so both
backends consume identical draws.
"""

import numpy as np

BACKEND_NAME = "numpy"


def singleslope_pathloss(r, alpha):
    """min(1, r**-alpha), elementwise, safe at r=0."""
    r = np.asarray(r, dtype=np.float64)
    out = np.ones_like(r)
    far = r > 1.0
    out[far] = r[far] ** -alpha
    return out


def threeslope_pathloss(r, d0, d1, c):
    """Piecewise power law with exponents 0 / 2 / 3.5 over [0,d0), [d0,d1], (d1,inf)."""
    r = np.asarray(r, dtype=np.float64)
    out = np.full_like(r, c * d0**-2.0 * d1**-1.5)
    mid = (r >= d0) & (r <= d1)
    out[mid] = c * r[mid] ** -2.0 * d1**-1.5
    far = r > d1
    out[far] = c * r[far] ** -3.5
    return out


def singleslope_sums(r, alpha):
    """(sum l(r_i), sum l(r_i)^2) for l = min(1, r**-alpha)."""
    l = singleslope_pathloss(r, alpha)
    return float(l.sum()), float((l * l).sum())


def threeslope_sums(r, d0, d1, c):
    l = threeslope_pathloss(r, d0, d1, c)
    return float(l.sum()), float((l * l).sum())


def beta_sums(beta):
    beta = np.asarray(beta, dtype=np.float64)
    return float(beta.sum()), float((beta * beta).sum())


def cross_sums(beta_k, beta_j):
    """(sum beta_k, sum beta_j, sum beta_k*beta_j)."""
    beta_k = np.asarray(beta_k, dtype=np.float64)
    beta_j = np.asarray(beta_j, dtype=np.float64)
    return float(beta_k.sum()), float(beta_j.sum()), float((beta_k * beta_j).sum())


def weighted_gain(beta, weights):
    """sum weights_i * beta_i (channel gain for per-AP fading powers)."""
    beta = np.asarray(beta, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    return float(beta @ weights)
