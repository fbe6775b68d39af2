"""Campbell-theorem closed forms for the deployment-averaged channel moments.

These are the ground truth the Monte-Carlo machinery is validated against:
first and second moments of the channel gain and of the pathloss sums
Y1 = sum l(r_i), Y2 = sum l(r_i)^2 over a disk of radius rho around the
user, plus the hardening ratio E[Y2] / (N E[Y1^2]) and its large-region
limits for each pathloss-exponent regime.
"""

from dataclasses import dataclass
from math import log, pi

# Exponents this close to 2 route to the logarithmic branch; the two branches
# are analytic continuations of each other and the generic branch cancels
# catastrophically as alpha -> 2.
_ALPHA_TOL = 1e-6


@dataclass(frozen=True)
class MomentReport:
    """Closed-form moment bundle for one parameter point (linear scale)."""

    mean_g2: float
    var_g2: float
    mean_y1: float
    var_y1: float
    mean_y1sq: float
    mean_y2: float
    hardening_ratio: float


@dataclass(frozen=True)
class ThreeSlopeMoments:
    mean_y1: float
    var_y1: float
    mean_y1sq: float
    mean_y2: float
    ratio_exact: float
    ratio_approx: float


def _check(intensity, alpha, radius):
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    if radius < 1:
        raise ValueError("radius must be >= 1 so the pathloss knee lies inside the region")
    if alpha <= 1 + _ALPHA_TOL and abs(alpha - 2) > _ALPHA_TOL:
        raise ValueError("pathloss exponent must exceed 1 (the alpha=1 integral has a different form)")


def _mean_y1(intensity, alpha, radius):
    if abs(alpha - 2) <= _ALPHA_TOL:
        return intensity * pi * (1 + 2 * log(radius))
    return intensity * pi * (1 + 2 * (1 - radius ** (2 - alpha)) / (alpha - 2))


def _var_y1(intensity, alpha, radius):
    return intensity * pi * (1 + (1 - radius ** (2 - 2 * alpha)) / (alpha - 1))


def lemma1_moments(intensity, n_per_ap, alpha, radius):
    """Mean and variance of ||g_k||^2 over deployments and fading.

    Mean scales as N; variance as N^2 + N, so at fixed antenna density
    mu = N * lambda the mean is split-invariant while the variance grows
    proportionally to N + 1.
    """
    _check(intensity, alpha, radius)
    n = n_per_ap
    return n * _mean_y1(intensity, alpha, radius), (n * n + n) * _var_y1(intensity, alpha, radius)


def lemma2_moments(intensity, alpha, radius):
    """(E[Y1], Var[Y1], E[Y1^2], E[Y2]); E[Y2] = Var[Y1] exactly."""
    _check(intensity, alpha, radius)
    mean_y1 = _mean_y1(intensity, alpha, radius)
    var_y1 = _var_y1(intensity, alpha, radius)
    return mean_y1, var_y1, var_y1 + mean_y1**2, var_y1


def hardening_ratio(intensity, n_per_ap, alpha, radius, asymptotic=False):
    """E[Y2] / (N E[Y1^2]) in (0, 1/N]; small values mean hardening is possible.

    With asymptotic=True, returns the rho -> infinity limit formula for the
    matching exponent regime instead of the finite-radius value; for
    alpha <= 2 that limit is 0.
    """
    _check(intensity, alpha, radius)
    n = n_per_ap
    if asymptotic:
        if alpha > 2 + _ALPHA_TOL:
            return 1 / (n * (1 + intensity * pi * alpha * (alpha - 1) / (alpha - 2) ** 2))
        return 0.0 if intensity > 0 else 1 / n
    if intensity == 0:
        return 1 / n
    mean_y1, _, mean_y1sq, mean_y2 = lemma2_moments(intensity, alpha, radius)
    return mean_y2 / (n * mean_y1sq)


def three_slope_moments(intensity, n_per_ap, d0, d1):
    """Large-region (rho -> infinity) moments for the three-slope law with C = 1.

    The constant C cancels from the hardening ratio, so it is fixed to 1
    here. ratio_approx replaces d0**-2 - 0.3*d1**-2 by d0**-2, valid when
    d1 is much larger than a meter.
    """
    if not 0 < d0 < d1:
        raise ValueError("need 0 < d0 < d1")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    n = n_per_ap
    log_term = log(d1) - log(d0) + 7 / 6
    mean_y1 = 2 * intensity * pi * d1**-1.5 * log_term
    var_y1 = 2 * intensity * pi * d1**-3 * (d0**-2 - 0.3 * d1**-2)
    mean_y1sq = var_y1 + mean_y1**2
    ratio_exact = 1 / (n * (1 + 2 * intensity * pi * log_term**2 / (d0**-2 - 0.3 * d1**-2)))
    ratio_approx = 1 / (n * (1 + 2 * intensity * pi * d0**2 * log_term**2))
    return ThreeSlopeMoments(mean_y1, var_y1, mean_y1sq, var_y1, ratio_exact, ratio_approx)


def closed_form_report(intensity, n_per_ap, alpha, radius):
    """Bundle every closed form for one single-slope parameter point."""
    mean_g2, var_g2 = lemma1_moments(intensity, n_per_ap, alpha, radius)
    mean_y1, var_y1, mean_y1sq, mean_y2 = lemma2_moments(intensity, alpha, radius)
    return MomentReport(
        mean_g2=mean_g2,
        var_g2=var_g2,
        mean_y1=mean_y1,
        var_y1=var_y1,
        mean_y1sq=mean_y1sq,
        mean_y2=mean_y2,
        hardening_ratio=hardening_ratio(intensity, n_per_ap, alpha, radius),
    )
