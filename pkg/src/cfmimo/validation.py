"""Self-contained oracle and property checks behind ``cfmimo validate``.

Each check regenerates its own Monte-Carlo evidence and compares against an
independent reference (closed form, exact distribution, or a statistical
bound with an explicit standard-error budget). ``quick=True`` shrinks the
sample sizes roughly tenfold for a fast smoke run.
"""

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from scipy.stats import kstest

from cfmimo import analytics, backend, channel, geometry, metrics, rates
from cfmimo import _kernels_py
from cfmimo.geometry import Disk
from cfmimo.harness import preset, run, trial_rng
from cfmimo.propagation import PropagationModel, SingleSlope, large_scale_profile


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _mc_gain_moments(intensity, n_per_ap, alpha, radius, trials, seed):
    region = Disk(radius)
    model = PropagationModel(SingleSlope(alpha))
    gains = np.empty(trials)
    for t in range(trials):
        rng = trial_rng(seed, 0, t)
        real = geometry.sample_ppp(region, intensity, n_per_ap, rng)
        while real.n_aps == 0:
            real = geometry.sample_ppp(region, intensity, n_per_ap, rng)
        profile = large_scale_profile(real, [(0.0, 0.0)], model)
        powers = channel.draw_gamma_sums(real.n_aps, n_per_ap, rng)
        gains[t] = channel.channel_gain(profile, powers, 0)
    return gains


def check_ppp_counts(quick=False, seed=1):
    trials = 2_000 if quick else 20_000
    region = Disk(500.0)
    lam = 1e-3
    rng = np.random.default_rng((seed, 101))
    counts = np.array([geometry.sample_ppp(region, lam, 1, rng).n_aps for _ in range(trials)])
    expect = lam * region.area()
    mean_err = abs(counts.mean() - expect) / expect
    var_err = abs(counts.var(ddof=1) - expect) / expect
    ok = mean_err < 0.03 and var_err < 0.03
    return CheckResult("ppp-count-moments", ok, f"mean err {mean_err:.3%}, var err {var_err:.3%}")


def check_lemma1(quick=False, seed=1):
    """MC gain moments against the closed forms within 4 estimated SEs."""
    trials = 5_000 if quick else 50_000
    lam, n, alpha, radius = 1e-3, 1, 3.76, 500.0
    mean_cf, var_cf = analytics.lemma1_moments(lam, n, alpha, radius)
    gains = _mc_gain_moments(lam, n, alpha, radius, trials, seed)
    se_mean = gains.std(ddof=1) / sqrt(trials)
    centered = gains - gains.mean()
    se_var = sqrt(max((centered**4).mean() - gains.var(ddof=1) ** 2, 0) / trials)
    dm = abs(gains.mean() - mean_cf) / se_mean
    dv = abs(gains.var(ddof=1) - var_cf) / se_var
    ok = dm < 4 and dv < 4
    return CheckResult("lemma1-moments", ok, f"mean {dm:.2f} SE, var {dv:.2f} SE from closed form")


def check_lemma2(quick=False, seed=1):
    trials = 5_000 if quick else 50_000
    lam, alpha, radius = 1e-3, 3.76, 500.0
    mean_cf, var_cf, mean_sq_cf, mean_y2_cf = analytics.lemma2_moments(lam, alpha, radius)
    region = Disk(radius)
    y1 = np.empty(trials)
    y2 = np.empty(trials)
    for t in range(trials):
        rng = trial_rng(seed, 1, t)
        real = geometry.sample_ppp(region, lam, 1, rng)
        while real.n_aps == 0:
            real = geometry.sample_ppp(region, lam, 1, rng)
        r = geometry.distances(real, (0.0, 0.0))
        y1[t], y2[t] = backend.singleslope_sums(np.ascontiguousarray(r), alpha)
    checks = []
    for arr, cf in ((y1, mean_cf), (y1**2, mean_sq_cf), (y2, mean_y2_cf)):
        se = arr.std(ddof=1) / sqrt(trials)
        checks.append(abs(arr.mean() - cf) / se)
    ok = max(checks) < 4 and abs(var_cf - mean_y2_cf) < 1e-15
    return CheckResult("lemma2-moments", ok, f"max deviation {max(checks):.2f} SE; E[Y2]==Var[Y1] exact")


def check_hypoexp(quick=False, seed=1):
    draws = 20_000 if quick else 100_000
    rng = np.random.default_rng((seed, 102))
    r = np.array([20.0, 55.0, 130.0, 260.0, 480.0])
    gains_per_ap = _kernels_py.singleslope_pathloss(r, 3.76)
    rates_vec = 1.0 / gains_per_ap
    samples = (rng.standard_exponential((draws, r.size)) * gains_per_ap).sum(axis=1)
    stat = kstest(samples, lambda x: channel.hypoexp_cdf(rates_vec, x)).statistic
    ok = stat < 0.01 if not quick else stat < 0.02
    return CheckResult("hypoexp-exactness", ok, f"KS distance {stat:.4f}")


def check_conditional_moments(quick=False, seed=1):
    draws = 50_000 if quick else 400_000
    rng = np.random.default_rng((seed, 103))
    region = Disk(500.0)
    real = geometry.sample_uniform_fixed(region, 40, 3, rng)
    profile = large_scale_profile(real, [(0.0, 0.0)], PropagationModel(SingleSlope(3.76)))
    mean_cf, var_cf = channel.conditional_moments(profile, 0)
    gains = np.empty(draws)
    for t in range(draws):
        powers = channel.draw_gamma_sums(real.n_aps, 3, rng)
        gains[t] = channel.channel_gain(profile, powers, 0)
    mean_err = abs(gains.mean() - mean_cf) / mean_cf
    var_err = abs(gains.var(ddof=1) - var_cf) / var_cf
    ok = mean_err < 0.01 and var_err < 0.03
    return CheckResult("conditional-moments", ok, f"mean err {mean_err:.3%}, var err {var_err:.3%}")


def check_mmse_orthogonality(quick=False, seed=1):
    draws = 20_000 if quick else 100_000
    rng = np.random.default_rng((seed, 104))
    beta = np.array([[0.8], [0.05], [0.001]])
    scenario = rates.RateScenario(n_users=1, tau_c=100, pilot_power_mw=10.0, fading_draws=10)
    gamma = rates.mmse_gamma(beta, scenario)
    h = channel.draw_fading(3 * draws, 1, rng).reshape(3, draws)
    w = channel.draw_fading(3 * draws, 1, rng).reshape(3, draws)
    bb = np.repeat(beta, draws, axis=1)
    ghat = rates.mmse_estimate(bb, scenario, h, w)
    err = np.sqrt(bb) * h - ghat
    corr = (ghat * err.conj()).mean(axis=1)
    corr_se = np.abs(ghat * err.conj()).std(axis=1) / sqrt(draws)
    power_err = np.abs((np.abs(ghat) ** 2).mean(axis=1) - gamma[:, 0]) / gamma[:, 0]
    resid_err = np.abs((np.abs(err) ** 2).mean(axis=1) - (beta - gamma)[:, 0]) / (beta - gamma)[:, 0]
    ok = (np.abs(corr) < 3 * corr_se).all() and power_err.max() < 0.02 and resid_err.max() < 0.02
    return CheckResult(
        "mmse-orthogonality",
        bool(ok),
        f"max |corr| {np.abs(corr).max():.2e}, E|ghat|^2 err {power_err.max():.3%}",
    )


def check_metric_bounds(quick=False, seed=1):
    trials = 2_000 if quick else 10_000
    rng = np.random.default_rng((seed, 105))
    region = Disk(500.0)
    model = PropagationModel(SingleSlope(3.76))
    worst = 0.0
    for n_per_ap in (1, 4):
        for _ in range(trials // 2):
            real = geometry.sample_ppp(region, 1e-4, n_per_ap, rng)
            if real.n_aps == 0:
                continue
            users = [(0.0, 0.0), (70.0, 0.0)]
            profile = large_scale_profile(real, users, model)
            xch = metrics.x_ch(profile, 0)
            xfp = metrics.x_fp(profile, 0, 1)
            var_expr, bound = metrics.var_bound_check(profile, 0, 1)
            if not (0 < xch <= 1 / n_per_ap and 0 <= xfp <= 1 / n_per_ap and var_expr <= bound * (1 + 1e-12)):
                return CheckResult("metric-bounds", False, f"violation at N={n_per_ap}")
            worst = max(worst, xch * n_per_ap, xfp * n_per_ap)
    return CheckResult("metric-bounds", True, f"max N*X over {trials} profiles: {worst:.4f}")


def check_hardening_asymptote(quick=False, seed=1):
    exact = analytics.hardening_ratio(1e-3, 1, 3.76, 1e5)
    limit = analytics.hardening_ratio(1e-3, 1, 3.76, 1e5, asymptotic=True)
    ok = abs(exact - limit) < 1e-3
    detail = f"|finite - limit| = {abs(exact - limit):.2e}"
    for radius in (1e3, 1e4, 1e5):
        if analytics.hardening_ratio(1e-3, 1, 2.0, radius) <= 0:
            return CheckResult("hardening-asymptote", False, "alpha=2 ratio not positive")
    return CheckResult("hardening-asymptote", ok, detail)


def check_cdf_properties(quick=False, seed=1):
    cdf = metrics.cdf_estimate(np.arange(1.0, 101.0))
    galois = all(cdf.query(cdf.quantile(p)) >= p for p in np.linspace(0.01, 1.0, 25))
    ok = (
        cdf.query(2.0) == 0.02
        and cdf.quantile(0.05) == 5.0
        and galois
        and cdf.query(-1e30) == 0.0
        and cdf.query(1e30) == 1.0
    )
    return CheckResult("cdf-properties", ok, "query/quantile Galois relation holds")


def check_rate_ordering(quick=False, seed=1):
    reals = 6 if quick else 20
    draws = 200 if quick else 400
    rng = np.random.default_rng((seed, 106))
    region = geometry.Square(1000.0)
    from cfmimo.propagation import ThreeSlope, constant_c

    law = ThreeSlope(10.0, 50.0, constant_c(1900.0, 15.0, 1.65))
    scenario = rates.RateScenario(n_users=8, tau_c=200, fading_draws=draws)
    ok = True
    margin = -np.inf
    for _ in range(reals):
        real = geometry.sample_uniform_fixed(region, 40, 1, rng)
        users = region.sample(8, rng)
        profile = large_scale_profile(real, users, PropagationModel(law))
        beta = profile.per_antenna()
        gamma = rates.mmse_gamma(beta, scenario)
        uatf = rates.ul_rate_uatf(beta, gamma, scenario)
        mc = rates.ul_rates_mc(beta, scenario, rng)
        if not (uatf <= mc.perfect + 3 * mc.perfect_se).all():
            ok = False
        margin = max(margin, float((uatf - mc.perfect).max()))
        dl = rates.dl_rates_mc(beta, scenario, rng)
        powers = rates.dl_power_alloc(gamma, scenario.dl_power_mw)
        if abs(powers.sum(axis=0) - scenario.dl_power_mw).max() > 1e-9:
            ok = False
        dl_uatf = rates.dl_rate_uatf(beta, gamma, powers)
        if np.median(dl_uatf) > np.median(dl.perfect):
            ok = False
    return CheckResult("rate-bound-ordering", ok, f"max uatf-perfect margin {margin:.3f} b/s/Hz")


def check_backend_equivalence(quick=False, seed=1):
    rng = np.random.default_rng((seed, 107))
    r = rng.uniform(0, 600, 5_000)
    bk = rng.uniform(1e-9, 1.0, 5_000)
    bj = rng.uniform(1e-9, 1.0, 5_000)
    pairs = [
        (backend.singleslope_sums(r, 3.76), _kernels_py.singleslope_sums(r, 3.76)),
        (backend.threeslope_sums(r, 10.0, 50.0, 1.0), _kernels_py.threeslope_sums(r, 10.0, 50.0, 1.0)),
        (backend.cross_sums(bk, bj), _kernels_py.cross_sums(bk, bj)),
        ((backend.weighted_gain(bk, bj),), (_kernels_py.weighted_gain(bk, bj),)),
    ]
    worst = max(
        abs(a - b) / max(abs(b), 1e-300) for got, want in pairs for a, b in zip(got, want)
    )
    ok = worst < 1e-9
    return CheckResult("backend-equivalence", ok, f"backend={backend.BACKEND}, max rel diff {worst:.1e}")


def check_reproducibility(quick=False, seed=1):
    cfg = preset("fig4", seed=seed)
    cfg = cfg.with_overrides({"trials": 64 if quick else 256})
    one = run(replace_workers(cfg, 1))
    two = run(replace_workers(cfg, 2))
    ok = one.rows == two.rows
    return CheckResult("worker-determinism", ok, f"{len(one.rows)} rows identical across worker counts")


def replace_workers(cfg, workers):
    from dataclasses import replace

    return replace(cfg, workers=workers)


ALL_CHECKS = (
    check_ppp_counts,
    check_lemma1,
    check_lemma2,
    check_hypoexp,
    check_conditional_moments,
    check_mmse_orthogonality,
    check_metric_bounds,
    check_hardening_asymptote,
    check_cdf_properties,
    check_rate_ordering,
    check_backend_equivalence,
    check_reproducibility,
)


def run_all(quick=False, seed=1, report=print):
    results = []
    for fn in ALL_CHECKS:
        result = fn(quick=quick, seed=seed)
        results.append(result)
        marker = " ok " if result.passed else "FAIL"
        report(f"[{marker}] {result.name}: {result.detail}")
    return results
