import numpy as np
import pytest
from scipy.special import exp1

from cfmimo.errors import InsufficientDrawsError
from cfmimo.geometry import Square, sample_uniform_fixed
from cfmimo.propagation import PropagationModel, ThreeSlope, constant_c, large_scale_profile
from cfmimo.rates import (
    RateScenario,
    dl_power_alloc,
    dl_rate_general,
    dl_rate_uatf,
    dl_rates_mc,
    mmse_estimate,
    mmse_gamma,
    ul_rate_general,
    ul_rate_perfect_csi,
    ul_rate_uatf,
    ul_rates_mc,
)


def scenario_k1(draws=2000, pilot_mw=1.0):
    return RateScenario(n_users=1, tau_c=100, pilot_power_mw=pilot_mw, data_power_mw=1.0,
                        dl_power_mw=1.0, fading_draws=draws)


def test_scenario_invariants():
    s = RateScenario(n_users=20)
    assert s.tau_p == 20 and s.tau_d == 480
    with pytest.raises(ValueError):
        RateScenario(n_users=20, tau_p=10)
    with pytest.raises(ValueError):
        RateScenario(n_users=20, tau_c=20)
    with pytest.raises(ValueError):
        RateScenario(n_users=2, data_power_mw=0.0)


def test_gamma_examples():
    beta = np.array([[1.0]])
    assert mmse_gamma(beta, scenario_k1())[0, 0] == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    b = rng.uniform(1e-6, 1.0, (30, 4))
    g = mmse_gamma(b, RateScenario(n_users=4))
    assert (g < b).all() and (g > 0).all()
    # gamma/beta increases with pilot power on a grid
    ratios = [
        (mmse_gamma(b, RateScenario(n_users=4, pilot_power_mw=p)) / b).mean()
        for p in (0.1, 1.0, 10.0, 1000.0)
    ]
    assert all(x < y for x, y in zip(ratios, ratios[1:]))


def test_mmse_estimate_statistics():
    rng = np.random.default_rng(1)
    beta = np.array([[0.8], [0.05], [0.002]])
    scen = scenario_k1(pilot_mw=5.0)
    gamma = mmse_gamma(beta, scen)
    draws = 100_000
    b = np.repeat(beta, draws, axis=1)
    h = np.sqrt(0.5) * (rng.standard_normal((3, draws)) + 1j * rng.standard_normal((3, draws)))
    w = np.sqrt(0.5) * (rng.standard_normal((3, draws)) + 1j * rng.standard_normal((3, draws)))
    ghat = mmse_estimate(b, scen, h, w)
    err = np.sqrt(b) * h - ghat
    power = (np.abs(ghat) ** 2).mean(axis=1)
    resid = (np.abs(err) ** 2).mean(axis=1)
    np.testing.assert_allclose(power, gamma[:, 0], rtol=0.01)
    np.testing.assert_allclose(resid, beta[:, 0] - gamma[:, 0], rtol=0.01)
    corr = (ghat * err.conj()).mean(axis=1)
    corr_se = np.abs(ghat * err.conj()).std(axis=1, ddof=1) / np.sqrt(draws)
    assert (np.abs(corr) < 3 * corr_se).all()


def test_mmse_estimator_consistency_at_high_pilot_power():
    rng = np.random.default_rng(2)
    beta = np.array([[0.3], [0.01]])
    scen = scenario_k1(pilot_mw=1e9)
    h = np.sqrt(0.5) * (rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1)))
    w = np.sqrt(0.5) * (rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1)))
    ghat = mmse_estimate(beta, scen, h, w)
    np.testing.assert_allclose(ghat, np.sqrt(beta) * h, rtol=1e-3)
    assert mmse_gamma(beta, scen) == pytest.approx(beta, rel=1e-6)


def test_ul_uatf_single_link():
    beta = np.array([[1.0]])
    scen = scenario_k1()
    gamma = np.array([[1.0]])  # beta = gamma = 1 limit
    assert ul_rate_uatf(beta, gamma, scen, user=0) == pytest.approx(np.log2(1.5))


def test_ul_rates_deterministic_given_coefficients():
    beta = np.array([[0.5, 0.1], [0.2, 0.4]])
    scen = RateScenario(n_users=2, tau_c=50, fading_draws=10)
    gamma = mmse_gamma(beta, scen)
    a = ul_rate_uatf(beta, gamma, scen)
    b = ul_rate_uatf(beta, gamma, scen)
    np.testing.assert_array_equal(a, b)


def test_ul_perfect_csi_single_antenna_oracle():
    # K=1, M=1, p=1, beta=1: E[log2(1+|h|^2)] = e*E1(1)/ln 2
    expect = float(np.e * exp1(1.0) / np.log(2.0))
    assert expect == pytest.approx(0.86035, abs=1e-4)
    beta = np.array([[1.0]])
    rng = np.random.default_rng(3)
    rate, se = ul_rate_perfect_csi(beta, scenario_k1(draws=200_000), rng, user=0)
    assert rate == pytest.approx(expect, abs=4 * se)
    assert se < 0.01


def test_ul_general_converges_to_perfect_csi():
    rng = np.random.default_rng(4)
    beta = np.random.default_rng(0).uniform(0.05, 1.0, (6, 3))
    scen = RateScenario(n_users=3, tau_c=50, pilot_power_mw=1e9, fading_draws=4000)
    mc = ul_rates_mc(beta, scen, rng)
    np.testing.assert_allclose(mc.general, mc.perfect, rtol=0.02)


def test_ul_general_insufficient_draws_signal():
    beta = np.array([[1.0]])
    rng = np.random.default_rng(5)
    with pytest.raises(InsufficientDrawsError):
        ul_rate_general(beta, scenario_k1(draws=16), rng, user=0, max_rel_stderr=1e-4)


def test_dl_power_alloc_examples():
    gamma = np.full((4, 1), 0.37)
    np.testing.assert_allclose(dl_power_alloc(gamma, 100.0)[:, 0], 25.0)
    gamma2 = np.array([[3.0], [1.0]])
    np.testing.assert_allclose(dl_power_alloc(gamma2, 100.0)[:, 0], [75.0, 25.0])
    rng = np.random.default_rng(6)
    g = rng.uniform(1e-6, 1.0, (50, 7))
    powers = dl_power_alloc(g, 100.0)
    np.testing.assert_allclose(powers.sum(axis=0), 100.0, rtol=1e-12)
    assert (np.argsort(powers, axis=0) == np.argsort(g, axis=0)).all()
    with pytest.raises(ValueError):
        dl_power_alloc(g, 0.0)


def test_dl_uatf_examples():
    beta = np.array([[1.0]])
    gamma = np.array([[1.0]])
    powers = np.array([[1.0]])
    assert dl_rate_uatf(beta, gamma, powers, user=0) == pytest.approx(np.log2(1.5))
    assert dl_rate_uatf(beta, gamma, np.zeros((1, 1)), user=0) == 0.0


def test_dl_general_penalty_vanishes_with_long_blocks():
    rng = np.random.default_rng(7)
    beta = np.random.default_rng(1).uniform(0.05, 1.0, (8, 3))
    scen_short = RateScenario(n_users=3, tau_c=6, fading_draws=3000)
    scen_long = RateScenario(n_users=3, tau_c=100_000, fading_draws=3000)
    short = dl_rates_mc(beta, scen_short, np.random.default_rng(7))
    long_ = dl_rates_mc(beta, scen_long, np.random.default_rng(7))
    assert (long_.penalty < short.penalty).all()
    np.testing.assert_allclose(long_.general, long_.perfect, atol=0.05)
    assert (short.general >= 0).all()


def test_dl_general_clamp_flag():
    # tiny tau_d with strong interference can push the bound negative
    rng = np.random.default_rng(8)
    beta = np.full((2, 2), 0.5)
    scen = RateScenario(n_users=2, tau_c=3, pilot_power_mw=0.01, fading_draws=2000)
    mc = dl_rates_mc(beta, scen, rng)
    assert (mc.general >= 0).all()
    assert mc.clamped.dtype == bool


def test_bound_ordering_table_scale_small():
    # desk-scale version of the reference scenario orderings
    rng = np.random.default_rng(9)
    region = Square(1000.0)
    model = PropagationModel(ThreeSlope(10.0, 50.0, constant_c(1900.0, 15.0, 1.65)))
    scen = RateScenario(n_users=10, tau_c=200, fading_draws=300)
    uatf_all, gen_all, perf_all, dl_uatf_all, dl_gen_all, dl_perf_all = ([] for _ in range(6))
    for _ in range(12):
        real = sample_uniform_fixed(region, 50, 1, rng)
        users = region.sample(10, rng)
        profile = large_scale_profile(real, users, model)
        beta = profile.per_antenna()
        gamma = mmse_gamma(beta, scen)
        mc = ul_rates_mc(beta, scen, rng)
        uatf_all.extend(ul_rate_uatf(beta, gamma, scen))
        gen_all.extend(mc.general)
        perf_all.extend(mc.perfect + 3 * mc.perfect_se)
        dl = dl_rates_mc(beta, scen, rng)
        powers = dl_power_alloc(gamma, scen.dl_power_mw)
        dl_uatf_all.extend(dl_rate_uatf(beta, gamma, powers))
        dl_gen_all.extend(dl.general)
        dl_perf_all.extend(dl.perfect)
    uatf_all, gen_all, perf_all = map(np.asarray, (uatf_all, gen_all, perf_all))
    assert (uatf_all <= perf_all).all()
    assert (uatf_all < gen_all).mean() > 0.95
    assert np.median(dl_uatf_all) < np.median(dl_gen_all) <= np.median(dl_perf_all)


def test_dl_rate_general_wrapper():
    beta = np.random.default_rng(2).uniform(0.05, 1.0, (6, 3))
    scen = RateScenario(n_users=3, tau_c=100, fading_draws=500)
    rate, se = dl_rate_general(beta, scen, np.random.default_rng(10), user=1)
    assert np.isfinite(rate) and rate >= 0 and se > 0
