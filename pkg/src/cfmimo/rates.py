"""MMSE channel estimation and achievable-rate bounds under MR processing.

Four bounds per direction are covered: the closed-form use-and-then-forget
(UatF) bound, the general Monte-Carlo bound that does not rely on channel
hardening, and the perfect-CSI reference obtained from the general bound in
the appropriate limit. Powers are in mW against unit noise variance (the
noise normalization is folded into the link-budget constant).
"""

from dataclasses import dataclass, field

import numpy as np

from cfmimo.errors import InsufficientDrawsError

_MC_CHUNK = 200


@dataclass(frozen=True)
class RateScenario:
    """User count, coherence-block split, and per-user powers (Table-style setup)."""

    n_users: int
    tau_c: int = 500
    tau_p: int | None = None
    pilot_power_mw: float = 100.0
    data_power_mw: float = 100.0
    dl_power_mw: float = 100.0
    fading_draws: int = 1000

    def __post_init__(self):
        if self.tau_p is None:
            # orthogonal pilots: one pilot symbol per user
            object.__setattr__(self, "tau_p", self.n_users)
        if self.tau_p != self.n_users:
            raise ValueError("orthogonal pilots require tau_p == n_users")
        if self.tau_d < 1:
            raise ValueError("coherence block leaves no room for data")
        if min(self.pilot_power_mw, self.data_power_mw, self.dl_power_mw) <= 0:
            raise ValueError("powers must be positive")
        if self.fading_draws < 2:
            raise ValueError("need at least two fading draws")

    @property
    def tau_d(self):
        return self.tau_c - self.tau_p


def _beta_matrix(profile_or_beta):
    if hasattr(profile_or_beta, "per_antenna"):
        return profile_or_beta.per_antenna()
    return np.asarray(profile_or_beta, dtype=np.float64)


def mmse_gamma(profile_or_beta, scenario):
    """gamma[m, k] = E|ghat_mk|^2 = tau_p rho beta^2 / (tau_p rho beta + 1)."""
    beta = _beta_matrix(profile_or_beta)
    snr = scenario.tau_p * scenario.pilot_power_mw * beta
    return snr * beta / (snr + 1)


def mmse_estimate(profile_or_beta, scenario, h, w):
    """Per-antenna MMSE estimates from one fading draw h and noise draw w.

    The processed pilot observation is sqrt(tau_p rho) g + w; the estimate
    scales it so that E|ghat|^2 = gamma and the error g - ghat (variance
    beta - gamma) is uncorrelated with ghat.
    """
    beta = _beta_matrix(profile_or_beta)
    g = np.sqrt(beta) * h
    amp = np.sqrt(scenario.tau_p * scenario.pilot_power_mw)
    scale = amp * beta / (scenario.tau_p * scenario.pilot_power_mw * beta + 1)
    return scale * (amp * g + w)


def ul_rate_uatf(profile_or_beta, gamma, scenario, user=None):
    """Closed-form uplink UatF rate(s) in bits/s/Hz.

    log2(1 + p (sum_m gamma_mk)^2 / (sum_j p sum_m gamma_mk beta_mj + sum_m gamma_mk)).
    """
    beta = _beta_matrix(profile_or_beta)
    p = scenario.data_power_mw
    gsum = gamma.sum(axis=0)
    interference = p * np.einsum("mk,mj->k", gamma, beta)
    rates = np.log2(1 + p * gsum**2 / (interference + gsum))
    return rates if user is None else float(rates[user])


def dl_power_alloc(gamma, dl_power_mw, user=None):
    """Per-AP downlink powers p_mk = q gamma_mk / sum_m' gamma_m'k; columns sum to q."""
    if dl_power_mw <= 0:
        raise ValueError("downlink power must be positive")
    powers = dl_power_mw * gamma / gamma.sum(axis=0, keepdims=True)
    return powers if user is None else powers[:, user]


def dl_rate_uatf(profile_or_beta, gamma, powers, user=None):
    """Closed-form downlink UatF rate(s) in bits/s/Hz."""
    beta = _beta_matrix(profile_or_beta)
    num = np.sqrt(powers * gamma).sum(axis=0) ** 2
    den = np.einsum("mj,mk->k", powers, beta) + 1.0
    rates = np.log2(1 + num / den)
    return rates if user is None else float(rates[user])


@dataclass
class UplinkMonteCarlo:
    general: np.ndarray
    general_se: np.ndarray
    perfect: np.ndarray
    perfect_se: np.ndarray


@dataclass
class DownlinkMonteCarlo:
    general: np.ndarray
    general_se: np.ndarray
    perfect: np.ndarray
    perfect_se: np.ndarray
    penalty: np.ndarray
    clamped: np.ndarray = field(default=None)


def ul_rates_mc(profile_or_beta, scenario, rng, draws=None):
    """Uplink general bound and perfect-CSI reference over shared fading draws.

    MR combining a_k = ghat_k (or g_k for perfect CSI); the general bound's
    noise term carries the average estimation-error power sum_j p (beta - gamma).
    """
    beta = _beta_matrix(profile_or_beta)
    m, k = beta.shape
    draws = scenario.fading_draws if draws is None else draws
    p = scenario.data_power_mw
    gamma = mmse_gamma(beta, scenario)
    err_noise = p * (beta - gamma).sum(axis=1) + 1.0  # per antenna
    amp = np.sqrt(scenario.tau_p * scenario.pilot_power_mw)
    scale = amp * beta / (scenario.tau_p * scenario.pilot_power_mw * beta + 1)
    sqb = np.sqrt(beta)

    gen = np.zeros((draws, k))
    pcsi = np.zeros((draws, k))
    done = 0
    while done < draws:
        n = min(_MC_CHUNK, draws - done)
        h = np.sqrt(0.5) * (rng.standard_normal((n, m, k)) + 1j * rng.standard_normal((n, m, k)))
        w = np.sqrt(0.5) * (rng.standard_normal((n, m, k)) + 1j * rng.standard_normal((n, m, k)))
        g = sqb[None] * h
        ghat = scale[None] * (amp * g + w)

        inner = np.einsum("nmk,nmj->nkj", ghat.conj(), ghat)
        signal = np.abs(np.einsum("nkk->nk", inner)) ** 2
        interf = (np.abs(inner) ** 2).sum(axis=2) - signal
        noise = np.einsum("nmk,m->nk", np.abs(ghat) ** 2, err_noise)
        gen[done : done + n] = np.log2(1 + p * signal / (p * interf + noise))

        inner_p = np.einsum("nmk,nmj->nkj", g.conj(), g)
        signal_p = np.abs(np.einsum("nkk->nk", inner_p)) ** 2
        interf_p = (np.abs(inner_p) ** 2).sum(axis=2) - signal_p
        noise_p = (np.abs(g) ** 2).sum(axis=1)
        pcsi[done : done + n] = np.log2(1 + p * signal_p / (p * interf_p + noise_p))
        done += n

    return UplinkMonteCarlo(
        general=gen.mean(axis=0),
        general_se=gen.std(axis=0, ddof=1) / np.sqrt(draws),
        perfect=pcsi.mean(axis=0),
        perfect_se=pcsi.std(axis=0, ddof=1) / np.sqrt(draws),
    )


def dl_rates_mc(profile_or_beta, scenario, rng, draws=None):
    """Downlink general bound, its hardening penalty, and the perfect-CSI reference.

    MR precoding a_k = ghat_k sqrt(p_mk / gamma_mk) with the proportional
    power allocation. The general rate is the perfect-CSI term minus
    (1/tau_d) sum_j log2(1 + tau_d Var[a_j^H g_k]), clamped at zero; clamping
    is flagged per user. Each Var[...] is a Monte-Carlo variance over the
    shared draws.
    """
    beta = _beta_matrix(profile_or_beta)
    m, k = beta.shape
    draws = scenario.fading_draws if draws is None else draws
    gamma = mmse_gamma(beta, scenario)
    powers = dl_power_alloc(gamma, scenario.dl_power_mw)
    pre_scale = np.sqrt(powers / gamma)
    amp = np.sqrt(scenario.tau_p * scenario.pilot_power_mw)
    est_scale = amp * beta / (scenario.tau_p * scenario.pilot_power_mw * beta + 1)
    sqb = np.sqrt(beta)

    first = np.zeros((draws, k))
    cross_sum = np.zeros((k, k), dtype=complex)  # E[a_j^H g_k]
    cross_sq = np.zeros((k, k))  # E|a_j^H g_k|^2
    done = 0
    while done < draws:
        n = min(_MC_CHUNK, draws - done)
        h = np.sqrt(0.5) * (rng.standard_normal((n, m, k)) + 1j * rng.standard_normal((n, m, k)))
        w = np.sqrt(0.5) * (rng.standard_normal((n, m, k)) + 1j * rng.standard_normal((n, m, k)))
        g = sqb[None] * h
        precoders = (est_scale * pre_scale)[None] * (amp * g + w)
        cross = np.einsum("nmj,nmk->njk", precoders.conj(), g)  # a_j^H g_k
        signal = np.abs(np.einsum("nkk->nk", cross)) ** 2
        interf = (np.abs(cross) ** 2).sum(axis=1) - signal
        first[done : done + n] = np.log2(1 + signal / (interf + 1.0))
        cross_sum += cross.sum(axis=0)
        cross_sq += (np.abs(cross) ** 2).sum(axis=0)
        done += n

    var_jk = cross_sq / draws - np.abs(cross_sum / draws) ** 2
    penalty = np.log2(1 + scenario.tau_d * np.maximum(var_jk, 0.0)).sum(axis=0) / scenario.tau_d
    perfect = first.mean(axis=0)
    perfect_se = first.std(axis=0, ddof=1) / np.sqrt(draws)
    general = perfect - penalty
    clamped = general < 0
    return DownlinkMonteCarlo(
        general=np.maximum(general, 0.0),
        general_se=perfect_se,
        perfect=perfect,
        perfect_se=perfect_se,
        penalty=penalty,
        clamped=clamped,
    )


def _check_se(rate, se, max_rel_stderr):
    if max_rel_stderr is not None and se > max_rel_stderr * max(abs(rate), 1e-12):
        raise InsufficientDrawsError(
            f"standard error {se:.3g} exceeds {max_rel_stderr:.3g} of the estimate {rate:.3g}"
        )


def ul_rate_general(profile_or_beta, scenario, rng, user=None, draws=None, max_rel_stderr=None):
    """General uplink bound; returns (rate, stderr) for one user or arrays for all."""
    mc = ul_rates_mc(profile_or_beta, scenario, rng, draws)
    if user is None:
        return mc.general, mc.general_se
    rate, se = float(mc.general[user]), float(mc.general_se[user])
    _check_se(rate, se, max_rel_stderr)
    return rate, se


def ul_rate_perfect_csi(profile_or_beta, scenario, rng, user=None, draws=None):
    """Perfect-CSI uplink reference (the pilot-power -> infinity limit)."""
    mc = ul_rates_mc(profile_or_beta, scenario, rng, draws)
    if user is None:
        return mc.perfect, mc.perfect_se
    return float(mc.perfect[user]), float(mc.perfect_se[user])


def dl_rate_general(profile_or_beta, scenario, rng, user=None, draws=None, max_rel_stderr=None):
    """General downlink bound; returns (rate, stderr) like ul_rate_general."""
    mc = dl_rates_mc(profile_or_beta, scenario, rng, draws)
    if user is None:
        return mc.general, mc.general_se
    rate, se = float(mc.general[user]), float(mc.general_se[user])
    _check_se(rate, se, max_rel_stderr)
    return rate, se
