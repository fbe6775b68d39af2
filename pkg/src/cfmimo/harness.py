"""Experiment orchestration: configs, presets, parallel trials, CSV output.

Determinism contract: every Monte-Carlo trial draws from its own generator
seeded by (master seed, param-set index, trial index), so results are
bit-identical for a fixed (config, seed) regardless of the worker count.
Output floats are serialized with shortest round-trip repr, making CSV
bytes reproducible as well.
"""

import hashlib
import json
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from math import sqrt

import numpy as np

import cfmimo
from cfmimo import analytics, backend, geometry, rates
from cfmimo.errors import ConfigError, TrialError
from cfmimo.geometry import Disk, Square
from cfmimo.propagation import constant_c

EXPERIMENTS = (
    "channel-gain-cdf",
    "hardening-cdf",
    "favorable-cdf",
    "rates-ul",
    "rates-dl",
    "moments-check",
)

_METRIC_CHUNK = 256  # trials per worker task; fixed so results never depend on worker count
_RATES_CHUNK = 4
_MAX_EMPTY_RETRIES = 10_000


@dataclass(frozen=True)
class ParamSet:
    set_id: str
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if "," in self.set_id or "\n" in self.set_id:
            raise ConfigError("param set ids must not contain commas or newlines")


@dataclass(frozen=True)
class GridSpec:
    """Output grid: 'log' (log-uniform), 'db' (uniform in dB), or 'linear'."""

    kind: str = "log"
    lo: float = 1e-6
    hi: float = 1.0
    points: int = 200

    def __post_init__(self):
        if self.kind not in ("log", "db", "linear"):
            raise ConfigError(f"unknown grid kind {self.kind!r}")
        if self.points < 2 or not self.lo < self.hi:
            raise ConfigError("grid needs lo < hi and at least two points")

    def values(self):
        if self.kind == "log":
            return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)
        if self.kind == "db":
            return 10 ** (np.linspace(self.lo, self.hi, self.points) / 10)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    name: str = ""
    # geometry
    region_shape: str = "disk"
    region_size: float = 500.0
    intensity: float | None = None  # APs per m^2
    antenna_density: float | None = None  # antennas per m^2; per-set intensity = mu / N
    fixed_aps: int | None = None
    n_per_ap: int = 1
    # propagation
    pathloss: str = "single"  # single | three
    alpha: float = 3.76
    d0: float = 10.0
    d1: float = 50.0
    c_db: float | str = 0.0  # dB, or "auto" to derive from f_mhz / antenna heights
    shadow_sigma_db: float | None = None
    shadow_cutoff_m: float = 50.0
    # metric params
    user_distance: float = 70.0
    grid: GridSpec = field(default_factory=GridSpec)
    trials: int = 10_000
    # rate scenario
    n_users: int = 20
    tau_c: int = 500
    tau_p: int | None = None
    pilot_power_mw: float = 100.0
    data_power_mw: float = 100.0
    dl_power_mw: float = 100.0
    f_mhz: float = 1900.0
    h_ap_m: float = 15.0
    h_user_m: float = 1.65
    realizations: int = 300
    fading_draws: int = 1000
    # run control
    seed: int = 1
    workers: int = 1
    param_sets: tuple = ()
    required: tuple = ()  # fields that must be overridden before running

    def region(self):
        if self.region_shape == "disk":
            return Disk(self.region_size)
        if self.region_shape == "square":
            return Square(self.region_size)
        raise ConfigError(f"unknown region shape {self.region_shape!r}")

    def with_overrides(self, overrides):
        if not overrides:
            return self
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(self, **overrides)
        return replace(cfg, required=tuple(k for k in cfg.required if k not in overrides))

    def resolved_sets(self):
        return self.param_sets or (ParamSet("default"),)

    def effective_intensity(self):
        if self.intensity is not None:
            return self.intensity
        if self.antenna_density is not None:
            return self.antenna_density / self.n_per_ap
        return None

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        self.region()
        if self.required:
            raise ConfigError(
                f"preset {self.name or self.experiment!r} needs explicit values for "
                f"{', '.join(self.required)} (paper-unspecified); pass overrides"
            )
        if self.pathloss not in ("single", "three"):
            raise ConfigError(f"unknown pathloss law {self.pathloss!r}")
        for pset in self.resolved_sets():
            eff = self.with_overrides(pset.overrides)
            if eff.experiment in ("rates-ul", "rates-dl"):
                if eff.fixed_aps is None or eff.fixed_aps < 1:
                    raise ConfigError("rate experiments need fixed_aps >= 1")
                if eff.realizations < 1 or eff.fading_draws < 2:
                    raise ConfigError("rate experiments need realizations >= 1 and fading_draws >= 2")
            else:
                if eff.trials < 1:
                    raise ConfigError("trials must be >= 1")
                lam = eff.effective_intensity()
                if eff.fixed_aps is not None:
                    if eff.fixed_aps < 1:
                        raise ConfigError("fixed_aps must be >= 1 for metric experiments")
                elif lam is None or lam <= 0:
                    raise ConfigError("metric experiments need a positive intensity or fixed_aps")
            if eff.experiment == "moments-check" and (eff.pathloss != "single" or eff.region_shape != "disk"):
                raise ConfigError("moments-check compares against the single-slope disk closed forms")
            if eff.experiment == "favorable-cdf" and eff.user_distance <= 0:
                raise ConfigError("favorable-cdf needs a positive inter-user distance")
        return self

    def canonical(self):
        data = asdict(self)
        data["param_sets"] = [(p.set_id, dict(sorted(p.overrides.items()))) for p in self.resolved_sets()]
        data.pop("workers")  # worker count must not affect results or their hash
        return data

    def sha256(self):
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


@dataclass
class ResultTable:
    """Rows of (param_set_id, x, value, stderr) plus run metadata.

    Volatile metadata (wall time) is kept on the object but never written to
    CSV, so identical (config, seed) runs produce identical bytes.
    """

    experiment: str
    name: str
    rows: list
    metadata: dict
    wall_time_s: float = 0.0
    samples: dict = field(default_factory=dict, repr=False)
    per_user: dict = field(default_factory=dict, repr=False)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in self.metadata.items():
                fh.write(f"# {key}={value}\n")
            fh.write("experiment,param_set_id,x,value,stderr\n")
            for set_id, x, value, stderr in self.rows:
                tail = "" if stderr is None else repr(float(stderr))
                fh.write(f"{self.experiment},{set_id},{repr(float(x))},{repr(float(value))},{tail}\n")
        return path


def trial_rng(seed, set_index, trial_index):
    """Counter-split stream: one generator per (param set, trial)."""
    return np.random.default_rng((seed, set_index, trial_index))


def _draw_deployment(cfg, rng):
    """Positions for one trial; resamples empty PPP draws and counts rejections."""
    region = cfg.region()
    if cfg.fixed_aps is not None:
        return region.sample(cfg.fixed_aps, rng), 0
    mu = cfg.effective_intensity() * region.area()
    rejections = 0
    n = int(rng.poisson(mu))
    while n == 0:
        rejections += 1
        if rejections > _MAX_EMPTY_RETRIES:
            raise ConfigError(f"exceeded {_MAX_EMPTY_RETRIES} empty-deployment resamples (E[L]={mu:.3g})")
        n = int(rng.poisson(mu))
    return region.sample(n, rng), rejections


def _beta_from_distances(cfg, r, rng):
    """Per-AP coefficients for one user; draws shadowing when configured."""
    if cfg.pathloss == "single":
        beta = backend.singleslope_pathloss(r, cfg.alpha)
    else:
        beta = backend.threeslope_pathloss(r, cfg.d0, cfg.d1, 10 ** (_c_db(cfg) / 10))
    if cfg.shadow_sigma_db is not None:
        z = rng.standard_normal(r.shape[0])
        beta = beta * np.where(r > cfg.shadow_cutoff_m, 10 ** (cfg.shadow_sigma_db * z / 10), 1.0)
    return beta


def _c_db(cfg):
    if cfg.c_db == "auto":
        return constant_c(cfg.f_mhz, cfg.h_ap_m, cfg.h_user_m)
    return float(cfg.c_db)


def _metric_trial(cfg, rng):
    """One metric draw; returns (value(s), rejections). Draw order is fixed:
    deployment, user direction, shadowing (user k then j), fading powers."""
    positions, rejections = _draw_deployment(cfg, rng)
    r = np.hypot(positions[:, 0], positions[:, 1])

    if cfg.experiment == "hardening-cdf":
        if cfg.shadow_sigma_db is None and cfg.pathloss == "single":
            s1, s2 = backend.singleslope_sums(r, cfg.alpha)
        elif cfg.shadow_sigma_db is None:
            s1, s2 = backend.threeslope_sums(r, cfg.d0, cfg.d1, 10 ** (_c_db(cfg) / 10))
        else:
            s1, s2 = backend.beta_sums(_beta_from_distances(cfg, r, rng))
        return s2 / (cfg.n_per_ap * s1 * s1), rejections

    if cfg.experiment == "favorable-cdf":
        phi = 2 * np.pi * rng.random()
        other = cfg.user_distance * np.array([np.cos(phi), np.sin(phi)])
        rj = np.hypot(positions[:, 0] - other[0], positions[:, 1] - other[1])
        beta_k = _beta_from_distances(cfg, r, rng)
        beta_j = _beta_from_distances(cfg, rj, rng)
        sk, sj, skj = backend.cross_sums(beta_k, beta_j)
        return skj / (cfg.n_per_ap * sk * sj), rejections

    if cfg.experiment == "channel-gain-cdf":
        beta = _beta_from_distances(cfg, r, rng)
        powers = rng.standard_exponential((r.size, cfg.n_per_ap)).sum(axis=1)
        return backend.weighted_gain(beta, powers), rejections

    if cfg.experiment == "moments-check":
        beta = _beta_from_distances(cfg, r, rng)
        powers = rng.standard_exponential((r.size, cfg.n_per_ap)).sum(axis=1)
        s1, s2 = backend.beta_sums(beta)
        return (backend.weighted_gain(beta, powers), s1, s2), rejections

    raise ConfigError(f"not a per-trial experiment: {cfg.experiment}")


def _metric_chunk(args):
    cfg, set_index, seed, start, stop = args
    values, rejections = [], 0
    for trial in range(start, stop):
        try:
            value, rej = _metric_trial(cfg, trial_rng(seed, set_index, trial))
        except Exception as exc:  # noqa: BLE001 - annotate with the trial index
            raise TrialError(trial, exc) from exc
        values.append(value)
        rejections += rej
    return start, values, rejections


def _rates_chunk(args):
    cfg, set_index, seed, start, stop = args
    scenario = rates.RateScenario(
        n_users=cfg.n_users,
        tau_c=cfg.tau_c,
        tau_p=cfg.tau_p,
        pilot_power_mw=cfg.pilot_power_mw,
        data_power_mw=cfg.data_power_mw,
        dl_power_mw=cfg.dl_power_mw,
        fading_draws=cfg.fading_draws,
    )
    region = cfg.region()
    c_lin = 10 ** (_c_db(cfg) / 10)
    out = []
    for trial in range(start, stop):
        rng = trial_rng(seed, set_index, trial)
        try:
            aps = region.sample(cfg.fixed_aps, rng)
            users = region.sample(cfg.n_users, rng)
            d = np.hypot(aps[:, None, 0] - users[None, :, 0], aps[:, None, 1] - users[None, :, 1])
            if cfg.pathloss == "three":
                beta = backend.threeslope_pathloss(d.ravel(), cfg.d0, cfg.d1, c_lin).reshape(d.shape)
            else:
                beta = backend.singleslope_pathloss(d.ravel(), cfg.alpha).reshape(d.shape)
            beta = np.repeat(beta, cfg.n_per_ap, axis=0)
            gamma = rates.mmse_gamma(beta, scenario)
            if cfg.experiment == "rates-ul":
                mc = rates.ul_rates_mc(beta, scenario, rng)
                bounds = {
                    "uatf": rates.ul_rate_uatf(beta, gamma, scenario),
                    "general": mc.general,
                    "perfect": mc.perfect,
                }
            else:
                mc = rates.dl_rates_mc(beta, scenario, rng)
                bounds = {
                    "uatf": rates.dl_rate_uatf(beta, gamma, rates.dl_power_alloc(gamma, scenario.dl_power_mw)),
                    "general": mc.general,
                    "perfect": mc.perfect,
                }
        except Exception as exc:  # noqa: BLE001
            raise TrialError(trial, exc) from exc
        out.append(bounds)
    return start, out


def _run_chunks(chunk_fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        results = [chunk_fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(chunk_fn, tasks))
    return sorted(results, key=lambda item: item[0])


def _chunk_ranges(total, chunk):
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def metric_samples(config, set_index, eff, workers=None):
    """All per-trial metric values for one resolved param set."""
    tasks = [
        (eff, set_index, config.seed, start, stop)
        for start, stop in _chunk_ranges(eff.trials, _METRIC_CHUNK)
    ]
    rejections = 0
    values = []
    for _, chunk_values, rej in _run_chunks(_metric_chunk, tasks, workers or config.workers):
        values.extend(chunk_values)
        rejections += rej
    return values, rejections


def _cdf_rows(set_id, grid, samples):
    sorted_samples = np.sort(np.asarray(samples, dtype=np.float64))
    xs = grid.values()
    cdf = np.searchsorted(sorted_samples, xs, side="right") / sorted_samples.size
    return [(set_id, float(x), float(p), None) for x, p in zip(xs, cdf)]


def _moment_rows(set_id, eff, gains, y1, y2):
    n = eff.n_per_ap
    report = analytics.closed_form_report(eff.effective_intensity(), n, eff.alpha, eff.region_size)
    r = float(gains.size)

    def se_mean(arr):
        return float(arr.std(ddof=1) / sqrt(r))

    def se_var(arr):
        centered = arr - arr.mean()
        m4 = float((centered**4).mean())
        v = float(arr.var(ddof=1))
        return sqrt(max(m4 - v**2, 0.0) / r)

    mc_ratio = float(y2.mean() / (n * (y1**2).mean()))
    quantities = [
        ("mean_g2", report.mean_g2, float(gains.mean()), se_mean(gains)),
        ("var_g2", report.var_g2, float(gains.var(ddof=1)), se_var(gains)),
        ("mean_Y1", report.mean_y1, float(y1.mean()), se_mean(y1)),
        ("var_Y1", report.var_y1, float(y1.var(ddof=1)), se_var(y1)),
        ("mean_Y1sq", report.mean_y1sq, float((y1**2).mean()), se_mean(y1**2)),
        ("mean_Y2", report.mean_y2, float(y2.mean()), se_mean(y2)),
        ("hardening_ratio", report.hardening_ratio, mc_ratio, None),
    ]
    prefix = f"{set_id}:" if set_id != "default" else ""
    return [(f"{prefix}{name}", closed, mc, se) for name, closed, mc, se in quantities]


def _git_describe():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            check=False,
        )
        return out.stdout.strip() or "unknown"
    except OSError:
        return "unknown"


def run(config):
    """Execute every param set of an experiment config into a ResultTable."""
    config.validate()
    started = time.time()
    rows = []
    samples_by_set = {}
    per_user = {}
    total_rejections = 0

    for set_index, pset in enumerate(config.resolved_sets()):
        eff = config.with_overrides(pset.overrides)
        if eff.experiment in ("rates-ul", "rates-dl"):
            tasks = [
                (eff, set_index, config.seed, start, stop)
                for start, stop in _chunk_ranges(eff.realizations, _RATES_CHUNK)
            ]
            results = _run_chunks(_rates_chunk, tasks, config.workers)
            bounds_acc = {}
            for _, chunk_out in results:
                for bounds in chunk_out:
                    for key, arr in bounds.items():
                        bounds_acc.setdefault(key, []).append(np.asarray(arr))
            for bound in sorted(bounds_acc):
                all_rates = np.concatenate(bounds_acc[bound])
                set_id = bound if pset.set_id == "default" else f"{pset.set_id}:{bound}"
                rows.extend(_cdf_rows(set_id, eff.grid, all_rates))
                per_user[(pset.set_id, bound)] = all_rates
        elif eff.experiment == "moments-check":
            values, rejections = metric_samples(config, set_index, eff)
            total_rejections += rejections
            gains = np.array([v[0] for v in values])
            y1 = np.array([v[1] for v in values])
            y2 = np.array([v[2] for v in values])
            rows.extend(_moment_rows(pset.set_id, eff, gains, y1, y2))
            samples_by_set[pset.set_id] = gains
        else:
            values, rejections = metric_samples(config, set_index, eff)
            total_rejections += rejections
            arr = np.asarray(values, dtype=np.float64)
            samples_by_set[pset.set_id] = arr
            rows.extend(_cdf_rows(pset.set_id, eff.grid, arr))

    metadata = {
        "cfmimo": cfmimo.__version__,
        "experiment": config.experiment,
        "name": config.name or config.experiment,
        "seed": config.seed,
        "backend": backend.BACKEND,
        "config_sha256": config.sha256(),
        "git": _git_describe(),
        "rejected_empty": total_rejections,
    }
    return ResultTable(
        experiment=config.experiment,
        name=config.name or config.experiment,
        rows=rows,
        metadata=metadata,
        wall_time_s=time.time() - started,
        samples=samples_by_set,
        per_user=per_user,
    )


# ---------------------------------------------------------------------------
# Presets reproducing the reference experiments.
# ---------------------------------------------------------------------------

_METRIC_GRID = GridSpec("log", 1e-6, 1.0, 200)
_GAIN_GRID = GridSpec("db", -60.0, 40.0, 201)
_RATE_GRID = GridSpec("linear", 0.0, 15.0, 301)


def _sets(prefix, key, values, fmt=str):
    return tuple(ParamSet(f"{prefix}{fmt(v)}", {key: v}) for v in values)


def _preset_table():
    hardening = dict(experiment="hardening-cdf", region_shape="disk", region_size=500.0, grid=_METRIC_GRID)
    favorable = dict(experiment="favorable-cdf", region_shape="disk", region_size=500.0, grid=_METRIC_GRID)
    rates_common = dict(
        region_shape="square",
        region_size=1000.0,
        pathloss="three",
        c_db="auto",
        n_users=20,
        tau_c=500,
        realizations=300,
        fading_draws=1000,
        grid=_RATE_GRID,
    )
    table = {
        # Channel-gain CDF at fixed antenna density; the pathloss exponent is
        # not stated for this experiment in the source material. alpha=3 is
        # the value that reproduces the quoted 12 dB 95%-likely gap between
        # N=1 and N=100 (3.76 gives ~18.5 dB, 2.0 gives ~7 dB).
        "fig2": ExperimentConfig(
            experiment="channel-gain-cdf",
            name="fig2",
            antenna_density=1e-3,
            alpha=3.0,
            grid=_GAIN_GRID,
            param_sets=_sets("N=", "n_per_ap", (1, 10, 100)),
        ),
        "fig3": ExperimentConfig(
            name="fig3",
            **hardening,
            param_sets=tuple(
                ParamSet(f"alpha={a};lam={lam:g}", {"alpha": a, "intensity": lam})
                for a in (3.76, 2.0)
                for lam in (1e-4, 1e-3, 1e-1)
            ),
        ),
        "fig3s": ExperimentConfig(
            name="fig3s",
            **{**hardening, "pathloss": "three"},
            param_sets=tuple(
                ParamSet(f"N={n};mu={mu:g}", {"n_per_ap": n, "antenna_density": mu})
                for n in (1, 10)
                for mu in (5e-4, 1e-3, 2e-3)
            ),
        ),
        "fig4": ExperimentConfig(
            name="fig4",
            **hardening,
            intensity=1e-4,
            param_sets=_sets("sigma=", "shadow_sigma_db", (0.0, 5.0, 10.0), fmt=lambda v: f"{v:g}"),
        ),
        "fig5": ExperimentConfig(
            name="fig5",
            **hardening,
            antenna_density=1e-3,
            param_sets=_sets("N=", "n_per_ap", (1, 5, 10, 20, 50)),
        ),
        "fig6": ExperimentConfig(
            name="fig6",
            **favorable,
            user_distance=70.0,
            param_sets=tuple(
                ParamSet(f"N={n};lam={lam:g}", {"n_per_ap": n, "intensity": lam})
                for n, lam in ((1, 5e-4), (5, 1e-4), (20, 2.5e-5), (50, 1e-5), (1, 1e-4))
            ),
        ),
        "fig7": ExperimentConfig(
            name="fig7",
            **favorable,
            intensity=1e-4,
            user_distance=70.0,
            param_sets=_sets("sigma=", "shadow_sigma_db", (0.0, 5.0, 10.0), fmt=lambda v: f"{v:g}"),
        ),
        # Pathloss-exponent study; the AP density is not stated in the source
        # material, so it must be supplied explicitly.
        "fig8": ExperimentConfig(
            name="fig8",
            **favorable,
            user_distance=70.0,
            required=("intensity",),
            param_sets=_sets("alpha=", "alpha", (2.0, 3.0, 4.0), fmt=lambda v: f"{v:g}"),
        ),
        "fig8d": ExperimentConfig(
            name="fig8d",
            **favorable,
            param_sets=tuple(
                ParamSet(f"lam={lam:g};d={d:g}", {"intensity": lam, "user_distance": d})
                for lam in (5e-5, 1e-4, 2e-4)
                for d in (70.0, 212.0)
            ),
        ),
        "fig9": ExperimentConfig(experiment="rates-ul", name="fig9", fixed_aps=100, n_per_ap=1, **rates_common),
        "fig10": ExperimentConfig(experiment="rates-dl", name="fig10", fixed_aps=100, n_per_ap=1, **rates_common),
        "fig11": ExperimentConfig(experiment="rates-ul", name="fig11", fixed_aps=20, n_per_ap=5, **rates_common),
        "moments": ExperimentConfig(
            experiment="moments-check",
            name="moments",
            region_shape="disk",
            region_size=500.0,
            intensity=1e-3,
            alpha=3.76,
            n_per_ap=1,
            trials=100_000,
        ),
    }
    return table


_PRESETS = None


def preset_ids():
    global _PRESETS
    if _PRESETS is None:
        _PRESETS = _preset_table()
    return sorted(_PRESETS)


def preset(figure_id, seed=1):
    """Fully populated config for a known figure id (see preset_ids())."""
    global _PRESETS
    if _PRESETS is None:
        _PRESETS = _preset_table()
    key = figure_id.lower()
    if key not in _PRESETS:
        raise ConfigError(f"unknown preset {figure_id!r}; known: {', '.join(sorted(_PRESETS))}")
    return replace(_PRESETS[key], seed=seed)
