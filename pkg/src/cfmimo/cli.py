"""Command-line front end.

Subcommands: ``run`` (config-file experiment), ``reproduce`` (figure preset),
``validate`` (oracle/property suite), ``presets`` (list figure ids). Data
goes to CSV files; human summaries to stdout; diagnostics to stderr.
"""

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

from cfmimo import harness
from cfmimo.errors import CfmimoError, ConfigError
from cfmimo.harness import ExperimentConfig, GridSpec, ParamSet

_BOOLISH = {"none": None, "auto": "auto"}


def _coerce(key, raw):
    """Parse one config value; type comes from the dataclass field."""
    raw = raw.strip()
    if key == "region":
        shape, _, size = raw.partition(":")
        if shape not in ("disk", "square") or not size:
            raise ConfigError(f"region must look like disk:500 or square:1000, got {raw!r}")
        return {"region_shape": shape, "region_size": float(size)}
    if key == "grid":
        kind, _, rest = raw.partition(":")
        try:
            lo, hi, points = rest.split(",")
            return {"grid": GridSpec(kind, float(lo), float(hi), int(points))}
        except ValueError as exc:
            raise ConfigError(f"grid must look like log:1e-6,1,200 (got {raw!r})") from exc
    if key not in {f.name for f in fields(ExperimentConfig)}:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "c_db" and raw.lower() == "auto":
        return {key: "auto"}
    if raw.lower() in _BOOLISH and key not in ("experiment", "name", "pathloss", "region_shape"):
        return {key: _BOOLISH[raw.lower()]}
    field_type = {
        "experiment": str, "name": str, "region_shape": str, "pathloss": str,
        "n_per_ap": int, "fixed_aps": int, "trials": int, "n_users": int,
        "tau_c": int, "tau_p": int, "realizations": int, "fading_draws": int,
        "seed": int, "workers": int,
    }.get(key, float)
    try:
        return {key: field_type(raw)}
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_file(path):
    """Flat key = value format; ``set.<id> = k=v[,k=v...]`` adds a param set."""
    base = {}
    sets = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key.startswith("set."):
            overrides = {}
            for item in value.split(","):
                k, _, v = item.partition("=")
                if not _:
                    raise ConfigError(f"{path}:{lineno}: param-set entries need k=v")
                overrides.update(_coerce(k.strip().lower().replace("-", "_"), v))
            sets.append(ParamSet(key[4:], overrides))
        else:
            base.update(_coerce(key, value.strip()))
    if "experiment" not in base:
        raise ConfigError(f"{path}: missing required key 'experiment'")
    base["param_sets"] = tuple(sets)
    return ExperimentConfig(**base)


def _apply_cli_overrides(cfg, args):
    updates = {}
    for item in args.override or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--override expects key=value, got {item!r}")
        updates.update(_coerce(key.strip().lower().replace("-", "_"), value))
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.trials is not None:
        # one knob for Monte-Carlo volume: trial count for metric experiments,
        # deployment count for rate experiments
        if cfg.experiment in ("rates-ul", "rates-dl"):
            updates["realizations"] = args.trials
        else:
            updates["trials"] = args.trials
    return cfg.with_overrides(updates)


def _write(table, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{table.name}.csv"
    table.to_csv(path)
    print(f"{table.name}: {len(table.rows)} rows -> {path} ({table.wall_time_s:.1f}s)")
    return path


def _cmd_run(args):
    cfg = parse_config_file(args.config)
    cfg = _apply_cli_overrides(cfg, args)
    _write(harness.run(cfg), args.out)
    return 0


def _cmd_reproduce(args):
    cfg = harness.preset(args.figure, seed=args.seed if args.seed is not None else 1)
    cfg = _apply_cli_overrides(cfg, args)
    _write(harness.run(cfg), args.out)
    return 0


def _cmd_presets(args):
    for fig_id in harness.preset_ids():
        cfg = harness.preset(fig_id)
        sets = ", ".join(p.set_id for p in cfg.resolved_sets())
        extra = f"  [requires --override {'/'.join(cfg.required)}]" if cfg.required else ""
        print(f"{fig_id:8s} {cfg.experiment:16s} sets: {sets}{extra}")
    return 0


def _cmd_validate(args):
    from cfmimo import validation

    results = validation.run_all(quick=args.quick, seed=args.seed if args.seed is not None else 1)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)}/{len(results)} checks failed", file=sys.stderr)
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="cfmimo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=True):
        p.add_argument("--seed", type=int, default=None, help="master seed (default 1)")
        p.add_argument("--workers", type=int, default=None, help="parallel worker processes")
        p.add_argument("--out", default=".", help="output directory for CSV files")
        p.add_argument("--override", action="append", metavar="KEY=VALUE", help="config override; repeatable")
        if trials:
            p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trial / deployment count")

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True)
    common(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_rep = sub.add_parser("reproduce", help="run a figure preset")
    p_rep.add_argument("figure", help="figure id, e.g. fig2 (see 'presets')")
    common(p_rep)
    p_rep.set_defaults(fn=_cmd_reproduce)

    p_pre = sub.add_parser("presets", help="list figure presets")
    p_pre.set_defaults(fn=_cmd_presets)

    p_val = sub.add_parser("validate", help="run the oracle/property suite")
    p_val.add_argument("--quick", action="store_true", help="reduced sample sizes")
    p_val.add_argument("--seed", type=int, default=None)
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CfmimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
