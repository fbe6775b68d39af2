"""Render CDF figures from cfmimo experiment CSVs.

Consumes the documented CSV schema (metadata comments, then
``experiment,param_set_id,x,value,stderr`` rows) and nothing else; the
simulator package is not imported. One plotted series per param_set_id.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HEADER = ["experiment", "param_set_id", "x", "value", "stderr"]

# x-axis treatment per experiment kind: channel gains are plotted in dB
# (converted here; CSVs stay linear), metric CDFs on a log axis, rates linear.
_X_SCALE = {
    "channel-gain-cdf": "db",
    "hardening-cdf": "log",
    "favorable-cdf": "log",
    "rates-ul": "linear",
    "rates-dl": "linear",
    "moments-check": "linear",
}

_X_LABEL = {
    "channel-gain-cdf": "channel gain [dB]",
    "hardening-cdf": "hardening metric threshold",
    "favorable-cdf": "orthogonality metric threshold",
    "rates-ul": "uplink rate [bit/s/Hz]",
    "rates-dl": "downlink rate [bit/s/Hz]",
}


class SchemaError(ValueError):
    """CSV content does not match the documented schema; carries the row number."""

    def __init__(self, path, row, message):
        super().__init__(f"{path}:{row}: {message}")
        self.row = row


@dataclass
class Series:
    label: str
    x: list = field(default_factory=list)
    value: list = field(default_factory=list)
    stderr: list = field(default_factory=list)  # None where the column was empty


@dataclass
class Table:
    metadata: dict
    experiment: str
    series: dict  # label -> Series


@dataclass
class FigureSpec:
    figure_id: str
    csv_path: Path
    out_path: Path
    x_scale: str | None = None  # db | log | linear; None = infer from experiment


def parse_table(path):
    path = Path(path)
    metadata = {}
    series = {}
    experiment = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header_seen = False
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if row[0].startswith("#"):
                text = ",".join(row).lstrip("# ").strip()
                key, _, value = text.partition("=")
                if key:
                    metadata[key] = value
                continue
            if not header_seen:
                if row != HEADER:
                    raise SchemaError(path, row_no, f"expected header {','.join(HEADER)!r}, got {','.join(row)!r}")
                header_seen = True
                continue
            if len(row) != len(HEADER):
                raise SchemaError(path, row_no, f"expected {len(HEADER)} columns, got {len(row)}")
            exp, set_id, x_raw, value_raw, stderr_raw = row
            if experiment is None:
                experiment = exp
            elif exp != experiment:
                raise SchemaError(path, row_no, f"mixed experiments {experiment!r} and {exp!r}")
            if not set_id:
                raise SchemaError(path, row_no, "empty param_set_id")
            try:
                x = float(x_raw)
                value = float(value_raw)
            except ValueError as exc:
                raise SchemaError(path, row_no, f"non-numeric x/value: {exc}") from None
            stderr = None
            if stderr_raw != "":
                try:
                    stderr = float(stderr_raw)
                except ValueError:
                    raise SchemaError(path, row_no, f"non-numeric stderr {stderr_raw!r}") from None
            bucket = series.setdefault(set_id, Series(set_id))
            bucket.x.append(x)
            bucket.value.append(value)
            bucket.stderr.append(stderr)
    if not header_seen:
        raise SchemaError(path, 1, "missing header row")
    if not series:
        raise SchemaError(path, 1, "no data rows")
    return Table(metadata=metadata, experiment=experiment, series=series)


def _to_db(values):
    import math

    out = []
    for v in values:
        if v <= 0:
            raise ValueError(f"cannot convert non-positive x={v} to dB")
        out.append(10 * math.log10(v))
    return out


def render(spec):
    """Render one figure to a vector file; returns the output path."""
    table = parse_table(spec.csv_path)
    x_scale = spec.x_scale or _X_SCALE.get(table.experiment, "linear")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label in sorted(table.series):
        s = table.series[label]
        xs = _to_db(s.x) if x_scale == "db" else s.x
        has_err = any(e is not None and e > 0 for e in s.stderr)
        if has_err:
            errs = [e if e is not None else 0.0 for e in s.stderr]
            ax.errorbar(xs, s.value, yerr=errs, label=label, linewidth=1.4, elinewidth=0.7)
        else:
            ax.plot(xs, s.value, label=label, linewidth=1.4)
    if x_scale == "log":
        ax.set_xscale("log")
    ax.set_xlabel(_X_LABEL.get(table.experiment, "x"))
    ax.set_ylabel("CDF" if table.experiment != "moments-check" else "Monte-Carlo estimate")
    ax.set_ylim(-0.02, 1.02) if table.experiment != "moments-check" else None
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    title = spec.figure_id
    if "seed" in table.metadata:
        title += f"  (seed {table.metadata['seed']})"
    ax.set_title(title, fontsize=10)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, format=spec.out_path.suffix.lstrip("."), bbox_inches="tight")
    plt.close(fig)
    return spec.out_path


def spec_for(figure_id, in_dir, out_dir, fmt="pdf"):
    csv_path = Path(in_dir) / f"{figure_id}.csv"
    if not csv_path.exists():
        raise FileNotFoundError(f"no CSV for {figure_id!r} at {csv_path}")
    return FigureSpec(figure_id=figure_id, csv_path=csv_path, out_path=Path(out_dir) / f"{figure_id}.{fmt}")
