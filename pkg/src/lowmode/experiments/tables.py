"""Result tables, CSV round-tripping and SVG plots."""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__all__ = ["ResultTable", "PlotSpec", "emit_csv", "read_csv", "emit_plot"]


@dataclass
class ResultTable:
    """Rows of typed cells (``int``, ``float``, ``str``) under a fixed schema.

    ``timing_columns`` names the machine-dependent columns; everything else
    must be reproducible bit for bit for a fixed configuration.
    """

    experiment: str
    columns: list
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    timing_columns: tuple = ()
    notes: dict = field(default_factory=dict)

    def add(self, **cells):
        missing = set(self.columns) - set(cells)
        extra = set(cells) - set(self.columns)
        if missing or extra:
            raise ValueError(f"row cells do not match schema: missing {missing}, extra {extra}")
        self.rows.append([cells[c] for c in self.columns])

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def where(self, **match) -> "ResultTable":
        idx = {c: self.columns.index(c) for c in match}
        rows = [r for r in self.rows if all(r[idx[c]] == v for c, v in match.items())]
        return ResultTable(self.experiment, list(self.columns), rows, self.provenance,
                           self.timing_columns, self.notes)

    def has_nan(self) -> bool:
        return any(isinstance(v, float) and math.isnan(v) for row in self.rows for v in row)

    def __len__(self):
        return len(self.rows)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def emit_csv(table: ResultTable, path) -> Path:
    """Write ``table`` as RFC-4180 CSV plus a ``.json`` sidecar with provenance.

    Floats use 17 significant digits in scientific notation, so parsing the
    file returns the exact values.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
    meta = {
        "experiment": table.experiment,
        "columns": table.columns,
        "timing_columns": list(table.timing_columns),
        "provenance": table.provenance,
        "notes": table.notes,
    }
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(_json_safe(meta), fh, indent=2, sort_keys=True, default=_json_default)
    return path


def _json_safe(o):
    # strict JSON has no NaN/inf
    if isinstance(o, dict):
        return {k: _json_safe(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_json_safe(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return None
    return o


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(type(o))


def read_csv(path) -> ResultTable:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    meta = {}
    side = path.with_suffix(".json")
    if side.exists():
        with open(side) as fh:
            meta = json.load(fh)
    columns = rows[0] if rows else meta.get("columns", [])
    return ResultTable(
        meta.get("experiment", path.stem), list(columns),
        [[_parse(c) for c in r] for r in rows[1:]],
        meta.get("provenance", {}), tuple(meta.get("timing_columns", ())), meta.get("notes", {}),
    )


@dataclass
class PlotSpec:
    x: str
    ys: Sequence[str]
    xlabel: str
    ylabel: str
    title: str = ""
    xscale: str = "log"
    yscale: str = "log"
    labels: Optional[Sequence[str]] = None
    # (slope, label): reference line through the first point of the first series
    guide: Optional[tuple] = None
    group: Optional[str] = None


def emit_plot(table: ResultTable, spec: PlotSpec, path) -> Path:
    """Render ``table`` as an SVG line plot."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # keep labels as SVG text rather than glyph paths
    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["svg.hashsalt"] = "lowmode"
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    groups = [None] if spec.group is None else sorted(set(table.column(spec.group)), key=str)
    labels = list(spec.labels) if spec.labels else list(spec.ys)
    first = None
    for g in groups:
        sub = table if g is None else table.where(**{spec.group: g})
        x = np.asarray(sub.column(spec.x), dtype=float)
        for y, lab in zip(spec.ys, labels):
            yv = np.asarray(sub.column(y), dtype=float)
            ok = np.isfinite(yv) & (yv > 0 if spec.yscale == "log" else True)
            name = lab if g is None else f"{lab} ({g})"
            ax.plot(x[ok], yv[ok], marker="o", label=name)
            if first is None and ok.any():
                first = (x[ok], yv[ok])
    if spec.guide is not None and first is not None:
        slope, lab = spec.guide
        xs, ys = first
        ax.plot(xs, ys[0] * (xs / xs[0]) ** slope, "k--", lw=1, label=lab)
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
