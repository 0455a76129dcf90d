"""Figure rendering: one function per figure kind, pinned style, no physics.

Output is deterministic for fixed inputs: the Agg backend with a pinned
rcParams set and stripped PNG metadata renders byte-identical files across
runs.  Empty-but-valid inputs produce an empty-axes figure with a warning
rather than an error, so batch pipelines keep going.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, Table, read_table

__all__ = ["FigureSpec", "render", "FIGURE_KINDS"]

PINNED_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "simfigs",
}

_COLORS = ["#1f77b4", "#d62728", "#e6b417", "#2ca02c", "#9467bd", "#8c564b"]


@dataclass
class FigureSpec:
    """What to draw: input CSVs, figure kind, labels, output path."""

    kind: str
    inputs: list[Path]
    output: Path
    labels: list[str] = field(default_factory=list)
    title: str = ""

    def __post_init__(self):
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _label_for(spec: FigureSpec, i: int, table: Table) -> str:
    if i < len(spec.labels):
        return spec.labels[i]
    sidecar = table.path.with_suffix(".json")
    if sidecar.exists():
        try:
            summary = json.loads(sidecar.read_text())
            return f"{summary['method']} (mean {summary['mean']:.4g})"
        except (json.JSONDecodeError, KeyError):
            pass
    return table.path.stem


def _draw_time_average(spec: FigureSpec, ax) -> None:
    for i, path in enumerate(spec.inputs):
        table = read_table(path, "timeavg-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        ax.plot(table.floats("t"), table.floats("running_average"),
                color=_COLORS[i % len(_COLORS)], label=_label_for(spec, i, table))
    ax.set_xlabel("t")
    ax.set_ylabel("running time average")


def _draw_autocorrelation(spec: FigureSpec, ax) -> None:
    for i, path in enumerate(spec.inputs):
        table = read_table(path, "acf-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        ax.plot(table.floats("lag_time"), table.floats("acf"),
                color=_COLORS[i % len(_COLORS)], label=_label_for(spec, i, table))
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("lag")
    ax.set_ylabel("autocorrelation")


def _draw_error_vs_dt(spec: FigureSpec, ax) -> None:
    for path in spec.inputs:
        table = read_table(path, "errortable-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        dt = table.floats("dt")
        err = table.floats("rel_error")
        methods = table.column("method")
        ps = table.column("p")
        series = sorted({(m, p) for m, p in zip(methods, ps)})
        for i, (m, p) in enumerate(series):
            mask = np.array([mm == m and pp == p for mm, pp in zip(methods, ps)])
            label = m if p == "" else f"{m} p={p}"
            order = np.argsort(dt[mask])
            ax.loglog(dt[mask][order], np.maximum(err[mask][order], 1e-16),
                      "o-", color=_COLORS[i % len(_COLORS)], label=label)
    ax.set_xlabel("dt")
    ax.set_ylabel("relative error")


def _draw_strong_error(spec: FigureSpec, ax) -> None:
    for path in spec.inputs:
        table = read_table(path, "strong-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        t = table.floats("t")
        for i, col in enumerate(c for c in table.columns if c.startswith("e_dt_")):
            ax.semilogy(t, np.maximum(table.floats(col), 1e-16),
                        color=_COLORS[i % len(_COLORS)], label=col.replace("e_dt_", "dt="))
    ax.set_xlabel("t")
    ax.set_ylabel("pathwise deviation e(t)")


def _draw_weak_error(spec: FigureSpec, ax) -> None:
    for path in spec.inputs:
        table = read_table(path, "weak-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        t = table.floats("t")
        ax.plot(t, table.floats("mean_exact"), color=_COLORS[0], label="exact forces")
        ax.plot(t, table.floats("mean_rbm"), color=_COLORS[1], label="batch forces")
        diff = table.floats("diff")
        err = table.floats("stderr")
        ax.fill_between(t, diff - 2 * err, diff + 2 * err, color=_COLORS[2], alpha=0.3)
        ax.plot(t, diff, color=_COLORS[2], label="difference (±2 se)")
    ax.set_xlabel("t")
    ax.set_ylabel("ensemble mean weight")


def _draw_relative_entropy(spec: FigureSpec, ax) -> None:
    for path in spec.inputs:
        table = read_table(path, "entropy-v1")
        if len(table) == 0:
            _warn(f"{path}: no rows, drawing empty axes")
            continue
        t = table.floats("t")
        methods = table.column("method")
        for i, method in enumerate(sorted(set(methods))):
            mask = np.array([m == method for m in methods])
            for j, col in enumerate(("d_position", "d_pairdist")):
                vals = np.maximum(table.floats(col)[mask], 1e-16)
                ax.loglog(t[mask], vals, "o-" if j == 0 else "s--", markersize=3,
                          color=_COLORS[i % len(_COLORS)],
                          label=f"{method} {col.removeprefix('d_')}")
    ax.set_xlabel("t")
    ax.set_ylabel("relative entropy")


FIGURE_KINDS = {
    "time-average": _draw_time_average,
    "autocorrelation": _draw_autocorrelation,
    "error-vs-dt": _draw_error_vs_dt,
    "strong-error": _draw_strong_error,
    "weak-error": _draw_weak_error,
    "relative-entropy": _draw_relative_entropy,
}


def render(spec: FigureSpec) -> Path:
    """Draw the figure and write it; returns the output path.

    Raises SchemaError on version or column mismatches; missing files raise
    the usual OSError.  The output is byte-stable for fixed inputs.
    """
    if spec.kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}; known: {sorted(FIGURE_KINDS)}")
    for path in spec.inputs:
        if not path.exists():
            raise FileNotFoundError(path)
    with plt.rc_context(PINNED_STYLE):
        fig, ax = plt.subplots()
        FIGURE_KINDS[spec.kind](spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        handles, _ = ax.get_legend_handles_labels()
        if handles:
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, metadata={"Software": None})
        plt.close(fig)
    return spec.output
