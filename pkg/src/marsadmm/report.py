"""Figure rendering for finished runs.

Reads the per-seed CSV traces in a run directory and renders a small set of
matplotlib figures next to them (or into a chosen directory). Figures are
derived views only; every number in them is recomputable from the CSVs.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .trace import read_trace

__all__ = ["collect_traces", "render_run_figures"]

_TRACE_NAME = re.compile(r"^trace(?:_(?P<label>.+?))?_seed(?P<seed>\d+)\.csv$")


def collect_traces(run_dir) -> dict[str, dict[int, list]]:
    """Map solver label -> {seed -> trace} for every trace CSV in run_dir.

    Unlabeled files (``trace_seed3.csv``) get the label "run".
    """
    run_dir = Path(run_dir)
    groups: dict[str, dict[int, list]] = {}
    for path in sorted(run_dir.glob("trace*.csv")):
        m = _TRACE_NAME.match(path.name)
        if m is None:
            continue
        label = m.group("label") or "run"
        groups.setdefault(label, {})[int(m.group("seed"))] = read_trace(path)
    return groups


def _finite_xy(trace, x_field: str, y_field: str):
    xs, ys = [], []
    for rec in trace:
        y = getattr(rec, y_field)
        if isinstance(y, float) and math.isnan(y):
            continue
        xs.append(getattr(rec, x_field))
        ys.append(y)
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def _plot_groups(ax, groups, x_field: str, y_field: str):
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (label, by_seed) in enumerate(sorted(groups.items())):
        color = colors[i % len(colors)]
        first = True
        for seed in sorted(by_seed):
            xs, ys = _finite_xy(by_seed[seed], x_field, y_field)
            if xs.size == 0:
                continue
            ax.plot(xs, ys, color=color, alpha=0.45, linewidth=0.9,
                    label=label if first else None)
            first = False
    ax.set_xlabel(x_field)
    ax.set_ylabel(y_field)
    if any(by_seed for by_seed in groups.values()):
        ax.legend(loc="best", fontsize="small")


def render_run_figures(run_dir, out_dir=None) -> list[Path]:
    """Render objective and residual figures for a run directory.

    Returns the list of files written. Raises ValueError when the directory
    holds no recognizable trace files.
    """
    run_dir = Path(run_dir)
    out_dir = run_dir if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = collect_traces(run_dir)
    if not groups:
        raise ValueError(f"no trace CSVs found in {run_dir}")

    written = []

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    _plot_groups(axes[0], groups, "iter", "objective")
    _plot_groups(axes[1], groups, "sfo_count", "objective")
    axes[0].set_title("objective vs iteration")
    axes[1].set_title("objective vs oracle calls")
    fig.tight_layout()
    path = out_dir / "objective.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for ax, field in zip(axes, ("r_feas", "r_grad", "r_subdiff")):
        _plot_groups(ax, groups, "iter", field)
        ax.set_yscale("log")
        ax.set_title(field)
    fig.tight_layout()
    path = out_dir / "residuals.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
