"""Figure rendering for the report path.

All figures are drawn headless through the Agg backend and saved without a
software metadata tag, so repeated runs of the same config produce byte
identical image files alongside the CSV and JSON reports.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def _positive_points(values):
    return [(i, v) for i, v in enumerate(values)
            if isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_extraction_figure(traces, path) -> None:
    """Gap and tail-bound decay for the longest trace of each route."""
    chosen = {}
    for trace in traces:
        current = chosen.get(trace.route)
        if current is None or len(trace.gaps) > len(current.gaps):
            chosen[trace.route] = trace
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    plotted = False
    for route in sorted(chosen):
        trace = chosen[route]
        gaps = _positive_points(trace.gaps)
        if gaps:
            ax.semilogy([i for i, _ in gaps], [v for _, v in gaps],
                        marker="o", markersize=3, label=f"{route} gap")
            plotted = True
        tails = _positive_points(trace.tail_bounds)
        if tails:
            ax.semilogy([i for i, _ in tails], [v for _, v in tails],
                        linestyle="--", label=f"{route} tail bound")
            plotted = True
    if plotted:
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "all gaps and tail bounds are zero",
                ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("gap / tail bound")
    ax.set_title("extraction convergence")
    _save(fig, path)


def save_fixpoint_figure(runs, path) -> None:
    """Generalized-metric step distances per scaling-operator iteration."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    plotted = False
    for run in runs:
        points = _positive_points(run.distances)
        if points:
            ax.semilogy([n for n, _ in points], [v for _, v in points],
                        marker="o", markersize=3, label=run.route)
            plotted = True
    if plotted:
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "all step distances are zero",
                ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("iteration n")
    ax.set_ylabel("d(J^n f, J^(n+1) f)")
    ax.set_title("fixed-point iteration")
    _save(fig, path)


def save_sweep_figure(header, rows, path) -> None:
    """Stability-bound constants against the control exponent."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    r_values = [float(row[0]) for row in rows]
    plotted = False
    for col, name in enumerate(header):
        if not name.startswith("const_"):
            continue
        xs, ys = [], []
        for r, row in zip(r_values, rows):
            try:
                value = float(row[col])
            except (TypeError, ValueError):
                continue
            if math.isfinite(value) and value > 0.0:
                xs.append(r)
                ys.append(value)
        if xs:
            ax.semilogy(xs, ys, marker="o", markersize=4,
                        label=name[len("const_"):].replace("_", "-"))
            plotted = True
    if plotted:
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no finite constants on this grid",
                ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("exponent r")
    ax.set_ylabel("bound constant at unit norms")
    ax.set_title("exponent sweep")
    _save(fig, path)
