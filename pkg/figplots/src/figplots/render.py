"""Render figure specs into raster images with matplotlib."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import FigureSpec, SpecError, read_table, require_columns

FIDELITY_SUFFIX = "fidelity"


def _long_series(spec: FigureSpec, item: dict) -> dict:
    """(label, metric) -> (x, y) arrays from a long-format metrics CSV."""
    fieldnames, rows = read_table(item["path"])
    require_columns(item["path"], fieldnames, [spec.x_column, "metric_name", "value"])
    series = defaultdict(lambda: ([], []))
    for row in rows:
        metric = row["metric_name"]
        if spec.metrics and metric not in spec.metrics:
            continue
        x = float(row[spec.x_column])
        if spec.log_x and x <= 0:
            raise SpecError(f"{item['path']}: non-positive x {x} on a log axis")
        xs, ys = series[(item["label"], metric)]
        xs.append(x)
        ys.append(float(row["value"]))
    if not series:
        raise SpecError(f"{item['path']}: no rows left after metric filter {spec.metrics}")
    return series


def _wide_series(spec: FigureSpec, item: dict) -> dict:
    fieldnames, rows = read_table(item["path"])
    require_columns(item["path"], fieldnames, [spec.x_column, *spec.y_columns])
    series = {}
    for col in spec.y_columns:
        xs = [float(r[spec.x_column]) for r in rows]
        if spec.log_x and any(x <= 0 for x in xs):
            raise SpecError(f"{item['path']}: non-positive x on a log axis")
        series[(item["label"], col)] = (xs, [float(r[col]) for r in rows])
    return series


def _render_curves(spec: FigureSpec) -> None:
    series = {}
    for item in spec.inputs:
        loader = _wide_series if spec.y_columns else _long_series
        series.update(loader(spec, item))

    metric_names = sorted({metric for (_, metric) in series})
    fidelity = [m for m in metric_names if m.endswith(FIDELITY_SUFFIX)]
    others = [m for m in metric_names if not m.endswith(FIDELITY_SUFFIX)]
    # fidelity panel above, CE (or other) panel below, mirroring the sweep
    # figures; a single family collapses to one panel
    panels = [p for p in (fidelity, others) if p]
    fig, axes = plt.subplots(len(panels), 1, figsize=(6.4, 3.2 * len(panels)),
                             sharex=True, squeeze=False)
    for ax, metrics in zip(axes[:, 0], panels):
        for (label, metric), (xs, ys) in sorted(series.items()):
            if metric not in metrics:
                continue
            order = np.argsort(xs)
            ax.plot(np.asarray(xs)[order], np.asarray(ys)[order],
                    marker="o", markersize=3, label=f"{label} {metric}")
        if spec.log_x:
            ax.set_xscale("log")
        if spec.log_y:
            ax.set_yscale("log")
        ax.set_ylabel(spec.y_label or "value")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    axes[-1, 0].set_xlabel(spec.x_label or spec.x_column)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)


def _heatmap_grid(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    fieldnames, rows = read_table(path)
    require_columns(path, fieldnames, ["n", "m", "re", "im"])
    ns = sorted({int(r["n"]) for r in rows})
    ms = sorted({int(r["m"]) for r in rows})
    amp = np.zeros((len(ns), len(ms)))
    n_index = {n: i for i, n in enumerate(ns)}
    m_index = {m: j for j, m in enumerate(ms)}
    for r in rows:
        amp[n_index[int(r["n"])], m_index[int(r["m"])]] = abs(
            complex(float(r["re"]), float(r["im"])))
    return np.asarray(ns), np.asarray(ms), amp


def _render_heatmap(spec: FigureSpec) -> None:
    grids = [(item["label"], *_heatmap_grid(item["path"])) for item in spec.inputs]
    vmax = max(amp.max() for (_, _, _, amp) in grids)
    fig, axes = plt.subplots(1, len(grids), figsize=(4.2 * len(grids), 4.0),
                             squeeze=False)
    for ax, (label, ns, ms, amp) in zip(axes[0], grids):
        extent = (ms[0] - 0.5, ms[-1] + 0.5, ns[0] - 0.5, ns[-1] + 0.5)
        im = ax.imshow(amp, origin="lower", extent=extent, vmin=0.0, vmax=vmax,
                       cmap="viridis", interpolation="nearest")
        ax.set_title(label, fontsize=10)
        ax.set_xlabel(spec.x_label or "input bin m")
        ax.set_ylabel(spec.y_label or "output bin n")
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.85, label="amplitude")
    if spec.title:
        fig.suptitle(spec.title)
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)


def render(spec: FigureSpec) -> Path:
    """Render one spec; returns the written image path."""
    Path(spec.output).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "curves":
        _render_curves(spec)
    else:
        _render_heatmap(spec)
    return Path(spec.output)
