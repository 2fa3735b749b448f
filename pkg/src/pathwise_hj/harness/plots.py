"""SVG line plots and the CSV tables behind them."""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "pathwise-hj"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import ExperimentReport, Series  # noqa: E402

__all__ = ["emit_plots", "write_series_csv", "plot_series"]

# fixed metadata keeps SVG output byte-stable across runs
_SVG_META = {"Date": None, "Creator": None}


def write_series_csv(series: Series, path: str | Path) -> Path:
    """Columns ``x`` then one per ``y`` label."""
    path = Path(path)
    labels = list(series.ys)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([series.xlabel or "x", *labels])
        cols = [np.asarray(series.x, dtype=float)] + [np.asarray(series.ys[k], dtype=float) for k in labels]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def plot_series(series: Series, path: str | Path) -> Path:
    """Line plot of every ``y`` column; a power or exponential fit is drawn as a dashed guide."""
    path = Path(path)
    x = np.asarray(series.x, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in series.ys.items():
        y = np.asarray(y, dtype=float)
        if series.logy:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, marker="." if x.size < 60 else None, lw=1.2, label=label)
    if series.fit:
        f = series.fit
        lo, hi = f["window"]
        xs = np.linspace(lo, hi, 50) if f["model"] == "exponential" else np.geomspace(lo, hi, 50)
        xx = np.log(xs) if f["model"] == "power" else xs
        ax.plot(xs, np.exp(f["intercept"] + f["rate"] * xx), "k--", lw=1.0,
                label=f"fit rate {f['rate']:.3g}")
    if series.logx:
        ax.set_xscale("log")
    if series.logy:
        ax.set_yscale("log")
    ax.set_xlabel(series.xlabel)
    ax.set_ylabel(series.ylabel)
    ax.set_title(series.name)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def emit_plots(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write ``<series>.csv`` and ``<series>.svg`` for every non-empty series.

    Empty series are skipped with a warning.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for s in report.series:
        if len(s) == 0 or not s.ys:
            warnings.warn(f"series {s.name!r} is empty; no plot written", RuntimeWarning, stacklevel=2)
            continue
        stem = s.name.replace(" ", "_").replace("/", "_")
        written.append(write_series_csv(s, out / f"{stem}.csv"))
        written.append(plot_series(s, out / f"{stem}.svg"))
    return written
