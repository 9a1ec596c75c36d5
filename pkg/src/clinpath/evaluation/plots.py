"""Figures for experiment reports, rendered to files with the Agg backend."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from statistics import fmean

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {"adaptive": "#1f77b4", "baseline": "#d62728"}


def _by_mode(reports, attr):
    """mode -> iteration -> list of values across repeats."""
    table: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in reports:
        table[r.mode][r.iteration].append(getattr(r, attr))
    return table


def _style(ax, xlabel="Iteration", ylabel=""):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.grid(axis="y", alpha=0.3)


def plot_quality(reports, path: Path) -> Path:
    """AUC, mean simplicity and model count per iteration, one line per mode."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    for ax, attr, label in zip(axes, ("auc", "mean_simplicity", "model_count"), ("AUC", "Simplicity", "# models")):
        for mode, series in sorted(_by_mode(reports, attr).items()):
            its = sorted(series)
            means = [fmean(series[i]) for i in its]
            lo = [min(series[i]) for i in its]
            hi = [max(series[i]) for i in its]
            color = _COLORS.get(mode)
            ax.plot(its, means, marker="o", label=mode, color=color)
            ax.fill_between(its, lo, hi, alpha=0.15, color=color)
        ax.set_xticks(sorted({r.iteration for r in reports}))
        _style(ax, ylabel=label)
    axes[0].legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _bars(reports, attr, ylabel, path: Path, scale=1.0) -> Path:
    table = _by_mode(reports, attr)
    modes = sorted(table)
    its = sorted({r.iteration for r in reports})
    width = 0.8 / max(len(modes), 1)
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for k, mode in enumerate(modes):
        xs = [i + (k - (len(modes) - 1) / 2) * width for i in its]
        vals = [fmean(table[mode][i]) * scale if table[mode][i] else 0.0 for i in its]
        ax.bar(xs, vals, width=width, label=mode, color=_COLORS.get(mode))
    ax.set_xticks(its)
    _style(ax, ylabel=ylabel)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_fitness(reports, path: Path) -> Path:
    return _bars(reports, "mean_fitness_neg", "Mean fitness (negatives)", path)


def plot_timing(reports, path: Path) -> Path:
    return _bars(reports, "wall_time", "Batch time [ms]", path, scale=1000.0)


def render_figures(reports, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not reports:
        return {}
    return {
        "quality": plot_quality(reports, out / "fig_quality.png"),
        "fitness": plot_fitness(reports, out / "fig_fitness.png"),
        "timing": plot_timing(reports, out / "fig_timing.png"),
    }
