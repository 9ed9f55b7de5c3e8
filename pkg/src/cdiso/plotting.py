"""Figure rendering for the CLI report path.

Every plot function takes already-computed report data and writes a PNG next
to the delimited output; nothing here recomputes mathematics.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_profile_curve",
    "plot_density",
    "plot_needles",
    "plot_compare_report",
    "plot_delta_curve",
]

_STYLE = {"figure.figsize": (6.0, 4.0), "figure.dpi": 130, "axes.grid": True,
          "grid.alpha": 0.3, "font.size": 9}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_profile_curve(vs, values, path, label: str = "model profile",
                       extra: Optional[dict] = None) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(vs, values, "o-", ms=3, label=label)
        if extra:
            for name, (xs, ys) in extra.items():
                ax.plot(xs, ys, "s--", ms=3, label=name)
        ax.set_xlabel("volume fraction v")
        ax.set_ylabel("boundary content")
        ax.legend()
        return _save(fig, path)


def plot_density(density, path, title: str = "density") -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(density.grid, density.values, lw=1.2)
        ax.set_xlabel("t")
        ax.set_ylabel("h(t)")
        ax.set_title(title)
        return _save(fig, path)


def plot_needles(needles, path, max_panels: int = 12) -> Path:
    k = min(len(needles), max_panels)
    if k == 0:
        with plt.rc_context(_STYLE):
            fig, ax = plt.subplots()
            ax.text(0.5, 0.5, "no needles", ha="center")
            return _save(fig, path)
    rows = int(np.ceil(k / 4))
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(rows, min(k, 4), squeeze=False,
                                 figsize=(3.0 * min(k, 4), 2.2 * rows))
        order = np.argsort([-nd.quotient_weight for nd in needles])[:k]
        for ax, idx in zip(axes.ravel(), order):
            nd = needles[idx]
            ax.plot(nd.density.grid, nd.density.values, lw=1.0)
            ax.set_title(f"#{idx} q={nd.quotient_weight:.3f}", fontsize=8)
        for ax in axes.ravel()[k:]:
            ax.axis("off")
        return _save(fig, path)


def plot_compare_report(report, path) -> Path:
    vs = [r.v for r in report.records]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(vs, [r.model for r in report.records], "k-", label="model")
        ax.plot(vs, [r.model - report.slack_value for r in report.records],
                "k--", lw=0.8, label="model - slack")
        ax.plot(vs, [r.best_estimate for r in report.records], "o",
                label="best candidate")
        ax.set_xlabel("v")
        ax.set_ylabel("boundary content")
        ax.legend()
        return _save(fig, path)


def plot_delta_curve(report, path) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(report.deltas, report.values, "o-", ms=3)
        ax.set_xlabel("delta")
        ax.set_ylabel("profile value")
        return _save(fig, path)
