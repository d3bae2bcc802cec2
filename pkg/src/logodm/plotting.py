"""Report figures. SVG output with fixed hash salt and no timestamp, so
identical inputs produce identical files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import ConfusionMatrix, ErrorCurve  # noqa: E402

STYLE = {
    "svg.hashsalt": "logodm",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
METADATA = {"Date": None, "Creator": None}


def _figsize(scale=1.0, ratio=None):
    width = 5.0 * scale
    ratio = ratio if ratio is not None else (np.sqrt(5.0) - 1.0) / 2.0
    return width, width * ratio


def plot_error_curve(curve: ErrorCurve, path, title: str | None = None) -> None:
    ks = curve.ks
    mean = np.array(curve.mean_errors)
    std = np.array([p.std_error for p in curve.points])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=_figsize())
        ax.fill_between(ks, mean - std, mean + std, color="C0", alpha=0.2, linewidth=0)
        ax.plot(ks, mean, "o-", color="C0", markersize=3, label="mean CV error")
        best = curve.argmin_k
        ax.axvline(best, color="C3", linestyle="--", linewidth=1, label=f"minimum at k={best}")
        ax.set_xlabel("number of selected features (k)")
        ax.set_ylabel("0/1 error")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=METADATA)
        plt.close(fig)


def plot_confusion_matrix(cm: ConfusionMatrix, path, title: str | None = None) -> None:
    m = cm.matrix
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=_figsize(0.7, 1.0))
        ax.imshow(m, cmap="Blues")
        ax.set_xticks(range(len(cm.labels)), cm.labels)
        ax.set_yticks(range(len(cm.labels)), cm.labels)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        threshold = m.max() / 2 if m.size else 0
        for (i, j), v in np.ndenumerate(m):
            ax.text(j, i, str(int(v)), ha="center", va="center",
                    color="white" if v > threshold else "black")
        ax.set_title(title or f"accuracy {cm.accuracy:.3f}")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=METADATA)
        plt.close(fig)
