"""Matplotlib rendering for report artifacts.

Every report path that writes CSV/JSON also renders a figure next to it;
PNG output is deterministic (fixed dpi, no software metadata).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_loss_curve",
    "save_pred_scatter",
    "save_head_comparison",
    "save_sigma_restoration",
    "save_mass_deficit",
    "save_uat_capacity",
]

_SAVE_KW = {"dpi": 120, "bbox_inches": "tight", "metadata": {"Software": None}}


def _finish(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_loss_curve(trace: list[dict], path) -> None:
    """Per-epoch loss components on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = [r["epoch"] for r in trace]
    for key in sorted(k for k in trace[0] if k != "epoch"):
        ax.plot(epochs, [r.get(key, np.nan) for r in trace], label=key)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def save_pred_scatter(targets, preds, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(targets, preds, s=6, alpha=0.4)
    lims = [1.0, 5.0]
    ax.plot(lims, lims, "k--", linewidth=1)
    ax.set_xlabel("MOS")
    ax.set_ylabel("prediction")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def save_head_comparison(rows: list[dict], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [r["head"] for r in rows]
    x = np.arange(len(names))
    width = 0.35
    ax.bar(x - width / 2, [r["plcc"] or 0.0 for r in rows], width, label="PLCC")
    ax.bar(x + width / 2, [r["srcc"] or 0.0 for r in rows], width, label="SRCC")
    ax.set_xticks(x)
    ax.set_xticklabels(names)
    ax.set_ylim(0, 1.05)
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    _finish(fig, path)


def save_sigma_restoration(rows, path) -> None:
    """Relative sigma restoration error vs the true rating std."""
    sigmas = [r[0] for r in rows]
    rel = [r[2] / r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(sigmas, rel, "o-")
    ax.set_xscale("log")
    ax.set_xlabel("rating std")
    ax.set_ylabel("relative restoration error")
    ax.grid(True, alpha=0.3, which="both")
    _finish(fig, path)


def save_mass_deficit(sigmas, deficits, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(sigmas, deficits, "o-")
    ax.set_yscale("log")
    ax.set_xlabel("rating std")
    ax.set_ylabel("raw-label mass deficit")
    ax.grid(True, alpha=0.3, which="both")
    _finish(fig, path)


def save_uat_capacity(units, sup_errors, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(units, sup_errors, "o-")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("hidden units")
    ax.set_ylabel("sup error")
    ax.grid(True, alpha=0.3, which="both")
    _finish(fig, path)
