"""Rank and linear correlation metrics with exact tie handling."""

import numpy as np

from .core import DegenerateInputError, ShapeError

__all__ = ["plcc", "srcc", "average_ranks"]


def _paired(preds, targets) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.ndim != 1 or t.ndim != 1:
        raise ShapeError("series must be 1-D")
    if p.shape != t.shape:
        raise ShapeError(f"length mismatch: {p.shape[0]} vs {t.shape[0]}")
    if p.shape[0] < 2:
        raise DegenerateInputError("need at least 2 points")
    return p, t


def plcc(preds, targets) -> float:
    """Pearson linear correlation coefficient of two equal-length series."""
    p, t = _paired(preds, targets)
    pc = p - p.mean()
    tc = t - t.mean()
    denom = np.sqrt(np.dot(pc, pc) * np.dot(tc, tc))
    if denom == 0.0:
        raise DegenerateInputError("constant series has no linear correlation")
    return float(np.dot(pc, tc) / denom)


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their positions."""
    a = np.asarray(x, dtype=np.float64)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.shape[0], dtype=np.float64)
    sorted_a = a[order]
    i = 0
    while i < a.shape[0]:
        j = i
        while j + 1 < a.shape[0] and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        # positions i..j (0-based) share the mean rank
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def srcc(preds, targets) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks.

    Computed on mean-of-positions ranks rather than the closed-form
    1 - 6*sum(d^2)/(n(n^2-1)), which is invalid under ties.
    """
    p, t = _paired(preds, targets)
    return plcc(average_ranks(p), average_ranks(t))
