"""Label conversion: level quantization/restoration and Gaussian soft labels.

Implements the two conversion strategies under study: hard one-hot
quantization of a MOS into 5 levels restored by a probability-weighted sum,
and soft labels obtained by integrating a Gaussian rating distribution over
unit intervals, optionally enhanced by the affine correction that restores
unit mass and the exact mean.

Everything here is deterministic math; no learning occurs in this module.
All functions are pure and safe for concurrent invocation.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    IntervalScheme,
    LabelDiagnostics,
    SchemeKind,
    SoftLabel,
    ValidationError,
    make_scheme,
)
from .gaussian import normal_cdf

__all__ = [
    "GaussianRating",
    "qalign_quantize",
    "qalign_quantize_array",
    "qalign_restore",
    "deqa_raw_soft_label",
    "deqa_enhance",
    "deqa_restore",
    "label_moments",
]

LEVELS = np.arange(1.0, 6.0)

# threshold on the 2x2 system determinant below which the enhancement
# system is treated as rank deficient and solved by pure rescaling
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class GaussianRating:
    """A Gaussian rating distribution: MOS as mean, annotated std as sigma."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")


def qalign_quantize(mos: float) -> int:
    """Map a MOS in [1, 5] to its level index in 1..5.

    Interval i is (1 + 0.8*(i-1), 1 + 0.8*i]; mos = 1 maps to 1.
    """
    scheme = make_scheme(SchemeKind.QALIGN)
    return scheme.interval_index(float(mos))


def qalign_quantize_array(mos: np.ndarray) -> np.ndarray:
    """Vectorized `qalign_quantize` for bulk sampling studies."""
    scheme = make_scheme(SchemeKind.QALIGN)
    lo, hi = scheme.boundaries[0], scheme.boundaries[-1]
    if np.any(mos < lo) or np.any(mos > hi):
        raise DomainError("mos values outside [1, 5]")
    inner = np.asarray(scheme.boundaries[1:-1])
    return np.searchsorted(inner, mos, side="left") + 1


def _check_simplex(probs, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.shape != (5,):
        raise ValidationError(f"expected a 5-vector, got shape {p.shape}")
    if np.any(p < -tol):
        raise ValidationError(f"negative probability {p.min()}")
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        raise ValidationError(f"probabilities sum to {total}, expected 1")
    return p


def qalign_restore(probs) -> float:
    """Probability-weighted sum of integer levels: sum_i p_i * i, in [1, 5]."""
    p = _check_simplex(probs)
    return float(np.dot(p, LEVELS))


def deqa_raw_soft_label(rating: GaussianRating, scheme: IntervalScheme | None = None) -> SoftLabel:
    """Integrate the rating Gaussian over each unit interval around the midpoints.

    The returned label is raw (not enhanced): the tail mass outside
    [0.5, 5.5] is truncated away, so the probabilities sum to less than 1.
    The deficit is recorded in the diagnostics.
    """
    if scheme is None:
        scheme = make_scheme(SchemeKind.DEQA)
    if scheme.kind is not SchemeKind.DEQA:
        raise DomainError(f"raw soft labels need the unit-interval scheme, got {scheme.kind}")
    c = np.asarray(scheme.midpoints)
    hi = normal_cdf((c + 0.5 - rating.mu) / rating.sigma)
    lo = normal_cdf((c - 0.5 - rating.mu) / rating.sigma)
    probs = hi - lo
    deficit = 1.0 - float(probs.sum())
    return SoftLabel(
        probs=probs,
        scheme=scheme,
        enhanced=False,
        diagnostics=LabelDiagnostics(mass_deficit=deficit),
    )


def deqa_enhance(raw: SoftLabel, mu: float) -> SoftLabel:
    """Affinely correct a raw soft label so it has unit mass and mean `mu`.

    Solves p_i = alpha * p_i_raw + beta for (alpha, beta) under
    sum(p) = 1 and sum(p * c) = mu. When the system is rank deficient
    (raw mean exactly at the partition center) the pure rescale
    alpha = 1/sum(p_raw), beta = 0 is used. Entries may come out negative
    for extreme means; the exact solution is kept and flagged rather than
    clipped, since clipping would break the mean constraint.
    """
    if raw.enhanced:
        raise DomainError("label is already enhanced")
    c = np.asarray(raw.scheme.midpoints)
    p_raw = np.asarray(raw.probs, dtype=np.float64)
    t0 = float(p_raw.sum())
    t1 = float(np.dot(p_raw, c))
    if t0 <= 0.0:
        raise DomainError("raw label has no mass")
    sum_c = float(c.sum())      # 5 midpoints summing to 15

    # [t0     5 ] [alpha]   [1 ]
    # [t1     15] [beta ] = [mu]
    det = t0 * sum_c - t1 * 5.0
    if abs(det) < _DEGENERATE_TOL * max(1.0, abs(t0)):
        alpha = 1.0 / t0
        beta = 0.0
        probs = alpha * p_raw + beta
    else:
        alpha = (sum_c - 5.0 * mu) / det
        beta = (t0 * mu - t1) / det
        probs = alpha * p_raw + beta
        # near-point-mass labels off the partition center make the system
        # barely consistent (huge alpha, beta); iterative refinement claws
        # back the digits the cancellation loses
        for _ in range(2):
            r1 = 1.0 - float(probs.sum())
            r2 = mu - float(np.dot(probs, c))
            d_alpha = (r1 * sum_c - 5.0 * r2) / det
            d_beta = (t0 * r2 - t1 * r1) / det
            probs = probs + (d_alpha * p_raw + d_beta)
    return SoftLabel(
        probs=probs,
        scheme=raw.scheme,
        enhanced=True,
        diagnostics=LabelDiagnostics(
            mass_deficit=raw.diagnostics.mass_deficit,
            negative_probs=bool(np.any(probs < 0.0)),
        ),
    )


def label_moments(probs, scheme: IntervalScheme | None = None) -> tuple[float, float]:
    """(mean, std) of a label without simplex validation.

    Diagnostics helper for labels that may carry negative entries; the
    variance is clamped at zero before the square root.
    """
    if scheme is None:
        scheme = make_scheme(SchemeKind.DEQA)
    p = np.asarray(probs, dtype=np.float64)
    c = np.asarray(scheme.midpoints)
    mu_res = float(np.dot(p, c))
    var = float(np.dot(p, (c - mu_res) ** 2))
    return mu_res, float(np.sqrt(max(var, 0.0)))


def deqa_restore(probs, scheme: IntervalScheme | None = None) -> tuple[float, float]:
    """Recover (mean, std) of the rating distribution from a label on the simplex."""
    if scheme is None:
        scheme = make_scheme(SchemeKind.DEQA)
    _check_simplex(probs)
    return label_moments(probs, scheme)
