"""Shared domain types: rated samples, interval partitions, soft labels, reports.

All types here are immutable after construction and safe to share across
concurrent readers.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "SchemeKind",
    "IntervalScheme",
    "MosSample",
    "LabelDiagnostics",
    "SoftLabel",
    "EvalReport",
    "make_scheme",
    "DomainError",
    "ValidationError",
    "ShapeError",
    "DegenerateInputError",
    "StaleCacheError",
    "TrainingError",
    "ParseError",
]


class DomainError(ValueError):
    """An input lies outside the documented domain of an operation."""


class ValidationError(ValueError):
    """A structured input (e.g. a probability vector) violates its contract."""


class ShapeError(ValueError):
    """Array dimensions do not match the expected layout."""


class DegenerateInputError(ValueError):
    """Input is degenerate for the requested statistic (e.g. constant series)."""


class StaleCacheError(RuntimeError):
    """A backward pass received a cache produced by a different forward call."""


class TrainingError(RuntimeError):
    """Training failed numerically (NaN loss or gradient); carries the step index."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ParseError(ValueError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class SchemeKind(str, Enum):
    QALIGN = "qalign"
    DEQA = "deqa"


# Fixed partitions. The first scheme splits [1, 5] into five equal intervals
# restored to the integer level index; the second tiles [0.5, 5.5] with unit
# intervals around integer midpoints.
QALIGN_BOUNDARIES = (1.0, 1.8, 2.6, 3.4, 4.2, 5.0)
DEQA_BOUNDARIES = (0.5, 1.5, 2.5, 3.5, 4.5, 5.5)


@dataclass(frozen=True)
class IntervalScheme:
    """A 5-interval partition with per-interval midpoints.

    Membership is half-open (lower, upper], except that the global minimum
    is assigned to interval 1 (closed at the bottom).
    """

    kind: SchemeKind
    boundaries: tuple[float, ...]
    midpoints: tuple[float, ...]

    def interval_index(self, s: float) -> int:
        """Return i in 1..5 such that boundaries[i-1] < s <= boundaries[i]."""
        lo, hi = self.boundaries[0], self.boundaries[-1]
        if not (lo <= s <= hi):
            raise DomainError(f"value {s!r} outside scheme range [{lo}, {hi}]")
        if s <= self.boundaries[1]:
            return 1
        for i in range(2, 6):
            if s <= self.boundaries[i]:
                return i
        raise AssertionError("unreachable")  # pragma: no cover


_SCHEMES = {
    SchemeKind.QALIGN: IntervalScheme(
        kind=SchemeKind.QALIGN,
        boundaries=QALIGN_BOUNDARIES,
        midpoints=tuple(
            (QALIGN_BOUNDARIES[i] + QALIGN_BOUNDARIES[i + 1]) / 2.0 for i in range(5)
        ),
    ),
    SchemeKind.DEQA: IntervalScheme(
        kind=SchemeKind.DEQA,
        boundaries=DEQA_BOUNDARIES,
        midpoints=(1.0, 2.0, 3.0, 4.0, 5.0),
    ),
}


def make_scheme(kind: SchemeKind | str) -> IntervalScheme:
    """Return the fixed partition for `kind` (deterministic and idempotent)."""
    return _SCHEMES[SchemeKind(kind)]


@dataclass(frozen=True, eq=False)
class MosSample:
    """One rated item: a feature vector standing in for an image, plus its MOS.

    `std`, when present, is the per-item rating standard deviation; operations
    that need a variance must be given an explicit fallback when it is absent.
    """

    id: str
    features: np.ndarray
    mos: float
    std: float | None = None

    def __post_init__(self):
        if self.std is not None and self.std < 0.0:
            raise DomainError(f"sample {self.id!r}: std must be >= 0, got {self.std}")


@dataclass(frozen=True)
class LabelDiagnostics:
    """Bookkeeping attached to a soft label.

    mass_deficit: truncated-out tail mass of the raw label (1 - sum of probs).
    negative_probs: set when enhancement produced an exact solution with at
    least one negative entry (kept unclipped; consumers clamp).
    """

    mass_deficit: float | None = None
    negative_probs: bool = False


@dataclass(frozen=True, eq=False)
class SoftLabel:
    """Length-5 probability vector over score levels, tied to its scheme."""

    probs: np.ndarray
    scheme: IntervalScheme
    enhanced: bool
    diagnostics: LabelDiagnostics = field(default_factory=LabelDiagnostics)

    def mass(self) -> float:
        return float(np.sum(self.probs))

    def mean(self) -> float:
        return float(np.dot(self.probs, self.scheme.midpoints))


@dataclass
class EvalReport:
    """Predictions plus summary metrics for one evaluation run.

    plcc/srcc are None when predictions are degenerate (constant); the
    `degenerate` flag is set instead of raising.
    """

    sample_ids: list[str]
    predictions: list[float]
    targets: list[float]
    tokens: list[int]
    plcc: float | None
    srcc: float | None
    token_accuracy: float | None = None
    loss_trace: list[dict] = field(default_factory=list)
    error_stats: dict | None = None
    degenerate: bool = False

    def __post_init__(self):
        for name in ("plcc", "srcc"):
            v = getattr(self, name)
            if v is not None and not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
                raise ValidationError(f"{name} out of [-1, 1]: {v}")

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "samples": [
                {"id": i, "prediction": p, "mos": t, "token": k}
                for i, p, t, k in zip(
                    self.sample_ids, self.predictions, self.targets, self.tokens
                )
            ],
            "plcc": self.plcc,
            "srcc": self.srcc,
            "token_accuracy": self.token_accuracy,
            "loss_trace": self.loss_trace,
            "error_stats": self.error_stats,
            "degenerate": self.degenerate,
        }
