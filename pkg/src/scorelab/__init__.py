"""scorelab: a desk-scale lab for quality-score conversion and regression heads."""

from .core import (
    DegenerateInputError,
    DomainError,
    EvalReport,
    IntervalScheme,
    MosSample,
    ParseError,
    SchemeKind,
    ShapeError,
    SoftLabel,
    StaleCacheError,
    TrainingError,
    ValidationError,
    make_scheme,
)
from .conversion import (
    GaussianRating,
    deqa_enhance,
    deqa_raw_soft_label,
    deqa_restore,
    qalign_quantize,
    qalign_restore,
)
from .gaussian import erf, erfc, normal_cdf, normal_pdf
from .metrics import plcc, srcc

__version__ = "0.1.0"
