"""Moebius structures and Ptolemy metrics: checkers, model-space maps and coordinates."""

from .core_metric import INF, ExtendedMetricSpace, ValidationReport, metric_inversion, rescale, validate
from .cross_ratio import CrossRatioTriple, EXHAUSTIVE, Sample, crt, is_ptolemy, moebius_equivalent, ptolemy_defect
from .errors import (
    AdmissibilityError,
    ConvergenceError,
    DegenerateInputError,
    DescentTerminated,
    InputError,
    PreconditionError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "ExtendedMetricSpace",
    "ValidationReport",
    "metric_inversion",
    "rescale",
    "validate",
    "CrossRatioTriple",
    "EXHAUSTIVE",
    "Sample",
    "crt",
    "is_ptolemy",
    "moebius_equivalent",
    "ptolemy_defect",
    "AdmissibilityError",
    "ConvergenceError",
    "DegenerateInputError",
    "DescentTerminated",
    "InputError",
    "PreconditionError",
    "ValidationError",
]
