"""Numerical laboratory for the model attractors of irrationally indifferent fixed points."""

from .arithmetic import (
    NearestIntegerExpansion,
    RotationNumber,
    StandardExpansion,
    expand_nearest_integer,
    expand_standard,
)
from .brjuno_herman import ArithmeticVerdict, classify
from .errors import AttractorLabError

__all__ = [
    "ArithmeticVerdict",
    "AttractorLabError",
    "NearestIntegerExpansion",
    "RotationNumber",
    "StandardExpansion",
    "classify",
    "expand_nearest_integer",
    "expand_standard",
]
__version__ = "0.1.0"
