"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Any


class AttractorLabError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1


class PrecisionExhausted(AttractorLabError):
    """A decimal source ran out of trusted bits before the requested depth.

    The truncated expansion is attached as ``partial``.
    """

    exit_code = 2

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class RationalDetected(AttractorLabError):
    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class DepthExceeded(AttractorLabError):
    pass


class DomainError(AttractorLabError):
    pass


class NoPreimage(AttractorLabError):
    pass


class NonConvergence(AttractorLabError):
    pass


class BudgetExceeded(AttractorLabError):
    exit_code = 2


class OutsideDomain(AttractorLabError):
    pass


class OutsideAttractor(AttractorLabError):
    pass


class NotInSector(AttractorLabError):
    pass


class ResolutionMismatch(AttractorLabError):
    pass
