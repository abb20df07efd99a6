"""Exception hierarchy for protocol runs and solvers."""

from __future__ import annotations


class OeoeError(Exception):
    """Base class for all library-specific errors."""


class ConfigError(OeoeError):
    """Bad run configuration (missing file, invalid field, unknown name)."""


class OracleViolationError(OeoeError):
    """An offline oracle exceeded its declared error budget mid-run."""

    def __init__(self, message: str, round_index: int | None = None):
        super().__init__(message)
        self.round_index = round_index


class RealizabilityError(OeoeError):
    """History is inconsistent with every member of the class."""


class DegenerateLikelihoodError(OeoeError):
    """Every candidate assigns zero likelihood to the observed history."""


class UnsupportedInstanceError(OeoeError):
    """Operation requires structure (e.g. convex values) the instance lacks."""


class ConvergenceFailure(OeoeError):
    """Iterative solver stopped above its gap tolerance."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap
