"""Exception hierarchy for the toolkit.

Every error raised by latkit derives from :class:`LatKitError`, so callers
(notably the CLI) can map failures onto stable exit codes.
"""
from __future__ import annotations


class LatKitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(LatKitError, ValueError):
    """A domain type was constructed with invariant-violating data."""


class StructuralMismatchError(LatKitError):
    """Two label maps do not cover the same point set (beyond tolerance)."""

    def __init__(self, message: str, only_in_a: int = 0, only_in_b: int = 0):
        super().__init__(message)
        self.only_in_a = only_in_a
        self.only_in_b = only_in_b


class DegenerateSliceError(LatKitError):
    """Lattice generation produced an empty slice."""

    def __init__(self, hbar: float):
        super().__init__(f"no lattice point maps into the region at hbar={hbar!r}")
        self.hbar = hbar


class InsufficientDataError(LatKitError):
    """Too few points in the working subregion to seed the labelling walk."""


class SequenceBreakError(LatKitError):
    """No coherent witness exists between two consecutive slices."""

    def __init__(self, hbar_prev: float, hbar_next: float, detail: str = ""):
        msg = f"coherence failure between slices hbar={hbar_prev!r} and hbar={hbar_next!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.hbar_pair = (hbar_prev, hbar_next)


class UnderdeterminedFitError(LatKitError):
    """The chart-fit normal system is rank deficient or data-starved."""

    def __init__(self, message: str, deficient_directions: list[str] | None = None):
        super().__init__(message)
        self.deficient_directions = deficient_directions or []


class PoleError(LatKitError):
    """Rotation number diverges in the fixed convention at this point."""


class UnsupportedModelError(LatKitError, ValueError):
    """Unknown model-system name."""


class SchemaError(LatKitError):
    """An input file violates its schema; carries the offending location."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{message} (at {where})" if where else message)
        self.where = where
