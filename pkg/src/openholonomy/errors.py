"""Exception types raised by the holonomy pipeline."""


class HolonomyError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(HolonomyError, ValueError):
    """An argument violates a precondition (shape, unitarity, orthonormality...)."""


class CurveTooCoarseError(HolonomyError):
    """Consecutive samples are too far apart for the first-order expansion.

    ``index`` is the offending sample index when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OrthogonalEndpointsError(HolonomyError):
    """Initial and final subspaces are orthogonal; the holonomy is undefined."""


class PartialOverlapError(HolonomyError):
    """The operation needs overlapping subspaces but they only partially overlap."""


class IntegratorError(HolonomyError):
    """The time integrator lost unitarity beyond tolerance."""


class FileFormatError(HolonomyError):
    """A frame/projector/result file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
