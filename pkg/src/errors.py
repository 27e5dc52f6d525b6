"""
Exception hierarchy for the numerical verification library.

Every error raised on purpose by the library derives from RiemannQuantError,
so callers (the scenario runner in particular) can turn computation failures
into failed checks without swallowing programming errors.
"""

from typing import Optional, Sequence


class RiemannQuantError(Exception):
    """Base class for all library errors."""


class PreconditionError(RiemannQuantError, ValueError):
    """An operation was called with inputs outside its documented domain."""


class ConfigError(RiemannQuantError, ValueError):
    """Invalid scenario configuration; `path` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class _PointError(RiemannQuantError, ArithmeticError):
    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        self.point = None if point is None else tuple(float(c) for c in point)
        if self.point is not None:
            message = f"{message} at {self.point}"
        super().__init__(message)


class StencilFailureError(_PointError):
    """A finite-difference stencil point could not be evaluated."""


class BranchCutCrossingError(StencilFailureError):
    """A stencil straddles the cut of the principal phase."""


class PoleError(_PointError):
    """A point lies inside the exclusion zone around the OZ axis."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None, trace=None):
        self.trace = trace
        super().__init__(message, point)


class PoleOnPathError(PoleError):
    """A quadrature node of a line integral hit a singularity."""


class NodalPointError(_PointError):
    """The density vanishes, so S = Ln f is undefined."""


class NearPoleError(RiemannQuantError, ArithmeticError):
    """A complex path passes too close to the origin to be unwrapped."""


class TruncationError(RiemannQuantError, ArithmeticError):
    """The tail estimate of an improper integral did not converge."""


class DivergenceError(RiemannQuantError, ArithmeticError):
    """The requested integral diverges."""


class UnresolvedWindingError(RiemannQuantError, ArithmeticError):
    """A winding number could not be rounded to an integer."""

    def __init__(self, value: float, residue: float):
        self.value = value
        self.residue = residue
        super().__init__(f"winding {value!r} is not an integer (residue {residue:.3e})")


class DegenerateOrbitError(PreconditionError):
    """The model has no closed characteristic (k = 0)."""


class ReportWriteError(RiemannQuantError, OSError):
    """Report files could not be written."""
