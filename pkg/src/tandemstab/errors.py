"""Exception types shared across the package."""


class DegenerateError(ValueError):
    """The admission rule never admits from empty: lambda(0) = 0.

    Every analysis entry point rejects such systems up front; the chain
    started empty would be absorbed at (0, 0).
    """


class OutOfRangeError(ValueError):
    """A numeric argument is outside the documented domain."""


class InternalInconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree.

    Raised when redundant formulas that must match to tolerance do not;
    signals an implementation bug, not bad input.
    """


class SolverFailureError(RuntimeError):
    """The stationary solve did not reach the required residual."""


class GridTooLargeError(ValueError):
    """A truncation grid exceeds the supported state-count cap."""


class CertificateWindowExhausted(RuntimeError):
    """The drift criterion holds analytically but the finite scan window
    ended before the certificate could be verified numerically."""


class SimulationTimeout(RuntimeError):
    """Too few replications reached the requested event within the horizon."""
