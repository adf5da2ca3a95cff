"""Exception types shared across the library."""


class AdsmaxError(Exception):
    """Base class for all library errors."""


class NotNullError(AdsmaxError, ValueError):
    """Vector is not on the null cone within tolerance."""


class ZeroVectorError(AdsmaxError, ValueError):
    """Vector vanishes where a direction is required."""


class DegenerateError(AdsmaxError, ValueError):
    """Geometric data degenerates (coincident samples, vanishing metric)."""


class OutOfChartError(AdsmaxError, ValueError):
    """Point lies outside the cylinder chart range."""


class PoleTooHighError(AdsmaxError, ValueError):
    """Laurent data has a pole of order greater than two."""


class NoConvergenceError(AdsmaxError, RuntimeError):
    """Iterative solver failed to reach the requested residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IllPosedError(AdsmaxError, RuntimeError):
    """Coefficient evaluation failed while assembling the problem."""


class NoBarrierFoundError(AdsmaxError, RuntimeError):
    """Barrier parameter scan exhausted without a valid pair."""


class StepTooLargeError(AdsmaxError, ValueError):
    """Integration step too large for the requested accuracy."""


class NotRealError(AdsmaxError, RuntimeError):
    """Frame column expected to be real carries a large imaginary part."""


class ZeroResidueError(AdsmaxError, ValueError):
    """Operation undefined at vanishing residue."""


class HyperbolicOverflowError(AdsmaxError, OverflowError):
    """Argument too large for hyperbolic-function evaluation."""


class SingularFlowError(AdsmaxError, ValueError):
    """Normal flow hits the singular locus of the shape operator."""
