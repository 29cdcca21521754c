"""Exception types raised across the package."""


class FLRWError(Exception):
    """Base class for all package errors."""


class DomainError(FLRWError, ValueError):
    """A quantity was requested outside the model's valid time domain."""


class ExpressionSyntaxError(FLRWError, ValueError):
    """Malformed scale-factor expression.

    ``offset`` is the byte offset of the offending token and ``expected`` the
    set of token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str]):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at offset {offset} (expected one of: {exp})")


class UnknownIdentifier(FLRWError, ValueError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class UnsupportedChart(FLRWError):
    """Tensor machinery requested for a chart that is not implemented (kappa != 0)."""


class StepFailure(FLRWError, RuntimeError):
    """The adaptive integrator could not meet its tolerance."""


class QuadratureFailure(FLRWError, RuntimeError):
    def __init__(self, message: str, error_estimate: float = float("nan")):
        self.error_estimate = error_estimate
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")


class DegenerateSeed(FLRWError):
    """Gram-Schmidt collapsed while building the initial frame."""


class InconclusiveTrend(FLRWError):
    """Singular-limit diagnostics failed both the monotonicity and fit gates."""


class WindowTooSmall(FLRWError, ValueError):
    """Too few usable samples for a finite-difference residual."""
