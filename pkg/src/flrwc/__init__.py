"""Conjugate points and focusing conditions at FLRW singularities."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateSeed,
    DomainError,
    ExpressionSyntaxError,
    FLRWError,
    InconclusiveTrend,
    QuadratureFailure,
    StepFailure,
    UnknownIdentifier,
    UnsupportedChart,
    WindowTooSmall,
)
from .models import Family, ScaleFactorModel  # noqa: E402
