"""Scale-factor families a(t) with exact first and second derivatives."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import DomainError

# Fraction of (t1 - t0) below which nothing is ever evaluated.
T_MIN_FRACTION = 1e-12


class Family(str, enum.Enum):
    POWER_LAW = "power-law"
    LOG_CORRECTED = "log-corrected"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ScaleFactorModel:
    """An FLRW background: scale factor, spatial curvature and the
    singularity/reference times.

    Built-in families put the singularity at ``t0 = 0``.  ``t1`` is the upper
    limit of the condition integrals; the power law is normalised to
    ``a(t1) = 1`` when ``t1 = 1`` (the default).
    """

    family: Family
    epsilon: float | None = None
    kappa: float = 0.0
    t0: float = 0.0
    t1: float = 1.0
    expression: ex.Expr | None = None
    source: str | None = None
    _d1: ex.Expr | None = field(default=None, repr=False, compare=False)
    _d2: ex.Expr | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if not np.isfinite(self.kappa):
            raise DomainError("kappa must be finite")
        if not self.t1 > self.t0:
            raise DomainError(f"need t1 > t0, got t0={self.t0}, t1={self.t1}")
        if fam is Family.CUSTOM:
            if self.expression is None:
                raise DomainError("custom model needs an expression")
            d1 = ex.differentiate(self.expression)
            object.__setattr__(self, "_d1", d1)
            object.__setattr__(self, "_d2", ex.differentiate(d1))
        else:
            if self.epsilon is None or not self.epsilon > 0:
                raise DomainError(f"epsilon must be > 0 for {fam.value}, got {self.epsilon}")
            if self.t0 != 0.0:
                raise DomainError("built-in families have t0 = 0")
            if fam is Family.LOG_CORRECTED and not self.t1 < 1.0:
                raise DomainError("log-corrected scale factor needs t1 < 1")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def power_law(cls, epsilon: float, kappa: float = 0.0, t1: float = 1.0) -> "ScaleFactorModel":
        return cls(Family.POWER_LAW, epsilon=float(epsilon), kappa=float(kappa), t1=float(t1))

    @classmethod
    def log_corrected(cls, epsilon: float, kappa: float = 0.0, t1: float = 0.5) -> "ScaleFactorModel":
        return cls(Family.LOG_CORRECTED, epsilon=float(epsilon), kappa=float(kappa), t1=float(t1))

    @classmethod
    def custom(
        cls,
        source: str,
        kappa: float = 0.0,
        t0: float = 0.0,
        t1: float = 1.0,
        check_singular: bool = True,
    ) -> "ScaleFactorModel":
        """Model from a scale-factor expression in ``t``.

        Rejects expressions that are non-positive or non-finite on a sample of
        ``(t0, t1]`` and, with ``check_singular``, ones that do not vanish as
        ``t -> t0``.
        """
        tree = ex.parse(source)
        m = cls(Family.CUSTOM, kappa=float(kappa), t0=float(t0), t1=float(t1),
                expression=tree, source=source)
        span = m.t1 - m.t0
        probe = m.t0 + span * np.logspace(np.log10(T_MIN_FRACTION), 0.0, 61)
        a = ex.evaluate(tree, probe)
        if not np.all(np.isfinite(a)) or not np.all(a > 0):
            raise DomainError(f"scale factor {source!r} is not finite and positive on (t0, t1]")
        if check_singular:
            # a ~ (t - t0)^q with q > 0 near the singularity
            slope = np.log(a[9] / a[0]) / np.log((probe[9] - m.t0) / (probe[0] - m.t0))
            if not (a[0] < a[-1] and slope > 1e-2):
                raise DomainError(f"scale factor {source!r} does not vanish as t -> t0")
        return m

    # -- derived scalars ------------------------------------------------------

    @property
    def p(self) -> float:
        """Power 1/epsilon (built-ins only)."""
        return 1.0 / self.epsilon

    @property
    def t_min(self) -> float:
        return self.t0 + T_MIN_FRACTION * (self.t1 - self.t0)

    @property
    def label(self) -> str:
        if self.family is Family.CUSTOM:
            return f"custom[{self.source}]"
        return f"{self.family.value}(eps={self.epsilon:g})"

    def _check(self, t):
        if isinstance(t, float):  # fast path for the integrators
            if not (self.t0 < t < np.inf):
                raise DomainError(f"t must satisfy t > t0 = {self.t0}")
            if self.family is Family.LOG_CORRECTED and t >= 1.0:
                raise DomainError("log-corrected scale factor is only valid for 0 < t < 1")
            return t
        t = np.asarray(t, dtype=float)
        if np.any(t <= self.t0) or np.any(~np.isfinite(t)):
            raise DomainError(f"t must satisfy t > t0 = {self.t0}")
        if self.family is Family.LOG_CORRECTED and np.any(t >= 1.0):
            raise DomainError("log-corrected scale factor is only valid for 0 < t < 1")
        return t

    def _finish(self, t, value, what):
        if isinstance(value, float):
            if not np.isfinite(value):
                raise DomainError(f"{what} is not finite at the requested t")
            return float(value)
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise DomainError(f"{what} is not finite at the requested t")
        return value if value.ndim else float(value)

    def a(self, t):
        t = self._check(t)
        with np.errstate(all="ignore"):
            match self.family:
                case Family.POWER_LAW:
                    v = t**self.p
                case Family.LOG_CORRECTED:
                    v = -(t**self.p) * np.log(t)
                case _:
                    v = ex.evaluate(self.expression, t)
        if not np.all(np.asarray(v) > 0):
            raise DomainError("scale factor is not positive at the requested t")
        return self._finish(t, v, "a(t)")

    def da(self, t):
        t = self._check(t)
        p = self.p if self.family is not Family.CUSTOM else None
        with np.errstate(all="ignore"):
            match self.family:
                case Family.POWER_LAW:
                    v = p * t ** (p - 1.0)
                case Family.LOG_CORRECTED:
                    v = -(t ** (p - 1.0)) * (p * np.log(t) + 1.0)
                case _:
                    v = ex.evaluate(self._d1, t)
        return self._finish(t, v, "da/dt")

    def dda(self, t):
        t = self._check(t)
        p = self.p if self.family is not Family.CUSTOM else None
        with np.errstate(all="ignore"):
            match self.family:
                case Family.POWER_LAW:
                    v = p * (p - 1.0) * t ** (p - 2.0)
                case Family.LOG_CORRECTED:
                    v = -(t ** (p - 2.0)) * (p * (p - 1.0) * np.log(t) + 2.0 * p - 1.0)
                case _:
                    v = ex.evaluate(self._d2, t)
        return self._finish(t, v, "d2a/dt2")

    def derivatives(self, t):
        """(a, da/dt, d2a/dt2) at ``t``."""
        return self.a(t), self.da(t), self.dda(t)

    def curvature_combo(self, t):
        """ä/a - ȧ²/a² - κ/a², in closed form for the built-in families."""
        t = self._check(t)
        k = self.kappa
        with np.errstate(all="ignore"):
            match self.family:
                case Family.POWER_LAW:
                    p = self.p
                    v = -(p + k * t ** (2.0 - 2.0 * p)) / t**2
                case Family.LOG_CORRECTED:
                    p = self.p
                    L = np.log(t)
                    v = (-p * L**2 - L - 1.0) / (t**2 * L**2) - k / (t ** (2.0 * p) * L**2)
                case _:
                    a = self.a(t)
                    v = self.dda(t) / a - (self.da(t) / a) ** 2 - k / a**2
        return self._finish(t, v, "curvature combination")


def eval_a(m: ScaleFactorModel, t):
    return m.a(t)


def eval_da(m: ScaleFactorModel, t):
    return m.da(t)


def eval_dda(m: ScaleFactorModel, t):
    return m.dda(t)


def curvature_scalar_combo(m: ScaleFactorModel, t):
    return m.curvature_combo(t)


def parse_scale_factor(source: str) -> ex.Expr:
    return ex.parse(source)
