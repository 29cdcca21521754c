"""Timelike and null geodesics of the flat FLRW chart.

The geodesic is integrated in ``s = log(t - t0)`` using the first integrals
``u^i = C_i / a^2`` and ``u^0 = sqrt(C - eps_n a^2) / a``: tau and x^i are
quadrature variables, which keeps the system regular as ``t -> t0``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import quadrature as quad
from . import rk
from .errors import DomainError, UnsupportedChart
from .geometry import NormClass
from .models import ScaleFactorModel

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


@dataclass(frozen=True)
class GeodesicSpec:
    normclass: NormClass
    Ci: tuple[float, float, float]
    t_start: float
    t_end: float
    Di: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "normclass", NormClass(self.normclass))
        object.__setattr__(self, "Ci", tuple(float(c) for c in self.Ci))
        object.__setattr__(self, "Di", tuple(float(d) for d in self.Di))
        if len(self.Ci) != 3 or len(self.Di) != 3:
            raise ValueError("Ci and Di need three components")
        if not self.C > 0:
            raise DomainError("geodesic must be non-comoving (C > 0)")
        if not self.t_start < self.t_end:
            raise DomainError(f"need t_start < t_end, got {self.t_start}, {self.t_end}")

    @classmethod
    def canonical(cls, normclass, C: float, t_start: float, t_end: float) -> "GeodesicSpec":
        """Motion along x^1, the direction used by the radiation example."""
        return cls(NormClass(normclass), (float(np.sqrt(C)), 0.0, 0.0), t_start, t_end)

    @property
    def C(self) -> float:
        return float(sum(c * c for c in self.Ci))

    @property
    def eps_n(self) -> float:
        return self.normclass.eps_n


def four_velocity(m: ScaleFactorModel, spec: GeodesicSpec, t):
    """u^mu at cosmic time(s) ``t`` from the first integrals; shape (..., 4)."""
    t = np.asarray(t, dtype=float)
    a = m.a(t)
    u0 = np.sqrt(spec.C - spec.eps_n * a**2) / a
    ui = np.multiply.outer(1.0 / a**2, np.array(spec.Ci))
    return np.concatenate([np.asarray(u0)[..., None], ui], axis=-1)


def dtau_dt(m: ScaleFactorModel, spec: GeodesicSpec, t):
    a = m.a(t)
    return a / np.sqrt(spec.C - spec.eps_n * a**2)


def dtau_ds(m: ScaleFactorModel, spec: GeodesicSpec, t):
    """d tau / d log(t - t0)."""
    return (np.asarray(t) - m.t0) * dtau_dt(m, spec, t)


def dlog_dtau_ds(m: ScaleFactorModel, spec: GeodesicSpec, t):
    """d/ds log(d tau/ds)."""
    a, da = m.a(t), m.da(t)
    C = spec.C
    return 1.0 + (np.asarray(t) - m.t0) * (da / a) * C / (C - spec.eps_n * a**2)


def _rhs(m: ScaleFactorModel, spec: GeodesicSpec):
    Ci = np.array(spec.Ci)

    def f(s, y):
        t = m.t0 + np.exp(s)
        a = m.a(t)
        root = np.sqrt(spec.C - spec.eps_n * a * a)
        dt = t - m.t0
        return np.concatenate([[dt * a / root], dt * Ci / (a * root)])

    return f


@dataclass
class GeodesicPath:
    """Sampled geodesic: one row per accepted step in ``s = log(t - t0)``."""

    model: ScaleFactorModel
    spec: GeodesicSpec
    solution: rk.DenseSolution = field(repr=False)
    tau_anchored: bool
    x_anchored: bool

    @property
    def s(self) -> np.ndarray:
        return self.solution.x

    @property
    def t(self) -> np.ndarray:
        return self.model.t0 + np.exp(self.solution.x)

    @property
    def tau(self) -> np.ndarray:
        return self.solution.y[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.solution.y[:, 1:4]

    @property
    def u(self) -> np.ndarray:
        return four_velocity(self.model, self.spec, self.t)

    def s_of(self, t):
        return np.log(np.asarray(t, dtype=float) - self.model.t0)

    def state_at(self, t):
        """(tau, x^i, u^mu) interpolated at cosmic time(s) ``t``."""
        y = self.solution(self.s_of(t))
        return y[..., 0], y[..., 1:4], four_velocity(self.model, self.spec, t)

    def tau_at(self, t):
        return self.solution(self.s_of(t))[..., 0]

    def t_at_tau(self, tau: float) -> float:
        """Invert tau(t) by bisection on the dense solution (tau is monotone)."""
        lo, hi = self.s[0], self.s[-1]
        ta, tb = self.solution(lo)[0], self.solution(hi)[0]
        if not ta <= tau <= tb:
            raise DomainError(f"tau={tau} outside [{ta}, {tb}]")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.solution(mid)[0] < tau:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, abs(mid)):
                break
        return float(self.model.t0 + np.exp(0.5 * (lo + hi)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,t,x1,x2,x3,u0,u1,u2,u3\n")
        rows = np.column_stack([self.tau, self.t, self.x, self.u])
        for row in rows:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def tau_anchor(m: ScaleFactorModel, spec: GeodesicSpec) -> quad.ImproperResult:
    """``∫_{t0}^{t_start} dtau/dt dt`` on a grid graded toward the singularity."""
    return quad.improper_integral(
        lambda t: dtau_dt(m, spec, t), m.t0, spec.t_start, m.t_min
    )


def x_anchor(m: ScaleFactorModel, spec: GeodesicSpec) -> quad.ImproperResult:
    """``∫_{t0}^{t_start} dx/dt dt`` per unit C_i (converges only when 1/a is integrable)."""

    def g(t):
        a = m.a(t)
        return 1.0 / (a * np.sqrt(spec.C - spec.eps_n * a**2))

    return quad.improper_integral(g, m.t0, spec.t_start, m.t_min)


def integrate_geodesic(
    m: ScaleFactorModel,
    spec: GeodesicSpec,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> GeodesicPath:
    """Integrate from ``t_start`` to ``t_end``.

    tau is anchored so that tau -> 0 at the singularity, and x^i so that
    x^i -> D_i there, whenever the corresponding integral converges;
    otherwise the value at ``t_start`` is used as origin and the flag on the
    returned path is cleared.
    """
    if m.kappa != 0.0:
        raise UnsupportedChart("geodesics are only integrated in the flat chart")
    if spec.t_start <= m.t_min:
        raise DomainError(f"t_start must exceed the evaluation floor {m.t_min:g}")
    ta = tau_anchor(m, spec)
    xa = x_anchor(m, spec)
    tau0 = ta.value if ta.converged else 0.0
    x0 = np.array(spec.Di) + (np.array(spec.Ci) * xa.value if xa.converged else 0.0)
    s0 = float(np.log(spec.t_start - m.t0))
    s1 = float(np.log(spec.t_end - m.t0))
    sol = rk.solve(_rhs(m, spec), s0, np.concatenate([[tau0], x0]), s1, rtol=rtol, atol=atol, dense_control=True)
    return GeodesicPath(m, spec, sol, tau_anchored=ta.converged, x_anchored=xa.converged)


# ------------------------------------------------------------ closed forms


def radiation_closed_forms(t, t2: float = 1.0) -> dict:
    """Radiation model (a = sqrt(t), kappa = 0), timelike, C = 1, motion along
    x^1: proper time, x^1 and the transverse Jacobi component h3 for a field
    vanishing at t2."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or t2 <= 0:
        raise DomainError("radiation closed forms need t >= 0 and t2 > 0")
    rt = np.sqrt(t)
    tau = np.sqrt(t + t * t) - np.arcsinh(rt)
    x1 = 2.0 * np.arcsinh(rt)
    h3 = -2.0 * np.sqrt(t2) * (np.arcsinh(np.sqrt(t2)) - np.arcsinh(rt))
    return {"tau": tau, "x1": x1, "h3": h3}


# ------------------------------------------------------------ brute-force variation


def _geodesic_ode(m: ScaleFactorModel):
    """Second-order geodesic equation in affine parameter, state (x^mu, u^mu)."""

    def f(tau, y):
        G = geo.christoffels(m, y[0])
        u = y[4:]
        return np.concatenate([u, -np.einsum("rmn,m,n->r", G, u, u)])

    return f


def shoot(m: ScaleFactorModel, x_base, u_base, tau_base: float, tau_targets, rtol=1e-13, atol=1e-15):
    """Positions x^mu(tau) of the geodesic through ``x_base`` with velocity
    ``u_base`` at ``tau_base``."""
    tau_targets = np.asarray(tau_targets, dtype=float)
    y0 = np.concatenate([x_base, u_base])
    out = np.empty((len(tau_targets), 4))
    below = tau_targets < tau_base
    f = _geodesic_ode(m)
    for mask, end in ((below, np.min(tau_targets, initial=tau_base)),
                      (~below, np.max(tau_targets, initial=tau_base))):
        if not np.any(mask) or end == tau_base:
            out[mask] = x_base
            continue
        sol = rk.solve(f, tau_base, y0, end, rtol=rtol, atol=atol)
        out[mask] = sol(tau_targets[mask])[:, :4]
    return out


def vary_geodesic(
    m: ScaleFactorModel,
    spec: GeodesicSpec,
    direction,
    h: float,
    t_base: float,
    tau_targets,
    path: GeodesicPath | None = None,
) -> np.ndarray:
    """Central-difference variation field ``(Gamma(+h) - Gamma(-h)) / 2h``.

    Both neighbours start at the base point ``gamma(t_base)`` with velocity
    ``u +- h * direction`` (so ``J = 0`` and ``D_tau J = direction`` there) and
    are sampled at the affine parameters ``tau_targets``.  Returns coordinate
    components, shape (len(tau_targets), 4).
    """
    if path is None:
        path = integrate_geodesic(m, spec)
    tau_b, x_b, u_b = path.state_at(t_base)
    x_base = np.concatenate([[t_base], x_b])
    w = np.asarray(direction, dtype=float)
    if not np.any(w):
        return np.zeros((len(np.atleast_1d(tau_targets)), 4))
    plus = shoot(m, x_base, u_b + h * w, float(tau_b), tau_targets)
    minus = shoot(m, x_base, u_b - h * w, float(tau_b), tau_targets)
    return (plus - minus) / (2.0 * h)
