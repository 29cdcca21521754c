"""Parallel-transported frames, Jacobi tensor fields and conjugate points.

Frame vectors are carried in a *null-adapted static basis*
``(l+, l-, e_2', e_3')`` with ``l± = e_0 ± e_n`` built from the static
orthonormal tetrad ``e_0 = d_t``, ``e_i = d_i / a`` and the unit direction
``n`` of the spatial momentum.  Along an FLRW geodesic transport is a boost
in the ``(e_0, e_n)`` plane, which is diagonal in this basis, so components
keep full relative precision even where the boost rapidity is large.
Inner products and curvature projections are taken in the same basis; the
coordinate components are available on demand.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import rk
from .errors import FLRWError, DegenerateSeed, DomainError, InconclusiveTrend, UnsupportedChart
from .geodesic import GeodesicPath, dlog_dtau_ds, dtau_ds
from .geometry import NormClass

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
# R_hat = R * a**P: one power of a per raised spatial index, minus one per lowered
_sp = np.array([0, 1, 1, 1])
_HAT_POWERS = (_sp[:, None, None, None] - _sp[None, :, None, None]
               - _sp[None, None, :, None] - _sp[None, None, None, :]).astype(float)


def _spatial_basis(n_hat: np.ndarray) -> np.ndarray:
    """Columns n, e2', e3': a right-handed orthonormal triad seeded by the axes."""
    vecs = [n_hat]
    for axis in np.eye(3):
        v = axis - sum(np.dot(axis, w) * w for w in vecs)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            vecs.append(v / nv)
        if len(vecs) == 3:
            break
    return np.column_stack(vecs)


@dataclass(frozen=True)
class NullBasis:
    """Constant change of basis between null-adapted and static hat components."""

    n_hat: np.ndarray
    H: np.ndarray  # hat components of (l+, l-, e2', e3') as columns
    Hinv: np.ndarray
    G: np.ndarray  # metric in the null-adapted basis
    D: np.ndarray  # boost generator in the null-adapted basis
    kron: np.ndarray = field(repr=False)  # transforms flattened hat Riemann

    @classmethod
    def for_direction(cls, Ci) -> "NullBasis":
        Ci = np.asarray(Ci, dtype=float)
        n_hat = Ci / np.linalg.norm(Ci)
        tri = _spatial_basis(n_hat)
        H = np.zeros((4, 4))
        H[0, :2] = 1.0
        H[1:, 0] = tri[:, 0]
        H[1:, 1] = -tri[:, 0]
        H[1:, 2] = tri[:, 1]
        H[1:, 3] = tri[:, 2]
        Hinv = np.linalg.inv(H)
        N = np.zeros((4, 4))
        N[0, 1:] = n_hat
        N[1:, 0] = n_hat
        # exact metric of (l+, l-, e2', e3') for an orthonormal triad
        G = np.zeros((4, 4))
        G[0, 1] = G[1, 0] = -2.0
        G[2, 2] = G[3, 3] = 1.0
        K = np.kron(np.kron(Hinv, H.T), np.kron(H.T, H.T))
        return cls(n_hat, H, Hinv, G, Hinv @ N @ H, K)

    def to_coordinates(self, a, c):
        """Coordinate components of vectors with null-adapted components ``c``
        (4-vectors along the first axis)."""
        hat = self.H @ c
        hat = np.array(hat, dtype=float)
        hat[1:] = hat[1:] / a
        return hat

    def from_hat(self, hat):
        return self.Hinv @ hat

    def riemann(self, m, t) -> np.ndarray:
        """Riemann components R^r_{smn} in the null-adapted basis at ``t``."""
        R_hat = geo.riemann(m, t) * m.a(t) ** _HAT_POWERS
        return (self.kron @ R_hat.ravel()).reshape(4, 4, 4, 4)


def velocity_null_components(path_or_model, spec, t) -> np.ndarray:
    """Null-adapted components (u+, u-, 0, 0) of the geodesic tangent,
    evaluated without cancellation."""
    m = path_or_model
    a = m.a(t)
    C = spec.C
    rC = np.sqrt(C)
    if spec.normclass is NormClass.NULL:
        up, um = rC / a, np.zeros_like(np.asarray(a, dtype=float))
    else:
        root = np.sqrt(C + a * a)
        up = (root + rC) / (2 * a)
        um = a / (2 * (root + rC))
    return np.array([up, um, np.zeros_like(up), np.zeros_like(up)])


def boost_rate(m, spec, t):
    """k(s) with dc/ds = -k D c for parallel transport in s = log(t - t0)."""
    a, da = m.a(t), m.da(t)
    C = spec.C
    return (np.asarray(t) - m.t0) * da * np.sqrt(C) / (a * np.sqrt(C - spec.eps_n * a * a))


# ---------------------------------------------------------------- frames


@dataclass
class FrameField:
    """Frame along a path.  Columns of the 4x4 coefficient matrix are, in
    the null-adapted basis: timelike ``(E0 = u, E1, E2, E3)``; null
    ``(u, l, E2, E3)`` with ``l`` null, ``g(u, l) = -1`` and ``E2, E3``
    spanning the screen.

    Transport obeys ``dc/ds = -k(s) D c`` with a constant diagonal ``D``, so
    ``c(s) = exp(-phi(s) D) c(s_seed)`` where the rapidity ``phi`` is the
    integrated scalar ``dphi/ds = k``.
    """

    path: GeodesicPath
    basis: NullBasis
    solution: rk.DenseSolution = field(repr=False)  # phi(s)
    s_seed: float
    seed: np.ndarray = field(repr=False)  # coefficient matrix at s_seed

    @property
    def normclass(self) -> NormClass:
        return self.path.spec.normclass

    @property
    def legs(self) -> list[int]:
        """Indices of the spatial legs carrying the Jacobi tensor."""
        return [1, 2, 3] if self.normclass is NormClass.TIMELIKE else [2, 3]

    @property
    def expected_gram(self) -> np.ndarray:
        if self.normclass is NormClass.TIMELIKE:
            return ETA.copy()
        g = np.zeros((4, 4))
        g[0, 1] = g[1, 0] = -1.0
        g[2, 2] = g[3, 3] = 1.0
        return g

    def _scales(self, phi):
        d = np.diag(self.basis.D)
        return np.exp(-np.multiply.outer(phi, d))

    def coeffs(self, s) -> np.ndarray:
        """Null-adapted coefficient matrix (4x4, or (m,4,4) for arrays)."""
        phi = self.solution(s)[..., 0]
        return self._scales(phi)[..., :, None] * self.seed

    def coeff_derivative(self, s) -> np.ndarray:
        """dc/ds from the dense derivative of phi."""
        dphi = self.solution.derivative(s)[..., 0]
        d = np.diag(self.basis.D)
        return -(dphi[..., None] * d)[..., :, None] * self.coeffs(s)

    def coordinate_legs(self, t) -> np.ndarray:
        """Coordinate components; column mu is E_mu. Shape (4,4) for scalar t."""
        c = self.coeffs(self.path.s_of(t))
        a = self.path.model.a(t)
        if np.ndim(t) == 0:
            return self.basis.to_coordinates(a, c)
        return np.stack([self.basis.to_coordinates(ai, ci) for ai, ci in zip(a, c)])

    def gram(self, s) -> np.ndarray:
        c = self.coeffs(s)
        return np.einsum("...mi,mn,...nj->...ij", c, self.basis.G, c)

    def sample_s(self) -> np.ndarray:
        return self.solution.x

    def orthonormality_drift(self, s=None) -> float:
        s = self.sample_s() if s is None else s
        return float(np.max(np.abs(self.gram(s) - self.expected_gram)))

    def transport_residual(self) -> float:
        """Relative covariant-derivative residual of every leg at the step
        midpoints, in coordinate components with the chart's Christoffel
        symbols: ``|dE/dtau + Gamma(u, E)| / (|dE/dtau| + |Gamma(u, E)|)``."""
        m, spec = self.path.model, self.path.spec
        x = self.sample_s()
        mids = 0.5 * (x[1:] + x[:-1])
        worst = 0.0
        dc = self.coeff_derivative(mids)
        c = self.coeffs(mids)
        for si, ci, dci in zip(mids, c, dc):
            t = m.t0 + np.exp(si)
            a, da = m.a(t), m.da(t)
            E = self.basis.to_coordinates(a, ci)
            dE_ds = self.basis.to_coordinates(a, dci)
            dE_ds[1:] -= (t - m.t0) * da / a * E[1:]
            dE_dtau = dE_ds / dtau_ds(m, spec, t)
            u = np.concatenate([[np.sqrt(spec.C - spec.eps_n * a * a) / a], np.array(spec.Ci) / a**2])
            GuE = np.einsum("rmn,m,nj->rj", geo.christoffels(m, t), u, E)
            num = np.linalg.norm(dE_dtau + GuE, axis=0)
            den = np.linalg.norm(dE_dtau, axis=0) + np.linalg.norm(GuE, axis=0)
            rel = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
            worst = max(worst, float(np.max(rel)))
        return worst


def initial_frame(path: GeodesicPath, t_seed: float, basis: NullBasis, mixing=None) -> np.ndarray:
    """Gram-Schmidt frame at ``t_seed`` in null-adapted components."""
    m, spec = path.model, path.spec
    a = m.a(t_seed)
    u = velocity_null_components(m, spec, t_seed)
    # static triad (n, e2', e3') from the axes, written exactly in null-adapted
    # components so that transverse legs carry no roundoff in the boost plane
    seeds = [np.array([0.5, -0.5, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.0]), np.array([0.0, 0.0, 0.0, 1.0])]
    G = basis.G

    def ip(x, y):
        return float(x @ G @ y)

    if spec.normclass is NormClass.TIMELIKE:
        legs = [u]
        for s in seeds:
            v = s.copy()
            for e in legs:
                v = v - ip(v, e) / ip(e, e) * e
            nv = ip(v, v)
            if nv < 1e-10:
                continue
            legs.append(v / np.sqrt(nv))
            if len(legs) == 4:
                break
        if len(legs) < 4:
            raise DegenerateSeed("timelike frame seeds collapsed")
        F = np.column_stack(legs)
        if mixing is not None:
            F[:, 1:] = F[:, 1:] @ np.asarray(mixing, dtype=float)
        return F
    # null: auxiliary l proportional to l-, normalised to g(u, l) = -1
    l_vec = np.array([0.0, 1.0, 0.0, 0.0])
    l_vec = l_vec / -ip(u, l_vec)
    screen = []
    for s in seeds:
        v = s + ip(s, l_vec) * u + ip(s, u) * l_vec
        for e in screen:
            v = v - ip(v, e) * e
        nv = ip(v, v)
        if nv < 1e-10:
            continue
        screen.append(v / np.sqrt(nv))
        if len(screen) == 2:
            break
    if len(screen) < 2:
        raise DegenerateSeed("null screen seeds collapsed")
    S = np.column_stack(screen)
    if mixing is not None:
        S = S @ np.asarray(mixing, dtype=float)
    return np.column_stack([u, l_vec, S])


def transport_frame(
    path: GeodesicPath,
    t_seed: float | None = None,
    mixing=None,
    rtol: float = 1e-12,
    atol: float = 1e-13,
) -> FrameField:
    """Seed an orthonormal frame at ``t_seed`` (default: the path's end) and
    parallel transport it over the whole path.  ``mixing`` is an optional
    constant orthogonal matrix applied to the spatial (or screen) legs."""
    m, spec = path.model, path.spec
    if m.kappa != 0.0:
        raise UnsupportedChart("frames are only transported in the flat chart")
    basis = NullBasis.for_direction(spec.Ci)
    t_seed = path.t[-1] if t_seed is None else t_seed
    F0 = initial_frame(path, t_seed, basis, mixing)

    def f(s, y):
        return np.array([boost_rate(m, spec, m.t0 + np.exp(s))])

    s_seed = float(np.log(t_seed - m.t0))
    lo, hi = path.s[0], path.s[-1]
    parts = []
    for end in (lo, hi):
        if abs(end - s_seed) > 0:
            parts.append(rk.solve(f, s_seed, [0.0], end, rtol=rtol, atol=atol, dense_control=True))
    sol = _join(parts) if len(parts) > 1 else parts[0]
    return FrameField(path, basis, sol, s_seed, F0)


def _join(parts: list[rk.DenseSolution]) -> rk.DenseSolution:
    """Concatenate a backward and a forward solution sharing their start."""
    back, fwd = sorted(parts, key=lambda p: p.x[0])
    return _Joined(back, fwd)


class _Joined(rk.DenseSolution):
    def __init__(self, back: rk.DenseSolution, fwd: rk.DenseSolution):
        self.back, self.fwd = back, fwd
        self.x = np.concatenate([back.x, fwd.x[1:]])
        self.y = np.concatenate([back.y, fwd.y[1:]])
        self.k = np.concatenate([back.k, fwd.k])
        self.h = np.concatenate([back.h, fwd.h])
        self.x_start = back.x[-1]
        self.n_rejected = back.n_rejected + fwd.n_rejected

    def _dispatch(self, xq, method):
        xq_arr = np.atleast_1d(np.asarray(xq, dtype=float))
        split = self.back.x[-1]
        out = np.empty((len(xq_arr), self.y.shape[1]))
        lo = xq_arr <= split
        if np.any(lo):
            out[lo] = getattr(self.back, method)(xq_arr[lo])
        if np.any(~lo):
            out[~lo] = getattr(self.fwd, method)(xq_arr[~lo])
        return out[0] if np.ndim(xq) == 0 else out

    def __call__(self, xq):
        return self._dispatch(xq, "__call__")

    def derivative(self, xq):
        return self._dispatch(xq, "derivative")


# ---------------------------------------------------------------- Jacobi tensor


@dataclass
class JacobiTensorStates:
    """Jacobi tensor samples with derived kinematics (arrays over samples)."""

    t2: float
    t: np.ndarray
    tau: np.ndarray
    A: np.ndarray  # (N, n, n)
    DA: np.ndarray  # (N, n, n), tau-derivative
    normclass: NormClass

    @property
    def n(self) -> int:
        return self.A.shape[-1]

    @property
    def detA(self) -> np.ndarray:
        return np.linalg.det(self.A)

    @property
    def B(self) -> np.ndarray:
        """(D_tau A) A^{-1}; NaN where A is singular."""
        out = np.full_like(self.A, np.nan)
        for i, (a, da) in enumerate(zip(self.A, self.DA)):
            if np.linalg.cond(a) < 1e14:
                out[i] = np.linalg.solve(a.T, da.T).T
        return out

    def kinematics(self) -> dict:
        B = self.B
        n = self.n
        theta = np.trace(B, axis1=1, axis2=2)
        sym = 0.5 * (B + np.swapaxes(B, 1, 2))
        sigma = sym - (theta / n)[:, None, None] * np.eye(n)
        omega = 0.5 * (B - np.swapaxes(B, 1, 2))
        return {"B": B, "theta": theta, "sigma": sigma, "omega": omega}

    def kernel_margin(self) -> np.ndarray:
        """Smallest singular value of [A; DA] relative to the largest; the
        kernel condition Ker A ∩ Ker DA = {0} requires this to stay > 0."""
        out = np.empty(len(self.t))
        for i, (a, da) in enumerate(zip(self.A, self.DA)):
            sv = np.linalg.svd(np.vstack([a, da]), compute_uv=False)
            out[i] = sv[-1] / sv[0]
        return out

    def to_csv(self) -> str:
        kin = self.kinematics()
        n = self.n
        cols = ["t", "tau", "detA", "theta", "sigma_norm", "omega_norm"]
        cols += [f"A{i + 1}{j + 1}" for i in range(n) for j in range(n)]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        sn = np.linalg.norm(kin["sigma"], axis=(1, 2))
        on = np.linalg.norm(kin["omega"], axis=(1, 2))
        for k in range(len(self.t)):
            row = [self.t[k], self.tau[k], self.detA[k], kin["theta"][k], sn[k], on[k]]
            row += list(self.A[k].ravel())
            buf.write(",".join(_csv_num(v) for v in row) + "\n")
        return buf.getvalue()


def _csv_num(v: float) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.17g}"


@dataclass
class JacobiSolution:
    """Dense Jacobi tensor field along a path, with A in the frame basis."""

    path: GeodesicPath
    frame: FrameField
    t2: float
    backward: rk.DenseSolution = field(repr=False)
    forward: rk.DenseSolution | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.frame.legs)

    @property
    def s2(self) -> float:
        return float(np.log(self.t2 - self.path.model.t0))

    def _raw(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty((len(s_arr), 2 * self.n * self.n))
        lo = s_arr <= self.s2
        if np.any(lo):
            out[lo] = self.backward(s_arr[lo])
        if np.any(~lo):
            if self.forward is None:
                raise DomainError("Jacobi tensor was not integrated past t2")
            out[~lo] = self.forward(s_arr[~lo])
        return out

    def states(self, t=None) -> JacobiTensorStates:
        """States at the integrator's nodes (default) or at cosmic times ``t``."""
        m, spec = self.path.model, self.path.spec
        if t is None:
            s = self.backward.x
            if self.forward is not None:
                s = np.concatenate([s, self.forward.x[1:]])
        else:
            s = np.log(np.atleast_1d(np.asarray(t, dtype=float)) - m.t0)
        y = self._raw(s)
        n = self.n
        A = y[:, : n * n].reshape(-1, n, n)
        Q = y[:, n * n:].reshape(-1, n, n)
        tt = m.t0 + np.exp(s)
        DA = Q / dtau_ds(m, spec, tt)[:, None, None]
        return JacobiTensorStates(self.t2, tt, self.path.tau_at(tt), A, DA, spec.normclass)

    def A_at(self, t) -> np.ndarray:
        return self.states(t).A

    def coordinate_columns(self, t) -> np.ndarray:
        """Coordinate components of every Jacobi field J_l at ``t``: (N, 4, n)."""
        st = self.states(t)
        legs = self.frame.legs
        E = self.frame.coordinate_legs(st.t)
        if E.ndim == 2:
            E = E[None]
        return np.einsum("Nmk,Nkl->Nml", E[:, :, legs], st.A)

    def jacobi_norm_sq(self, t) -> np.ndarray:
        """g(J_l, J_l) = sum_k g(E_k, J_l)^2 for each column: (N, n)."""
        A = self.states(t).A
        return np.sum(A * A, axis=1)


def tidal_matrix(frame: FrameField, s: float) -> np.ndarray:
    """R_kl = g(E_k, R(E_l, u)u) on the spatial/screen legs."""
    m, spec = frame.path.model, frame.path.spec
    t = m.t0 + np.exp(s)
    c = frame.coeffs(s)
    u = velocity_null_components(m, spec, t)
    Rn = frame.basis.riemann(m, t)
    E = c[:, frame.legs]
    X = np.einsum("rsmn,s,ml,n->rl", Rn, u, E, u)
    return E.T @ frame.basis.G @ X


def screen_curvature_defect(frame: FrameField, s) -> tuple[float, float]:
    """Null case: asymmetry of g(E_a, R(E_b, u)u) and the size of
    g(R(E_a, u)u, u), both relative to the largest tidal entry."""
    m, spec = frame.path.model, frame.path.spec
    asym = orth = 0.0
    for si in np.atleast_1d(s):
        t = m.t0 + np.exp(si)
        c = frame.coeffs(si)
        u = velocity_null_components(m, spec, t)
        Rn = frame.basis.riemann(m, t)
        E = c[:, frame.legs]
        X = np.einsum("rsmn,s,ml,n->rl", Rn, u, E, u)
        T = E.T @ frame.basis.G @ X
        scale = max(float(np.max(np.abs(T))), 1e-300)
        asym = max(asym, float(np.max(np.abs(T - T.T))) / scale)
        orth = max(orth, float(np.max(np.abs(u @ frame.basis.G @ X))) / scale)
    return asym, orth


SCREEN_TOL = 1e-10


def integrate_jacobi_tensor(
    path: GeodesicPath,
    frame: FrameField,
    t2: float,
    forward: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> JacobiSolution:
    """Integrate ``D^2 A + R_gamma A = 0`` from ``A(t2) = 0, D_tau A(t2) = I``
    toward the start of the path (and optionally toward its end).

    Works in ``s = log(t - t0)`` with ``Q = dA/ds``:
    ``dQ/ds = (tau''/tau') Q - tau'^2 R A``.
    """
    m, spec = path.model, path.spec
    s_lo, s_hi = path.s[0], path.s[-1]
    s2 = float(np.log(t2 - m.t0))
    if not s_lo < s2 <= s_hi:
        raise DomainError(f"t2={t2} outside the path range [{path.t[0]}, {path.t[-1]}]")
    n = len(frame.legs)
    nn = n * n

    def f(s, y):
        t = m.t0 + np.exp(s)
        A = y[:nn].reshape(n, n)
        Q = y[nn:].reshape(n, n)
        tp = dtau_ds(m, spec, t)
        R = tidal_matrix(frame, s)
        dQ = dlog_dtau_ds(m, spec, t) * Q - tp * tp * (R @ A)
        return np.concatenate([Q.ravel(), dQ.ravel()])

    y0 = np.concatenate([np.zeros(nn), (dtau_ds(m, spec, t2) * np.eye(n)).ravel()])
    back = rk.solve(f, s2, y0, s_lo, rtol=rtol, atol=atol)
    fwd = None
    if forward and s_hi > s2:
        fwd = rk.solve(f, s2, y0, s_hi, rtol=rtol, atol=atol)
    if spec.normclass is NormClass.NULL:
        asym, orth = screen_curvature_defect(frame, back.x)
        if asym > SCREEN_TOL or orth > SCREEN_TOL:
            raise FLRWError(f"screen tidal operator not closed (asym={asym:.2e}, orth={orth:.2e})")
    return JacobiSolution(path, frame, t2, back, fwd)


# ---------------------------------------------------------------- conjugate points

BASE_EXCLUSION = 1e-6
FIT_DECADES = 8.0
MIN_APPROACH = 1e-6
MIN_R2 = 0.999
MIN_SLOPE = 0.5
FIT_CEILING = 1e-2  # fit window stays below this fraction of t2 - t0
PLATEAU_TOL = 1e-6  # relative spread of |det A| treated as a nonzero limit


@dataclass
class ConjugateEvent:
    t_conj: float
    kind: str  # "InteriorZero" | "SingularLimit"
    detA_evidence: dict
    jacobi_norm_evidence: dict

    def to_dict(self) -> dict:
        return {
            "t_conj": self.t_conj,
            "kind": self.kind,
            "detA_evidence": self.detA_evidence,
            "jacobi_norm_evidence": self.jacobi_norm_evidence,
        }


@dataclass
class ConjugatePointReport:
    t2: float
    events: list[ConjugateEvent]
    diagnostics: dict

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def to_dict(self) -> dict:
        return {
            "t2": self.t2,
            "events": [e.to_dict() for e in self.events],
            "diagnostics": self.diagnostics,
        }


def _det_in_s(sol: JacobiSolution, s):
    n = sol.n
    A = sol._raw(s)[:, : n * n].reshape(-1, n, n)
    return np.linalg.det(A)


def _bisect(sol: JacobiSolution, a: float, b: float, t0: float) -> float:
    fa = _det_in_s(sol, a)[0]
    for _ in range(300):
        mid = 0.5 * (a + b)
        fm = _det_in_s(sol, mid)[0]
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
        ta, tb = t0 + np.exp(a), t0 + np.exp(b)
        if abs(tb - ta) <= 1e-10 * abs(0.5 * (ta + tb)):
            break
    return float(t0 + np.exp(0.5 * (a + b)))


def _min_singular(sol: JacobiSolution, s):
    n = sol.n
    A = sol._raw(s)[:, : n * n].reshape(-1, n, n)
    return np.linalg.svd(A, compute_uv=False)[:, -1]


def detect_conjugate(sol: JacobiSolution, path: GeodesicPath | None = None) -> ConjugatePointReport:
    """Interior zeros of det A below t2 and the singular-limit criterion."""
    path = sol.path if path is None else path
    m = path.model
    t0, t2 = m.t0, sol.t2
    nodes = sol.backward.x  # ascending, last node is s2
    tn = t0 + np.exp(nodes)
    keep = np.abs(tn - t2) >= BASE_EXCLUSION * abs(t2)
    s_nodes = nodes[keep]
    # refine the scan grid so sign changes between sparse nodes are not missed
    s_scan = np.unique(np.concatenate([s_nodes, np.linspace(s_nodes[0], s_nodes[-1], 2001)]))
    det = _det_in_s(sol, s_scan)
    events: list[ConjugateEvent] = []
    sign_idx = np.nonzero(np.sign(det[1:]) * np.sign(det[:-1]) < 0)[0]
    for i in sign_idx:
        tc = _bisect(sol, s_scan[i], s_scan[i + 1], t0)
        events.append(
            ConjugateEvent(tc, "InteriorZero", {"sign_change": True},
                           {"min_norm_sq": float(_min_singular(sol, [np.log(tc - t0)])[0] ** 2)})
        )
    # zeros of even multiplicity: local minima of sigma_min falling to ~0
    smin = _min_singular(sol, s_scan)
    scale = float(np.max(smin)) if len(smin) else 1.0
    for i in range(1, len(smin) - 1):
        if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1] and smin[i] < 1e-9 * scale:
            tc = float(t0 + np.exp(s_scan[i]))
            if all(abs(tc - e.t_conj) > 1e-6 * tc for e in events):
                events.append(ConjugateEvent(tc, "InteriorZero", {"sign_change": False},
                                             {"min_norm_sq": float(smin[i] ** 2)}))

    diag: dict = {"t_lowest": float(tn[0]), "n_nodes": int(len(nodes))}
    gap = tn[0] - t0
    if gap > MIN_APPROACH * (t2 - t0):
        diag["singular_limit"] = {"attempted": False, "reason": "singularity not approached"}
    else:
        s_fit_lo = float(np.log(gap))
        s_fit_hi = min(s_fit_lo + FIT_DECADES * np.log(10.0), float(np.log(FIT_CEILING * (t2 - t0))))
        s_fit = np.linspace(s_fit_lo, s_fit_hi, 81)
        d = np.abs(_det_in_s(sol, s_fit))
        monotone = bool(np.all(np.diff(d) > 0))
        with np.errstate(divide="ignore"):
            ld = np.log(d)
        ok = np.isfinite(ld)
        slope = intercept = r2 = float("nan")
        if np.count_nonzero(ok) >= 3:
            slope, intercept = np.polyfit(s_fit[ok], ld[ok], 1)
            resid = ld[ok] - (slope * s_fit[ok] + intercept)
            ss_tot = float(np.sum((ld[ok] - ld[ok].mean()) ** 2))
            r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
        good_fit = bool(r2 >= MIN_R2)
        evidence = {
            "fit_slope": float(slope),
            "fit_intercept": float(intercept),
            "fit_r2": float(r2),
            "monotone": monotone,
            "window_t": [float(t0 + np.exp(s_fit_lo)), float(t0 + np.exp(s_fit_hi))],
            "detA_at_lowest": float(d[0]),
            "detA_extrapolated_t_min": float(np.exp(slope * np.log(m.t_min - t0) + intercept))
            if np.isfinite(slope) else float("nan"),
        }
        diag["singular_limit"] = {"attempted": True, **evidence}
        deep = d[s_fit <= s_fit_lo + 2.0 * np.log(10.0)]  # lowest two decades
        plateau = bool(np.all(deep > 0) and np.ptp(deep) <= PLATEAU_TOL * np.max(deep))
        if plateau:
            # det A settles at a nonzero value: conclusively no singular limit
            diag["singular_limit"]["reason"] = "det A tends to a nonzero limit"
        elif not monotone and not good_fit:
            raise InconclusiveTrend(
                f"det A trend toward t0 neither monotone nor power-law (R^2={r2:.4f})"
            )
        if monotone and good_fit and slope >= MIN_SLOPE:
            s_low = np.array([s_fit_lo])
            norms = sol.jacobi_norm_sq(t0 + np.exp(s_low))[0]
            smin_low = float(_min_singular(sol, s_low)[0])
            frame_c = sol.frame.coeffs(s_fit_lo)
            gram = frame_c.T @ sol.frame.basis.G @ frame_c
            perp = float(np.max(np.abs(gram[0, sol.frame.legs])))
            events.append(
                ConjugateEvent(
                    float(t0),
                    "SingularLimit",
                    evidence,
                    {
                        "t": float(t0 + np.exp(s_fit_lo)),
                        "column_norm_sq": [float(v) for v in norms],
                        "min_norm_sq": smin_low**2,
                        "perpendicularity": perp,
                    },
                )
            )
    return ConjugatePointReport(t2, sorted(events, key=lambda e: e.t_conj), diag)
