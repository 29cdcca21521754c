"""Flat-chart FLRW geometry: metric, Christoffel symbols, Riemann tensor and
the tidal operator R(v, u)u, plus a finite-difference oracle.

Index convention: ``R[r, s, m, n] = R^r_{s m n}`` with
``R(X, Y)Z = R^r_{s m n} Z^s X^m Y^n``.  Only the cosmic-time derivative is
non-zero for FLRW, so the oracle differentiates along t alone.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import UnsupportedChart
from .models import ScaleFactorModel


class NormClass(str, enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"

    @property
    def eps_n(self) -> float:
        return -1.0 if self is NormClass.TIMELIKE else 0.0

    @property
    def screen_dim(self) -> int:
        return 3 if self is NormClass.TIMELIKE else 2


def _require_flat(m: ScaleFactorModel):
    if m.kappa != 0.0:
        raise UnsupportedChart(f"Cartesian FLRW chart needs kappa = 0, got {m.kappa}")


def metric_tensor(m: ScaleFactorModel, t: float) -> np.ndarray:
    _require_flat(m)
    a = m.a(t)
    return np.diag([-1.0, a * a, a * a, a * a])


def metric(m: ScaleFactorModel, t: float, v, w) -> float:
    """g(v, w) at cosmic time ``t``; the chart is spatially homogeneous so the
    spatial coordinates of the point do not enter."""
    _require_flat(m)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    a2 = m.a(t) ** 2
    return float(-v[0] * w[0] + a2 * np.dot(v[1:], w[1:]))


def christoffels(m: ScaleFactorModel, t: float) -> np.ndarray:
    """``G[r, m, n] = Gamma^r_{m n}``."""
    _require_flat(m)
    a, da = m.a(t), m.da(t)
    G = np.zeros((4, 4, 4))
    for i in range(1, 4):
        G[0, i, i] = a * da
        G[i, 0, i] = G[i, i, 0] = da / a
    return G


def riemann(m: ScaleFactorModel, t: float) -> np.ndarray:
    _require_flat(m)
    a, da, dda = m.derivatives(t)
    R = np.zeros((4, 4, 4, 4))
    for i in range(1, 4):
        R[0, i, 0, i] = a * dda
        R[0, i, i, 0] = -a * dda
        R[i, 0, i, 0] = -dda / a
        R[i, 0, 0, i] = dda / a
        for j in range(1, 4):
            if i != j:
                R[i, j, i, j] = da * da
                R[i, j, j, i] = -da * da
    return R


def curvature_operator(m: ScaleFactorModel, t: float, u, v) -> np.ndarray:
    """R(v, u)u for tangent vectors at time ``t``; ``v`` may carry extra
    trailing axes (e.g. a 4xk matrix of column vectors)."""
    R = riemann(m, t)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.einsum("rsmn,s,m...,n->r...", R, u, v, u)


def ricci_along(m: ScaleFactorModel, t, C: float, normclass: NormClass):
    """-Ric(u, u) for a geodesic with conserved momentum ``C``; chart free,
    so any kappa is accepted."""
    normclass = NormClass(normclass)
    a = m.a(t)
    null_part = 2.0 * (C / a**2) * m.curvature_combo(t)
    if normclass is NormClass.NULL:
        return null_part
    return 3.0 * m.dda(t) / a + null_part


# ----------------------------------------------------------------- FD oracle


def _fd_step(t: float) -> float:
    return 1e-5 * max(1.0, abs(t))


def fd_christoffels(m: ScaleFactorModel, t: float) -> np.ndarray:
    """Christoffel symbols from central differences of the metric."""
    h = _fd_step(t)
    dg = np.zeros((4, 4, 4))  # dg[c, a, b] = d_c g_ab
    dg[0] = (metric_tensor(m, t + h) - metric_tensor(m, t - h)) / (2 * h)
    ginv = np.linalg.inv(metric_tensor(m, t))
    # Gamma^r_{mn} = 1/2 g^{rs} (d_m g_sn + d_n g_sm - d_s g_mn)
    term = np.einsum("msn->smn", dg) + np.einsum("nsm->smn", dg) - dg
    return 0.5 * np.einsum("rs,smn->rmn", ginv, term)


def riemann_from_christoffels(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """``dG[c, r, m, n] = d_c Gamma^r_{mn}``."""
    # R^r_{smn} = d_m G^r_{ns} - d_n G^r_{ms} + G^r_{ml} G^l_{ns} - G^r_{nl} G^l_{ms}
    d1 = np.einsum("mrns->rsmn", dG)
    d2 = np.einsum("nrms->rsmn", dG)
    q1 = np.einsum("rml,lns->rsmn", G, G)
    q2 = np.einsum("rnl,lms->rsmn", G, G)
    return d1 - d2 + q1 - q2


def fd_riemann(m: ScaleFactorModel, t: float) -> np.ndarray:
    """Riemann tensor from central differences of the oracle Christoffels."""
    h = _fd_step(t)
    dG = np.zeros((4, 4, 4, 4))
    dG[0] = (fd_christoffels(m, t + h) - fd_christoffels(m, t - h)) / (2 * h)
    return riemann_from_christoffels(fd_christoffels(m, t), dG)


def fd_curvature_operator(m: ScaleFactorModel, t: float, u, v) -> np.ndarray:
    return np.einsum("rsmn,s,m,n->r", fd_riemann(m, t), u, v, u)
