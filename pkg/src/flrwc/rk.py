"""Dormand-Prince 5(4) integrator with PI step-size control and the
4th-order continuous extension for dense output.

Works in either direction of the independent variable.  The solution object
keeps every accepted step so it can be evaluated (and differentiated)
anywhere inside the integrated range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepFailure

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and embedded 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_P_MID = _P @ (0.5 ** np.arange(1, 5))
_DP_MID = _P @ (np.arange(1, 5) * 0.5 ** np.arange(0, 4))

SAFETY = 0.9
BETA = 0.04  # PI memory exponent
ALPHA = 0.2 - 0.75 * BETA
MIN_FACTOR, MAX_FACTOR = 0.2, 10.0


@dataclass
class DenseSolution:
    """Accepted steps of an integration, ordered by increasing ``x``."""

    x: np.ndarray  # (n,) step nodes
    y: np.ndarray  # (n, dim) states at the nodes
    k: np.ndarray  # (n-1, 7, dim) stage derivatives of each step
    h: np.ndarray  # (n-1,) signed step sizes in integration order
    x_start: float  # where integration began (an end of ``x``)
    n_rejected: int = 0

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    @property
    def n_steps(self) -> int:
        return len(self.h)

    def _locate(self, xq):
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        lo, hi = self.x[0], self.x[-1]
        span = hi - lo
        tol = 1e-12 * max(abs(span), abs(hi), 1e-300)
        if np.any(xq < lo - tol) or np.any(xq > hi + tol):
            raise ValueError(f"query outside integrated range [{lo}, {hi}]")
        xq = np.clip(xq, lo, hi)
        idx = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, len(self.x) - 2)
        return xq, idx

    def _step_origin(self, idx):
        # steps are stored ascending; a backward integration started at the right end
        forward = self.h[0] > 0 if len(self.h) else True
        return idx if forward else idx + 1

    def __call__(self, xq):
        """Interpolated state(s) at ``xq``; shape (dim,) or (m, dim)."""
        scalar = np.ndim(xq) == 0
        xq, idx = self._locate(xq)
        org = self._step_origin(idx)
        h = self._h_asc(idx)
        theta = (xq - self.x[org]) / h
        powers = np.stack([theta, theta**2, theta**3, theta**4], axis=1)  # (m, 4)
        coef = powers @ _P.T  # (m, 7)
        out = self.y[org] + h[:, None] * np.einsum("ms,msd->md", coef, self.k[idx])
        return out[0] if scalar else out

    def derivative(self, xq):
        """d y / d x of the continuous extension."""
        scalar = np.ndim(xq) == 0
        xq, idx = self._locate(xq)
        org = self._step_origin(idx)
        h = self._h_asc(idx)
        theta = (xq - self.x[org]) / h
        dpow = np.stack([np.ones_like(theta), 2 * theta, 3 * theta**2, 4 * theta**3], axis=1)
        coef = dpow @ _P.T
        out = np.einsum("ms,msd->md", coef, self.k[idx])
        return out[0] if scalar else out

    def _h_asc(self, idx):
        return self.h[idx]


def _rms(v):
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(fun, x0, y, f, direction, span, rtol, atol) -> float:
    """Starting step from first- and second-derivative estimates (Hairer,
    Norsett & Wanner, Sec. II.4)."""
    sc = atol + rtol * np.abs(y)
    d0, d1 = _rms(y / sc), _rms(f / sc)
    h_a = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h_a = min(h_a, span)
    f1 = np.asarray(fun(x0 + direction * h_a, y + direction * h_a * f), dtype=float)
    d2 = _rms((f1 - f) / sc) / h_a if h_a > 0 else 0.0
    if max(d1, d2) <= 1e-15:
        h_b = max(1e-6, 1e-3 * h_a)
    else:
        h_b = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h_a, h_b, span)


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    x0: float,
    y0,
    x1: float,
    rtol: float = 1e-10,
    atol: float | np.ndarray = 1e-12,
    h0: float | None = None,
    max_steps: int = 200_000,
    dense_control: bool = False,
) -> DenseSolution:
    """Integrate ``y' = fun(x, y)`` from ``x0`` to ``x1``.

    ``dense_control`` also bounds the defect of the continuous extension at
    the step midpoint (one extra evaluation per step).  The embedded estimate
    alone under-reports interpolation error on quadrature-like components.
    """
    y = np.array(y0, dtype=float)
    direction = 1.0 if x1 >= x0 else -1.0
    span = abs(x1 - x0)
    atol = np.broadcast_to(np.asarray(atol, dtype=float), y.shape)
    f = np.asarray(fun(x0, y), dtype=float)

    if h0 is None:
        h0 = _initial_step(fun, x0, y, f, direction, span, rtol, atol)
    h = direction * min(abs(h0), span) if span > 0 else 0.0

    xs, ys, ks, hs = [x0], [y.copy()], [], []
    x = x0
    err_prev = 1e-4
    n_rej = 0
    K = np.empty((7, y.size))
    while direction * (x1 - x) > 0:
        if len(hs) >= max_steps:
            raise StepFailure(f"exceeded {max_steps} steps at x={x}")
        if abs(h) < 1e-14 * max(abs(x), 1.0):
            raise StepFailure(f"step size underflow at x={x}")
        if direction * (x + h - x1) > 0 or abs(x1 - (x + h)) < 1e-12 * abs(h):
            h = x1 - x
        rejected = False
        while True:
            K[0] = f
            for s in range(1, 7):
                dy = np.dot(_A[s], K[:s]) if s else 0.0
                K[s] = fun(x + _C[s] * h, y + h * dy)
            y_new = y + h * np.dot(_B[:6], K[:6])
            err_vec = h * np.dot(_E, K)
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(err_vec / sc)
            if dense_control and np.isfinite(err) and err <= 1.0:
                y_mid = y + h * np.dot(_P_MID, K)
                defect = h * (np.asarray(fun(x + 0.5 * h, y_mid), dtype=float) - np.dot(_DP_MID, K))
                err = max(err, _rms(defect / sc))
            if not np.isfinite(err):
                h *= 0.25
                rejected = True
                n_rej += 1
                if abs(h) < 1e-14 * max(abs(x), 1.0):
                    raise StepFailure(f"non-finite derivative near x={x}")
                continue
            if err <= 1.0:
                break
            h *= max(MIN_FACTOR, SAFETY * err ** (-ALPHA))
            rejected = True
            n_rej += 1
            if abs(h) < 1e-14 * max(abs(x), 1.0):
                raise StepFailure(f"cannot meet tolerance near x={x}")
        x_new = x + h
        xs.append(x_new)
        ys.append(y_new.copy())
        ks.append(K.copy())
        hs.append(h)
        # PI controller
        if err == 0.0:
            fac = MAX_FACTOR
        else:
            fac = SAFETY * err ** (-ALPHA) * err_prev**BETA
            fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
        if rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        x, y, f = x_new, y_new, K[6].copy()
        h *= fac

    xs_a = np.array(xs)
    ys_a = np.array(ys)
    ks_a = np.array(ks) if ks else np.zeros((0, 7, y.size))
    hs_a = np.array(hs)
    if direction < 0:
        xs_a, ys_a = xs_a[::-1], ys_a[::-1]
        ks_a, hs_a = ks_a[::-1], hs_a[::-1]
    return DenseSolution(xs_a, ys_a, ks_a, hs_a, x_start=x0, n_rejected=n_rej)
