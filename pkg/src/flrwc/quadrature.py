"""Composite Gauss-Legendre quadrature on grids graded geometrically toward
an integrable (or divergent) endpoint singularity, with the increment-based
convergence/divergence decision used throughout the package.

The singular endpoint is never evaluated: panel edges sit at
``t0 + (t_hi - t0) * ratio**-j`` and nodes are interior to each panel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

NODES = 16
RATIO = 4.0


class Trend(str, enum.Enum):
    CONVERGES = "ConvergesFinite"
    PLUS_INF = "DivergesToPlusInfinity"
    MINUS_INF = "DivergesToMinusInfinity"
    INCONCLUSIVE = "Inconclusive"


@lru_cache(maxsize=None)
def gauss_legendre(n: int = NODES) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def graded_edges(t0: float, t_hi: float, levels: int, ratio: float = RATIO) -> np.ndarray:
    """Descending panel edges ``t_hi = e_0 > e_1 > ... > e_levels > t0``."""
    return t0 + (t_hi - t0) * ratio ** -np.arange(levels + 1, dtype=float)


def _panel_nodes(lo, hi, n=NODES):
    """Nodes/weights for every panel [lo_j, hi_j]; arrays of shape (P, n)."""
    x, w = gauss_legendre(n)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def panel_integrals(f: Callable, edges: np.ndarray, n: int = NODES) -> np.ndarray:
    """``∫_{e_{j+1}}^{e_j} f`` for each consecutive pair of descending edges."""
    nodes, weights = _panel_nodes(edges[1:], edges[:-1], n)
    return np.sum(weights * f(nodes), axis=-1)


def cumulative_from_top(f: Callable, edges: np.ndarray, n: int = NODES) -> np.ndarray:
    """``F_k = ∫_{e_k}^{e_0} f`` for k = 0..len(edges)-1."""
    return np.concatenate([[0.0], np.cumsum(panel_integrals(f, edges, n))])


def nested_from_top(
    weight: Callable, inner: Callable, edges: np.ndarray, n: int = NODES
) -> np.ndarray:
    """``I_k = ∫_{e_k}^{e_0} weight(t') ∫_{t'}^{e_0} inner(t'') dt'' dt'``.

    The inner integral is accumulated once over the shared grid: its value at
    each panel's upper edge comes from the running sum, and the remainder from
    a node to that edge uses a second Gauss rule on ``[node, edge]``.
    """
    hi = edges[:-1]
    lo = edges[1:]
    G_edge = np.concatenate([[0.0], np.cumsum(panel_integrals(inner, edges, n))])[:-1]
    x_out, w_out = _panel_nodes(lo, hi, n)  # (P, n)
    # partial inner integral from each outer node up to its panel's top edge
    x_in, w_in = _panel_nodes(x_out, np.broadcast_to(hi[:, None], x_out.shape), n)
    G = G_edge[:, None] + np.sum(w_in * inner(x_in), axis=-1)
    outer = np.sum(w_out * weight(x_out) * G, axis=-1)
    return np.concatenate([[0.0], np.cumsum(outer)])


@dataclass(frozen=True)
class TrendResult:
    trend: Trend
    limit: float | None  # extrapolated limit when converging
    increments: tuple[float, ...]
    ratios: tuple[float, ...]


def decide_trend(values, window: int = 6, shrink_max: float = 0.9, grow_min: float = 0.99) -> TrendResult:
    """Classify the behaviour of a sequence sampled on a geometrically
    shrinking grid.

    With increments ``D_k`` over the last ``window`` levels: geometric decay
    (every ratio <= ``shrink_max``) means a finite limit, extrapolated by
    summing the geometric tail; a fixed sign with every ratio >= ``grow_min``
    means divergence in that direction (constant increments are the
    logarithmic case).  Anything else is inconclusive.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < window + 1:
        raise ValueError(f"need at least {window + 1} levels, got {len(v)}")
    if not np.all(np.isfinite(v)):
        return TrendResult(Trend.INCONCLUSIVE, None, (), ())
    D = np.diff(v[-(window + 1):])
    scale = max(1.0, float(np.max(np.abs(v))))
    absD = np.abs(D)
    if np.all(absD <= 1e-13 * scale):
        return TrendResult(Trend.CONVERGES, float(v[-1]), tuple(D), ())
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = absD[1:] / absD[:-1]
    ratios = np.where(np.isfinite(ratios), ratios, np.inf)
    if np.all(ratios <= shrink_max):
        q = float(ratios[-1])
        limit = float(v[-1] + D[-1] * q / (1.0 - q))
        return TrendResult(Trend.CONVERGES, limit, tuple(D), tuple(ratios))
    signs = np.sign(D)
    if np.all(signs == signs[0]) and signs[0] != 0 and np.all(ratios >= grow_min):
        trend = Trend.PLUS_INF if signs[0] > 0 else Trend.MINUS_INF
        return TrendResult(trend, None, tuple(D), tuple(ratios))
    return TrendResult(Trend.INCONCLUSIVE, None, tuple(D), tuple(ratios))


@dataclass(frozen=True)
class ImproperResult:
    value: float
    converged: bool
    tail: float
    levels: int


def improper_integral(
    f: Callable, t0: float, t_hi: float, t_floor: float, ratio: float = RATIO, n: int = NODES
) -> ImproperResult:
    """``∫_{t0}^{t_hi} f`` for an integrand singular at ``t0``.

    Panels are added down to ``t_floor``; the remainder below the last edge
    is estimated from the geometric decay of the panel contributions.
    ``converged`` is False when the contributions do not decay.
    """
    if t_hi <= t_floor:
        raise ValueError("t_hi must lie above the evaluation floor")
    levels = int(np.floor(np.log((t_hi - t0) / (t_floor - t0)) / np.log(ratio)))
    levels = max(levels, 7)
    edges = graded_edges(t0, t_hi, levels, ratio)
    edges = edges[edges >= t_floor]
    if len(edges) < 8:
        edges = graded_edges(t0, t_hi, 7, ratio)
    F = cumulative_from_top(f, edges, n)
    res = decide_trend(F)
    if res.trend is Trend.CONVERGES:
        return ImproperResult(res.limit, True, res.limit - F[-1], len(edges) - 1)
    return ImproperResult(float(F[-1]), False, float("nan"), len(edges) - 1)
