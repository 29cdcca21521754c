"""Focusing conditions near the singularity and the Raychaudhuri check.

``condition 25`` below means the double integral

    I(t) = ∫_t^{t1} a(t') ∫_{t'}^{t1} (1/a) [ä/a - ȧ²/a² - κ/a²] dt'' dt'

diverging to -inf as t -> t0, and ``condition 26`` the finiteness (and
non-negativity) of ``∫_{t0}^{t1} f_+``, where
``f = 3ä + 2 (C/a) [ä/a - ȧ²/a² - κ/a²]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import quadrature as quad
from .errors import DomainError, QuadratureFailure, WindowTooSmall
from .geometry import NormClass
from .models import Family, ScaleFactorModel
from .quadrature import Trend

DEFAULT_LEVELS = 14
ALPHA_CLAMP = 1e-10


class Verdict26(str, enum.Enum):
    FINITE = "FiniteNonnegativeLimit"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


class Decision(str, enum.Enum):
    APPLIES = "TheoremApplies"
    FAILS_25 = "TheoremFailsCondition25"
    FAILS_26 = "TheoremFailsCondition26"
    OUTSIDE = "OutsidePaperAnalysis"


class Source(str, enum.Enum):
    PAPER_TABLE = "PaperTable"
    CLOSED_FORM = "ClosedForm"
    NUMERIC = "Numeric"


@dataclass(frozen=True)
class TheoremInputs:
    model: ScaleFactorModel
    C: float = 1.0
    levels: int = DEFAULT_LEVELS
    ratio: float = quad.RATIO
    window: int = 6

    def __post_init__(self):
        if not self.C > 0:
            raise DomainError("C must be positive (non-comoving geodesic)")
        if self.levels < self.window + 1:
            raise DomainError(f"need at least {self.window + 1} levels")
        if not self.ratio > 1:
            raise DomainError("shrink ratio must exceed 1")

    @property
    def t0(self) -> float:
        return self.model.t0

    @property
    def t1(self) -> float:
        return self.model.t1

    def edges(self) -> np.ndarray:
        return quad.graded_edges(self.t0, self.t1, self.levels, self.ratio)


# ------------------------------------------------------------ integrands


def f_of_t(inputs: TheoremInputs, t):
    m = inputs.model
    return 3.0 * m.dda(t) + 2.0 * (inputs.C / m.a(t)) * m.curvature_combo(t)


def fplus_of_t(inputs: TheoremInputs, t):
    return np.maximum(f_of_t(inputs, t), 0.0)


def fminus_of_t(inputs: TheoremInputs, t):
    return np.maximum(-f_of_t(inputs, t), 0.0)


def _edges_to(inputs: TheoremInputs, t: float) -> np.ndarray:
    """Graded edges from t1 down to ``t`` (which becomes the last edge)."""
    t0, t1 = inputs.t0, inputs.t1
    if not t0 < t <= t1:
        raise DomainError(f"need t0 < t <= t1, got t={t}")
    k = int(np.ceil(np.log((t1 - t0) / (t - t0)) / np.log(inputs.ratio) - 1e-12))
    e = quad.graded_edges(t0, t1, max(k, 0), inputs.ratio)
    e = e[e > t * (1 + 1e-14)] if t > 0 else e[e > t]
    return np.concatenate([e, [t]]) if e[-1] != t else e


def _nested(inputs: TheoremInputs, weight, inner, edges) -> np.ndarray:
    vals = quad.nested_from_top(weight, inner, edges)
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("non-finite double integral", float("nan"))
    return vals


def _condition25_parts(inputs: TheoremInputs):
    m = inputs.model
    return m.a, (lambda t: m.curvature_combo(t) / m.a(t))


def condition25_integral(inputs: TheoremInputs, t: float) -> float:
    """I(t) at any t0 < t <= t1; the error estimate compares 16- and
    20-node panel rules."""
    if t == inputs.t1:
        return 0.0
    edges = _edges_to(inputs, t)
    w, inner = _condition25_parts(inputs)
    value = float(_nested(inputs, w, inner, edges)[-1])
    check = float(quad.nested_from_top(w, inner, edges, n=20)[-1])
    err = abs(value - check)
    if err > 1e-8 * max(1.0, abs(value)):
        raise QuadratureFailure(f"condition integral unresolved at t={t}", err)
    return value


def condition25_closed_form(epsilon: float, kappa: float, t, t1: float = 1.0):
    """Closed form of I(t) for a = t^(1/eps), eps not in {1, 3}."""
    e = float(epsilon)
    if e in (1.0, 3.0):
        raise DomainError("closed form is singular at epsilon = 1 and epsilon = 3")
    t = np.asarray(t, dtype=float)
    p = 1.0 / e
    alpha = t1 ** (-(p + 1)) / (1 + e) - (e / (e - 3)) * kappa * t1 ** (-(3 * p - 1))
    q = 2.0 - 2.0 * p
    c = (e / (e - 3)) * (e / (2 * e - 2)) * kappa
    return (
        alpha * e / (1 + e) * (t1 ** (p + 1) - t ** (p + 1))
        - np.log(t1 / t) / (1 + e)
        + c * (t1**q - t**q)
    )


def closed_form_verdict(epsilon: float, kappa: float) -> Trend:
    """t -> 0 limit of the closed form: the -log term wins unless the
    kappa term diverges (eps < 1) and carries the opposite sign."""
    e = float(epsilon)
    q = 2.0 - 2.0 / e
    c = (e / (e - 3)) * (e / (2 * e - 2)) * kappa
    if q < 0 and c != 0:
        return Trend.MINUS_INF if c > 0 else Trend.PLUS_INF
    return Trend.MINUS_INF


# ------------------------------------------------------------ reports


def _json_trend_limit(res: quad.TrendResult):
    if res.trend is Trend.PLUS_INF:
        return {"diverges": "+inf"}
    if res.trend is Trend.MINUS_INF:
        return {"diverges": "-inf"}
    return res.limit


@dataclass
class ConditionReport:
    inputs: TheoremInputs
    t_values: np.ndarray
    I_values: np.ndarray
    Fplus_values: np.ndarray
    verdict25: Trend
    verdict26: Verdict26
    alpha_estimate: float | None
    applicable: bool
    source: Source
    trend25: quad.TrendResult
    trend26: quad.TrendResult | None
    alpha_clamped: bool = False
    shortcut26: bool = False
    closed_form: dict | None = None
    alt_check: dict | None = None
    fminus_check: dict | None = None
    alternative_conditions: dict | None = None

    @property
    def conjugate_bounds(self) -> dict:
        """Where the conjugate point may lie: the statement gives
        t0 <= t' < t2, the argument gives t0 <= t' < t1."""
        return {"statement": {"lower": self.inputs.t0, "upper": "t2"},
                "argument": {"lower": self.inputs.t0, "upper": self.inputs.t1}}

    def to_dict(self) -> dict:
        m = self.inputs.model
        return {
            "model": {"family": m.family.value, "epsilon": m.epsilon, "kappa": m.kappa,
                      "t0": m.t0, "t1": m.t1, "expression": m.source},
            "C": self.inputs.C,
            "verdict25": self.verdict25.value,
            "verdict26": self.verdict26.value,
            "applicable": self.applicable,
            "source": self.source.value,
            "alpha_estimate": self.alpha_estimate,
            "alpha_clamped": self.alpha_clamped,
            "condition26_shortcut": self.shortcut26,
            "I_limit": _json_trend_limit(self.trend25),
            "t_values": [float(v) for v in self.t_values],
            "I_values": [float(v) for v in self.I_values],
            "Fplus_values": [float(v) for v in self.Fplus_values],
            "increment_ratios_25": [float(v) for v in self.trend25.ratios],
            "closed_form": self.closed_form,
            "alt_check": self.alt_check,
            "fminus_check": self.fminus_check,
            "alternative_conditions": self.alternative_conditions,
            "conjugate_bounds": self.conjugate_bounds,
        }


def _verdict26(inputs: TheoremInputs, edges: np.ndarray):
    """Condition on ∫ f_+: shortcut when f < 0 on the deepest four levels,
    otherwise the trend of F_+(t_k)."""
    F = quad.cumulative_from_top(lambda t: fplus_of_t(inputs, t), edges)
    deep_lo, deep_hi = edges[-1], edges[-5]
    nodes, _ = quad._panel_nodes(edges[-5:][1:], edges[-5:][:-1])
    shortcut = bool(np.all(f_of_t(inputs, nodes.ravel()) < 0)) and deep_lo < deep_hi
    res = quad.decide_trend(F, window=inputs.window)
    if shortcut:
        alpha = float(F[-1]) if res.trend is not Trend.CONVERGES else float(res.limit)
        return Verdict26.FINITE, max(alpha, 0.0), F, res, True, False
    if res.trend is Trend.CONVERGES:
        alpha = float(res.limit)
        if alpha >= -ALPHA_CLAMP:
            return Verdict26.FINITE, max(alpha, 0.0), F, res, False, alpha < 0
        return Verdict26.INCONCLUSIVE, alpha, F, res, False, False
    if res.trend in (Trend.PLUS_INF, Trend.MINUS_INF):
        return Verdict26.DIVERGES, None, F, res, False, False
    return Verdict26.INCONCLUSIVE, None, F, res, False, False


def decide_conditions(inputs: TheoremInputs, diagnostics: bool = True) -> ConditionReport:
    m = inputs.model
    edges = inputs.edges()
    w, inner = _condition25_parts(inputs)
    I = _nested(inputs, w, inner, edges)
    trend25 = quad.decide_trend(I, window=inputs.window)
    verdict25 = trend25.trend
    source = Source.NUMERIC
    closed = None
    if m.family is Family.POWER_LAW and m.epsilon not in (1.0, 3.0):
        I_cf = condition25_closed_form(m.epsilon, m.kappa, edges, m.t1)
        cf_verdict = closed_form_verdict(m.epsilon, m.kappa)
        scale = np.maximum(1.0, np.abs(I_cf))
        closed = {
            "verdict": cf_verdict.value,
            "numeric_verdict": verdict25.value,
            "agree": cf_verdict is verdict25,
            "max_rel_dev": float(np.max(np.abs(I - I_cf) / scale)),
        }
        verdict25 = cf_verdict
        source = Source.CLOSED_FORM
    v26, alpha, F, trend26, shortcut, clamped = _verdict26(inputs, edges)
    report = ConditionReport(
        inputs=inputs,
        t_values=edges,
        I_values=I,
        Fplus_values=F,
        verdict25=verdict25,
        verdict26=v26,
        alpha_estimate=alpha,
        applicable=verdict25 is Trend.MINUS_INF and v26 is Verdict26.FINITE,
        source=source,
        trend25=trend25,
        trend26=trend26,
        alpha_clamped=clamped,
        shortcut26=shortcut,
        closed_form=closed,
    )
    if diagnostics:
        report.alt_check = alt_check(inputs, edges)
        report.fminus_check = fminus_check(inputs, edges)
        report.alternative_conditions = alternative_conditions(inputs, edges)
    return report


def alt_check(inputs: TheoremInputs, edges=None) -> dict:
    """Partial-integration rewrite: condition 25 holds whenever
    ∫∫ a (ȧ² - κ)/a³ does not tend to +inf."""
    m = inputs.model
    edges = inputs.edges() if edges is None else edges
    vals = _nested(inputs, m.a, lambda t: (m.da(t) ** 2 - m.kappa) / m.a(t) ** 3, edges)
    res = quad.decide_trend(vals, window=inputs.window)
    return {
        "trend": res.trend.value,
        "implies_condition25": res.trend in (Trend.CONVERGES, Trend.MINUS_INF),
    }


def fminus_check(inputs: TheoremInputs, edges=None) -> dict:
    """Trend of ∫_t^{t1} a ∫_{t'}^{t1} f_- (unbounded growth is expected
    whenever the theorem applies)."""
    m = inputs.model
    edges = inputs.edges() if edges is None else edges
    vals = _nested(inputs, m.a, lambda t: fminus_of_t(inputs, t), edges)
    res = quad.decide_trend(vals, window=inputs.window)
    return {"trend": res.trend.value, "last": float(vals[-1])}


def alternative_conditions(inputs: TheoremInputs, edges=None) -> dict:
    """Diagnostic pair with 1/sqrt(C + a²) weights; reported only."""
    m = inputs.model
    C = inputs.C
    edges = inputs.edges() if edges is None else edges

    def wgt(t):
        a = m.a(t)
        return a / np.sqrt(C + a * a)

    def inner(t):
        return f_of_t(inputs, t) / np.sqrt(C + m.a(t) ** 2)

    vals = _nested(inputs, wgt, inner, edges)
    res = quad.decide_trend(vals, window=inputs.window)
    return {"first_trend": res.trend.value}


# ------------------------------------------------------------ classification


def paper_table(family: Family | str, epsilon: float, kappa: float) -> bool | None:
    """Applicability lists for the built-in families (None for custom)."""
    family = Family(family)
    e, k = float(epsilon), float(kappa)
    if family is Family.POWER_LAW:
        return (e < 1 and k > 0) or e > 1 or k == 0 or (e == 1 and k > -1)
    if family is Family.LOG_CORRECTED:
        return (e < 1 and k > 0) or e >= 1 or k == 0
    return None


@dataclass
class ClassificationVerdict:
    family: Family
    epsilon: float | None
    kappa: float
    decision: Decision
    source: Source
    C: float = 1.0
    report: ConditionReport | None = field(default=None, repr=False)

    @property
    def applicable(self) -> bool:
        return self.decision is Decision.APPLIES

    def to_dict(self) -> dict:
        out = {
            "family": self.family.value,
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "C": self.C,
            "decision": self.decision.value,
            "applicable": self.applicable,
            "source": self.source.value,
        }
        if self.report is not None:
            out["numeric_verdict25"] = self.report.verdict25.value
            out["numeric_verdict26"] = self.report.verdict26.value
        return out


def decision_from_report(rep: ConditionReport) -> Decision:
    if rep.applicable:
        return Decision.APPLIES
    if rep.verdict25 in (Trend.PLUS_INF, Trend.CONVERGES):
        return Decision.FAILS_25
    if rep.verdict26 is Verdict26.DIVERGES and rep.verdict25 is Trend.MINUS_INF:
        return Decision.FAILS_26
    return Decision.OUTSIDE


def classify(
    family,
    epsilon: float | None,
    kappa: float,
    C: float = 1.0,
    model: ScaleFactorModel | None = None,
    cross_check: bool = True,
    levels: int = DEFAULT_LEVELS,
) -> ClassificationVerdict:
    """Table decision for the built-in families, numeric otherwise.

    Every (epsilon > 0, kappa) of the two built-in families falls in one of
    the listed cases; failures there are always failures of condition 25.
    ``cross_check`` attaches the numeric report for comparison.
    """
    family = Family(family)
    table = paper_table(family, epsilon, kappa) if family is not Family.CUSTOM else None
    rep = None
    if table is None or cross_check:
        if model is None:
            model = (ScaleFactorModel.power_law(epsilon, kappa) if family is Family.POWER_LAW
                     else ScaleFactorModel.log_corrected(epsilon, kappa))
        rep = decide_conditions(TheoremInputs(model, C, levels=levels), diagnostics=False)
    if table is not None:
        decision = Decision.APPLIES if table else Decision.FAILS_25
        return ClassificationVerdict(family, epsilon, kappa, decision, Source.PAPER_TABLE, C, rep)
    return ClassificationVerdict(family, epsilon, kappa, decision_from_report(rep),
                                 rep.source, C, rep)


GRID_HEADER = "family,epsilon,kappa,C,verdict25,verdict26,applicable,source"


def grid_csv_row(v: ClassificationVerdict) -> str:
    r = v.report
    v25 = r.verdict25.value if r is not None else ""
    v26 = r.verdict26.value if r is not None else ""
    eps = "" if v.epsilon is None else repr(float(v.epsilon))
    return ",".join([v.family.value, eps, repr(float(v.kappa)), repr(float(v.C)), v25, v26,
                     "true" if v.applicable else "false", v.source.value])


# ------------------------------------------------------------ Raychaudhuri


_FD = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


@dataclass
class ResidualSamples:
    t: np.ndarray
    residual: np.ndarray  # theta' + Ric + tr sigma^2 + theta^2/n
    relative: np.ndarray  # residual over the sum of the term magnitudes
    n: int
    coefficient: float

    @property
    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def sup_rel(self) -> float:
        return float(np.max(self.relative))


def _theta_at_s(sol, s):
    from .geodesic import dtau_ds  # local to keep module imports flat

    m, spec = sol.path.model, sol.path.spec
    s = np.atleast_1d(s)
    n = sol.n
    y = sol._raw(s)
    A = y[:, : n * n].reshape(-1, n, n)
    Q = y[:, n * n:].reshape(-1, n, n)
    tp = dtau_ds(m, spec, m.t0 + np.exp(s))
    # theta = tr(DA A^-1)
    return np.array([np.trace(np.linalg.solve(a.T, q.T).T) for a, q in zip(A, Q)]) / tp


def fd_step(sol, s: float) -> float:
    """Stencil spacing in s: small against the pole of theta at t2 and kept
    inside the integrated range."""
    lo = sol.backward.x[0]
    hi = sol.forward.x[-1] if sol.forward is not None else sol.s2
    d = min(0.01, 0.005 * abs(s - sol.s2), (s - lo) / 2, (hi - s) / 2)
    if not d > 0:
        raise DomainError("finite-difference stencil does not fit in the integrated range")
    return d


def theta_tau_derivative(sol, t) -> np.ndarray:
    """d theta / d tau by a five-point central difference in s."""
    from .geodesic import dtau_ds

    m = sol.path.model
    s_arr = np.log(np.asarray(t, dtype=float) - m.t0)
    out = np.empty(len(s_arr))
    for i, s in enumerate(s_arr):
        d = fd_step(sol, s)
        th = _theta_at_s(sol, s + d * np.arange(-2, 3))
        out[i] = np.dot(_FD, th) / d
    return out / dtau_ds(m, sol.path.spec, np.asarray(t, dtype=float))


def log_det_tau_derivative(sol, t) -> np.ndarray:
    """d/dtau log|det A| by a five-point central difference in s."""
    from .geodesic import dtau_ds

    m = sol.path.model
    n = sol.n
    s_arr = np.log(np.asarray(t, dtype=float) - m.t0)
    out = np.empty(len(s_arr))
    for i, s in enumerate(s_arr):
        d = fd_step(sol, s)
        A = sol._raw(s + d * np.arange(-2, 3))[:, : n * n].reshape(-1, n, n)
        out[i] = np.dot(_FD, np.log(np.abs(np.linalg.det(A)))) / d
    return out / dtau_ds(m, sol.path.spec, np.asarray(t, dtype=float))


def raychaudhuri_residual(sol, t, coefficient: float | None = None) -> ResidualSamples:
    """Residual of theta' = -Ric(u,u) - tr sigma^2 - theta^2/n at times ``t``.

    ``coefficient`` overrides 1/n (used for negative controls).
    """
    t = np.asarray(t, dtype=float)
    if len(t) < 7:
        raise WindowTooSmall(f"need at least 7 samples, got {len(t)}")
    path = sol.path
    m, spec = path.model, path.spec
    st = sol.states(t)
    kin = st.kinematics()
    n = st.n
    c = 1.0 / n if coefficient is None else coefficient
    theta = kin["theta"]
    tr_s2 = np.einsum("kij,kji->k", kin["sigma"], kin["sigma"])
    ric = -geo.ricci_along(m, t, spec.C, spec.normclass)
    dtheta = theta_tau_derivative(sol, t)
    terms = np.stack([dtheta, ric, tr_s2, c * theta**2])
    res = terms.sum(axis=0)
    rel = np.abs(res) / np.sum(np.abs(terms), axis=0)
    return ResidualSamples(t, res, rel, n, c)


def expansion_identity_error(sol, t, det_floor: float = 1e-8) -> np.ndarray:
    """|theta - d/dtau log det A| / |theta| where |det A| > ``det_floor``;
    NaN elsewhere."""
    t = np.asarray(t, dtype=float)
    st = sol.states(t)
    theta = st.kinematics()["theta"]
    ok = np.abs(st.detA) > det_floor
    out = np.full(len(t), np.nan)
    if np.any(ok):
        fd = log_det_tau_derivative(sol, t[ok])
        out[ok] = np.abs(theta[ok] - fd) / np.abs(theta[ok])
    return out


def comoving_residual(m: ScaleFactorModel, t) -> np.ndarray:
    """Comoving congruence: theta = 3ȧ/a, sigma = omega = 0, Ric(u,u) = -3ä/a."""
    t = np.asarray(t, dtype=float)
    a, da, dda = m.a(t), m.da(t), m.dda(t)
    theta = 3 * da / a
    dtheta = 3 * (dda / a - (da / a) ** 2)
    return dtheta - 3 * dda / a + theta**2 / 3
