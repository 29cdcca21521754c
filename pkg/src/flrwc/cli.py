"""Command-line interface: ``flrwc <subcommand> [flags]``.

Exit codes: 0 success, 1 configuration error, 2 inconclusive result under
``--strict``, 3 integrator failure or failed threshold check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from . import conditions as cond
from . import jacobi as jac
from .errors import (
    DomainError,
    ExpressionSyntaxError,
    FLRWError,
    InconclusiveTrend,
    QuadratureFailure,
    StepFailure,
    UnknownIdentifier,
    UnsupportedChart,
)
from .geodesic import GeodesicSpec, integrate_geodesic, radiation_closed_forms
from .geometry import NormClass
from .models import Family, ScaleFactorModel
from .quadrature import Trend

EXIT_OK, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_FAILURE = 0, 1, 2, 3
VERSION = f"flrwc {__version__}"
SUBCOMMANDS = ("classify", "conditions", "geodesic", "conjugate", "reproduce-radiation")

# acceptance thresholds checked by reproduce-radiation
THRESHOLDS = {
    "tau_max_abs_err": 1e-8,
    "h3_max_abs_err": 1e-6,
    "frame_orthonormality_drift": 1e-8,
    "frame_transport_residual": 1e-8,
    "raychaudhuri_rel_residual": 1e-6,
    "detA_slope_min": 0.5,
    "norm_sq_rel_err": 0.1,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    family: str | None = None
    scale_factor: str | None = None
    epsilon: float | None = None
    kappa: float = 0.0
    t0: float = 0.0
    t1: float | None = None
    normclass: str = "timelike"
    C: float = 1.0
    t2: float = 1.0
    t_start: float | None = None
    t_end: float | None = None
    tolerance: float = 1e-10
    levels: int = cond.DEFAULT_LEVELS
    ratio: float = 4.0
    out: str | None = None
    format: str = "json"
    strict: bool = False
    epsilon_grid: str | None = None
    kappa_grid: str | None = None
    trace: str | None = None

    def build_model(self) -> ScaleFactorModel:
        if self.scale_factor is not None:
            if self.family not in (None, Family.CUSTOM.value):
                raise ConfigError("--family and --scale-factor are mutually exclusive")
            t1 = 1.0 if self.t1 is None else self.t1
            return ScaleFactorModel.custom(self.scale_factor, self.kappa, self.t0, t1)
        if self.family is None:
            raise ConfigError("one of --family or --scale-factor is required")
        if self.epsilon is None:
            raise ConfigError(f"--epsilon is required for --family {self.family}")
        if self.family == Family.POWER_LAW.value:
            return ScaleFactorModel.power_law(self.epsilon, self.kappa, 1.0 if self.t1 is None else self.t1)
        if self.family == Family.LOG_CORRECTED.value:
            return ScaleFactorModel.log_corrected(self.epsilon, self.kappa, 0.5 if self.t1 is None else self.t1)
        raise ConfigError(f"unknown family {self.family!r}")

    def window(self, m: ScaleFactorModel) -> tuple[float, float]:
        """(t_start, t_end) for path-based subcommands."""
        span = self.t2 - m.t0 if self.t2 > m.t0 else m.t1 - m.t0
        t_start = m.t0 + 1e-10 * span if self.t_start is None else self.t_start
        t_start = max(t_start, m.t0 + 2 * (m.t_min - m.t0))
        if self.t_end is not None:
            t_end = self.t_end
        elif m.family is Family.LOG_CORRECTED:
            t_end = 0.5 * (1.0 + max(self.t2, t_start))
        else:
            t_end = m.t0 + 10.0 * max(self.t2 - m.t0, m.t1 - m.t0)
        return t_start, t_end


# ------------------------------------------------------------ JSON helpers


def _clean(obj):
    """JSON-safe copy: enums to values, numpy to Python, non-finite floats
    to divergence tags (or null for NaN)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return {"diverges": "+inf" if x > 0 else "-inf"}
        return x
    return obj


def render_json(cfg: RunConfig, verdicts, evidence, checks) -> str:
    doc = {
        "version": VERSION,
        "config": asdict(cfg),
        "verdicts": verdicts,
        "evidence": evidence,
        "checks": checks,
    }
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, text: str, out: str | None = None):
    path = cfg.out if out is None else out
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num17(x) -> str:
    return f"{float(x):.17g}"


# ------------------------------------------------------------ subcommands


def _threads() -> int:
    raw = os.environ.get("FLRWC_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"FLRWC_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("FLRWC_THREADS must be >= 1")
    return n


def _parse_grid(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from exc


def cmd_classify(cfg: RunConfig) -> int:
    if cfg.epsilon_grid or cfg.kappa_grid:
        if cfg.family not in (Family.POWER_LAW.value, Family.LOG_CORRECTED.value):
            raise ConfigError("grid mode needs --family power-law or log-corrected")
        eps = _parse_grid(cfg.epsilon_grid, "--epsilon-grid") if cfg.epsilon_grid else [cfg.epsilon]
        kap = _parse_grid(cfg.kappa_grid, "--kappa-grid") if cfg.kappa_grid else [cfg.kappa]
        if any(e is None for e in eps):
            raise ConfigError("--epsilon or --epsilon-grid is required")
        tuples = [(e, k) for e in eps for k in kap]
        for e, _ in tuples:
            if not e > 0:
                raise ConfigError(f"epsilon must be > 0, got {e}")

        def run(ek):
            return cond.classify(cfg.family, ek[0], ek[1], cfg.C, levels=cfg.levels)

        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            verdicts = list(pool.map(run, tuples))
        lines = [cond.GRID_HEADER] + [cond.grid_csv_row(v) for v in verdicts]
        _emit(cfg, "\n".join(lines) + "\n")
        inconclusive = any(v.decision is cond.Decision.OUTSIDE for v in verdicts)
        return EXIT_INCONCLUSIVE if cfg.strict and inconclusive else EXIT_OK
    m = cfg.build_model()
    v = cond.classify(m.family, m.epsilon, m.kappa, cfg.C, model=m, levels=cfg.levels)
    evidence = v.report.to_dict() if v.report is not None else {}
    checks = {}
    if v.report is not None and v.source is cond.Source.PAPER_TABLE:
        checks["numeric_agrees_with_table"] = v.report.applicable == v.applicable
    if cfg.format == "csv":
        _emit(cfg, cond.GRID_HEADER + "\n" + cond.grid_csv_row(v) + "\n")
    else:
        _emit(cfg, render_json(cfg, v.to_dict(), evidence, checks))
    if cfg.strict and v.decision is cond.Decision.OUTSIDE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_conditions(cfg: RunConfig) -> int:
    m = cfg.build_model()
    rep = cond.decide_conditions(cond.TheoremInputs(m, cfg.C, levels=cfg.levels, ratio=cfg.ratio))
    if cfg.format == "csv":
        rows = ["k,t,I,Fplus"] + [
            f"{k},{_num17(t)},{_num17(i)},{_num17(f)}"
            for k, (t, i, f) in enumerate(zip(rep.t_values, rep.I_values, rep.Fplus_values))
        ]
        _emit(cfg, "\n".join(rows) + "\n")
    else:
        verdicts = {
            "verdict25": rep.verdict25.value,
            "verdict26": rep.verdict26.value,
            "applicable": rep.applicable,
            "source": rep.source.value,
        }
        checks = {
            "Fplus_nondecreasing": bool(np.all(np.diff(rep.Fplus_values) >= -1e-14)),
            "alpha_nonnegative": rep.alpha_estimate is None or rep.alpha_estimate >= 0,
        }
        _emit(cfg, render_json(cfg, verdicts, rep.to_dict(), checks))
    inconclusive = Trend.INCONCLUSIVE in (rep.verdict25,) or rep.verdict26 is cond.Verdict26.INCONCLUSIVE
    return EXIT_INCONCLUSIVE if cfg.strict and inconclusive else EXIT_OK


def _spec(cfg: RunConfig, m: ScaleFactorModel) -> GeodesicSpec:
    t_start, t_end = cfg.window(m)
    return GeodesicSpec.canonical(NormClass(cfg.normclass), cfg.C, t_start, t_end)


def cmd_geodesic(cfg: RunConfig) -> int:
    m = cfg.build_model()
    spec = _spec(cfg, m)
    path = integrate_geodesic(m, spec, rtol=cfg.tolerance, atol=1e-2 * cfg.tolerance)
    if cfg.format == "csv":
        _emit(cfg, path.to_csv())
        return EXIT_OK
    evidence = {
        "n_steps": path.solution.n_steps,
        "tau_anchored": path.tau_anchored,
        "x_anchored": path.x_anchored,
        "t_range": [path.t[0], path.t[-1]],
        "tau_range": [path.tau[0], path.tau[-1]],
        "x_end": path.x[-1],
    }
    _emit(cfg, render_json(cfg, {}, evidence, {}))
    return EXIT_OK


def _conjugate_pipeline(cfg: RunConfig, m: ScaleFactorModel):
    spec = _spec(cfg, m)
    if not spec.t_start < cfg.t2 <= spec.t_end:
        raise ConfigError(f"need t_start < t2 <= t_end, got {spec.t_start} < {cfg.t2} <= {spec.t_end}")
    path = integrate_geodesic(m, spec, rtol=cfg.tolerance, atol=1e-2 * cfg.tolerance)
    frame = jac.transport_frame(path)
    sol = jac.integrate_jacobi_tensor(path, frame, cfg.t2, rtol=cfg.tolerance, atol=1e-2 * cfg.tolerance)
    return path, frame, sol


def cmd_conjugate(cfg: RunConfig) -> int:
    m = cfg.build_model()
    path, frame, sol = _conjugate_pipeline(cfg, m)
    if cfg.trace:
        with open(cfg.trace, "w", encoding="utf-8") as fh:
            fh.write(sol.states().to_csv())
    try:
        rep = jac.detect_conjugate(sol, path)
    except InconclusiveTrend as exc:
        verdicts = {"status": "InconclusiveTrend", "message": str(exc)}
        _emit(cfg, render_json(cfg, verdicts, {}, {}))
        return EXIT_INCONCLUSIVE if cfg.strict else EXIT_OK
    verdicts = {
        "n_singular_limit": rep.count("SingularLimit"),
        "n_interior_zero": rep.count("InteriorZero"),
        "events": [{"t_conj": e.t_conj, "kind": e.kind} for e in rep.events],
    }
    checks = {
        "frame_orthonormality_drift": frame.orthonormality_drift(),
        "frame_transport_residual": frame.transport_residual(),
    }
    _emit(cfg, render_json(cfg, verdicts, rep.to_dict(), checks))
    return EXIT_OK


def reproduce_radiation(cfg: RunConfig) -> tuple[dict, dict, dict]:
    """Radiation example (a = sqrt(t), kappa = 0, C = 1, timelike): every
    number of the acceptance checks, computed from scratch."""
    m = ScaleFactorModel.power_law(2.0)
    t2 = cfg.t2
    if not t2 > 0:
        raise ConfigError("--t2 must be positive")
    t_start = 1e-10 if cfg.t_start is None else cfg.t_start
    t_end = max(10.0, 10.0 * t2) if cfg.t_end is None else cfg.t_end
    if not (0 < t_start <= 1e-8 and t_end >= max(10.0, t2) and t2 > 1e-6):
        raise ConfigError("reproduce-radiation needs 0 < t_start <= 1e-8, t2 > 1e-6 and t_end >= max(10, t2)")
    atol = 1e-2 * cfg.tolerance
    spec = GeodesicSpec.canonical(NormClass.TIMELIKE, 1.0, t_start, t_end)
    path = integrate_geodesic(m, spec, rtol=cfg.tolerance, atol=atol)
    t_tau = np.logspace(-6, 1, 2000)
    tau_err = float(np.max(np.abs(path.tau_at(t_tau) - radiation_closed_forms(t_tau)["tau"])))

    frame = jac.transport_frame(path)
    sol = jac.integrate_jacobi_tensor(path, frame, t2, rtol=cfg.tolerance, atol=atol)
    t_h = np.logspace(-6, np.log10(t2), 1000)
    st = sol.states(t_h)
    h3_num = st.A[:, 1, 1] / np.sqrt(t_h)
    h3_err = float(np.max(np.abs(h3_num - radiation_closed_forms(t_h, t2)["h3"])))

    t_r = np.linspace(0.01 * t2, 0.9 * t2, 60)
    ray = cond.raychaudhuri_residual(sol, t_r)
    rep = jac.detect_conjugate(sol, path)
    sing = [e for e in rep.events if e.kind == "SingularLimit"]
    slope = sing[0].detA_evidence["fit_slope"] if sing else float("nan")
    h3_0 = float(radiation_closed_forms(0.0, t2)["h3"])
    norm_target = 1e-8 * h3_0**2
    norm_num = float(sol.jacobi_norm_sq([1e-8])[0, 1])

    t_id = np.logspace(np.log10(2 * t_start), np.log10(t2 * (1 - 1e-3)), 200)
    id_err = cond.expansion_identity_error(sol, t_id)
    omega = jac_omega_norm(sol.states(t_id))

    values = {
        "tau_max_abs_err": tau_err,
        "h3_max_abs_err": h3_err,
        "h3_at_0": h3_0,
        "frame_orthonormality_drift": frame.orthonormality_drift(),
        "frame_transport_residual": frame.transport_residual(),
        "raychaudhuri_rel_residual": ray.sup_rel,
        "raychaudhuri_abs_residual": ray.sup_abs,
        "detA_slope": slope,
        "n_singular_limit": len(sing),
        "n_interior_zero": rep.count("InteriorZero"),
        "norm_sq_at_1e-8": norm_num,
        "norm_sq_target": norm_target,
        "omega_rel_norm": omega,
        "expansion_identity_rel_err": float(np.nanmax(id_err)),
    }
    checks = {
        "tau": values["tau_max_abs_err"] <= THRESHOLDS["tau_max_abs_err"],
        "h3": values["h3_max_abs_err"] <= THRESHOLDS["h3_max_abs_err"],
        "frame_orthonormality": values["frame_orthonormality_drift"] <= THRESHOLDS["frame_orthonormality_drift"],
        "frame_transport": values["frame_transport_residual"] <= THRESHOLDS["frame_transport_residual"],
        "raychaudhuri": values["raychaudhuri_rel_residual"] <= THRESHOLDS["raychaudhuri_rel_residual"],
        "one_singular_limit": values["n_singular_limit"] == 1 and values["n_interior_zero"] == 0,
        "detA_slope": bool(slope >= THRESHOLDS["detA_slope_min"]),
        "norm_sq": abs(norm_num - norm_target) <= THRESHOLDS["norm_sq_rel_err"] * norm_target,
        "omega": omega <= 1e-8,
        "expansion_identity": values["expansion_identity_rel_err"] <= 1e-6,
    }
    return values, checks, rep.to_dict()


def jac_omega_norm(states) -> float:
    """Largest ||omega|| / ||B|| over samples with invertible A."""
    kin = states.kinematics()
    B = np.linalg.norm(kin["B"], axis=(1, 2))
    w = np.linalg.norm(kin["omega"], axis=(1, 2))
    ok = np.isfinite(B) & (B > 0)
    return float(np.max(w[ok] / B[ok])) if np.any(ok) else 0.0


def cmd_reproduce_radiation(cfg: RunConfig) -> int:
    values, checks, report = reproduce_radiation(cfg)
    _emit(cfg, render_json(cfg, values, {"conjugate_report": report, "thresholds": THRESHOLDS}, checks))
    return EXIT_OK if all(checks.values()) else EXIT_FAILURE


COMMANDS = {
    "classify": cmd_classify,
    "conditions": cmd_conditions,
    "geodesic": cmd_geodesic,
    "conjugate": cmd_conjugate,
    "reproduce-radiation": cmd_reproduce_radiation,
}


# ------------------------------------------------------------ argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


_FLOAT_KEYS = {"epsilon", "kappa", "t0", "t1", "C", "t2", "t_start", "t_end", "tolerance", "ratio"}
_INT_KEYS = {"levels"}
_BOOL_KEYS = {"strict", "timelike", "null"}
_STR_KEYS = {"family", "scale_factor", "out", "format", "epsilon_grid", "kappa_grid", "trace"}


def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--family", choices=[Family.POWER_LAW.value, Family.LOG_CORRECTED.value], default=S)
    p.add_argument("--scale-factor", dest="scale_factor", metavar="EXPR", default=S)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--kappa", type=float, default=S)
    p.add_argument("--t0", type=float, default=S, help="singularity time of a custom expression")
    p.add_argument("--t1", type=float, default=S)
    p.add_argument("--C", dest="C", type=float, default=S)
    p.add_argument("--t2", type=float, default=S)
    p.add_argument("--t-start", dest="t_start", type=float, default=S)
    p.add_argument("--t-end", dest="t_end", type=float, default=S)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--timelike", action="store_true", default=S)
    g.add_argument("--null", action="store_true", default=S)
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--ratio", type=float, default=S)
    p.add_argument("--tolerance", type=float, default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--format", choices=["json", "csv"], default=S)
    p.add_argument("--strict", action="store_true", default=S)
    p.add_argument("--config", default=S, metavar="PATH")
    p.add_argument("--epsilon-grid", dest="epsilon_grid", default=S)
    p.add_argument("--kappa-grid", dest="kappa_grid", default=S)
    p.add_argument("--trace", default=S, metavar="PATH", help="CSV trace of the Jacobi tensor (conjugate)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flrwc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name))
    return p


def _coerce(key: str, raw: str, where: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid value {raw!r} for {key}") from exc
    return raw


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; keys use flag names (dashes or underscores)."""
    known = _FLOAT_KEYS | _INT_KEYS | _BOOL_KEYS | _STR_KEYS
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for no, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        where = f"{path}:{no}"
        if "=" not in text:
            raise ConfigError(f"{where}: expected key = value")
        key, val = (s.strip() for s in text.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in known:
            raise ConfigError(f"{where}: unknown key {key!r}")
        out[key] = _coerce(key, val, where)
    return out


def resolve_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    merged = {}
    if "config" in ns:
        merged.update(read_config_file(ns.pop("config")))
    merged.update(ns)
    timelike = merged.pop("timelike", None)
    null = merged.pop("null", None)
    if timelike and null:
        raise ConfigError("--timelike and --null are mutually exclusive")
    normclass = "null" if null else "timelike"
    names = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(subcommand=sub, normclass=normclass, **{k: v for k, v in merged.items() if k in names})
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"--format must be json or csv, got {cfg.format!r}")
    if cfg.family is not None and cfg.family not in (Family.POWER_LAW.value, Family.LOG_CORRECTED.value):
        raise ConfigError(f"--family must be power-law or log-corrected, got {cfg.family!r}")
    if not cfg.C > 0:
        raise ConfigError("--C must be positive")
    if not 0 < cfg.tolerance < 1:
        raise ConfigError("--tolerance must lie in (0, 1)")
    if cfg.levels < 7:
        raise ConfigError("--levels must be at least 7")
    if not cfg.ratio > 1:
        raise ConfigError("--ratio must exceed 1")
    if cfg.subcommand == "reproduce-radiation" and (cfg.family or cfg.scale_factor):
        raise ConfigError("reproduce-radiation fixes the model; drop --family/--scale-factor")
    if cfg.subcommand in ("geodesic", "conjugate") and cfg.kappa != 0:
        raise ConfigError(f"{cfg.subcommand} needs kappa = 0 (flat chart only)")
    if cfg.t_start is not None and cfg.t_end is not None and not cfg.t_start < cfg.t_end:
        raise ConfigError("need --t-start < --t-end")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve_config(argv)
        return COMMANDS[cfg.subcommand](cfg)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ConfigError, DomainError, ExpressionSyntaxError, UnknownIdentifier, UnsupportedChart) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepFailure, QuadratureFailure) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except FLRWError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
