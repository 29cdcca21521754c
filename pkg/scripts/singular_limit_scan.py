"""Scan the power-law exponent and report the log-log slope of |det A|
near the singularity, with the resulting conjugate-point verdict.

    python3 scripts/singular_limit_scan.py [--null] [--eps 1 2 3 4 ...]
"""
import argparse

from flrwc import jacobi as jac
from flrwc.errors import InconclusiveTrend
from flrwc.geodesic import GeodesicSpec, integrate_geodesic
from flrwc.models import ScaleFactorModel


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--null", action="store_true")
    p.add_argument("--eps", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0, 3.5, 4.0, 6.0, 10.0])
    p.add_argument("--t-start", type=float, default=1e-10)
    args = p.parse_args(argv)
    normclass = "null" if args.null else "timelike"

    print(f"{'eps':>6} {'slope':>8} {'r2':>10} {'monotone':>9}  verdict")
    for e in args.eps:
        m = ScaleFactorModel.power_law(e)
        path = integrate_geodesic(m, GeodesicSpec.canonical(normclass, 1.0, args.t_start, 10.0))
        sol = jac.integrate_jacobi_tensor(path, jac.transport_frame(path), 1.0)
        try:
            rep = jac.detect_conjugate(sol, path)
        except InconclusiveTrend as exc:
            print(f"{e:6g} InconclusiveTrend: {exc}")
            continue
        sl = rep.diagnostics.get("singular_limit", {})
        kinds = ",".join(ev.kind for ev in rep.events) or "none"
        print(f"{e:6g} {sl.get('fit_slope', float('nan')):8.4f} {sl.get('fit_r2', float('nan')):10.6f} "
              f"{str(sl.get('monotone')):>9}  {kinds}")


if __name__ == "__main__":
    main()
