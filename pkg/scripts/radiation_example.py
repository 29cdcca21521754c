"""Run the radiation example (a = sqrt(t), kappa = 0) end to end and print
every measured quantity next to its threshold.

    python3 scripts/radiation_example.py [--t2 1.0] [--tolerance 1e-10]
"""
import argparse
import sys

from flrwc import cli


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t2", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    args = p.parse_args(argv)

    cfg = cli.RunConfig(subcommand="reproduce-radiation", t2=args.t2, tolerance=args.tolerance)
    values, checks, report = cli.reproduce_radiation(cfg)
    for key, val in values.items():
        limit = cli.THRESHOLDS.get(key)
        suffix = f"  (threshold {limit:g})" if limit is not None else ""
        print(f"{key:32s} {val: .6e}{suffix}")
    print()
    for key, ok in checks.items():
        print(f"{key:32s} {'ok' if ok else 'FAILED'}")
    for ev in report["events"]:
        print(f"event {ev['kind']} at t = {ev['t_conj']:.6g}")
    return 0 if all(checks.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
