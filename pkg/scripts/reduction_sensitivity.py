"""How the generator ranking used by order reduction shifts the ZSMF/InZSMF comparison.

Usage: python scripts/reduction_sensitivity.py --preset table1-row6 --reps 2
"""

import argparse

from inzsmf import bench
from inzsmf.zonotope import RANKINGS

METRICS = ("rmse_theta", "rmse_x", "aar_theta", "aar_x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--preset", default="table1-row6")
    parser.add_argument("--gain", choices=bench.GAINS, default="fradius")
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=2)
    parser.add_argument("--orders", default="10,30", help="comma separated reduction thresholds")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    orders = [int(s) for s in args.orders.split(",")]
    cases = [(r, s) for r in RANKINGS for s in orders]
    configs = [bench.preset(args.preset, filter=f, gain=args.gain, steps=args.steps,
                            repetitions=args.reps, reduction_ranking=r, reduction_order=s,
                            check_containment=False)
               for r, s in cases for f in ("zsmf", "inzsmf")]
    reports = bench.run_many(configs, args.workers)

    print(f"{'ranking':<10}{'s':>4}" + "".join(f"{m + ' %':>14}" for m in METRICS))
    for k, (ranking, s) in enumerate(cases):
        base, cand = reports[2 * k], reports[2 * k + 1]
        cells = [bench.improvement(getattr(base, m), getattr(cand, m)) for m in METRICS]
        print(f"{ranking:<10}{s:>4}" + "".join(f"{v:>14.2f}" for v in cells))


if __name__ == "__main__":
    main()
