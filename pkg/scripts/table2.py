"""Pole-configuration vs F-radius gain on the (0, 5, -5) initialization.

Usage: python scripts/table2.py --reps 5 --out results/table2
"""

import argparse
from dataclasses import replace
from pathlib import Path

from inzsmf import bench, cli


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--poles", default="0.95,0.98,0.98")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="results/table2")
    args = parser.parse_args()

    poles = tuple(float(p) for p in args.poles.split(","))
    base = [bench.preset("table2", gain=g, poles=poles, steps=args.steps, repetitions=args.reps,
                         seed=args.seed) for g in ("poles", "fradius")]
    configs = [replace(c, filter=f) for c in base for f in ("zsmf", "inzsmf")]
    reports = bench.run_many(configs, args.workers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_metrics_csv(out / "metrics.csv", [bench.metrics_row(c, r) for c, r in zip(configs, reports)])
    pairs = [(configs[i], reports[i], configs[i + 1], reports[i + 1]) for i in range(0, len(configs), 2)]
    cli.write_comparison_csv(out / "comparison.csv", cli.comparison_rows(pairs))
    bench.write_metadata(out / "metadata.json", base[0], script="table2")

    print(f"{'gain':<9}{'filter':<8}" + "".join(f"{m:>12}" for m in bench.METRIC_FIELDS) + f"{'contain':>9}")
    for c, r in zip(configs, reports):
        cells = [getattr(r, m) for m in bench.METRIC_FIELDS]
        print(f"{c.gain:<9}{c.filter:<8}" + "".join(f"{v:>12.5g}" for v in cells)
              + f"{r.containment_rate:>9.3f}")


if __name__ == "__main__":
    main()
