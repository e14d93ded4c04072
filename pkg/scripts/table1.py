"""Initial-condition sweep with the F-radius gain: ZSMF vs InZSMF on eight presets.

Usage: python scripts/table1.py --reps 5 --out results/table1
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
    parser.add_argument("--ranking", choices=("euclidean", "girard"), default="euclidean")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="results/table1")
    args = parser.parse_args()

    base = [bench.preset(f"table1-row{k}", steps=args.steps, repetitions=args.reps, seed=args.seed,
                         reduction_ranking=args.ranking, check_containment=False) for k in range(1, 9)]
    configs = [replace(c, filter=f) for c in base for f in ("zsmf", "inzsmf")]
    reports = bench.run_many(configs, args.workers)
    pairs = [(configs[i], reports[i], configs[i + 1], reports[i + 1]) for i in range(0, len(configs), 2)]
    rows = cli.comparison_rows(pairs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_metrics_csv(out / "metrics.csv", [bench.metrics_row(c, r) for c, r in zip(configs, reports)])
    cli.write_comparison_csv(out / "comparison.csv", rows)
    bench.write_metadata(out / "metadata.json", base[0], script="table1")

    print(f"{'row':<5}" + "".join(f"{m:>12}" for m in ("RMSE th %", "RMSE x %", "AAR th %", "AAR x %")))
    for k, row in enumerate(rows, 1):
        cells = [row[f"improvement_{m}_pct"] for m in ("rmse_theta", "rmse_x", "aar_theta", "aar_x")]
        print(f"{k:<5}" + "".join(f"{v:>12.2f}" for v in cells))


if __name__ == "__main__":
    main()
