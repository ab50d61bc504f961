#!/usr/bin/env python3
"""Run every Monte Carlo benchmark example and print a summary table.

Usage: python scripts/run_benchmarks.py [--seeds N] [--jobs N] [--out DIR]
"""

import argparse
import csv
import json
import time
from pathlib import Path

from ddctl.bench import BENCH_EXAMPLES, run_bench, traces_csv_rows
from ddctl.config import DEFAULT_CONFIG


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=100)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", type=Path, default=Path("bench-results"))
    parser.add_argument("--examples", nargs="*", default=list(BENCH_EXAMPLES))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print(f"{'example':24s} {'success':>10s} {'rate':>6s} {'median alpha':>13s} {'seconds':>8s}")
    for example in args.examples:
        start = time.perf_counter()
        kwargs = {}
        result = run_bench(example, args.seeds, DEFAULT_CONFIG, jobs=args.jobs, **kwargs)
        elapsed = time.perf_counter() - start
        with open(args.out / f"{example}-summary.json", "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        with open(args.out / f"{example}-norms.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "k", "norm_x"])
            writer.writerows(traces_csv_rows(result))
        alpha = result.median("alpha")
        print(
            f"{example:24s} {result.success_count:>5d}/{args.seeds:<4d} {result.success_rate:>6.2f}"
            f" {alpha if alpha is not None else float('nan'):>13.3e} {elapsed:>8.1f}"
        )


if __name__ == "__main__":
    main()
