"""Run a benchmark sweep and print per-(algorithm, n) means.

    python3 scripts/run_sweep.py scripts/configs/scaled.json -o results/scaled.csv
"""

import argparse
from pathlib import Path

import pandas as pd

from fairmatch.bench import ExperimentConfig, run_sweep, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("-o", "--output", default="results/sweep.csv")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    run_sweep(ExperimentConfig.from_file(args.config), out, workers=args.workers)

    table = summarize(out, ["bipartite", "algorithm", "n"], out.with_suffix(".summary.csv"))
    cols = ["bipartite", "algorithm", "n", "weight_mean", "pof_mean", "viol_lower_mean",
            "viol_upper_mean", "runtime_ms_mean", "weight_count"]
    with pd.option_context("display.width", 160, "display.max_columns", None):
        print(table[cols].to_string(index=False))
    print(f"rows in {out}, summary in {out.with_suffix('.summary.csv')}")


if __name__ == "__main__":
    main()
