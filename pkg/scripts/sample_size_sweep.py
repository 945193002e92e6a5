"""Standard deviation of longevity as the sample size shrinks to a fraction f.

Writes plot-ready CSV (one row per seed and fraction) and prints a summary
of the percentage increase over the full-size baseline.

    python scripts/sample_size_sweep.py --out sweep.csv --seeds 1 2 3
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from firstpassage import McConfig, load_table, sweep_sample_fraction

DATA = Path(__file__).resolve().parents[1] / "data" / "eratyrus_mucronatus.stage"
FRACTIONS = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", default=str(DATA))
    ap.add_argument("--replicates", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[42])
    ap.add_argument("--fractions", type=float, nargs="+", default=FRACTIONS)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    table = load_table(args.input)
    v = np.eye(table.k)[0]
    rows = []
    for seed in args.seeds:
        for p in sweep_sample_fraction(table, v, McConfig(args.replicates, seed), args.fractions):
            rows.append([seed, p.fraction, p.result.mean_L, p.result.sd_L, p.sd_increase_percent,
                         p.result.replicates_skipped])

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["seed", "f", "mean_L", "sd_L", "sd_increase_percent", "skipped"])
    w.writerows(rows)
    if args.out:
        fh.close()
        by_f = {}
        for r in rows:
            by_f.setdefault(r[1], []).append(r[4])
        for f, incs in by_f.items():
            print(f"f={f:<4g} sd increase {np.mean(incs):6.2f}% (range {min(incs):.2f} to {max(incs):.2f})")


if __name__ == "__main__":
    main()
