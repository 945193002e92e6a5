"""Analytic vs Monte Carlo longevity of Eratyrus mucronatus, starting from the egg stage.

    python scripts/analytic_vs_montecarlo.py --replicates 100000 --seeds 42 7 2024
"""

import argparse
import time
from pathlib import Path

import numpy as np

from firstpassage import McConfig, load_table, passage_time_moments, run_mc

DATA = Path(__file__).resolve().parents[1] / "data" / "eratyrus_mucronatus.stage"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", default=str(DATA))
    ap.add_argument("--replicates", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[42])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    table = load_table(args.input)
    v = np.eye(table.k)[0]
    exact = passage_time_moments(table.point_estimate(v))
    print(f"{'':>10}  {'mean':>8}  {'sd':>8}  {'skipped':>7}  {'seconds':>7}")
    print(f"{'analytic':>10}  {exact.mean:8.3f}  {exact.sd:8.3f}")
    for seed in args.seeds:
        t0 = time.perf_counter()
        res = run_mc(table, v, McConfig(args.replicates, seed), workers=args.workers)
        dt = time.perf_counter() - t0
        print(f"{'seed ' + str(seed):>10}  {res.mean_L:8.3f}  {res.sd_L:8.3f}  {res.replicates_skipped:7d}  {dt:7.2f}")


if __name__ == "__main__":
    main()
