"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line; the lines are also collected and shown in
the pytest terminal summary. Run on its own with::

    pytest tests/test_acceptance.py -s
"""

import json
import time

import numpy as np
import pytest

from firstpassage import (
    AbsorbingChainSpec,
    McConfig,
    RngStream,
    load_table,
    passage_time_moments,
    run_mc,
    simulate_trajectories,
    sweep_sample_fraction,
    truncated_sum_moments,
)
from firstpassage import cli

from conftest import ACCEPTANCE_LOG, BUG_COUNTS, BUG_STAGE, random_spec

EGG = np.eye(7)[0]
SEED = 42

# published values for the kissing bug, start = Egg
CALC_MEAN, CALC_SD = 30.658, 44.943
MC_MEAN, MC_SD = 31.087, 46.023
SD_INCREASE_AT_TENTH = 41.0

_results = []  # every McResult produced here, for criterion 8


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} :: {detail}"
    print(line)
    ACCEPTANCE_LOG.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def table():
    return load_table(BUG_STAGE)


@pytest.fixture(scope="module")
def sweep(table):
    cfg = McConfig(replicates=100_000, seed=SEED)
    t0 = time.perf_counter()
    points = sweep_sample_fraction(table, EGG, cfg, [1.0, 0.5, 0.2, 0.1], keep_replicates=True)
    elapsed = time.perf_counter() - t0
    _results.extend(p.result for p in points)
    return points, elapsed


def test_1_analytic_reproduction(table, capsys):
    spec = table.point_estimate(EGG)
    timings = []
    for _ in range(20):
        t0 = time.perf_counter()
        m = passage_time_moments(spec)
        timings.append(time.perf_counter() - t0)
    runtime = min(timings)
    assert cli.main(["analytic", "--input", str(BUG_COUNTS), "--start", "Egg", "--output-format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    ok = (
        abs(m.mean - CALC_MEAN) <= 1e-3
        and abs(m.sd - CALC_SD) <= 1e-3
        and out["mean"] == m.mean
        and out["sd"] == m.sd
        and runtime < 0.010
    )
    report(1, "analytic moments", ok,
           f"mean {m.mean:.6f} (published {CALC_MEAN}), sd {m.sd:.6f} (published {CALC_SD}), "
           f"tol 0.001, runtime {runtime * 1e3:.3f} ms < 10 ms")


def test_2_monte_carlo_reproduction(table):
    cfg = McConfig(replicates=100_000, seed=SEED, fraction=1.0)
    t0 = time.perf_counter()
    res = run_mc(table, EGG, cfg)
    elapsed = time.perf_counter() - t0
    _results.append(res)
    rel_mean = abs(res.mean_L - MC_MEAN) / MC_MEAN
    rel_sd = abs(res.sd_L - MC_SD) / MC_SD
    ok = rel_mean <= 0.02 and rel_sd <= 0.02 and elapsed < 2.0
    report(2, "Monte Carlo moments, 1e5 replicates", ok,
           f"mean {res.mean_L:.3f} (published {MC_MEAN}, rel {rel_mean:.4f}), "
           f"sd {res.sd_L:.3f} (published {MC_SD}, rel {rel_sd:.4f}), tol 0.02, "
           f"skipped {res.replicates_skipped}, runtime {elapsed:.2f} s < 2 s")


def _sd_stderr(result):
    # delta method: var_L is the mean of sigma_j + (mu_j - mean)^2
    q = result.variances + (result.means - result.mean_L) ** 2
    return q.std(ddof=1) / np.sqrt(q.size) / (2 * result.sd_L)


def test_3_sample_size_effect(sweep):
    points, elapsed = sweep
    by_f = {p.fraction: p for p in points}
    inc = by_f[0.1].sd_increase_percent
    order = [1.0, 0.5, 0.2, 0.1]
    gaps = []
    for a, b in zip(order, order[1:]):
        ra, rb = by_f[a].result, by_f[b].result
        noise = np.hypot(_sd_stderr(ra), _sd_stderr(rb))
        gaps.append((rb.sd_L - ra.sd_L) / noise)
    ok = abs(inc - SD_INCREASE_AT_TENTH) <= 5.0 and all(g > 4.0 for g in gaps)
    table_txt = ", ".join(f"f={p.fraction:g}: sd {p.result.sd_L:.3f} (+{p.sd_increase_percent:.1f}%)" for p in points)
    report(3, "sample-size sweep", ok,
           f"increase at f=0.1 {inc:.2f}% (published 41 +/- 5); {table_txt}; "
           f"adjacent gaps in noise units {[round(float(g), 1) for g in gaps]} (> 4 required); {elapsed:.1f} s")


def test_4_oracle_equivalence():
    rng = np.random.default_rng(20240501)
    n_chains, n_paths = 200, 20_000
    truncated_ok = trajectory_ok = 0
    worst = 0.0
    for c in range(n_chains):
        k = int(rng.integers(1, 6))
        spec = random_spec(rng, k, min_absorb=0.05)
        exact = passage_time_moments(spec)
        ts = truncated_sum_moments(spec, tail_tol=1e-13)
        err = max(abs(exact.mean - ts.moments.mean), abs(exact.variance - ts.moments.variance))
        worst = max(worst, err)
        truncated_ok += err <= 1e-6
        L = simulate_trajectories(spec, n_paths, RngStream(SEED, c))
        se = L.std(ddof=1) / np.sqrt(L.size)
        trajectory_ok += abs(L.mean() - exact.mean) <= 3 * se
    ok = truncated_ok == n_chains and trajectory_ok >= 0.99 * n_chains
    report(4, "oracle equivalence on random chains", ok,
           f"truncated sums {truncated_ok}/{n_chains} within 1e-6 (worst {worst:.2e}); "
           f"trajectories {trajectory_ok}/{n_chains} within 3 SE (>= 99% required)")


def test_5_geometric_chains():
    worst = 0.0
    for p in np.round(np.arange(10) * 0.1, 1):
        m = passage_time_moments(AbsorbingChainSpec([[p]], [1.0]))
        worst = max(worst, abs(m.mean - 1 / (1 - p)), abs(m.variance - p / (1 - p) ** 2))
    report(5, "geometric chains p = 0, 0.1, ..., 0.9", worst <= 1e-12, f"max abs error {worst:.2e} (tol 1e-12)")


def test_6_consistency_with_large_samples(table):
    big = table.scaled(100)
    exact = passage_time_moments(big.point_estimate(EGG))
    res = run_mc(big, EGG, McConfig(replicates=10_000, seed=SEED))
    _results.append(res)
    rel_mean = abs(res.mean_L - exact.mean) / exact.mean
    rel_sd = abs(res.sd_L - exact.sd) / exact.sd
    report(6, "counts x100 converge to analytic", rel_mean <= 0.01 and rel_sd <= 0.01,
           f"mean rel {rel_mean:.5f}, sd rel {rel_sd:.5f} (tol 0.01, 1e4 replicates)")


def test_7_determinism(capsys):
    base = ["montecarlo", "--input", str(BUG_COUNTS), "--replicates", "100000", "--seed", str(SEED),
            "--output-format", "json"]
    outputs = []
    for extra in ([], [], ["--workers", "4"], ["--workers", "3"]):
        assert cli.main(base + extra) == 0
        outputs.append(capsys.readouterr().out.encode())
    ok = all(o == outputs[0] for o in outputs)
    report(7, "byte-identical JSON across runs and worker counts", ok,
           f"{len(outputs)} runs (workers 1, 1, 4, 3), {len(outputs[0])} bytes, identical={ok}")


def test_8_decomposition_identity(table, sweep):
    results = list(_results)
    for seed in range(5):
        results.append(run_mc(table, EGG, McConfig(replicates=3000, seed=seed, fraction=0.3)))
    worst = max(abs(r.var_L - (r.mean_of_variances + r.variance_of_means)) for r in results)
    ok = worst <= 1e-12 and all(r.mean_of_variances >= 0 and r.variance_of_means >= 0 for r in results)
    report(8, "law of total variance identity", ok, f"{len(results)} results, max |residual| {worst:.1e} (tol 1e-12)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
