from pathlib import Path

import numpy as np
import pytest

from firstpassage import AbsorbingChainSpec, load_table

DATA = Path(__file__).resolve().parents[1] / "data"
BUG_STAGE = DATA / "eratyrus_mucronatus.stage"
BUG_COUNTS = DATA / "eratyrus_mucronatus.counts"

# per-stage (G, R, P, n) for the kissing bug life cycle
BUG_G = [139, 89, 74, 60, 59, 55, 0]
BUG_R = [59, 52, 15, 14, 1, 4, 55]
BUG_P = [478, 528, 301, 392, 405, 853, 2515]
BUG_N = [676, 669, 390, 466, 465, 912, 2570]


def bug_U() -> np.ndarray:
    """Chain-orientation transient block, built from literal fractions."""
    U = np.zeros((7, 7))
    for i in range(7):
        U[i, i] = BUG_P[i] / BUG_N[i]
        if i < 6:
            U[i, i + 1] = BUG_G[i] / BUG_N[i]
    return U


@pytest.fixture(scope="session")
def bug_table():
    return load_table(BUG_STAGE)


@pytest.fixture(scope="session")
def bug_spec(bug_table):
    return bug_table.point_estimate()


def random_substochastic(rng, k, max_row_sum=0.95, min_absorb=None):
    U = rng.random((k, k)) * (rng.random((k, k)) < 0.7)
    sums = U.sum(axis=1, keepdims=True)
    target = rng.uniform(0.0, max_row_sum, size=(k, 1))
    if min_absorb is not None:
        target = np.minimum(target, 1.0 - min_absorb)
    with np.errstate(invalid="ignore", divide="ignore"):
        U = np.where(sums > 0, U / sums * target, 0.0)
    return U


def random_spec(rng, k, **kw):
    v = rng.dirichlet(np.ones(k))
    v = v / v.sum()
    return AbsorbingChainSpec(random_substochastic(rng, k, **kw), v)


ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
