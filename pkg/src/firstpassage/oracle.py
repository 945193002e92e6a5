"""Brute-force checks on the fundamental-matrix moments.

Two routes that share no linear algebra with :mod:`firstpassage.chain`:
direct trajectory simulation, and summation of the passage-time
distribution ``P(L = t) = v' U^(t-1) d`` where ``d`` is the absorption
vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import AbsorbingChainSpec, MomentPair
from .errors import TrajectoryOverflow
from .sampling import RngStream, _as_generator

MAX_STEPS = 10_000_000
MAX_HORIZON = 1_000_000
TRUNCATED_MAX_STATES = 8


def _cumulative_rows(spec: AbsorbingChainSpec) -> np.ndarray:
    """Row-wise CDF over ``k`` transient destinations followed by absorption."""
    U = spec.U
    cdf = np.cumsum(np.column_stack([U, np.clip(1.0 - U.sum(axis=1), 0.0, None)]), axis=1)
    cdf[:, -1] = np.inf  # absorption catches anything left over from rounding
    return cdf


def simulate_trajectory(spec: AbsorbingChainSpec, rng: RngStream) -> int:
    """Walk one path from a state drawn from ``v`` until absorption; return the step count."""
    gen = _as_generator(rng)
    cdf = _cumulative_rows(spec)
    k = spec.k
    state = int(np.searchsorted(np.cumsum(spec.v), gen.random() * spec.v.sum(), side="right"))
    state = min(state, k - 1)
    for step in range(1, MAX_STEPS + 1):
        state = int(np.searchsorted(cdf[state], gen.random(), side="right"))
        if state >= k:
            return step
    raise TrajectoryOverflow(f"no absorption within {MAX_STEPS} steps")


def simulate_trajectories(spec: AbsorbingChainSpec, count: int, rng) -> np.ndarray:
    """Absorption times of ``count`` independent paths, advanced in lockstep."""
    gen = _as_generator(rng)
    cdf = _cumulative_rows(spec)
    k = spec.k
    start_cdf = np.cumsum(spec.v)
    state = np.minimum(np.searchsorted(start_cdf, gen.random(count) * start_cdf[-1], side="right"), k - 1)
    times = np.zeros(count, dtype=np.int64)
    alive = np.arange(count)
    step = 0
    while alive.size:
        step += 1
        if step > MAX_STEPS:
            raise TrajectoryOverflow(f"{alive.size} path(s) not absorbed within {MAX_STEPS} steps")
        u = gen.random(alive.size)
        nxt = (u[:, None] >= cdf[state]).sum(axis=1)
        done = nxt >= k
        times[alive[done]] = step
        alive = alive[~done]
        state = nxt[~done]
    return times


@dataclass(frozen=True)
class TruncatedMoments:
    moments: MomentPair
    tail_bound: float
    horizon: int
    pmf: np.ndarray


def truncated_sum_moments(
    spec: AbsorbingChainSpec, horizon: int | None = None, tail_tol: float = 1e-9
) -> TruncatedMoments:
    """Moments of ``L`` restricted to ``1 <= L <= horizon``, plus the tail mass ``P(L > horizon)``.

    The sums are not renormalised, so they converge to the exact moments as
    the tail vanishes. With ``horizon=None`` the horizon doubles from 1 until
    the tail drops below ``tail_tol`` or passes ``MAX_HORIZON``.
    """
    if spec.k > TRUNCATED_MAX_STATES:
        raise ValueError(f"truncated sums are limited to {TRUNCATED_MAX_STATES} states, got {spec.k}")
    if horizon is not None and horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    U = spec.U
    d = 1.0 - U.sum(axis=1)
    w = spec.v.copy()
    pmf = []
    checkpoint = 1
    while True:
        pmf.append(float(w @ d))
        w = w @ U
        t = len(pmf)
        if horizon is not None:
            if t == horizon:
                break
        elif t == checkpoint:
            if w.sum() < tail_tol or t > MAX_HORIZON:
                break
            checkpoint *= 2
    pmf = np.array(pmf)
    steps = np.arange(1, pmf.size + 1, dtype=float)
    mean = float(steps @ pmf)
    var = float((steps * steps) @ pmf) - mean * mean
    return TruncatedMoments(MomentPair(mean, var), float(w.sum()), int(pmf.size), pmf)
