"""Monte Carlo propagation of count-sampling uncertainty into passage-time moments.

Each replicate redraws the transient block from the observed counts, computes
the exact conditional moments ``(mu_j, sigma_j)`` for that draw, and the run
combines them with the law of total variance::

    V[L] = mean_j(sigma_j) + var_j(mu_j)

Replicates are processed in fixed-size blocks. Block ``b`` draws from its own
substream keyed by ``(seed, stream_id, b)``, so the result does not depend on
how many workers execute the blocks or in what order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import VARIANCE_CLAMP, fundamental_matrices, moments_from_fundamental
from .errors import InsufficientReplicates, MonteCarloError, TooManySkips, ValidationError
from .sampling import RngStream, TransitionCountTable, sample_matrices

log = logging.getLogger(__name__)

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class McConfig:
    replicates: int = 100_000
    seed: int = 0
    fraction: float = 1.0
    max_skip_ratio: float = 0.01

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ValueError(f"replicates must be a positive integer, got {self.replicates!r}")
        if not 0 < self.fraction <= 1:
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction!r}")
        if not 0 <= self.max_skip_ratio < 1:
            raise ValueError(f"max_skip_ratio must be in [0, 1), got {self.max_skip_ratio!r}")


@dataclass(frozen=True)
class McResult:
    mean_L: float
    var_L: float
    mean_of_variances: float
    variance_of_means: float
    replicates_used: int
    replicates_skipped: int
    means: np.ndarray | None = None
    variances: np.ndarray | None = None

    @property
    def sd_L(self) -> float:
        return float(np.sqrt(self.var_L))

    def to_dict(self) -> dict:
        return {
            "mean_L": self.mean_L,
            "var_L": self.var_L,
            "sd_L": self.sd_L,
            "mean_of_variances": self.mean_of_variances,
            "variance_of_means": self.variance_of_means,
            "replicates_used": self.replicates_used,
            "replicates_skipped": self.replicates_skipped,
        }


def _check_start(v, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (k,):
        raise ValidationError(f"start distribution has length {v.size}, expected {k}")
    if not np.isfinite(v).all() or (v < 0).any() or abs(v.sum() - 1.0) > 1e-12:
        raise ValidationError(f"start distribution must be nonnegative and sum to 1, got {v.tolist()}")
    return v


def _run_block(table, v, fraction, size, gen):
    U = sample_matrices(table, fraction, size, gen)
    N, bad = fundamental_matrices(U)
    with np.errstate(invalid="ignore"):
        mu, sigma = moments_from_fundamental(N, v)
        bad = bad | ~np.isfinite(mu) | ~np.isfinite(sigma) | (sigma < -VARIANCE_CLAMP)
    return mu, np.maximum(sigma, 0.0), bad


def replicate_moments(
    table: TransitionCountTable,
    v,
    cfg: McConfig,
    *,
    stream_id: int = 0,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-replicate ``(mu, sigma, skipped)`` arrays in replicate order."""
    v = _check_start(v, table.k)
    stream = RngStream(cfg.seed, stream_id)
    sizes = [min(BLOCK_SIZE, cfg.replicates - start) for start in range(0, cfg.replicates, BLOCK_SIZE)]

    def work(b):
        return _run_block(table, v, cfg.fraction, sizes[b], stream.substream(b))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(b) for b in range(len(sizes))]
    mu = np.concatenate([p[0] for p in parts])
    sigma = np.concatenate([p[1] for p in parts])
    bad = np.concatenate([p[2] for p in parts])
    return mu, sigma, bad


def run_mc(
    table: TransitionCountTable,
    v,
    cfg: McConfig,
    *,
    stream_id: int = 0,
    workers: int = 1,
    keep_replicates: bool = False,
) -> McResult:
    """Estimate ``E[L]`` and ``V[L]`` accounting for sampling error in the counts.

    Replicates whose resampled block is singular or yields non-finite or
    negative moments are skipped and counted. Raises :class:`TooManySkips`
    when the skipped share exceeds ``cfg.max_skip_ratio`` and
    :class:`InsufficientReplicates` when fewer than two replicates remain.
    """
    mu, sigma, bad = replicate_moments(table, v, cfg, stream_id=stream_id, workers=workers)
    skipped = int(bad.sum())
    used = cfg.replicates - skipped
    if skipped:
        log.debug("skipped %d of %d replicates", skipped, cfg.replicates)
    if skipped / cfg.replicates > cfg.max_skip_ratio:
        raise TooManySkips(
            f"{skipped} of {cfg.replicates} replicates skipped "
            f"({skipped / cfg.replicates:.2%} > {cfg.max_skip_ratio:.2%})"
        )
    if used < 2:
        raise InsufficientReplicates(f"only {used} usable replicate(s); need at least 2")
    mu, sigma = mu[~bad], sigma[~bad]
    mean_of_variances = float(np.mean(sigma))
    variance_of_means = float(np.var(mu))
    return McResult(
        mean_L=float(np.mean(mu)),
        var_L=mean_of_variances + variance_of_means,
        mean_of_variances=mean_of_variances,
        variance_of_means=variance_of_means,
        replicates_used=used,
        replicates_skipped=skipped,
        means=mu if keep_replicates else None,
        variances=sigma if keep_replicates else None,
    )


@dataclass(frozen=True)
class SweepPoint:
    fraction: float
    result: McResult
    sd_increase_percent: float


def sweep_sample_fraction(
    table: TransitionCountTable,
    v,
    cfg: McConfig,
    fractions,
    *,
    workers: int = 1,
    keep_replicates: bool = False,
) -> list[SweepPoint]:
    """Rerun :func:`run_mc` at reduced sample sizes ``f * n_i``.

    The point estimates stay fixed; only the number of resampled trials
    shrinks. A full-size baseline (``f = 1``) is prepended when absent, and
    every entry reports the percentage change of its standard deviation
    against that baseline. Fraction ``i`` of the resulting list uses stream
    ``i`` of ``cfg.seed``.
    """
    fractions = [float(f) for f in fractions]
    if not fractions:
        raise ValueError("fractions must be non-empty")
    for f in fractions:
        if not 0 < f <= 1:
            raise ValueError(f"fraction must be in (0, 1], got {f!r}")
    if 1.0 not in fractions:
        fractions = [1.0] + fractions

    results = []
    for i, f in enumerate(fractions):
        run_cfg = McConfig(cfg.replicates, cfg.seed, f, cfg.max_skip_ratio)
        try:
            res = run_mc(table, v, run_cfg, stream_id=i, workers=workers, keep_replicates=keep_replicates)
        except MonteCarloError as exc:
            raise type(exc)(f"fraction {f:g}: {exc}") from exc
        results.append(res)
    base_sd = results[fractions.index(1.0)].sd_L
    return [
        SweepPoint(f, r, 100.0 * (r.sd_L - base_sd) / base_sd if base_sd > 0 else 0.0)
        for f, r in zip(fractions, results)
    ]
