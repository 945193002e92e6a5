"""Multinomial resampling of observed transition counts.

Every row of a :class:`TransitionCountTable` is redrawn from a multinomial
with the row's point-estimate probabilities. Draws use the conditional
binomial construction: category ``j`` receives
``Binomial(remaining, p_j / sum(p[j:]))`` and the last category takes what
is left, which is exact for any ``n`` and costs ``O(k)`` per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import AbsorbingChainSpec
from .errors import InvalidProbabilityVector, ValidationError

PROB_SUM_TOL = 1e-9
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Substreams obtained with :meth:`substream` are keyed by
    ``(seed, stream_id, index)`` and never depend on how work is scheduled.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(default=None, init=False, repr=False, compare=False)

    def _seed_sequence(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            self.seed & _SEED_MASK, spawn_key=(self.stream_id & _SEED_MASK, *key)
        )

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(self._seed_sequence())))
        return self._gen

    def substream(self, index: int) -> np.random.Generator:
        """Fresh generator for work item ``index``; independent of the parent's state."""
        return np.random.Generator(np.random.PCG64(self._seed_sequence(index)))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class TransitionCountTable:
    """Observed transition counts out of each transient state.

    ``counts`` has shape ``(k, k + 1)``: column ``j < k`` counts moves to
    transient state ``j`` and the last column counts absorptions.
    """

    state_labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.counts)
        labels = tuple(self.state_labels)
        if raw.ndim != 2 or raw.shape != (len(labels), len(labels) + 1):
            raise ValidationError(
                f"counts must have shape ({len(labels)}, {len(labels) + 1}), got {raw.shape}"
            )
        if raw.dtype.kind == "f":
            if not (np.isfinite(raw).all() and (raw == np.round(raw)).all()):
                raise ValidationError("counts must be integers")
        elif raw.dtype.kind not in "iu":
            raise ValidationError(f"counts must be integers, got dtype {raw.dtype}")
        counts = raw.astype(np.int64)
        problems = []
        for i, j in zip(*np.nonzero(counts < 0)):
            problems.append(f"row {labels[i]}: count {j} is negative ({counts[i, j]})")
        for i in np.nonzero(counts.sum(axis=1) < 1)[0]:
            problems.append(f"row {labels[i]}: no observed transitions (n = 0)")
        if len(set(labels)) != len(labels):
            problems.append("state labels are not unique")
        if problems:
            raise ValidationError(problems)
        counts.setflags(write=False)
        object.__setattr__(self, "state_labels", labels)
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return len(self.state_labels)

    @property
    def n(self) -> np.ndarray:
        """Total observed transitions per state."""
        return self.counts.sum(axis=1)

    @property
    def probabilities(self) -> np.ndarray:
        """Point estimates ``count / n``, each divided once in floating point."""
        return self.counts / self.n[:, None]

    def point_estimate(self, v=None) -> AbsorbingChainSpec:
        return AbsorbingChainSpec(self.probabilities[:, :-1], v, self.state_labels)

    def scaled(self, factor: int) -> TransitionCountTable:
        """Same proportions, every count multiplied by ``factor``."""
        return TransitionCountTable(self.state_labels, self.counts * int(factor))


def effective_sample_size(n: int, fraction: float) -> int:
    """``max(1, round(fraction * n))`` with halves rounded up."""
    return max(1, math.floor(fraction * n + 0.5))


def _check_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidProbabilityVector(f"expected a non-empty vector, got shape {p.shape}")
    if not np.isfinite(p).all():
        raise InvalidProbabilityVector("probability vector has non-finite entries")
    if (p < 0).any():
        raise InvalidProbabilityVector(f"negative probability at index {int(np.argmax(p < 0))}")
    if abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise InvalidProbabilityVector(f"probabilities sum to {p.sum()!r}")
    return p


def _conditional_binomial(p: np.ndarray, n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    out = np.zeros((size, p.size), dtype=np.int64)
    # tail[j] >= p[j] in floating point, so every conditional probability is <= 1
    tail = np.cumsum(p[::-1])[::-1]
    remaining = np.full(size, n, dtype=np.int64)
    for j in range(p.size - 1):
        if p[j] == 0.0:
            continue
        q = min(1.0, p[j] / tail[j])
        draw = gen.binomial(remaining, q)
        out[:, j] = draw
        remaining -= draw
    out[:, -1] = remaining
    return out


def sample_row(p, n: int, rng) -> np.ndarray:
    """One multinomial count vector with ``n`` trials and category probabilities ``p``."""
    p = _check_probabilities(p)
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return _conditional_binomial(p, int(n), 1, _as_generator(rng))[0]


def sample_rows(p, n: int, size: int, rng) -> np.ndarray:
    """``size`` independent multinomial draws, shape ``(size, len(p))``."""
    p = _check_probabilities(p)
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return _conditional_binomial(p, int(n), size, _as_generator(rng))


def sample_matrices(table: TransitionCountTable, fraction: float, size: int, rng) -> np.ndarray:
    """A stack of ``size`` resampled transient blocks, shape ``(size, k, k)``.

    Row ``i`` is redrawn with ``effective_sample_size(n_i, fraction)`` trials
    from the fixed point estimates, then divided by that trial count.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction!r}")
    gen = _as_generator(rng)
    probs = table.probabilities
    k = table.k
    out = np.empty((size, k, k))
    for i in range(k):
        n_eff = effective_sample_size(int(table.n[i]), fraction)
        p = _check_probabilities(probs[i])
        draws = _conditional_binomial(p, n_eff, size, gen)
        out[:, i, :] = draws[:, :k] / n_eff
    return out


def sample_matrix(
    table: TransitionCountTable, fraction: float, rng, v=None
) -> AbsorbingChainSpec:
    """One realisation ``U*`` of the estimated transient block."""
    U = sample_matrices(table, fraction, 1, rng)[0]
    return AbsorbingChainSpec(U, v, table.state_labels)
