"""Exact passage-time moments of an absorbing chain via the fundamental matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, SingularSystem
from .linalg import lu_solve_batch

ROW_SUM_TOL = 1e-12
VARIANCE_CLAMP = 1e-9
NEGATIVE_ENTRY_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AbsorbingChainSpec:
    """Transient block ``U`` of an absorbing chain plus a start distribution.

    ``U[i, j]`` is the one-step probability of moving from transient state
    ``i`` to transient state ``j``; the row deficit ``1 - U[i].sum()`` is the
    probability of absorption from ``i``. Arrays are stored read-only.
    Construction does not validate; use :func:`validate_spec`.
    """

    U: np.ndarray
    v: np.ndarray = None
    state_labels: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        U = np.atleast_2d(_frozen(self.U))
        object.__setattr__(self, "U", U)
        k = U.shape[0]
        if self.v is None:
            v = np.zeros(k)
            if k:
                v[0] = 1.0
        else:
            v = self.v
        object.__setattr__(self, "v", _frozen(np.ravel(v)))
        labels = self.state_labels
        if labels is None:
            labels = tuple(str(i) for i in range(k))
        object.__setattr__(self, "state_labels", tuple(labels))

    @property
    def k(self) -> int:
        return self.U.shape[0]

    @property
    def absorption(self) -> np.ndarray:
        """One-step absorption probability per transient state."""
        return 1.0 - self.U.sum(axis=1)

    def with_start(self, v) -> AbsorbingChainSpec:
        return AbsorbingChainSpec(self.U, v, self.state_labels)


@dataclass(frozen=True)
class MomentPair:
    mean: float
    variance: float

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.variance))


def _unreachable_rows(U: np.ndarray) -> list[int]:
    """Rows from which no path leads to a row with absorption mass."""
    k = U.shape[0]
    exits = U > 0
    can_absorb = (1.0 - U.sum(axis=1)) > ROW_SUM_TOL
    changed = True
    while changed:
        reach = can_absorb | (exits & can_absorb[None, :]).any(axis=1)
        changed = bool((reach != can_absorb).any())
        can_absorb = reach
    return [i for i in range(k) if not can_absorb[i]]


def validate_spec(spec: AbsorbingChainSpec) -> list[str]:
    """Return human-readable invariant violations; empty when the spec is valid."""
    out: list[str] = []
    U, v = spec.U, spec.v
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return [f"U must be square, got shape {U.shape}"]
    k = U.shape[0]
    if v.shape != (k,):
        out.append(f"start distribution has length {v.size}, expected {k}")
    if len(spec.state_labels) != k:
        out.append(f"{len(spec.state_labels)} state labels for {k} states")
    if out:
        return out

    if not np.isfinite(U).all():
        out.append("U contains non-finite entries")
        return out
    for i, j in zip(*np.nonzero((U < 0) | (U > 1))):
        out.append(f"U[{i}][{j}] = {U[i, j]!r} is outside [0, 1]")
    sums = U.sum(axis=1)
    for i in np.nonzero(sums > 1 + ROW_SUM_TOL)[0]:
        out.append(f"row {i}: transient row sum {sums[i]!r} exceeds 1")

    if not np.isfinite(v).all():
        out.append("start distribution contains non-finite entries")
    else:
        for i in np.nonzero(v < 0)[0]:
            out.append(f"start distribution entry {i} is negative ({v[i]!r})")
        total = v.sum()
        if abs(total - 1.0) > ROW_SUM_TOL:
            out.append(f"start distribution sums to {total:.12g}")

    if out:
        return out
    for i in _unreachable_rows(U):
        off_diag = np.delete(U[i], i)
        if not (off_diag > 0).any():
            out.append(f"row {i}: no absorption mass and no exit; absorption unreachable")
        else:
            out.append(f"row {i}: absorption unreachable from this state")
    if not out:
        try:
            fundamental_matrix(spec)
        except NumericalError as exc:
            out.append(f"fundamental matrix solve failed: {exc}")
    return out


def fundamental_matrices(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``N = (I - U)^-1`` for a stack of transient blocks.

    Returns ``(N, bad)`` where ``bad`` flags systems that are singular or
    whose ``N`` has non-finite or clearly negative entries.
    """
    U = np.asarray(U, dtype=float)
    m, k, _ = U.shape
    eye = np.eye(k)
    N, singular = lu_solve_batch(eye - U, np.broadcast_to(eye, (m, k, k)))
    with np.errstate(invalid="ignore"):
        bad = singular | ~np.isfinite(N).all(axis=(1, 2)) | (N < -NEGATIVE_ENTRY_TOL).any(axis=(1, 2))
    return N, bad


def moments_from_fundamental(N: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw (unclamped) mean and variance for a stack of fundamental matrices."""
    t = N.sum(axis=2)  # expected steps to absorption from each state
    mean = t @ v
    second = (2.0 * (N @ t[:, :, None])[:, :, 0] - t) @ v
    return mean, second - mean * mean


def fundamental_matrix(spec: AbsorbingChainSpec) -> np.ndarray:
    """``N = (I - U)^-1`` by LU solves against the identity columns."""
    N, bad = fundamental_matrices(spec.U[None])
    if bad[0]:
        raise SingularSystem(
            "I - U is singular to working precision; some state never reaches absorption"
        )
    return N[0]


def passage_time_moments(spec: AbsorbingChainSpec) -> MomentPair:
    """Mean ``v'N1`` and variance ``v'N(2N - I)1 - (v'N1)^2`` of the absorption time."""
    N = fundamental_matrix(spec)
    mean, var = moments_from_fundamental(N[None], spec.v)
    mean, var = float(mean[0]), float(var[0])
    if var < 0:
        if var < -VARIANCE_CLAMP:
            raise NumericalError(f"negative variance {var!r}; fundamental matrix is unreliable")
        var = 0.0
    return MomentPair(mean, var)
