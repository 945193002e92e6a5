"""Batched dense LU solves for many small systems at once.

The Monte Carlo engine needs thousands of independent ``k x k`` solves per
block, with per-system singularity detection. ``numpy.linalg.solve`` raises
for the whole stack on the first singular member, so the elimination is
written out here, vectorised over the leading (batch) axis.
"""

from __future__ import annotations

import numpy as np

PIVOT_THRESHOLD = 1e-12


def lu_solve_batch(
    a: np.ndarray, b: np.ndarray, pivot_threshold: float = PIVOT_THRESHOLD
) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``a[s] @ x[s] = b[s]`` for every system ``s`` in the batch.

    Gaussian elimination with partial pivoting. A system is flagged singular
    when the largest available pivot in some column has magnitude below
    ``pivot_threshold``; its solution rows are then NaN.

    Parameters
    ----------
    a : ndarray, shape (m, k, k)
    b : ndarray, shape (m, k, r)

    Returns
    -------
    x : ndarray, shape (m, k, r)
    singular : ndarray of bool, shape (m,)
    """
    a = np.array(a, dtype=float, copy=True)
    x = np.array(b, dtype=float, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
    if x.ndim != 3 or x.shape[:2] != a.shape[:2]:
        raise ValueError(f"right-hand side shape {x.shape} does not match {a.shape}")
    m, k, _ = a.shape
    batch = np.arange(m)
    singular = np.zeros(m, dtype=bool)

    for col in range(k):
        piv = col + np.argmax(np.abs(a[:, col:, col]), axis=1)
        swap = piv != col
        if swap.any():
            s = batch[swap]
            p = piv[swap]
            a[s, col], a[s, p] = a[s, p], a[s, col].copy()
            x[s, col], x[s, p] = x[s, p], x[s, col].copy()
        pivot = a[:, col, col]
        bad = ~(np.abs(pivot) >= pivot_threshold)
        if bad.any():
            singular |= bad
            # keep elimination finite for the healthy members of the batch
            a[bad, col, col] = 1.0
            pivot = a[:, col, col]
        if col + 1 < k:
            factors = a[:, col + 1 :, col] / pivot[:, None]
            a[:, col + 1 :, col:] -= factors[:, :, None] * a[:, None, col, col:]
            x[:, col + 1 :, :] -= factors[:, :, None] * x[:, None, col, :]

    for row in range(k - 1, -1, -1):
        if row + 1 < k:
            x[:, row, :] -= np.einsum("mj,mjr->mr", a[:, row, row + 1 :], x[:, row + 1 :, :])
        x[:, row, :] /= a[:, row, row][:, None]

    x[singular] = np.nan
    return x, singular
