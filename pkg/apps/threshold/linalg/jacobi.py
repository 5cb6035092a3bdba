"""Cyclic Jacobi diagonalization for small dense symmetric matrices."""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)


def symmetric_eigen(
    matrix: np.ndarray,
    tol: float = 1e-14,
    max_sweeps: int = 100,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (descending) and orthonormal eigenvectors (columns) of a real
    symmetric matrix.

    Sweeps rotate every (p, q) pair in row order until the off-diagonal
    Frobenius norm drops below ``tol`` times the norm of the input.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("symmetric_eigen expects a square matrix")
    n = a.shape[0]
    vectors = np.eye(n, dtype=np.float64)
    if n == 0:
        return np.zeros(0), vectors

    scale = float(np.linalg.norm(a))
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0)))
        if off <= tol * scale or scale == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # θ² would overflow; t = 1/(2θ) to working precision
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                    else:
                        t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    logger.debug(f"Jacobi converged on {n}x{n} matrix after {sweeps} sweeps")
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]
