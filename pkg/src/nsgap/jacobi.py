"""Dense symmetric eigensolver based on cyclic Jacobi rotations.

Used for the spectral analysis of symmetrized stochastic matrices.  The
sweep loop skips entries that are already negligible, so later sweeps are
cheap; convergence is declared when the off-diagonal Frobenius norm drops
below `tol` (relative to the matrix scale).
"""

from __future__ import annotations

import numpy as np

from .errors import NoConvergence

MAX_JACOBI_N = 4096


def offdiag_frobenius(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part of a square matrix."""
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off**2)))


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted descending
    and eigenvectors as columns.  Raises NoConvergence if the off-diagonal
    mass has not decayed below `tol` after `max_sweeps` sweeps.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > MAX_JACOBI_N:
        raise ValueError(f"matrix order {n} exceeds cap {MAX_JACOBI_N}")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    scale = max(float(np.abs(a).max()), 1.0)
    for _ in range(max_sweeps):
        off = offdiag_frobenius(a)
        if off <= tol * scale:
            break
        # skip threshold: entries too small to matter this sweep
        skip = off / (n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip * 1e-4:
                    continue
                # classical 2x2 symmetric Schur rotation
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NoConvergence(
            f"Jacobi sweeps exhausted ({max_sweeps}) with off-diagonal norm "
            f"{offdiag_frobenius(a):.3e}"
        )

    eigenvalues = a.diagonal().copy()
    order = np.argsort(eigenvalues)[::-1]
    return eigenvalues[order], v[:, order]
