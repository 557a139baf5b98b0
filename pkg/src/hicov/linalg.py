"""Dense symmetric-matrix primitives.

Conventions used throughout the package:

- data matrices hold one observation per column, shape ``(p, n)``;
- symmetric matrices are plain ``(p, p)`` float arrays, symmetrized
  exactly on the way in so that ``M[i, j] == M[j, i]`` holds bitwise.

All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from .exceptions import NotPositiveDefiniteError, NotPSDError


def symmetrize(M: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Validate that ``M`` is square and nearly symmetric, return (M + M') / 2.

    Parameters
    ----------
    M : ndarray, shape (p, p)
        Matrix expected to be symmetric up to rounding.
    rtol : float
        Largest tolerated asymmetry, relative to ``max(1, max|M|)``.

    Raises
    ------
    ValueError
        If ``M`` is not square or the asymmetry exceeds the tolerance.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    gap = float(np.abs(M - M.T).max())
    if gap > rtol * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {gap:.3e})")
    return (M + M.T) / 2.0


def sample_covariance(X: np.ndarray) -> np.ndarray:
    """Sample covariance with divisor n - 1.

    Parameters
    ----------
    X : ndarray, shape (p, n)
        n observations of dimension p, one per column.

    Returns
    -------
    ndarray, shape (p, p)
        ``sum_k (X_k - Xbar)(X_k - Xbar)' / (n - 1)``, exactly symmetric.

    Raises
    ------
    ValueError
        If ``X`` is not a 2-d array with at least two columns.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a (p, n) data matrix, got shape {X.shape}")
    p, n = X.shape
    if p < 1:
        raise ValueError("data dimension must be at least 1")
    if n < 2:
        raise ValueError(f"need at least 2 observations to form a covariance, got n={n}")
    Xc = X - X.mean(axis=1, keepdims=True)
    S = (Xc @ Xc.T) / (n - 1)
    return (S + S.T) / 2.0


def logdet_spd(M: np.ndarray) -> float:
    """Log-determinant of a symmetric positive definite matrix.

    Uses a Cholesky factorization (O(p^3/3)) and returns twice the sum of
    the log pivots.  A pivot ``L[k, k]**2`` at or below
    ``p * eps * max|M|`` is declared singular; this scaled-pivot cutoff is
    explicit so the failure mode is deterministic.

    Returns
    -------
    float
        ``log|M|``.

    Raises
    ------
    NotPositiveDefiniteError
        If the factorization hits a non-positive or negligible pivot; the
        exception carries the zero-based index of the failing pivot.
    ValueError
        If ``M`` is not square and (numerically) symmetric.
    """
    M = symmetrize(M)
    p = M.shape[0]
    tol = p * np.finfo(float).eps * max(float(np.abs(M).max()), np.finfo(float).tiny)
    factor, info = lapack.dpotrf(M, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: non-positive pivot at index {info - 1}",
            pivot_index=info - 1,
        )
    if info < 0:  # pragma: no cover - argument error inside LAPACK
        raise ValueError(f"dpotrf failed with illegal argument {-info}")
    diag = np.diagonal(factor)
    pivots = diag * diag
    k = int(np.argmin(pivots))
    if pivots[k] <= tol:
        raise NotPositiveDefiniteError(
            f"matrix is numerically singular: pivot {pivots[k]:.3e} at index {k} "
            f"is below the cutoff {tol:.3e}",
            pivot_index=k,
        )
    return float(2.0 * np.sum(np.log(diag)))


def sqrt_psd(M: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in ``[-1e-8 * max|M|, 0)`` are clipped to zero; anything
    further below zero raises.  The result R satisfies
    ``max|R @ R - M| <= 1e-10 * max(1, max|M|)``.

    Raises
    ------
    NotPSDError
        If an eigenvalue is smaller than ``-1e-8 * max|M|``.
    """
    M = symmetrize(M)
    norm = float(np.abs(M).max())
    w, V = np.linalg.eigh(M)
    if w[0] < -1e-8 * max(norm, np.finfo(float).tiny):
        raise NotPSDError(
            f"matrix is not PSD: smallest eigenvalue {w[0]:.3e} "
            f"is below -1e-8 * max|M| = {-1e-8 * norm:.3e}"
        )
    w = np.clip(w, 0.0, None)
    R = (V * np.sqrt(w)) @ V.T
    return (R + R.T) / 2.0
