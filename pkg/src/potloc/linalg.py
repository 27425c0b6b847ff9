"""Dense least squares with explicit rank handling.

``least_squares`` uses a column-pivoted Householder QR (LAPACK ``geqp3``
through scipy) and, when the matrix is numerically rank deficient, a
second QR of the retained rows (complete orthogonal decomposition) to
pick the minimum-norm minimizer.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import ValidationError

EPS = np.finfo(float).eps


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError(f"expected a nonempty 2D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix entries must be finite")
    return A


def _check_vector(b, length: int, name: str = "b") -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {b.shape}")
    if len(b) != length:
        raise ValidationError(f"{name} has length {len(b)}, expected {length}")
    if not np.all(np.isfinite(b)):
        raise ValidationError(f"{name} entries must be finite")
    return b


def rank_threshold(A: np.ndarray) -> float:
    """``eps * ||A||_2``; diagonal entries of R at or below it are dropped.

    Same relative cutoff as LAPACK ``gelsd`` with its default ``rcond``. A
    ``max(m, n)`` factor on top of it truncates the log-kernel systems
    enough to hide the oscillations of the unconstrained solution.
    """
    return EPS * float(np.linalg.norm(A, 2))


def numerical_rank(A) -> int:
    A = _check_matrix(A)
    R = scipy.linalg.qr(A, mode="r", pivoting=True)[0]
    return _rank_from_r(R, rank_threshold(A))


def _rank_from_r(R: np.ndarray, tau: float) -> int:
    diag = np.abs(np.diag(R))
    # pivoting makes |R_kk| nonincreasing, so the rank is a prefix length
    return int(np.count_nonzero(diag > tau))


def _solve_checked(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n = A.shape
    Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
    k = _rank_from_r(R, rank_threshold(A))
    x = np.zeros(n)
    if k == 0:
        return x
    c = Q[:, :k].T @ b
    if k == n:
        xp = scipy.linalg.solve_triangular(R[:k, :k], c)
    else:
        # R[:k, :] = T^T Z^T with Z orthonormal columns; min-norm solution
        # of R[:k, :] xp = c is Z T^-T c
        Z, T = scipy.linalg.qr(R[:k, :].T, mode="economic")
        xp = Z @ scipy.linalg.solve_triangular(T, c, trans="T")
    x[perm] = xp
    return x


def least_squares(A, b) -> np.ndarray:
    """Minimum-norm minimizer of ``||A x - b||_2``.

    Parameters
    ----------
    A : array_like, shape (m, n)
    b : array_like, shape (m,)

    Returns
    -------
    x : ndarray, shape (n,)
    """
    A = _check_matrix(A)
    b = _check_vector(b, A.shape[0])
    return _solve_checked(A, b)


def tikhonov_solve(A, b, alpha: float) -> np.ndarray:
    """Minimizer of ``||A x - b||^2 + alpha ||x||^2``.

    Solved as the stacked least-squares problem ``[A; sqrt(alpha) I] x ~ [b; 0]``
    so the normal equations are never formed. ``alpha = 0`` is plain
    :func:`least_squares`.
    """
    A = _check_matrix(A)
    b = _check_vector(b, A.shape[0])
    alpha = float(alpha)
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValidationError(f"alpha must be finite and >= 0, got {alpha}")
    if alpha == 0.0:
        return _solve_checked(A, b)
    n = A.shape[1]
    stacked = np.vstack([A, math.sqrt(alpha) * np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n)])
    return _solve_checked(stacked, rhs)


def matvec(A, x) -> np.ndarray:
    A = _check_matrix(A)
    x = _check_vector(x, A.shape[1], "x")
    return A @ x
