"""Density recovery: unconstrained least squares, Tikhonov, and NNLS.

All three take the kernel matrix ``A`` and data ``f`` and return a
:class:`SolveResult`. The NNLS solver is a Lawson-Hanson active-set
method whose output is certified by the KKT conditions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonConvergenceError, ValidationError
from .linalg import _check_matrix, _check_vector, least_squares, tikhonov_solve


class Solver(str, enum.Enum):
    LSQ = "LSQ"
    TIKHONOV = "Tikhonov"
    NNLS = "NNLS"


@dataclass(frozen=True)
class SolveResult:
    density: np.ndarray
    residual_norm: float
    relative_residual: float
    solver: Solver
    alpha: float | None = None
    iterations: int = 0
    sign_changes: int = 0
    kkt_violation: float | None = None


@dataclass(frozen=True)
class NnlsOptions:
    """Stopping controls for :func:`solve_nnls`.

    ``None`` fields take their defaults at solve time:
    ``kkt_tolerance = 1e-10 * ||A^T f||_inf`` and ``max_iterations = 3 * N``.
    """

    kkt_tolerance: float | None = None
    max_iterations: int | None = None
    inner_tolerance: float = 1e-12

    def __post_init__(self):
        if self.kkt_tolerance is not None and not self.kkt_tolerance > 0:
            raise ValidationError("kkt_tolerance must be positive")
        if self.max_iterations is not None and not (
                int(self.max_iterations) == self.max_iterations
                and self.max_iterations > 0):
            raise ValidationError("max_iterations must be a positive integer")
        if not self.inner_tolerance > 0:
            raise ValidationError("inner_tolerance must be positive")


def count_sign_changes(v, rel_floor: float = 1e-12) -> int:
    """Number of sign alternations along ``v``, in order and without wrap-around.

    Entries with ``|v_j| <= rel_floor * max|v|`` are skipped.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0:
        return 0
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return 0
    signs = np.sign(v[np.abs(v) > rel_floor * scale])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _result(A, f, v, solver, alpha=None, iterations=0, kkt=None) -> SolveResult:
    r = float(np.linalg.norm(A @ v - f))
    fnorm = float(np.linalg.norm(f))
    return SolveResult(
        density=v,
        residual_norm=r,
        relative_residual=r / fnorm if fnorm > 0 else 0.0,
        solver=solver,
        alpha=alpha,
        iterations=iterations,
        sign_changes=count_sign_changes(v),
        kkt_violation=kkt,
    )


def _prepare(A, f):
    A = _check_matrix(A)
    f = _check_vector(f, A.shape[0], "f")
    return A, f


def solve_lsq(A, f) -> SolveResult:
    """Minimum-norm least-squares density."""
    A, f = _prepare(A, f)
    return _result(A, f, least_squares(A, f), Solver.LSQ)


def solve_tikhonov(A, f, alpha: float) -> SolveResult:
    """Tikhonov-regularized density for a fixed ``alpha >= 0``."""
    A, f = _prepare(A, f)
    return _result(A, f, tikhonov_solve(A, f, alpha), Solver.TIKHONOV,
                   alpha=float(alpha))


class AlphaChoice(NamedTuple):
    """Outcome of the discrepancy search.

    ``status`` is ``"converged"``, ``"lower_cap"`` (even the smallest alpha
    leaves too large a residual) or ``"upper_cap"`` (even the largest alpha
    leaves too small a residual).
    """

    alpha: float
    residual_norm: float
    status: str


ALPHA_BRACKET = (1e-16, 1e4)


def choose_alpha_discrepancy(A, f_noisy, noise_level: float, tau: float = 1.0,
                             rtol: float = 1e-3, max_bisections: int = 200
                             ) -> AlphaChoice:
    """Pick ``alpha`` so the Tikhonov residual equals ``tau * noise_level``.

    Bisection in ``log10(alpha)`` over ``[1e-16, 1e4]``, relying on the
    residual being nondecreasing in ``alpha``. Stops once the residual is
    within relative ``rtol`` of the target.
    """
    A, f = _prepare(A, f_noisy)
    if not (noise_level > 0 and math.isfinite(noise_level)):
        raise ValidationError(f"noise_level must be positive, got {noise_level}")
    if not tau >= 1:
        raise ValidationError(f"tau must be >= 1, got {tau}")
    target = tau * noise_level

    def residual(log_alpha):
        v = tikhonov_solve(A, f, 10.0 ** log_alpha)
        return float(np.linalg.norm(A @ v - f))

    lo, hi = (math.log10(a) for a in ALPHA_BRACKET)
    r_lo, r_hi = residual(lo), residual(hi)
    if r_lo > target:
        return AlphaChoice(10.0 ** lo, r_lo, "lower_cap")
    if r_hi < target:
        return AlphaChoice(10.0 ** hi, r_hi, "upper_cap")

    best = min((lo, r_lo), (hi, r_hi), key=lambda p: abs(p[1] - target))
    for _ in range(max_bisections):
        if abs(best[1] - target) <= rtol * target:
            break
        mid = 0.5 * (lo + hi)
        r_mid = residual(mid)
        if abs(r_mid - target) < abs(best[1] - target):
            best = (mid, r_mid)
        if r_mid < target:
            lo = mid
        else:
            hi = mid
    return AlphaChoice(10.0 ** best[0], best[1], "converged")


def kkt_violation(A, f, v) -> float:
    """Largest violation of the NNLS optimality conditions at ``v``.

    With ``w = A^T (f - A v)``: on the zero set ``w_j`` must be ``<= 0``, on
    the positive set ``w_j`` must vanish, and ``v`` itself must be ``>= 0``.
    """
    A, f = _prepare(A, f)
    v = np.asarray(v, dtype=float)
    w = A.T @ (f - A @ v)
    pos = v > 0
    parts = [0.0]
    if np.any(pos):
        parts.append(float(np.max(np.abs(w[pos]))))
    if np.any(~pos):
        parts.append(float(np.max(w[~pos])))
    parts.append(float(-np.min(v)))
    return max(parts)


def solve_nnls(A, f, options: NnlsOptions | None = None) -> SolveResult:
    """Nonnegative least squares by the Lawson-Hanson active-set method.

    Starts from ``v = 0`` with an empty passive set. Each outer step moves
    the index with the largest positive gradient (smallest index on ties)
    into the passive set; the unconstrained problem on the passive columns
    is solved and, if that leaves the cone, the iterate moves along the
    segment towards it until a component hits zero, which is released.

    ``iterations`` counts passive-set least-squares solves.

    Raises
    ------
    NonConvergenceError
        If ``max_iterations`` subproblem solves are exceeded, or the method
        stalls with the KKT conditions still violated.
    """
    A, f = _prepare(A, f)
    options = options or NnlsOptions()
    n = A.shape[1]
    atf = A.T @ f
    tol = options.kkt_tolerance
    if tol is None:
        tol = 1e-10 * float(np.max(np.abs(atf)))
    max_iter = options.max_iterations or 3 * n
    inner = options.inner_tolerance

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    # indices whose entry into the passive set produced no progress; they
    # sit out until the iterate changes
    blocked = np.zeros(n, dtype=bool)
    iterations = 0

    if tol == 0.0:
        # A^T f = 0: v = 0 is optimal
        return _result(A, f, x, Solver.NNLS, iterations=0, kkt=0.0)

    def fail(msg):
        raise NonConvergenceError(msg, x=x.copy(),
                                  kkt_violation=kkt_violation(A, f, x),
                                  iterations=iterations)

    w = A.T @ (f - A @ x)
    while True:
        candidates = ~passive & ~blocked
        if not np.any(candidates):
            break
        wc = np.where(candidates, w, -np.inf)
        t = int(np.argmax(wc))
        if wc[t] <= tol:
            break
        if iterations >= max_iter:
            fail(f"NNLS did not converge in {max_iter} iterations")

        passive[t] = True
        z = np.zeros(n)
        z[passive] = least_squares(A[:, passive], f)
        iterations += 1
        if z[t] <= 0.0:
            # roundoff: the new column does not help; try the next one
            passive[t] = False
            blocked[t] = True
            continue

        while np.any(z[passive] <= 0.0):
            if iterations >= max_iter:
                fail(f"NNLS did not converge in {max_iter} iterations")
            leaving = passive & (z <= 0.0)
            step = np.min(x[leaving] / (x[leaving] - z[leaving]))
            x = x + step * (z - x)
            passive &= x > inner
            x[~passive] = 0.0
            z = np.zeros(n)
            if np.any(passive):
                z[passive] = least_squares(A[:, passive], f)
            iterations += 1
        x = z
        blocked[:] = False
        w = A.T @ (f - A @ x)

    violation = kkt_violation(A, f, x)
    if violation > tol:
        fail(f"NNLS stalled with KKT violation {violation:.3e} > {tol:.3e}")
    return _result(A, f, x, Solver.NNLS, iterations=iterations, kkt=violation)
