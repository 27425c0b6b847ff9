import numpy as np
import pytest
import scipy.optimize

from nnls_oracle import enumerate_nnls
from potloc import (NnlsOptions, NonConvergenceError, Solver, ValidationError,
                    choose_alpha_discrepancy, count_sign_changes, kkt_violation,
                    solve_lsq, solve_nnls, solve_tikhonov)
from potloc.solvers import ALPHA_BRACKET


def kkt_tolerance(A, f):
    return 1e-10 * np.max(np.abs(A.T @ f))


def assert_kkt(A, f, result):
    v = result.density
    tol = kkt_tolerance(A, f)
    w = A.T @ (f - A @ v)
    assert np.all(v >= 0)
    assert np.all(w[v == 0] <= tol)
    assert np.all(np.abs(w[v > 0]) <= tol)


# --- sign changes --------------------------------------------------------

@pytest.mark.parametrize("v,expected", [
    ([1, -1, 1, -1], 3),
    ([1, 2, 3], 0),
    ([0, 0, 0], 0),
    ([1, 1e-14, -1], 1),
    ([-1, 1e-20, -2, 3], 1),
    ([], 0),
])
def test_count_sign_changes(v, expected):
    assert count_sign_changes(v) == expected


# --- least squares -------------------------------------------------------

def test_lsq_zero_data(paper_system):
    A, _, _ = paper_system
    res = solve_lsq(A, np.zeros(A.shape[0]))
    assert np.all(res.density == 0)
    assert res.residual_norm == 0.0
    assert res.relative_residual == 0.0


def test_lsq_identity():
    f = np.array([1.0, -2.0, 3.0, 4.0, -0.5])
    res = solve_lsq(np.eye(5), f)
    np.testing.assert_allclose(res.density, f, atol=1e-15)
    assert res.residual_norm <= 1e-15
    assert res.sign_changes == count_sign_changes(f) == 3
    assert res.solver is Solver.LSQ


def test_lsq_oscillates_on_fine_window(paper_obs):
    from potloc import RectangleSpec, assemble_matrix, rectangle_boundary_segments
    contour = rectangle_boundary_segments(RectangleSpec(n_horizontal=200, n_vertical=200))
    res = solve_lsq(assemble_matrix(paper_obs.points, contour), paper_obs.values)
    assert res.sign_changes > 0


def test_residual_recomputed(paper_system):
    A, f, _ = paper_system
    for res in (solve_lsq(A, f), solve_tikhonov(A, f, 1e-8), solve_nnls(A, f)):
        r = np.linalg.norm(A @ res.density - f)
        assert res.residual_norm == pytest.approx(r, rel=1e-12, abs=0)


# --- Tikhonov ------------------------------------------------------------

def test_tikhonov_zero_alpha_equals_lsq(rng):
    A = rng.normal(size=(12, 6))
    f = rng.normal(size=12)
    np.testing.assert_allclose(solve_tikhonov(A, f, 0.0).density,
                               solve_lsq(A, f).density, atol=1e-10)
    assert solve_tikhonov(A, f, 0.0).alpha == 0.0


def test_tikhonov_tiny_oracle():
    A = np.array([[2.0, 0.0], [1.0, 1.0], [0.0, 3.0]])
    f = np.array([1.0, 0.0, -1.0])
    alpha = 1e-2
    expected = np.linalg.inv(A.T @ A + alpha * np.eye(2)) @ (A.T @ f)
    np.testing.assert_allclose(solve_tikhonov(A, f, alpha).density, expected, rtol=1e-10)


def test_tikhonov_paper_monotone(paper_system):
    A, f, _ = paper_system
    results = [solve_tikhonov(A, f, a) for a in (1e-10, 1e-8, 1e-6, 1e-4)]
    res = [r.residual_norm for r in results]
    norms = [np.linalg.norm(r.density) for r in results]
    assert all(b >= a - 1e-12 for a, b in zip(res, res[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_tikhonov_negative_alpha(paper_system):
    A, f, _ = paper_system
    with pytest.raises(ValidationError):
        solve_tikhonov(A, f, -1.0)


# --- discrepancy principle -----------------------------------------------

def residual_curve(A, f, alphas):
    return np.array([solve_tikhonov(A, f, a).residual_norm for a in alphas])


def test_discrepancy_matches_grid_oracle(paper_system):
    A, f, _ = paper_system
    grid = np.logspace(-16, 4, 81)
    curve = residual_curve(A, f, grid)
    eps = 0.5 * np.linalg.norm(f) * 1e-3
    assert curve[0] < eps < curve[-1]
    choice = choose_alpha_discrepancy(A, f, eps)
    assert choice.status == "converged"
    assert abs(choice.residual_norm - eps) <= 1e-3 * eps
    # the grid brackets the crossing; alpha* must sit inside that bracket
    k = int(np.argmax(curve >= eps))
    assert grid[k - 1] <= choice.alpha <= grid[k]
    check = solve_tikhonov(A, f, choice.alpha).residual_norm
    assert abs(check - eps) <= 1e-3 * eps


def test_discrepancy_tau_scales_target(paper_system):
    A, f, _ = paper_system
    eps = 1e-5
    choice = choose_alpha_discrepancy(A, f, eps, tau=2.0)
    assert abs(choice.residual_norm - 2 * eps) <= 1e-3 * 2 * eps


def test_discrepancy_upper_cap(paper_system):
    A, f, _ = paper_system
    choice = choose_alpha_discrepancy(A, f, 2 * np.linalg.norm(f))
    assert choice.status == "upper_cap"
    assert choice.alpha == ALPHA_BRACKET[1]


def test_discrepancy_lower_cap(rng):
    A = rng.normal(size=(20, 3))
    f = rng.normal(size=20)
    floor = solve_lsq(A, f).residual_norm
    choice = choose_alpha_discrepancy(A, f, 0.5 * floor)
    assert choice.status == "lower_cap"
    assert choice.alpha == ALPHA_BRACKET[0]


def test_discrepancy_alpha_grows_with_noise(paper_system):
    from potloc import NoiseSpec, perturb
    A, f, _ = paper_system
    f_noisy = perturb(f, NoiseSpec(0.05, 11))
    eps = 0.05 * np.std(f, ddof=1) * np.sqrt(len(f))
    a1 = choose_alpha_discrepancy(A, f_noisy, eps).alpha
    a2 = choose_alpha_discrepancy(A, f_noisy, 2 * eps).alpha
    assert a2 > a1


def test_discrepancy_validation(paper_system):
    A, f, _ = paper_system
    with pytest.raises(ValidationError):
        choose_alpha_discrepancy(A, f, 0.0)
    with pytest.raises(ValidationError):
        choose_alpha_discrepancy(A, f, 1e-3, tau=0.5)


# --- NNLS ----------------------------------------------------------------

def test_nnls_identity_feasible():
    res = solve_nnls(np.eye(2), [1.0, 2.0])
    np.testing.assert_allclose(res.density, [1.0, 2.0], atol=1e-15)


def test_nnls_identity_projection():
    res = solve_nnls(np.eye(2), [-1.0, 2.0])
    np.testing.assert_allclose(res.density, [0.0, 2.0], atol=1e-15)


def test_nnls_small_enumeration():
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    f = np.array([1.0, -1.0])
    res = solve_nnls(A, f)
    x_ref, r_ref = enumerate_nnls(A, f)
    assert res.residual_norm == pytest.approx(r_ref, abs=1e-12)
    np.testing.assert_allclose(res.density, x_ref, atol=1e-12)


def test_nnls_diagonal_positive_is_clipping(rng):
    d = rng.uniform(0.5, 2.0, 8)
    f = rng.normal(size=8)
    res = solve_nnls(np.diag(d), f)
    np.testing.assert_allclose(res.density, np.maximum(f, 0) / d, atol=1e-14)


def test_nnls_identity_like_equals_max():
    f = np.array([0.3, -0.2, 1.5, 0.0, -4.0])
    np.testing.assert_allclose(solve_nnls(np.eye(5), f).density, np.maximum(f, 0), atol=1e-15)


@pytest.mark.parametrize("size", [2, 3])
def test_nnls_random_small_vs_enumeration(rng, size):
    for _ in range(100):
        A = rng.normal(size=(size, size))
        f = rng.normal(size=size)
        _, r_ref = enumerate_nnls(A, f)
        assert abs(solve_nnls(A, f).residual_norm - r_ref) <= 1e-10


def test_nnls_rectangular_vs_enumeration(rng):
    for _ in range(20):
        A = rng.normal(size=(6, 4))
        f = rng.normal(size=6)
        _, r_ref = enumerate_nnls(A, f)
        assert abs(solve_nnls(A, f).residual_norm - r_ref) <= 1e-10


def test_nnls_kkt_random(rng):
    for _ in range(50):
        A = rng.normal(size=(20, 10))
        f = rng.normal(size=20)
        res = solve_nnls(A, f)
        assert_kkt(A, f, res)
        assert res.residual_norm >= solve_lsq(A, f).residual_norm - 1e-12
        assert res.sign_changes == 0


def test_nnls_kkt_paper(paper_system):
    A, f, _ = paper_system
    res = solve_nnls(A, f)
    assert_kkt(A, f, res)
    assert res.residual_norm >= solve_lsq(A, f).residual_norm - 1e-12
    assert res.kkt_violation <= kkt_tolerance(A, f)


def test_nnls_agrees_with_scipy_on_random(rng):
    for _ in range(20):
        A = rng.normal(size=(30, 15))
        f = rng.normal(size=30)
        _, r_scipy = scipy.optimize.nnls(A, f)
        assert solve_nnls(A, f).residual_norm == pytest.approx(r_scipy, rel=1e-9, abs=1e-12)


def test_nnls_zero_data():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    res = solve_nnls(A, [0.0, 0.0])
    assert res.density.tolist() == [0.0, 0.0]
    assert res.residual_norm == 0.0 and res.iterations == 0


def test_nnls_duplicate_columns():
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    f = np.array([1.0, 2.0, 1.0])
    res = solve_nnls(A, f)
    _, r_ref = enumerate_nnls(A, f)
    assert res.residual_norm == pytest.approx(r_ref, abs=1e-12)
    assert np.all(res.density >= 0)


def test_nnls_tie_breaks_to_smaller_index():
    # both columns have the same gradient; the first one enters
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    res = solve_nnls(A, [1.0, 1.0])
    assert res.density[0] > 0 and res.density[1] == 0.0


def test_nnls_iteration_cap(rng):
    A = rng.normal(size=(20, 10))
    f = A @ rng.uniform(0.5, 1.0, 10)
    with pytest.raises(NonConvergenceError) as info:
        solve_nnls(A, f, NnlsOptions(max_iterations=2))
    err = info.value
    assert err.x is not None and np.all(err.x >= 0)
    assert err.kkt_violation > 0
    assert err.kkt_violation == pytest.approx(kkt_violation(A, f, err.x))


def test_nnls_deterministic(paper_system):
    A, f, _ = paper_system
    a, b = solve_nnls(A, f), solve_nnls(A, f)
    np.testing.assert_array_equal(a.density, b.density)
    assert (a.residual_norm, a.iterations) == (b.residual_norm, b.iterations)


def test_nnls_options_validation():
    with pytest.raises(ValidationError):
        NnlsOptions(kkt_tolerance=-1.0)
    with pytest.raises(ValidationError):
        NnlsOptions(max_iterations=0)
    with pytest.raises(ValidationError):
        NnlsOptions(inner_tolerance=0.0)
