import warnings

import numpy as np
import pytest

from nucnorm.ensemble import (
    LinearMap,
    combine,
    null_space_basis,
    rng_stream,
    sample_linear_map,
    sample_low_rank,
)
from nucnorm.errors import DegenerateMapError, DimensionError, InvalidReferenceError
from nucnorm.matcore import nuclear_norm, unvectorize, vectorize
from nucnorm.recovery import (
    AffineProblem,
    SolverConfig,
    check_recovery,
    nullspace_optimality_check,
    project_affine,
    relative_error,
    solve_min_nuclear,
    svt,
    warn_if_not_monotone,
)


def planted_problem(n, r, m, seed):
    rng = rng_stream(seed)
    x0 = sample_low_rank(n, n, r, rng)
    return AffineProblem.from_planted(sample_linear_map(m, n, n, rng), x0)


def test_svt_examples(rng):
    np.testing.assert_allclose(svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-14)
    m = rng.standard_normal((4, 3))
    np.testing.assert_allclose(svt(m, 0.0), m, atol=1e-13)
    with pytest.raises(ValueError):
        svt(m, -1.0)


def test_svt_is_prox_minimizer(rng):
    m, tau = rng.standard_normal((4, 4)), 0.5

    def objective(z):
        return tau * nuclear_norm(z) + 0.5 * np.sum((z - m) ** 2)

    z = svt(m, tau)
    best = objective(z)
    for scale in (1e-1, 1e-2, 1e-3):
        for _ in range(200):
            assert best <= objective(z + scale * rng.standard_normal((4, 4))) + 1e-12


def test_svt_non_expansive(rng):
    for _ in range(200):
        a, b = rng.standard_normal((2, 5, 3))
        tau = rng.uniform(0, 2)
        assert np.linalg.norm(svt(a, tau) - svt(b, tau)) <= np.linalg.norm(a - b) + 1e-10


def test_problem_validation(rng):
    lmap = sample_linear_map(5, 3, 3, rng)
    with pytest.raises(DimensionError):
        AffineProblem(lmap, np.zeros(4))
    with pytest.raises(ValueError):
        AffineProblem(lmap, np.zeros(5), planted=np.ones((3, 3)))


def test_project_affine_feasible_point_fixed(rng):
    p = planted_problem(4, 1, 10, 1)
    np.testing.assert_allclose(project_affine(p.planted, p), p.planted, atol=1e-12)


def test_project_affine_full_measurement(rng):
    lmap = sample_linear_map(9, 3, 3, rng)
    b = rng.standard_normal(9)
    p = AffineProblem(lmap, b)
    expected = unvectorize(np.linalg.solve(lmap.A, b), 3, 3)
    np.testing.assert_allclose(project_affine(rng.standard_normal((3, 3)), p), expected, atol=1e-9)


def test_project_affine_matches_normal_equations(rng):
    lmap = sample_linear_map(12, 4, 5, rng)
    b = rng.standard_normal(12)
    p = AffineProblem(lmap, b)
    w = rng.standard_normal((4, 5))
    A = lmap.A
    oracle = w - unvectorize(A.T @ np.linalg.solve(A @ A.T, A @ vectorize(w) - b), 4, 5)
    z = project_affine(w, p)
    np.testing.assert_allclose(z, oracle, atol=1e-9)
    assert np.linalg.norm(lmap.apply(z) - b) <= 1e-9 * (1 + np.linalg.norm(b))
    # z - w lies in the row space of A
    d = vectorize(z - w)
    coef, *_ = np.linalg.lstsq(A.T, d, rcond=None)
    assert np.linalg.norm(A.T @ coef - d) <= 1e-10 * max(np.linalg.norm(d), 1)


def test_project_affine_singular_gram(rng):
    A = rng.standard_normal((3, 9))
    A[2] = 2 * A[1]
    p = AffineProblem(LinearMap(A, 3, 3), A @ rng.standard_normal(9))
    with pytest.raises(DegenerateMapError):
        project_affine(np.zeros((3, 3)), p)


def test_solver_zero_rhs(rng):
    p = AffineProblem(sample_linear_map(20, 5, 5, rng), np.zeros(20))
    res = solve_min_nuclear(p)
    assert res.converged
    assert np.linalg.norm(res.X) < 1e-12


def test_solver_full_measurement(rng):
    lmap = sample_linear_map(25, 5, 5, rng)
    b = rng.standard_normal(25)
    res = solve_min_nuclear(AffineProblem(lmap, b))
    expected = unvectorize(np.linalg.solve(lmap.A, b), 5, 5)
    assert res.converged
    assert relative_error(res.X, expected) < 1e-9


def test_solver_result_feasible(rng):
    p = planted_problem(8, 2, 40, 5)
    res = solve_min_nuclear(p)
    assert res.converged
    assert np.linalg.norm(p.map.apply(res.X) - p.b) / (1 + np.linalg.norm(p.b)) <= 10 * 1e-7


def test_solver_nonconvergence_reported():
    p = planted_problem(10, 1, 60, 3)
    res = solve_min_nuclear(p, SolverConfig(max_iter=3))
    assert not res.converged and res.iterations == 3


def test_solver_agrees_with_reference_convex_solver():
    cp = pytest.importorskip("cvxpy")
    p = planted_problem(10, 1, 60, 2024)
    res = solve_min_nuclear(p)
    X = cp.Variable((10, 10))
    A = p.map.A
    # cvxpy's vec is column-major, matching vectorize()
    prob = cp.Problem(cp.Minimize(cp.normNuc(X)), [A @ cp.vec(X, order="F") == p.b])
    prob.solve(solver="SCS", eps=1e-9, max_iters=200000)
    assert res.converged
    assert relative_error(res.X, p.planted) < 1e-3
    assert relative_error(X.value, p.planted) < 1e-3
    assert res.nuclear_norm == pytest.approx(prob.value, rel=1e-5)


def test_solver_recovers_most_seeds():
    # n=10, r=1, m=60 is above the weak threshold 0.513 at beta=0.1
    hits = sum(
        check_recovery(solve_min_nuclear(p).X, p.planted)
        for p in (planted_problem(10, 1, 60, s) for s in range(10))
    )
    assert hits >= 9


def test_solver_independent_of_start():
    p = planted_problem(12, 1, 100, 9)
    a = solve_min_nuclear(p)
    b = solve_min_nuclear(p, init=10 * rng_stream(4).standard_normal((12, 12)))
    assert a.converged and b.converged
    assert relative_error(a.X, b.X) < 1e-5


def test_solver_objective_monotone_after_burn_in():
    p = planted_problem(12, 2, 110, 17)
    res = solve_min_nuclear(p, SolverConfig(record_history=True))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ok = warn_if_not_monotone(res.history)
    # diagnostic only: a rise is reported as a warning, never a failure
    assert ok == (len(caught) == 0)


def test_check_recovery():
    x0 = np.diag([1.0, 2.0])
    assert check_recovery(x0, x0)
    assert not check_recovery(1.01 * x0, x0)
    with pytest.raises(InvalidReferenceError):
        check_recovery(x0, np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        check_recovery(np.zeros((2, 3)), x0)


def test_check_recovery_strict_threshold():
    x0 = np.array([[1.0]])
    # error of exactly 2**-10 with an exactly representable threshold
    x = np.array([[1.0 + 2.0**-10]])
    assert relative_error(x, x0) == 2.0**-10
    assert not check_recovery(x, x0, threshold=2.0**-10)
    assert check_recovery(x, x0, threshold=2.0**-10 + 1e-12)


def test_optimality_full_measurement(rng):
    lmap = sample_linear_map(9, 3, 3, rng)
    check = nullspace_optimality_check(np.eye(3), AffineProblem(lmap, lmap.apply(np.eye(3))), 5, rng)
    assert check.passed and check.min_gap == np.inf


def test_optimality_passes_on_solver_output(rng):
    p = planted_problem(10, 1, 60, 2024)
    res = solve_min_nuclear(p)
    check = nullspace_optimality_check(res.X, p, 100, rng)
    assert check.passed and check.min_gap > 0


def test_optimality_fails_on_perturbed_planted(rng):
    # codimension one: both signs of the only null direction are probed
    n = 4
    p = planted_problem(n, 1, n * n - 1, 8)
    y = null_space_basis(p.map)[0]
    bad = p.planted + 5.0 * np.linalg.norm(p.planted) * y
    assert nuclear_norm(bad) > nuclear_norm(p.planted)
    check = nullspace_optimality_check(bad, p, 3, rng)
    assert not check.passed and check.min_gap < 0


def test_optimality_fails_large_null_space_perturbation(rng):
    p = planted_problem(6, 1, 30, 21)
    basis = null_space_basis(p.map)
    y = combine(basis, rng.standard_normal(basis.shape[0]))
    bad = p.planted + 3.0 * np.linalg.norm(p.planted) * y / np.linalg.norm(y)
    check = nullspace_optimality_check(bad, p, 200, rng)
    assert not check.passed
