import numpy as np
import pytest

from nucnorm.bounds import expected_nuclear_norm
from nucnorm.ensemble import (
    LinearMap,
    combine,
    null_space_basis,
    rng_stream,
    sample_gaussian,
    sample_linear_map,
    sample_low_rank,
)
from nucnorm.errors import DegenerateMapError, DimensionError
from nucnorm.matcore import norms, nuclear_norm, numerical_rank, vectorize


def test_streams_are_reproducible_and_distinct():
    a = sample_gaussian(4, 3, rng_stream(7, 1, 2))
    b = sample_gaussian(4, 3, rng_stream(7, 1, 2))
    c = sample_gaussian(4, 3, rng_stream(7, 2, 1))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gaussian_moments():
    g = sample_gaussian(400, 400, rng_stream(11))
    assert abs(g.mean()) < 0.02
    assert abs(g.var() - 1.0) < 0.05


def test_gaussian_scalar():
    g = sample_gaussian(1, 1, rng_stream(3))
    assert g.shape == (1, 1) and np.isfinite(g[0, 0])


def test_map_apply_matches_column_sum(rng):
    lmap = sample_linear_map(7, 3, 4, rng)
    x = rng.standard_normal((3, 4))
    explicit = sum(lmap.A[:, k] * vectorize(x)[k] for k in range(12))
    got = lmap.apply(x)
    assert np.linalg.norm(got - explicit) <= 1e-12 * np.linalg.norm(explicit)


def test_full_measurement_is_invertible(rng):
    lmap = sample_linear_map(16, 4, 4, rng)
    b = rng.standard_normal(16)
    v = np.linalg.solve(lmap.A, b)
    np.testing.assert_allclose(lmap.A @ v, b, atol=1e-10)


def test_map_size_checks(rng):
    with pytest.raises(DimensionError):
        sample_linear_map(0, 3, 3, rng)
    with pytest.raises(DimensionError):
        sample_linear_map(10, 3, 3, rng)


def test_sixty_percent_map_rank(rng):
    n = 10
    lmap = sample_linear_map(int(np.ceil(0.6 * n * n)), n, n, rng)
    assert np.linalg.matrix_rank(lmap.A) == 60
    assert null_space_basis(lmap).shape[0] == 40


def test_low_rank_samples(rng):
    assert numerical_rank(sample_low_rank(5, 4, 4, rng)) == 4
    assert numerical_rank(sample_low_rank(6, 6, 2, rng)) == 2
    nn = norms(sample_low_rank(5, 7, 1, rng))
    assert nn.nuclear == pytest.approx(nn.frobenius) == pytest.approx(nn.operator)
    with pytest.raises(DimensionError):
        sample_low_rank(3, 3, 4, rng)
    with pytest.raises(DimensionError):
        sample_low_rank(3, 3, 0, rng)


def test_null_space_full_and_codim_one(rng):
    assert null_space_basis(sample_linear_map(9, 3, 3, rng)).shape == (0, 3, 3)
    basis = null_space_basis(sample_linear_map(8, 3, 3, rng))
    assert basis.shape == (1, 3, 3)
    assert np.linalg.norm(basis[0]) == pytest.approx(1.0, abs=1e-12)


def test_null_space_orthonormal(rng):
    lmap = sample_linear_map(15, 5, 5, rng)
    basis = null_space_basis(lmap)
    assert basis.shape == (10, 5, 5)
    flat = np.array([vectorize(b) for b in basis])
    gram = flat @ flat.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 1e-10
    np.testing.assert_allclose(np.diag(gram), 1.0, atol=1e-12)
    for b in basis:
        assert np.linalg.norm(lmap.apply(b)) <= 1e-9 * np.linalg.norm(lmap.A)


def test_null_space_rectangular(rng):
    lmap = sample_linear_map(5, 2, 4, rng)
    basis = null_space_basis(lmap)
    assert basis.shape == (3, 2, 4)
    for b in basis:
        assert np.linalg.norm(lmap.apply(b)) <= 1e-9 * np.linalg.norm(lmap.A)


def test_degenerate_map_rejected(rng):
    A = rng.standard_normal((4, 9))
    A[3] = A[0] + A[1]
    with pytest.raises(DegenerateMapError):
        null_space_basis(LinearMap(A, 3, 3))


def test_null_space_combinations_look_gaussian(rng):
    # Diagnostic only: a rescaled unit combination of the basis should have
    # a mean nuclear norm close to that of a Gaussian matrix of the same size.
    n = 12
    lmap = sample_linear_map(72, n, n, rng)
    basis = null_space_basis(lmap)
    vals = []
    for _ in range(40):
        v = rng.standard_normal(basis.shape[0])
        v /= np.linalg.norm(v)
        vals.append(nuclear_norm(combine(basis, v)) * n)
    ref = np.mean([nuclear_norm(rng.standard_normal((n, n))) for _ in range(200)])
    assert abs(np.mean(vals) / ref - 1.0) < 0.05
    assert np.mean(vals) == pytest.approx(expected_nuclear_norm(n), rel=0.15)
