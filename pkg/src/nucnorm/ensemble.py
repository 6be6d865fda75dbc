"""Gaussian ensemble sampling, random measurement maps and null spaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMapError, DimensionError
from .matcore import as_matrix, unvectorize, vectorize


def rng_stream(seed: int, *label: int) -> np.random.Generator:
    """Independent generator for the consumer identified by `label`.

    The child seed is derived by hashing ``(seed, label)`` through
    ``numpy.random.SeedSequence``, so streams for different labels are
    statistically independent and do not depend on the order in which
    they are created.
    """
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(x) for x in label))
    return np.random.default_rng(seq)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class LinearMap:
    """Linear map ``X -> A @ vec(X)`` on ``n1 x n2`` matrices."""

    A: np.ndarray
    n1: int
    n2: int

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        if A.shape[1] != self.n1 * self.n2:
            raise DimensionError(
                f"A has {A.shape[1]} columns but maps {self.n1}x{self.n2} matrices"
            )
        object.__setattr__(self, "A", A)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def shape(self):
        return (self.n1, self.n2)

    def apply(self, x) -> np.ndarray:
        x = as_matrix(x)
        if x.shape != self.shape:
            raise DimensionError(f"expected {self.shape} matrix, got {x.shape}")
        return self.A @ vectorize(x)

    def adjoint(self, y) -> np.ndarray:
        return unvectorize(self.A.T @ np.asarray(y, dtype=float), self.n1, self.n2)


def sample_gaussian(d1, d2, rng) -> np.ndarray:
    """``d1 x d2`` matrix with i.i.d. standard normal entries."""
    if d1 < 1 or d2 < 1:
        raise DimensionError(f"invalid shape {d1}x{d2}")
    return _as_rng(rng).standard_normal((d1, d2))


def sample_linear_map(m, n1, n2, rng) -> LinearMap:
    if not 1 <= m <= n1 * n2:
        raise DimensionError(f"need 1 <= m <= {n1 * n2}, got m={m}")
    return LinearMap(sample_gaussian(m, n1 * n2, rng), n1, n2)


def sample_low_rank(n1, n2, r, rng) -> np.ndarray:
    """Planted matrix ``YL @ YR.T`` with Gaussian ``n1 x r`` and ``n2 x r`` factors."""
    if not 1 <= r <= min(n1, n2):
        raise DimensionError(f"rank must lie in [1, {min(n1, n2)}], got {r}")
    rng = _as_rng(rng)
    left = rng.standard_normal((n1, r))
    right = rng.standard_normal((n2, r))
    return left @ right.T


def null_space_basis(lmap: LinearMap, rank_tol=1e-10) -> np.ndarray:
    """Orthonormal basis of the null space of `lmap`.

    Returns
    -------
    basis : ndarray, shape (n1*n2 - m, n1, n2)
        Matrices whose vectorizations are orthonormal and span the null
        space. Empty along the first axis when ``m == n1*n2``.

    Raises
    ------
    DegenerateMapError
        If ``A`` does not have full row rank.
    """
    A = lmap.A
    m, N = A.shape
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s[-1] <= rank_tol * s[0]:
        raise DegenerateMapError(
            f"measurement matrix is rank deficient (sigma_min/sigma_max = {s[-1] / s[0]:.3e})"
        )
    null = Vt[m:]
    return null.reshape((N - m, lmap.n2, lmap.n1)).transpose(0, 2, 1).copy()


def combine(basis: np.ndarray, coeffs) -> np.ndarray:
    """``sum_i coeffs[i] * basis[i]``."""
    return np.tensordot(np.asarray(coeffs, dtype=float), basis, axes=1)


def random_unit_vector(k, rng) -> np.ndarray:
    v = _as_rng(rng).standard_normal(k)
    return v / np.linalg.norm(v)
