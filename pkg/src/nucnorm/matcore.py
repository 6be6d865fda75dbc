"""Dense matrix primitives: SVD, matrix norms, vectorization, projectors.

Matrices are plain two-dimensional ``numpy.ndarray`` objects of dtype
float64. Every public function rejects non-finite input.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericalError

#: Relative threshold on singular values used to decide numerical rank.
RANK_TOL = 1e-9


class SvdFactors(NamedTuple):
    """Thin SVD ``m = U @ diag(s) @ V.T`` with ``k = min(rows, cols)``."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray


class Norms(NamedTuple):
    nuclear: float
    operator: float
    frobenius: float


def as_matrix(m, name="matrix"):
    """Coerce `m` to a finite 2-D float array or raise."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {a.shape}")
    if a.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def svd(m) -> SvdFactors:
    """Thin singular value decomposition.

    Backed by LAPACK ``gesdd``; falls back to ``gesvd`` when the
    divide-and-conquer driver fails to converge.

    Raises
    ------
    NumericalError
        If neither driver converges.
    """
    a = as_matrix(m)
    try:
        U, s, Vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            import scipy.linalg

            U, s, Vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge for {a.shape} input") from exc
    return SvdFactors(U, s, Vt.T)


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for {a.shape} input") from exc


def nuclear_norm(m) -> float:
    return float(np.sum(singular_values(m)))


def norms(m) -> Norms:
    """Nuclear, operator and Frobenius norms of `m`.

    >>> norms(np.diag([3.0, 4.0]))
    Norms(nuclear=7.0, operator=4.0, frobenius=5.0)
    """
    a = as_matrix(m)
    s = singular_values(a)
    return Norms(float(s.sum()), float(s[0]), float(np.sqrt(np.sum(a * a))))


def numerical_rank(m, rank_tol=RANK_TOL) -> int:
    """Count singular values above ``rank_tol * sigma_1``."""
    s = singular_values(m)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def vectorize(m) -> np.ndarray:
    """Stack the columns of `m` into a single vector."""
    return as_matrix(m).reshape(-1, order="F")


def unvectorize(v, rows, cols) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionError(
            f"cannot reshape vector of shape {v.shape} into {rows}x{cols}"
        )
    return v.reshape((rows, cols), order="F")


def space_projectors(x, rank_tol=RANK_TOL):
    """Orthogonal projectors onto the column and row spaces of `x`.

    Returns
    -------
    col, row : ndarray
        ``col`` is ``rows x rows`` and ``row`` is ``cols x cols``; both
        have trace equal to the numerical rank of `x`.
    """
    U, s, V = svd(x)
    k = 0 if s[0] == 0.0 else int(np.sum(s > rank_tol * s[0]))
    Uk, Vk = U[:, :k], V[:, :k]
    return Uk @ Uk.T, Vk @ Vk.T


def read_matrix(path) -> np.ndarray:
    """Read the fixture text format: ``rows cols`` then one row per line."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    lines = [ln for ln in lines if not ln.lstrip().startswith("#")]
    if not lines:
        raise DimensionError(f"{path}: empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise DimensionError(f"{path}: bad header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise DimensionError(f"{path}: expected {rows} rows, found {len(body)}")
    data = np.array([[float(t) for t in ln.split()] for ln in body], dtype=float)
    if data.shape != (rows, cols):
        raise DimensionError(f"{path}: rows do not all have {cols} entries")
    return as_matrix(data)


def write_matrix(path, m) -> None:
    a = as_matrix(m)
    out = [f"{a.shape[0]} {a.shape[1]}"]
    out.extend(" ".join(repr(float(x)) for x in row) for row in a)
    Path(path).write_text("\n".join(out) + "\n")
