"""Null-space certificates for exact recovery by nuclear-norm minimization.

A pass from the samplers in this module is evidence, not a proof: the
conditions quantify over every null-space element and every pair of
rank-``r`` projectors, and only finitely many of them are examined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .ensemble import LinearMap, combine, null_space_basis, random_unit_vector
from .errors import (
    DegenerateDecompositionError,
    DimensionError,
    NoCounterexampleError,
    NotInNullSpaceError,
)
from .matcore import RANK_TOL, as_matrix, nuclear_norm, svd

#: Largest admissible condition number of the corner block in :func:`decompose`.
MAX_CORNER_COND = 1e10

#: Margins within this absolute distance of zero are counted as "boundary".
BOUNDARY_ATOL = 1e-12


class DecompositionResult(NamedTuple):
    Y1: np.ndarray
    Y2: np.ndarray


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of sampling ``||(I-P)Y(I-Q)||_* - ||PYQ||_* >= 0``.

    ``boundary`` counts samples whose margin is zero to within
    ``BOUNDARY_ATOL``; those are neither violations nor clear passes.
    """

    trials: int
    violations: int
    min_margin: float
    boundary: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_text(self) -> str:
        return "\n".join(
            f"{k}={v}"
            for k, v in (
                ("trials", self.trials),
                ("violations", self.violations),
                ("boundary", self.boundary),
                ("min_margin", repr(self.min_margin)),
                ("pass", str(self.passed).lower()),
            )
        )


class Counterexample(NamedTuple):
    x0: np.ndarray
    b: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray


def decompose(x, y, rank_tol=RANK_TOL) -> DecompositionResult:
    """Split ``y = Y1 + Y2`` with ``rank(Y1) = rank(x)`` and ``Y2`` additive to `x`.

    In the singular bases of `x` (where ``x = diag(X11, 0)``) the split is
    the Schur-complement one::

        Y1 = [[Y11, Y12], [Y21, Y21 Y11^-1 Y12]]
        Y2 = [[0,   0  ], [0,   Y22 - Y21 Y11^-1 Y12]]

    so ``Y2`` lives on the orthogonal complements of the row and column
    spaces of `x` and ``||x + Y2||_* = ||x||_* + ||Y2||_*``.

    Raises
    ------
    DegenerateDecompositionError
        If ``Y11`` has condition number above ``MAX_CORNER_COND``.
    """
    x, y = as_matrix(x, "x"), as_matrix(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    n1, n2 = x.shape
    U, s, V = np.linalg.svd(x, full_matrices=True)
    V = V.T
    r = 0 if s[0] == 0.0 else int(np.sum(s > rank_tol * s[0]))
    if not 1 <= r < min(n1, n2) / 2:
        raise DimensionError(f"rank of x must satisfy 1 <= r < min(n1, n2)/2, got r={r}")
    yt = U.T @ y @ V
    Y11, Y12 = yt[:r, :r], yt[:r, r:]
    Y21, Y22 = yt[r:, :r], yt[r:, r:]
    if not np.isfinite(np.linalg.cond(Y11)) or np.linalg.cond(Y11) > MAX_CORNER_COND:
        raise DegenerateDecompositionError(
            "corner block of y in the singular coordinates of x is singular"
        )
    schur = Y21 @ np.linalg.solve(Y11, Y12)
    y1 = np.block([[Y11, Y12], [Y21, schur]])
    y2 = np.zeros_like(yt)
    y2[r:, r:] = Y22 - schur
    return DecompositionResult(U @ y1 @ V.T, U @ y2 @ V.T)


def additivity_holds(x, y) -> bool:
    """True iff ``x.T @ y`` and ``x @ y.T`` vanish and the nuclear norm adds."""
    x, y = as_matrix(x, "x"), as_matrix(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    scale = np.linalg.norm(x) * np.linalg.norm(y)
    orthogonal = (
        np.linalg.norm(x.T @ y) <= 1e-9 * scale
        and np.linalg.norm(x @ y.T) <= 1e-9 * scale
    )
    nx, ny = nuclear_norm(x), nuclear_norm(y)
    additive = abs(nuclear_norm(x + y) - nx - ny) <= 1e-7 * (nx + ny)
    if orthogonal:
        assert additive, "orthogonal supports must give additive nuclear norms"
    return bool(orthogonal and additive)


def random_projector(n, r, rng) -> np.ndarray:
    """Rank-`r` orthogonal projector onto a Haar-random subspace of R^n."""
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q @ q.T


def condition_margin(y, P, Q) -> float:
    """``||(I-P) y (I-Q)||_* - ||P y Q||_*``."""
    outer = y - P @ y - y @ Q + P @ y @ Q
    return nuclear_norm(outer) - nuclear_norm(P @ y @ Q)


def sufficient_condition_sample(lmap: LinearMap, r: int, trials: int, rng) -> ConditionReport:
    """Monte Carlo check of the projector condition on the null space.

    Each trial draws a unit coefficient vector ``v``, forms
    ``Y = sum v_i B_i`` over an orthonormal null-space basis (so
    ``||Y||_F = 1``), draws independent Haar rank-`r` projectors ``P`` and
    ``Q`` and records the margin for ``Y`` and ``-Y``.
    """
    if r < 1:
        raise DimensionError(f"rank must be positive, got {r}")
    basis = null_space_basis(lmap)
    if basis.shape[0] == 0:
        return ConditionReport(trials=0, violations=0, min_margin=np.inf)
    n1, n2 = lmap.shape
    violations = boundary = 0
    worst = np.inf
    for _ in range(trials):
        Y = combine(basis, random_unit_vector(basis.shape[0], rng))
        P = random_projector(n1, r, rng)
        Q = random_projector(n2, r, rng)
        margin = min(condition_margin(Y, P, Q), condition_margin(-Y, P, Q))
        worst = min(worst, margin)
        if abs(margin) <= BOUNDARY_ATOL:
            boundary += 1
        elif margin < 0:
            violations += 1
    return ConditionReport(trials=trials, violations=violations, min_margin=float(worst), boundary=boundary)


def construct_counterexample(lmap: LinearMap, y, r: int, x=None) -> Counterexample:
    """Instance on which nuclear-norm minimization misses a rank-`r` matrix.

    Given ``y`` in the null space split as ``y = Y1 + Y2`` with
    ``rank(Y1) = r`` and ``||Y1||_* > ||Y2||_*``, the planted matrix
    ``x0 = Y1`` with ``b = A(Y1)`` admits the feasible point ``-Y2`` of
    strictly smaller nuclear norm.

    The split is :func:`decompose` relative to `x` when given; otherwise
    ``Y1`` is the best rank-`r` approximation of `y`.
    """
    y = as_matrix(y, "y")
    if np.linalg.norm(lmap.apply(y)) > 1e-8 * max(1.0, np.linalg.norm(lmap.A)):
        raise NotInNullSpaceError("y is not in the null space of the map")
    if np.linalg.norm(y) == 0.0:
        raise NoCounterexampleError("y is zero")
    if x is None:
        U, s, V = svd(y)
        y1 = (U[:, :r] * s[:r]) @ V[:, :r].T
        y2 = y - y1
    else:
        y1, y2 = decompose(x, y)
    n1, n2 = nuclear_norm(y1), nuclear_norm(y2)
    if not n1 > n2:
        raise NoCounterexampleError(
            f"split does not violate the condition (||Y1||_* = {n1:.6g} <= ||Y2||_* = {n2:.6g})"
        )
    return Counterexample(y1, lmap.apply(y1), y1, y2)


def _margin_and_gradient(v, basis, P, Q):
    Y = combine(basis, v)
    IP = np.eye(P.shape[0]) - P
    IQ = np.eye(Q.shape[0]) - Q
    outer, inner = IP @ Y @ IQ, P @ Y @ Q
    Uo, so, Vo = svd(outer)
    Ui, si, Vi = svd(inner)
    # subgradients of the two nuclear norms restricted to their supports
    ko = int(np.sum(so > RANK_TOL * max(so[0], 1e-300)))
    ki = int(np.sum(si > RANK_TOL * max(si[0], 1e-300)))
    Go = IP.T @ (Uo[:, :ko] @ Vo[:, :ko].T) @ IQ.T
    Gi = P.T @ (Ui[:, :ki] @ Vi[:, :ki].T) @ Q.T
    grad = np.tensordot(basis, Go - Gi, axes=([1, 2], [0, 1]))
    return float(so.sum() - si.sum()), grad


def inf_gap_estimate(lmap: LinearMap, P, Q, restarts: int = 20, rng=None, iterations: int = 500) -> float:
    """Smallest margin ``||(I-P)Y(v)(I-Q)||_* - ||P Y(v) Q||_*`` found over unit `v`.

    Projected subgradient descent on the unit sphere of null-space
    coefficients with step ``1/sqrt(k)`` along the normalized tangent
    subgradient, restarted from `restarts` random points. The result is an
    upper bound on the true infimum.
    """
    P, Q = as_matrix(P, "P"), as_matrix(Q, "Q")
    basis = null_space_basis(lmap)
    k = basis.shape[0]
    if k == 0:
        return np.inf
    if k == 1:
        return min(condition_margin(basis[0], P, Q), condition_margin(-basis[0], P, Q))
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    best = np.inf
    for _ in range(restarts):
        v = random_unit_vector(k, rng)
        for it in range(1, iterations + 1):
            margin, g = _margin_and_gradient(v, basis, P, Q)
            best = min(best, margin)
            g_tan = g - (g @ v) * v
            gn = np.linalg.norm(g_tan)
            if gn == 0.0:
                break
            v = v - (1.0 / np.sqrt(it)) * g_tan / gn
            v /= np.linalg.norm(v)
        best = min(best, condition_margin(combine(basis, v), P, Q))
    return float(best)
