"""Minimum nuclear-norm solutions of ``A(X) = b`` and their diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .ensemble import LinearMap, combine, null_space_basis, random_unit_vector
from .errors import DegenerateMapError, DimensionError, InvalidReferenceError
from .matcore import as_matrix, nuclear_norm, svd, unvectorize, vectorize

#: Relative Frobenius error below which a planted matrix counts as recovered.
RECOVERY_THRESHOLD = 1e-3


@dataclass
class AffineProblem:
    """Recovery instance ``{X : A(X) = b}`` with optional ground truth."""

    map: LinearMap
    b: np.ndarray
    planted: Optional[np.ndarray] = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.b.size != self.map.m:
            raise DimensionError(f"b has length {self.b.size}, map has {self.map.m} rows")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("b contains non-finite entries")
        if self.planted is not None:
            self.planted = as_matrix(self.planted, "planted")
            resid = np.linalg.norm(self.map.apply(self.planted) - self.b)
            if resid > 1e-9 * (1 + np.linalg.norm(self.b)):
                raise ValueError(f"planted matrix is infeasible (residual {resid:.3e})")

    @classmethod
    def from_planted(cls, lmap: LinearMap, x0) -> "AffineProblem":
        x0 = as_matrix(x0)
        return cls(lmap, lmap.apply(x0), x0)

    @property
    def shape(self):
        return self.map.shape

    @cached_property
    def gram_factor(self):
        """Cholesky factor of ``A @ A.T``, jittered if nearly singular."""
        A = self.map.A
        G = A @ A.T
        jitter = 0.0
        try:
            fac = scipy.linalg.cho_factor(G)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * max(np.trace(G) / G.shape[0], 1.0)
            try:
                fac = scipy.linalg.cho_factor(G + jitter * np.eye(G.shape[0]))
            except np.linalg.LinAlgError as exc:
                raise DegenerateMapError("A @ A.T is singular") from exc
        d2 = np.diag(fac[0]) ** 2
        if d2.min() <= max(1e-14 * d2.max(), 10 * jitter):
            raise DegenerateMapError("A @ A.T is numerically singular")
        return fac


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 5000
    tol: float = 1e-7
    penalty: float = 1.0
    adaptive: bool = True
    record_history: bool = False

    def __post_init__(self):
        if self.max_iter < 1 or not self.tol > 0 or not self.penalty > 0:
            raise ValueError(f"solver parameters must be positive: {self}")


@dataclass
class RecoveryResult:
    X: np.ndarray
    converged: bool
    iterations: int
    primal_residual: float
    dual_residual: float
    nuclear_norm: float
    history: list = field(default_factory=list, repr=False)


class OptimalityCheck(NamedTuple):
    min_gap: float
    passed: bool


def svt(m, tau: float) -> np.ndarray:
    """Singular value soft-thresholding, the proximal map of ``tau * ||.||_*``."""
    if tau < 0:
        raise ValueError(f"threshold must be non-negative, got {tau}")
    U, s, V = svd(m)
    return (U * np.maximum(s - tau, 0.0)) @ V.T


def project_affine(w, p: AffineProblem) -> np.ndarray:
    """Frobenius-nearest point to `w` in ``{Z : A(Z) = b}``."""
    w = as_matrix(w)
    A = p.map.A
    vw = vectorize(w)
    correction = A.T @ scipy.linalg.cho_solve(p.gram_factor, A @ vw - p.b)
    return unvectorize(vw - correction, *p.shape)


def solve_min_nuclear(p: AffineProblem, cfg: SolverConfig = SolverConfig(), init=None) -> RecoveryResult:
    """Minimize ``||X||_*`` subject to ``A(X) = b``.

    ADMM on the splitting ``X = Z`` with ``X`` constrained to the affine
    set and ``Z`` carrying the nuclear norm::

        X <- project_affine(Z - U)
        Z <- svt(X + U, 1 / rho)
        U <- U + X - Z

    The returned iterate is the feasible ``X``. Residuals are
    ``||X - Z||_F`` (primal) and ``rho * ||Z - Z_prev||_F`` (dual), both
    divided by ``1 + ||b||``. With ``cfg.adaptive`` the penalty is doubled
    or halved whenever one residual exceeds the other by a factor of 10.

    Parameters
    ----------
    init : array_like, optional
        Starting point for ``Z``; zero by default.
    """
    n1, n2 = p.shape
    scale = 1.0 + np.linalg.norm(p.b)
    rho = cfg.penalty
    Z = np.zeros((n1, n2)) if init is None else as_matrix(init, "init").copy()
    if Z.shape != (n1, n2):
        raise DimensionError(f"init has shape {Z.shape}, expected {(n1, n2)}")
    U = np.zeros((n1, n2))
    X = project_affine(Z, p)
    history = []
    r_p = r_d = np.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        X = project_affine(Z - U, p)
        Z_prev = Z
        Z = svt(X + U, 1.0 / rho)
        U += X - Z
        r_p = np.linalg.norm(X - Z) / scale
        r_d = rho * np.linalg.norm(Z - Z_prev) / scale
        if cfg.record_history:
            history.append(nuclear_norm(X))
        if max(r_p, r_d) < cfg.tol:
            converged = True
            break
        if cfg.adaptive and it % 10 == 0:
            if r_p > 10 * r_d:
                rho *= 2.0
                U /= 2.0
            elif r_d > 10 * r_p:
                rho /= 2.0
                U *= 2.0
    return RecoveryResult(
        X=X,
        converged=converged,
        iterations=it,
        primal_residual=float(r_p),
        dual_residual=float(r_d),
        nuclear_norm=nuclear_norm(X),
        history=history,
    )


def warn_if_not_monotone(history, burn_in=50, rtol=1e-6) -> bool:
    """Warn if the recorded objective increases after `burn_in` iterations."""
    h = np.asarray(history[burn_in:])
    if h.size < 2:
        return True
    rises = np.diff(h) > rtol * np.maximum(np.abs(h[:-1]), 1.0)
    if np.any(rises):
        warnings.warn(
            f"nuclear norm of the feasible iterate rose {int(rises.sum())} times after burn-in",
            RuntimeWarning,
            stacklevel=2,
        )
        return False
    return True


def relative_error(x, x0) -> float:
    x, x0 = as_matrix(x), as_matrix(x0)
    if x.shape != x0.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {x0.shape}")
    ref = np.linalg.norm(x0)
    if ref == 0.0:
        raise InvalidReferenceError("reference matrix is zero")
    return float(np.linalg.norm(x - x0) / ref)


def check_recovery(x, x0, threshold: float = RECOVERY_THRESHOLD) -> bool:
    """True iff ``||x - x0||_F / ||x0||_F < threshold`` (strictly)."""
    return relative_error(x, x0) < threshold


def nullspace_optimality_check(x, p: AffineProblem, trials: int, rng, steps=(1e-4, 1e-3, 1e-2), tol=1e-5) -> OptimalityCheck:
    """Probe ``||X + tY||_* >= ||X||_*`` along random null-space directions.

    Each trial draws a unit combination ``Y`` of an orthonormal null-space
    basis and evaluates the difference quotient
    ``(||X + tY||_* - ||X||_*) / t`` for both signs of ``Y`` and every
    step in `steps`. ``passed`` is ``min_gap >= -tol``.
    """
    x = as_matrix(x)
    basis = null_space_basis(p.map)
    if basis.shape[0] == 0:
        return OptimalityCheck(np.inf, True)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    base = nuclear_norm(x)
    gap = np.inf
    for _ in range(trials):
        Y = combine(basis, random_unit_vector(basis.shape[0], rng))
        for sign in (1.0, -1.0):
            for t in steps:
                gap = min(gap, (nuclear_norm(x + sign * t * Y) - base) / t)
    return OptimalityCheck(float(gap), bool(gap >= -tol))
