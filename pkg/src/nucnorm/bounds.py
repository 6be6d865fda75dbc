"""Closed-form recovery thresholds and random-matrix constants.

``beta = r/n`` is the normalized rank and ``mu = m/n^2`` the normalized
number of measurements. For rectangular problems use ``n = max(n1, n2)``
(zero padding to a square matrix), which is conservative.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError

#: Limit of E[sigma_i] / sqrt(D) for a D x D Gaussian matrix.
MP_CONSTANT = 8.0 / (3.0 * math.pi)

_WEAK_FACTOR = 64.0 / (9.0 * math.pi**2)


def _check_beta(beta):
    if not 0.0 <= beta < 0.5:
        raise DomainError(f"beta must lie in [0, 0.5), got {beta}")


def _gap(beta):
    return (1.0 - beta) ** 1.5 - beta**1.5


def weak_bound_mu(beta: float) -> float:
    """Measurement fraction above which a fixed rank-``beta*n`` matrix is recovered.

    ``1 - 64/(9 pi^2) * ((1-beta)^{3/2} - beta^{3/2})^2``
    """
    _check_beta(beta)
    return min(1.0, 1.0 - _WEAK_FACTOR * _gap(beta) ** 2)


class FG(NamedTuple):
    f: float
    g: float


def strong_fg(beta: float, eps: float) -> FG:
    """The two competing terms of the uniform (strong) threshold.

    ``f = 8/(3 pi) * ((1-beta)^{3/2} - beta^{3/2} - 4 eps) / (1 + 4 eps)``
    and ``g = sqrt(2 beta (2 - beta)) * ln(3 pi / (2 eps))``.
    """
    _check_beta(beta)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    f = MP_CONSTANT * (_gap(beta) - 4.0 * eps) / (1.0 + 4.0 * eps)
    g = math.sqrt(2.0 * beta * (2.0 - beta)) * math.log(3.0 * math.pi / (2.0 * eps))
    return FG(f, g)


class StrongBound(NamedTuple):
    mu: float
    eps: float
    feasible: bool


def strong_bound(beta: float, eps_min=1e-9, eps_max=1.0, points=400) -> StrongBound:
    """Threshold for recovering every matrix of rank at most ``beta*n``.

    Maximizes ``f - g`` over ``eps`` on a log grid, then refines the best
    bracket by golden-section search in ``log(eps)``. When ``f - g <= 0``
    everywhere no guarantee exists and ``mu = 1.0`` with
    ``feasible=False`` is returned.
    """
    _check_beta(beta)

    def h(log_eps):
        fg = strong_fg(beta, math.exp(log_eps))
        return fg.f - fg.g

    grid = np.linspace(math.log(eps_min), math.log(eps_max), points)
    vals = np.array([h(t) for t in grid])
    i = int(np.argmax(vals))
    best_t, best = grid[i], vals[i]
    if 0 < i < points - 1:
        res = optimize.minimize_scalar(
            lambda t: -h(t), bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
            options={"xtol": 1e-12},
        )
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    if best <= 0:
        return StrongBound(1.0, math.exp(best_t), False)
    return StrongBound(1.0 - best**2, math.exp(best_t), True)


def strong_bound_mu(beta: float) -> float:
    return strong_bound(beta).mu


def mp_integrand(t):
    return np.sqrt(np.maximum(4.0 - t, 0.0)) / (2.0 * math.pi)


def mp_constant() -> float:
    """``8/(3 pi)``: mean singular value of a Gaussian matrix divided by sqrt(D)."""
    return MP_CONSTANT


def mp_constant_quadrature() -> float:
    """``(1/2pi) * integral_0^4 sqrt(4 - t) dt`` by adaptive quadrature."""
    value, _ = integrate.quad(mp_integrand, 0.0, 4.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(value)


def expected_nuclear_norm(D: int) -> float:
    """Leading-order ``E||G||_* ~ 8/(3 pi) D^{3/2}`` for ``G`` in G(D)."""
    if D < 1:
        raise DomainError(f"D must be a positive integer, got {D}")
    return MP_CONSTANT * D**1.5


def sigma_nuclear(D: int) -> float:
    """Lipschitz constant ``sqrt(D)`` of the nuclear norm w.r.t. Frobenius."""
    if D < 1:
        raise DomainError(f"D must be a positive integer, got {D}")
    return math.sqrt(D)


def szarek_log_net_size(n: int, r: int, eps: float) -> float:
    """Natural log of the eps-net bound ``(3 pi / 2 eps)^{r (n - r/2 - 1/2)}``
    for rank-`r` projectors on R^n."""
    if not 1 <= r <= n:
        raise DomainError(f"need 1 <= r <= n, got r={r}, n={n}")
    if not 0 < eps < 1.5 * math.pi:
        raise DomainError(f"eps must lie in (0, 3pi/2), got {eps}")
    return r * (n - r / 2 - 0.5) * math.log(3.0 * math.pi / (2.0 * eps))


@dataclass(frozen=True)
class BoundCurve:
    betas: np.ndarray
    mus: np.ndarray
    kind: str

    def rows(self):
        for b, m in zip(self.betas, self.mus):
            yield f"{b:.6g}", f"{m:.6g}", self.kind


def bound_curve(kind: str, points: int = 200, beta_max: float = 0.5) -> BoundCurve:
    """Evaluate the weak or strong threshold on ``points`` betas in ``[0, beta_max)``."""
    if kind not in ("weak", "strong"):
        raise ValueError(f"kind must be 'weak' or 'strong', got {kind!r}")
    if points < 1:
        raise ValueError("points must be positive")
    betas = np.linspace(0.0, beta_max, points, endpoint=False)
    fn = weak_bound_mu if kind == "weak" else strong_bound_mu
    return BoundCurve(betas, np.array([fn(b) for b in betas]), kind)


def curves_to_csv(curves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "mu", "kind"])
    for c in curves:
        w.writerows(c.rows())
    return buf.getvalue()
