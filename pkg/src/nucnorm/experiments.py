"""Phase-transition experiments over normalized rank and measurement count.

For every grid point ``(beta, mu)`` with ``r = max(1, round(beta*n))`` and
``m = round(mu*n^2)`` the protocol plants ``X0 = YL @ YR.T``, draws a
Gaussian ``m x n^2`` measurement matrix, solves the nuclear-norm program
and scores the outcome with :func:`~nucnorm.recovery.check_recovery`.
Points with ``mu <= beta(2-beta)`` (the identifiability cutoff) are
skipped, since the rank-``r`` feasible set is then infinite.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from . import bounds
from .ensemble import rng_stream, sample_gaussian, sample_linear_map, sample_low_rank
from .matcore import nuclear_norm
from .recovery import AffineProblem, SolverConfig, relative_error, solve_min_nuclear

log = logging.getLogger(__name__)

CSV_HEADER = [
    "n", "beta", "mu", "r", "m", "successes", "attempts", "rate",
    "mean_rel_error", "mean_iterations",
]


def default_betas():
    return np.round(np.arange(1, 10) * 0.05, 10)


def default_mus():
    return np.round(np.arange(2, 21) * 0.05, 10)


@dataclass(frozen=True)
class GridSpec:
    n: int = 20
    mu_grid: tuple = tuple(default_mus())
    beta_grid: tuple = tuple(default_betas())
    repeats: int = 10
    root_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "mu_grid", tuple(float(x) for x in self.mu_grid))
        object.__setattr__(self, "beta_grid", tuple(float(x) for x in self.beta_grid))
        if self.n < 2 or self.repeats < 1:
            raise ValueError("need n >= 2 and repeats >= 1")
        for name, grid, lo, hi in (("mu", self.mu_grid, 0.0, 1.0), ("beta", self.beta_grid, 0.0, 0.5)):
            if list(grid) != sorted(grid):
                raise ValueError(f"{name} grid must be sorted ascending")
            if any(not lo < x <= hi for x in grid) or (name == "beta" and any(x >= 0.5 for x in grid)):
                raise ValueError(f"{name} grid values out of range")

    def cell_shape(self, beta, mu):
        r = max(1, int(round(beta * self.n)))
        m = int(round(mu * self.n**2))
        return r, m


@dataclass(frozen=True)
class CellResult:
    n: int
    r: int
    m: int
    beta_eff: float
    mu_eff: float
    successes: int
    attempts: int
    mean_rel_error: float
    mean_iterations: float
    nonconverged: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.attempts


@dataclass
class PhaseDiagram:
    spec: GridSpec
    cells: list
    skipped: list

    @property
    def nonconverged(self) -> int:
        return sum(c.nonconverged for c in self.cells)


def identifiable(r, m, n) -> bool:
    """True when ``mu > beta(2-beta)``; the boundary itself is skipped."""
    beta, mu = r / n, m / n**2
    return beta * (2 - beta) < mu


def run_cell(n, r, m, repeats, root_seed, solver) -> CellResult:
    """Run `repeats` independent recoveries for one ``(n, r, m)`` cell.

    Repetition ``k`` draws from ``rng_stream(root_seed, n, r, m, k)``, so a
    cell can be recomputed on its own.
    """
    successes = nonconverged = 0
    errors, iters = [], []
    for k in range(repeats):
        rng = rng_stream(root_seed, n, r, m, k)
        x0 = sample_low_rank(n, n, r, rng)
        lmap = sample_linear_map(m, n, n, rng)
        res = solve_min_nuclear(AffineProblem.from_planted(lmap, x0), solver)
        err = relative_error(res.X, x0)
        errors.append(err)
        iters.append(res.iterations)
        if not res.converged:
            nonconverged += 1
        elif err < 1e-3:
            successes += 1
    log.info("n=%d r=%d m=%d: %d/%d recovered", n, r, m, successes, repeats)
    return CellResult(
        n=n, r=r, m=m, beta_eff=r / n, mu_eff=m / n**2,
        successes=successes, attempts=repeats,
        mean_rel_error=float(np.mean(errors)), mean_iterations=float(np.mean(iters)),
        nonconverged=nonconverged,
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_phase_grid(spec: GridSpec, threads: Optional[int] = None) -> PhaseDiagram:
    """Sweep the ``(beta, mu)`` grid of `spec`.

    Cells run in a process pool of `threads` workers (all cores by
    default; ``threads=1`` runs inline). Results do not depend on the
    worker count or completion order.
    """
    jobs, skipped = [], []
    for beta in spec.beta_grid:
        for mu in spec.mu_grid:
            r, m = spec.cell_shape(beta, mu)
            if r >= spec.n / 2 or m < 1 or not identifiable(r, m, spec.n):
                skipped.append((beta, mu))
            else:
                jobs.append((spec.n, r, m, spec.repeats, spec.root_seed, spec.solver))
    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(jobs) <= 1:
        cells = [_run_cell_args(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(_run_cell_args, jobs, chunksize=1))
    return PhaseDiagram(spec, cells, skipped)


class NuclearStats(NamedTuple):
    mean_nuclear: float
    normalized: float
    stddev: float


def montecarlo_nuclear_stats(D: int, trials: int, rng) -> NuclearStats:
    """Sample mean and spread of ``||G||_*`` for ``D x D`` Gaussian ``G``."""
    if D < 1 or trials < 2:
        raise ValueError(f"need D >= 1 and trials >= 2, got D={D}, trials={trials}")
    vals = np.array([nuclear_norm(sample_gaussian(D, D, rng)) for _ in range(trials)])
    mean = float(vals.mean())
    return NuclearStats(mean, mean / D**1.5, float(vals.std(ddof=1)))


def _rows(d: PhaseDiagram):
    n = d.spec.n
    rows = []
    for c in d.cells:
        rows.append((c.beta_eff, c.mu_eff, [
            n, repr(c.beta_eff), repr(c.mu_eff), c.r, c.m, c.successes, c.attempts,
            f"{c.rate:.4f}", repr(c.mean_rel_error), repr(c.mean_iterations),
        ]))
    for beta, mu in d.skipped:
        r, m = d.spec.cell_shape(beta, mu)
        rows.append((r / n, m / n**2, [n, repr(r / n), repr(m / n**2), r, m, 0, 0, "", "", ""]))
    rows.sort(key=lambda t: (t[0], t[1]))
    return [row for _, _, row in rows]


def export_csv(d: PhaseDiagram, path, header_lines=()) -> None:
    """Write one row per grid point, ``beta`` then ``mu`` ascending.

    Skipped points have ``attempts=0`` and empty rate and means. Lines of
    `header_lines` are written first, each prefixed with ``#``.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            w.writerows(_rows(d))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    """Parse an exported diagram back into ``(cells, skipped_rows)``."""
    cells, skipped = [], []
    with Path(path).open() as fh:
        reader = csv.DictReader(ln for ln in fh if not ln.startswith("#"))
        for row in reader:
            n, r, m = int(row["n"]), int(row["r"]), int(row["m"])
            attempts = int(row["attempts"])
            if attempts == 0:
                skipped.append((float(row["beta"]), float(row["mu"]), r, m))
                continue
            cells.append(CellResult(
                n=n, r=r, m=m, beta_eff=float(row["beta"]), mu_eff=float(row["mu"]),
                successes=int(row["successes"]), attempts=attempts,
                mean_rel_error=float(row["mean_rel_error"]),
                mean_iterations=float(row["mean_iterations"]),
            ))
    return cells, skipped


def _gray(rate):
    v = int(round(255 * rate))
    return f"#{v:02x}{v:02x}{v:02x}"


def _step(grid, default):
    g = sorted(set(grid))
    return min(np.diff(g)) if len(g) > 1 else default


def render_heatmap(d: PhaseDiagram, overlay_weak=True, overlay_strong=False, path="phase.svg", header_lines=()) -> None:
    """Write the diagram as an SVG heatmap, white = always recovered.

    The horizontal axis is beta in [0, 0.5] and the vertical axis mu in
    [0, 1]. Skipped points are drawn black with a ``skipped`` class.
    """
    if not d.cells and not d.skipped:
        raise ValueError("cannot render an empty diagram")
    W, H, pad = 500.0, 500.0, 50.0

    def px(beta):
        return pad + beta / 0.5 * W

    def py(mu):
        return pad + (1.0 - mu) * H

    n = d.spec.n
    db = _step([c.beta_eff for c in d.cells] + [d.spec.cell_shape(b, m)[0] / n for b, m in d.skipped], 0.05)
    dm = _step([c.mu_eff for c in d.cells] + [d.spec.cell_shape(b, m)[1] / n**2 for b, m in d.skipped], 0.05)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W + 2 * pad:g}" height="{H + 2 * pad:g}">',
    ]
    out += [f"<!-- {line.replace('--', '-')} -->" for line in header_lines]
    out.append(f'<rect x="{pad:g}" y="{pad:g}" width="{W:g}" height="{H:g}" fill="none" stroke="#888"/>')

    def cell_rect(beta, mu, fill, cls):
        x0, x1 = px(max(beta - db / 2, 0.0)), px(min(beta + db / 2, 0.5))
        y0, y1 = py(min(mu + dm / 2, 1.0)), py(max(mu - dm / 2, 0.0))
        return (
            f'<rect class="{cls}" x="{x0:.3f}" y="{y0:.3f}" width="{x1 - x0:.3f}" '
            f'height="{y1 - y0:.3f}" fill="{fill}"/>'
        )

    for c in d.cells:
        out.append(cell_rect(c.beta_eff, c.mu_eff, _gray(c.rate), "cell"))
    for beta, mu in d.skipped:
        r, m = d.spec.cell_shape(beta, mu)
        out.append(cell_rect(r / n, m / n**2, "#000000", "skipped"))

    betas = np.linspace(0.0, 0.5, 200, endpoint=False)
    for kind, show, color in (("weak", overlay_weak, "#d62728"), ("strong", overlay_strong, "#1f77b4")):
        if not show:
            continue
        curve = bounds.bound_curve(kind, points=200)
        pts = " ".join(f"{px(b):.3f},{py(m):.3f}" for b, m in zip(curve.betas, curve.mus))
        out.append(f'<polyline class="{kind}" points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
    out.append(f'<text x="{pad + W / 2:g}" y="{H + 1.7 * pad:g}" text-anchor="middle">beta = r/n</text>')
    out.append(
        f'<text x="{pad / 3:g}" y="{pad + H / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 {pad / 3:g} {pad + H / 2:g})">mu = m/n^2</text>'
    )
    out.append("</svg>")
    path = Path(path)
    try:
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
