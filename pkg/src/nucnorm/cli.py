"""Command-line interface.

Subcommands ``solve``, ``phase``, ``bounds``, ``cert`` and ``mc``. Every
subcommand accepts ``--config FILE`` holding ``key=value`` lines whose keys
are flag names without the leading dashes; explicit flags win over the
file. Output files start with ``#`` lines recording the version, seed and
effective configuration.

Exit codes: 0 success, 2 solver did not converge, 3 certificate violated,
64 usage error, 74 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__, bounds, conditions, experiments
from .ensemble import LinearMap, rng_stream, sample_linear_map, sample_low_rank
from .errors import RecoveryError
from .matcore import read_matrix
from .recovery import AffineProblem, SolverConfig, check_recovery, relative_error, solve_min_nuclear

EX_OK, EX_NOCONV, EX_VIOLATION, EX_USAGE, EX_IOERR = 0, 2, 3, 64, 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_common(p):
    p.add_argument("--config", metavar="FILE", help="key=value file supplying defaults (default: none)")
    p.add_argument("--seed", type=int, default=0, help="root random seed (default: 0)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="increase log verbosity (default: warnings only)")


def _add_solver(p):
    p.add_argument("--max-iter", type=int, default=5000, help="solver iteration cap (default: 5000)")
    p.add_argument("--tol", type=float, default=1e-7, help="relative residual tolerance (default: 1e-7)")
    p.add_argument("--penalty", type=float, default=1.0, help="initial ADMM penalty (default: 1.0)")


def build_parser():
    parser = _Parser(prog="nucnorm", description="Low-rank recovery by nuclear-norm minimization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one minimum nuclear-norm problem")
    _add_common(p)
    p.add_argument("--map", metavar="FILE", help="measurement matrix A (m x n1*n2) in matrix text format (default: sample a planted instance)")
    p.add_argument("--b", metavar="FILE", help="right-hand side as an m x 1 matrix text file (default: none)")
    p.add_argument("--shape", type=int, nargs=2, metavar=("N1", "N2"), help="shape of X when --map is given (default: none)")
    p.add_argument("--n", type=int, default=10, help="side of the sampled planted instance (default: 10)")
    p.add_argument("--rank", type=int, default=1, help="rank of the planted matrix (default: 1)")
    p.add_argument("--mu", type=float, default=0.8, help="measurements as a fraction of n^2 (default: 0.8)")
    p.add_argument("--output", metavar="FILE", help="write the solution in matrix text format (default: none)")
    _add_solver(p)

    p = sub.add_parser("phase", help="run the phase-transition grid")
    _add_common(p)
    p.add_argument("--n", type=int, default=20, help="matrix side (default: 20)")
    p.add_argument("--betas", type=_float_list, default=list(experiments.default_betas()),
                   help="comma-separated beta grid (default: 0.05,0.10,...,0.45)")
    p.add_argument("--mus", type=_float_list, default=list(experiments.default_mus()),
                   help="comma-separated mu grid (default: 0.10,0.15,...,1.00)")
    p.add_argument("--repeats", type=int, default=10, help="repetitions per cell (default: 10)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--csv", default="phase.csv", help="CSV output path (default: phase.csv)")
    p.add_argument("--svg", default=None, help="SVG heatmap path (default: none)")
    p.add_argument("--overlay-weak", type=_bool, default=True, help="draw the weak curve (default: true)")
    p.add_argument("--overlay-strong", type=_bool, default=False, help="draw the strong curve (default: false)")
    _add_solver(p)

    p = sub.add_parser("bounds", help="tabulate the weak and strong threshold curves")
    _add_common(p)
    p.add_argument("--points", type=int, default=200, help="betas in [0, 0.5) per curve (default: 200)")
    p.add_argument("--kind", choices=("weak", "strong", "both"), default="both", help="curves to emit (default: both)")
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("cert", help="sample the null-space recovery condition")
    _add_common(p)
    p.add_argument("--map", metavar="FILE", help="measurement matrix A in matrix text format (default: sample a Gaussian map)")
    p.add_argument("--shape", type=int, nargs=2, metavar=("N1", "N2"), help="shape of X when --map is given (default: none)")
    p.add_argument("--n", type=int, default=20, help="side of the sampled map (default: 20)")
    p.add_argument("--mu", type=float, default=0.7, help="measurements as a fraction of n^2 (default: 0.7)")
    p.add_argument("--rank", type=int, default=1, help="projector rank r (default: 1)")
    p.add_argument("--trials", type=int, default=500, help="Monte Carlo trials (default: 500)")
    p.add_argument("--restarts", type=int, default=20, help="descent restarts for the infimum (default: 20)")
    p.add_argument("--iterations", type=int, default=500, help="descent steps per restart (default: 500)")

    p = sub.add_parser("mc", help="Monte Carlo mean nuclear norm of a Gaussian matrix")
    _add_common(p)
    p.add_argument("--D", type=int, default=200, help="matrix side (default: 200)")
    p.add_argument("--trials", type=int, default=50, help="number of samples (default: 50)")
    return parser


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def read_config(path):
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _sub_parser(parser, command):
    for action in parser._subparsers._group_actions:
        return action.choices[command]


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = _sub_parser(parser, args.command)
        known = {a.dest: a for a in sub._actions}
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        defaults = {}
        for key, value in cfg.items():
            action = known.get(key)
            if action is None or key in ("help", "config"):
                sub.error(f"unknown config key {key!r} in {args.config}")
            if isinstance(action, argparse._CountAction):
                action = argparse.Namespace(nargs=None, type=int)
            if action.nargs in (2, "+"):
                value = value.split()
                defaults[key] = [action.type(v) for v in value] if action.type else value
            else:
                try:
                    defaults[key] = action.type(value) if action.type else value
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    sub.error(f"bad value for {key}: {exc}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def effective_config(args):
    skip = {"command", "verbose", "config", "seed"}
    items = sorted((k, v) for k, v in vars(args).items() if k not in skip)
    return [f"nucnorm {__version__} {args.command}", f"seed={args.seed}"] + [
        f"{k}={','.join(map(str, v)) if isinstance(v, (list, tuple)) else v}" for k, v in items
    ]


def _solver_config(args):
    return SolverConfig(max_iter=args.max_iter, tol=args.tol, penalty=args.penalty)


def cmd_solve(args, out):
    if args.map:
        if not (args.b and args.shape):
            raise UsageError("--map requires --b and --shape")
        lmap = LinearMap(read_matrix(args.map), *args.shape)
        b = read_matrix(args.b).reshape(-1)
        problem = AffineProblem(lmap, b)
    else:
        n = args.n
        if not 1 <= args.rank <= n or not 0 < args.mu <= 1:
            raise UsageError("need 1 <= rank <= n and 0 < mu <= 1")
        rng = rng_stream(args.seed, 0)
        x0 = sample_low_rank(n, n, args.rank, rng)
        lmap = sample_linear_map(max(1, round(args.mu * n * n)), n, n, rng)
        problem = AffineProblem.from_planted(lmap, x0)
    res = solve_min_nuclear(problem, _solver_config(args))
    print(f"converged={str(res.converged).lower()}", file=out)
    print(f"iterations={res.iterations}", file=out)
    print(f"nuclear_norm={res.nuclear_norm!r}", file=out)
    print(f"primal_residual={res.primal_residual!r}", file=out)
    print(f"dual_residual={res.dual_residual!r}", file=out)
    if problem.planted is not None:
        err = relative_error(res.X, problem.planted)
        verdict = "recovered" if res.converged and check_recovery(res.X, problem.planted) else "not recovered"
        print(f"relative_error={err!r}", file=out)
        print(f"verdict={verdict}", file=out)
    if args.output:
        _write(args.output, effective_config(args), _matrix_text(res.X))
    return EX_OK if res.converged else EX_NOCONV


def _matrix_text(x):
    lines = [f"{x.shape[0]} {x.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in x]
    return "\n".join(lines) + "\n"


def _write(path, header, body):
    text = "".join(f"# {h}\n" for h in header) + body
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def cmd_phase(args, out):
    spec = experiments.GridSpec(
        n=args.n,
        mu_grid=sorted(args.mus),
        beta_grid=sorted(args.betas),
        repeats=args.repeats,
        root_seed=args.seed,
        solver=_solver_config(args),
    )
    diagram = experiments.run_phase_grid(spec, threads=args.threads)
    header = effective_config(args)
    experiments.export_csv(diagram, args.csv, header_lines=header)
    if args.svg:
        experiments.render_heatmap(diagram, args.overlay_weak, args.overlay_strong, args.svg, header_lines=header)
    print(
        f"cells={len(diagram.cells)} skipped={len(diagram.skipped)} "
        f"nonconverged={diagram.nonconverged} csv={args.csv}",
        file=out,
    )
    return EX_OK


def cmd_bounds(args, out):
    if args.points < 1:
        raise UsageError("--points must be positive")
    kinds = ("weak", "strong") if args.kind == "both" else (args.kind,)
    text = bounds.curves_to_csv(bounds.bound_curve(k, args.points) for k in kinds)
    header = "".join(f"# {h}\n" for h in effective_config(args))
    if args.output:
        _write(args.output, effective_config(args), text)
    else:
        out.write(header + text)
    return EX_OK


def cmd_cert(args, out):
    rng = rng_stream(args.seed, 1)
    if args.map:
        if not args.shape:
            raise UsageError("--map requires --shape")
        lmap = LinearMap(read_matrix(args.map), *args.shape)
    else:
        if not 0 < args.mu <= 1:
            raise UsageError("need 0 < mu <= 1")
        lmap = sample_linear_map(max(1, round(args.mu * args.n**2)), args.n, args.n, rng)
    n1, n2 = lmap.shape
    if not 1 <= args.rank <= min(n1, n2):
        raise UsageError("rank out of range")
    report = conditions.sufficient_condition_sample(lmap, args.rank, args.trials, rng)
    P = conditions.random_projector(n1, args.rank, rng)
    Q = conditions.random_projector(n2, args.rank, rng)
    gap = conditions.inf_gap_estimate(lmap, P, Q, args.restarts, rng, iterations=args.iterations)
    print(report.as_text(), file=out)
    print(f"inf_gap_estimate={gap!r}", file=out)
    return EX_OK if report.passed and gap >= 0 else EX_VIOLATION


def cmd_mc(args, out):
    if args.D < 1 or args.trials < 2:
        raise UsageError("need D >= 1 and trials >= 2")
    stats = experiments.montecarlo_nuclear_stats(args.D, args.trials, rng_stream(args.seed, 2))
    print(f"mean_nuclear={stats.mean_nuclear!r}", file=out)
    print(f"normalized={stats.normalized!r}", file=out)
    print(f"stddev={stats.stddev!r}", file=out)
    print(f"reference_8_over_3pi={8 / (3 * math.pi)!r}", file=out)
    return EX_OK


COMMANDS = {"solve": cmd_solve, "phase": cmd_phase, "bounds": cmd_bounds, "cert": cmd_cert, "mc": cmd_mc}


def dispatch(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"nucnorm: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except OSError as exc:
        print(f"nucnorm: {exc}", file=sys.stderr)
        return EX_IOERR
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"nucnorm {args.command}: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except OSError as exc:
        print(f"nucnorm: {exc}", file=sys.stderr)
        return EX_IOERR
    except (RecoveryError, ValueError) as exc:
        print(f"nucnorm {args.command}: error: {exc}", file=sys.stderr)
        return EX_USAGE


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
