"""
arrhenius command line: build graphs, run single trials, sweeps, bound checks, moment checks and trajectories.

Exit codes: 0 success, 1 configuration error, 2 a bound or moment check failed, 3 runtime error.
"""

import json
import sys
from argparse import ArgumentParser
from pathlib import Path

import numpy as np

from .__about__ import __version__
from .dynamics import build_rates
from .exceptions import ArrheniusError, ConfigError, GraphError, InvalidArgumentError, SwapError
from .experiments import (
    GridPoint,
    SweepConfig,
    compare_forces_and_barriers,
    emit_scatter,
    run_sweep,
    run_trial,
    verify_bounds,
    write_sweep,
    write_trials_csv,
)
from .graphs import GraphSpec, read_edge_list, validate, write_edge_list
from .helper import Defaults, ExitCode, logger, open_output, set_verbosity, to_jsonable
from .landscape import sample_iid
from .stats import empirical_moment_suite
from .trajectory import run_trajectories, simulate, write_trajectory_csv


def _print_json(obj):
    print(json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=True))


def _graph_spec(text: str) -> GraphSpec:
    try:
        return GraphSpec.from_dict(text)
    except (InvalidArgumentError, ValueError) as e:
        raise ConfigError(f"bad graph {text!r}, expected FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]] ({e})") from e


# --------------------------------- Commands -----------------------------------
def cmd_graph(args) -> int:
    if args.from_file:
        with open(args.from_file, encoding="utf-8") as f:
            g = read_edge_list(f, name=args.from_file)
    else:
        g = _graph_spec(args.graph).build(np.random.default_rng(args.seed))
    diagnostics = validate(g)
    print(repr(g), file=sys.stderr)
    if args.check:
        diagnostics.pretty_print()
    if args.output:
        with open_output(args.output) as f:
            write_edge_list(g, f)
    elif not args.check:
        write_edge_list(g, sys.stdout)
    return ExitCode.SUCCESS if diagnostics.ok else ExitCode.CONFIG


def _point(args, spec: GraphSpec) -> GridPoint:
    cfg = SweepConfig(graphs=(spec,), trials=1).with_overrides(
        mode=args.mode,
        sigma_w=args.sigma_w,
        sigma_b=args.sigma_b,
        sigma_f=args.sigma_f,
        lam=args.lam,
        slope=args.slope,
        intercept=args.intercept,
        symmetrize=args.symmetrize or None,
    )
    points = cfg.validate().points()
    if len(points) != 1:
        raise ConfigError(f"a single trial takes one value per parameter, got {len(points)} points")
    return points[0]


def cmd_trial(args) -> int:
    spec = _graph_spec(args.graph)
    if args.compare is not None:
        sigma_w = args.sigma_w[0] if args.sigma_w else 1.0
        report = compare_forces_and_barriers(spec, sigma_w, args.compare, args.trials, args.seed, workers=args.workers)
        _print_json(report)
        return ExitCode.SUCCESS
    point = _point(args, spec)
    record = run_trial(point, args.trial, args.seed, keep_vectors=bool(args.scatter))
    if record.errored:
        logger.error(record.error)
        return ExitCode.RUNTIME
    out = {
        "graph": spec.label,
        "n": record.n,
        "degree": record.degree,
        "point": point.key(),
        "trial": record.trial,
        "seed": record.seed,
        "rho": record.rho,
        "rho_hat": record.rho_hat,
        "r": record.r,
        "var_w": record.var_w,
        "var_a": record.var_a,
        "solver": record.solver,
        "degenerate": record.degenerate,
    }
    if args.scatter and not record.degenerate:
        out["scatter"] = [str(p) for p in emit_scatter(record, args.scatter)]
    _print_json(out)
    return ExitCode.SUCCESS


def _sweep_config(args) -> SweepConfig:
    cfg = SweepConfig.from_json(args.config) if args.config else SweepConfig()
    cfg = cfg.with_overrides(
        graphs=[_graph_spec(g) for g in args.graph] if args.graph else None,
        mode=args.mode,
        sigma_w=args.sigma_w,
        sigma_b=args.sigma_b,
        sigma_f=args.sigma_f,
        lam=args.lam,
        slope=args.slope,
        intercept=args.intercept,
        symmetrize=args.symmetrize or None,
        trials=args.trials,
        master_seed=args.seed,
        workers=args.workers,
        output_dir=args.output_dir,
        dense_max_n=args.dense_max_n,
    )
    return cfg.validate()


def cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    result = run_sweep(cfg)
    if cfg.output_dir:
        write_sweep(result, cfg.output_dir)
    else:
        write_trials_csv(result.records, sys.stdout)
    return ExitCode.SUCCESS if result.ok else ExitCode.RUNTIME


def cmd_verify_bounds(args) -> int:
    cfg = _sweep_config(args)
    result = run_sweep(cfg)
    report = verify_bounds(cfg, result)
    if cfg.output_dir:
        write_sweep(result, cfg.output_dir)
        with open_output(Path(cfg.output_dir) / "bounds.json") as f:
            json.dump(to_jsonable(report.to_dict()), f, indent=2, sort_keys=True)
            f.write("\n")
    _print_json(report.to_dict())
    if not result.ok:
        return ExitCode.RUNTIME
    return ExitCode.SUCCESS if report.ok else ExitCode.BOUND_FAILURE


def cmd_moments(args) -> int:
    graph = _graph_spec(args.graph).build(np.random.default_rng(args.seed))
    report = empirical_moment_suite(graph, args.sigma_w, args.sigma_b, args.trials, args.seed, workers=args.workers)
    _print_json(report.to_dict())
    return ExitCode.SUCCESS if report.ok else ExitCode.BOUND_FAILURE


def cmd_trajectory(args) -> int:
    rng = np.random.default_rng(args.seed)
    graph = _graph_spec(args.graph).build(rng)
    landscape = sample_iid(graph, args.sigma_w, args.sigma_b, 0.0, rng)
    report = run_trajectories(
        landscape,
        args.jumps,
        args.runs,
        args.seed,
        start=args.start,
        min_visits=args.min_visits,
        workers=args.workers,
    )
    if args.dump:
        traj = simulate(build_rates(landscape), args.start, args.jumps, rng)
        with open_output(args.dump) as f:
            write_trajectory_csv(traj, f)
    _print_json(report.to_dict())
    return ExitCode.SUCCESS


# --------------------------------- Arguments ----------------------------------
def _add_landscape_options(parser, grids: bool):
    nargs = "+" if grids else 1
    parser.add_argument("--mode", choices=("iid", "rem", "separable"), help="landscape model [default: iid]")
    parser.add_argument("--sigma-w", dest="sigma_w", type=float, nargs=nargs, help="well depth scale(s)")
    parser.add_argument(
        "--sigma-b", dest="sigma_b", type=float, nargs=nargs, help="barrier scale(s), residual scale when separable"
    )
    parser.add_argument("--sigma-f", dest="sigma_f", type=float, nargs=nargs, help="force scale(s)")
    parser.add_argument("--lambda", dest="lam", type=float, nargs=nargs, help="random energy model locality")
    parser.add_argument("--slope", type=float, help="separable barrier law f(x) = slope * x + intercept")
    parser.add_argument("--intercept", type=float)
    parser.add_argument(
        "--symmetrize", action="store_true", default=False, help="average separable barriers over both orientations"
    )


def get_arguments(argv=None):
    parser = ArgumentParser(
        prog="arrhenius", description="Local-global correlation of Arrhenius chains on random energy landscapes."
    )
    parser.add_argument("-V", "--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", default=False, help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", default=False, help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="build, validate and export a graph")
    source = graph.add_mutually_exclusive_group(required=True)
    source.add_argument("graph", nargs="?", help="FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]], e.g. hypercube:10")
    source.add_argument("--from-file", dest="from_file", help="validate an edge list instead")
    graph.add_argument("--seed", type=int, default=0, help="seed for random families [default: 0]")
    graph.add_argument("-o", "--output", help="write the edge list here instead of stdout")
    graph.add_argument("--check", action="store_true", default=False, help="print diagnostics only")
    graph.set_defaults(func=cmd_graph)

    trial = sub.add_parser("trial", help="run one trial and optionally dump the per-state scatter")
    trial.add_argument("graph", help="FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]]")
    _add_landscape_options(trial, grids=False)
    trial.add_argument("--seed", type=int, default=0, help="master seed [default: 0]")
    trial.add_argument("--trial", type=int, default=0, help="trial index [default: 0]")
    trial.add_argument("--scatter", help="per-state CSV path; a JSON sidecar is written next to it")
    trial.add_argument("--compare", type=float, help="compare barriers against forces of this magnitude")
    trial.add_argument("--trials", type=int, default=Defaults.TRIALS, help="trials per side with --compare")
    trial.add_argument("--workers", type=int, default=1)
    trial.set_defaults(func=cmd_trial)

    for name, func, text in (
        ("sweep", cmd_sweep, "run a parameter sweep"),
        ("verify-bounds", cmd_verify_bounds, "run a sweep and check mean rho against the lower bounds"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("-c", "--config", help="JSON sweep configuration; flags override it")
        p.add_argument("--graph", action="append", help="FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]], repeatable")
        _add_landscape_options(p, grids=True)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--workers", type=int)
        p.add_argument("--dense-max-n", dest="dense_max_n", type=int, help="largest n for the dense solver")
        p.add_argument("-o", "--output-dir", dest="output_dir", help="write trials.csv and summaries here")
        p.set_defaults(func=func)

    moments = sub.add_parser("moments", help="Monte Carlo check of the moment bounds")
    moments.add_argument("graph", help="FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]]")
    moments.add_argument("--sigma-w", dest="sigma_w", type=float, default=1.0)
    moments.add_argument("--sigma-b", dest="sigma_b", type=float, default=1.0)
    moments.add_argument("--trials", type=int, default=1000)
    moments.add_argument("--seed", type=int, default=0)
    moments.add_argument("--workers", type=int, default=1)
    moments.set_defaults(func=cmd_moments)

    trajectory = sub.add_parser("trajectory", help="simulate the chain and compare estimates with exact values")
    trajectory.add_argument("graph", help="FAMILY:SIZE[:DEGREE[:SWAP_FACTOR]]")
    trajectory.add_argument("--sigma-w", dest="sigma_w", type=float, default=0.5)
    trajectory.add_argument("--sigma-b", dest="sigma_b", type=float, default=0.5)
    trajectory.add_argument("--jumps", type=int, default=100_000)
    trajectory.add_argument("--runs", type=int, default=1)
    trajectory.add_argument("--start", type=int, default=0)
    trajectory.add_argument("--min-visits", dest="min_visits", type=int, default=10)
    trajectory.add_argument("--seed", type=int, default=0)
    trajectory.add_argument("--workers", type=int, default=1)
    trajectory.add_argument("--dump", help="write one trajectory as CSV step,state,hold_time")
    trajectory.set_defaults(func=cmd_trajectory)

    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = get_arguments(argv)
    set_verbosity(verbose=args.verbose, quiet=args.quiet)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError) as e:
        print(f"arrhenius: configuration error: {e}", file=sys.stderr)
        return ExitCode.CONFIG
    except SwapError as e:
        print(f"arrhenius: {e}", file=sys.stderr)
        return ExitCode.RUNTIME
    except GraphError as e:
        print(f"arrhenius: invalid graph: {e}", file=sys.stderr)
        return ExitCode.CONFIG
    except (ArrheniusError, OSError) as e:
        print(f"arrhenius: {e}", file=sys.stderr)
        return ExitCode.RUNTIME


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("Aborted")
