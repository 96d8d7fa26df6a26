"""
QAOA Desk Toolkit - command line front end

Subcommands:
    qaoa          optimize QAOA angles for an instance and write Result JSON
    landscape     scan a 2-D slice of the angle space and write a CSV grid
    grover        measure Grover-QAOA query scaling and write trace CSV + fit JSON
    qubo build    encode spanning trees of a graph as a QUBO (+ encoding sidecar)
    qubo solve    minimize a QUBO by brute force or simulated annealing and decode the tree

Any flag may come from --config file.json (keys are flag names with underscores); flags on the
command line win. Exit codes: 0 success, 2 configuration error, 3 infeasible or oversize instance.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

from grover import MIXER_SCALE, NoHitError, scaling_fit
from mixers import TransverseField, XYRingGroups, load_mixer
from problems import (cost_table, graph_coloring_instance, load_graph, maxcut_instance, onehot_groups,
                      ring_of_disagrees)
from qaoa import (SPIN_HALF, OptimizerConfig, QaoaParams, QaoaResult, UndefinedRatioError, approximation_ratio,
                  landscape_scan, optimize_params)
from qubo import (AnnealSchedule, DisconnectedGraphError, OversizeError, SpanningTreeOptions, anneal_restarts,
                  brute_force_minimize, decode_tree, load_encoding, load_qubo, spanning_tree_qubo)
from result_io import encoding_path_for, solve_report, write_grover, write_json, write_landscape, write_qubo, \
    write_result
from statevector import expectation_diagonal, new_onehot_superposition, new_uniform

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTANCE = 3

COMMON_DEFAULTS = {"seed": 0, "threads": 1, "log_level": "INFO"}

DEFAULTS = {
    "qaoa": {"problem": "ring", "n": 8, "p": 1, "colors": 3, "symmetric": False, "restarts": 32,
             "beta_scale": 0.5, "max_evals": 500},
    "landscape": {"problem": "ring", "n": 8, "colors": 3, "symmetric": False, "x_range": [-math.pi, math.pi],
                  "y_range": [-math.pi, math.pi], "x_count": 101, "y_count": 101, "beta_scale": 0.5,
                  "angle_scale": SPIN_HALF},
    "grover": {"gamma_scan": 64, "threshold": 0.5, "target": 0, "mixer_scale": MIXER_SCALE},
    "qubo build": {"objective_b": 1.0},
    "qubo solve": {"method": "brute", "restarts": 64, "sweeps": 1000},
}


class ConfigError(ValueError):
    """Missing or invalid command configuration"""


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying defaults for any flag")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--seed", type=int, help="Seed for every random draw (default 0)")
    common.add_argument("--threads", type=int, help="Worker threads (default 1)")
    common.add_argument("--out", help="Output file")
    return common


def _add_instance_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--problem", choices=["ring", "maxcut", "coloring"])
    parser.add_argument("--n", type=int, help="Ring size for --problem ring")
    parser.add_argument("--graph", help="Graph JSON for maxcut/coloring")
    parser.add_argument("--colors", type=int, help="Colors per vertex for --problem coloring")
    parser.add_argument("--mixer", help="Mixer JSON overriding the problem's default mixer")
    parser.add_argument("--symmetric", action=argparse.BooleanOptionalAction, default=None,
                        help="Search the symmetric submanifold (betas tied to reversed gammas)")
    parser.add_argument("--beta-scale", type=float, help="Symmetric submanifold scale (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="toolkit_cli", description="QAOA desk toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    qaoa = commands.add_parser("qaoa", parents=[common], help="Optimize QAOA angles")
    _add_instance_flags(qaoa)
    qaoa.add_argument("--p", type=int, help="Depth; 0 evaluates the initial state")
    qaoa.add_argument("--restarts", type=int)
    qaoa.add_argument("--max-evals", type=int, help="Nelder-Mead budget per restart")

    landscape = commands.add_parser("landscape", parents=[common], help="Scan a 2-D angle grid")
    _add_instance_flags(landscape)
    landscape.add_argument("--x-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    landscape.add_argument("--y-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    landscape.add_argument("--x-count", type=int)
    landscape.add_argument("--y-count", type=int)
    landscape.add_argument("--angle-scale", type=float,
                           help=f"Circuit angle per grid unit (default {SPIN_HALF}: spin-1/2 units; 1.0 for radians)")

    grover = commands.add_parser("grover", parents=[common], help="Grover-QAOA scaling fit")
    grover.add_argument("--ns", type=int, nargs="+", help="Qubit counts (at least 4 distinct)")
    grover.add_argument("--gamma-scan", type=int)
    grover.add_argument("--threshold", type=float)
    grover.add_argument("--target", type=int)
    grover.add_argument("--max-steps", type=int)
    grover.add_argument("--mixer-scale", type=float, help=f"H_M = scale * sum of X (default {MIXER_SCALE})")
    grover.add_argument("--fit-out", help="Fit JSON (default: <out stem>.fit.json)")

    qubo = commands.add_parser("qubo", help="Spanning-tree QUBO tools")
    qubo_commands = qubo.add_subparsers(dest="qubo_command", required=True)
    build = qubo_commands.add_parser("build", parents=[common], help="Encode a graph's spanning trees")
    build.add_argument("--graph")
    build.add_argument("--delta", type=int, help="Degree bound")
    build.add_argument("--penalty-a", type=float)
    build.add_argument("--objective-b", type=float)
    build.add_argument("--rosenberg-penalty", type=float)
    build.add_argument("--encoding-out", help="Sidecar path (default: <out stem>.encoding.json)")

    solve = qubo_commands.add_parser("solve", parents=[common], help="Minimize a QUBO and decode it")
    solve.add_argument("--qubo")
    solve.add_argument("--encoding", help="Sidecar path (default: <qubo stem>.encoding.json)")
    solve.add_argument("--method", choices=["brute", "sa"])
    solve.add_argument("--restarts", type=int, help="Annealing restarts (seeds seed..seed+restarts-1)")
    solve.add_argument("--sweeps", type=int)
    solve.add_argument("--t-start", type=float, help="Default: penalty_A / 2")
    solve.add_argument("--t-end", type=float, help="Default: penalty_A / 20")
    return parser


def _command_key(args: argparse.Namespace) -> str:
    if args.command == "qubo":
        return f"qubo {args.qubo_command}"
    return args.command


def _load_config(path: Optional[str]) -> Dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not read config file {path}: {e}")
    if not isinstance(config, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    return config


def resolve_options(args: argparse.Namespace) -> Dict:
    """Merge command-line flags over the config file over built-in defaults"""
    key = _command_key(args)
    opts = dict(COMMON_DEFAULTS)
    opts.update(DEFAULTS.get(key, {}))
    opts.update(_load_config(args.config))
    for name, value in vars(args).items():
        if value is not None and name not in ("command", "qubo_command", "config"):
            opts[name] = value
    opts["command"] = key
    return opts


def _require(opts: Dict, name: str):
    if opts.get(name) is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for '{opts['command']}'")
    return opts[name]


def _build_instance(opts: Dict):
    """(cost table, mixer, initial state) for the configured problem"""
    problem = opts["problem"]
    if problem == "ring":
        cost = cost_table(ring_of_disagrees(int(opts["n"])))
        mixer, init = TransverseField(), new_uniform(cost.n)
    elif problem == "maxcut":
        cost = cost_table(maxcut_instance(load_graph(_require(opts, "graph"))))
        mixer, init = TransverseField(), new_uniform(cost.n)
    elif problem == "coloring":
        instance = graph_coloring_instance(load_graph(_require(opts, "graph")), int(opts["colors"]))
        groups = onehot_groups(instance)
        cost = cost_table(instance)
        mixer = XYRingGroups(tuple(tuple(g) for g in groups))
        init = new_onehot_superposition(cost.n, groups)
    else:
        raise ConfigError(f"Unknown problem '{problem}'")
    if opts.get("mixer"):
        mixer = load_mixer(opts["mixer"])
    return cost, mixer, init


def cmd_qaoa(opts: Dict):
    out = _require(opts, "out")
    cost, mixer, init = _build_instance(opts)
    p = int(opts["p"])
    if p < 0:
        raise ConfigError(f"--p must be >= 0, got {p}")

    if p == 0:
        try:
            ratio = approximation_ratio(init, cost)
        except UndefinedRatioError:
            ratio = None
        result = QaoaResult(expectation_diagonal(init, cost), ratio, QaoaParams((), ()), 0)
        logger.info("p=0: reporting the initial state's expectation without optimization")
    else:
        config = OptimizerConfig(
            restarts=int(opts["restarts"]),
            seed=int(opts["seed"]),
            max_evals=int(opts["max_evals"]),
            symmetric=bool(opts["symmetric"]),
            beta_scale=float(opts["beta_scale"]),
            threads=int(opts["threads"]),
        )
        result = optimize_params(cost, mixer, init, p, config)
    write_result(result, out)


def cmd_landscape(opts: Dict):
    out = _require(opts, "out")
    cost, mixer, init = _build_instance(opts)
    x_low, x_high = opts["x_range"]
    y_low, y_high = opts["y_range"]
    axes = ((float(x_low), float(x_high), int(opts["x_count"])), (float(y_low), float(y_high), int(opts["y_count"])))
    grid = landscape_scan(cost, mixer, init, axes, bool(opts["symmetric"]), float(opts["beta_scale"]),
                          int(opts["threads"]), float(opts["angle_scale"]))
    write_landscape(grid, out)


def cmd_grover(opts: Dict):
    out = _require(opts, "out")
    ns = _require(opts, "ns")
    fit = scaling_fit(ns, int(opts["gamma_scan"]), float(opts["threshold"]), int(opts["target"]),
                      opts.get("max_steps"), int(opts["threads"]), float(opts["mixer_scale"]))
    fit_out = opts.get("fit_out") or Path(out).with_name(Path(out).stem + ".fit.json")
    write_grover(fit, out, fit_out)


def cmd_qubo_build(opts: Dict):
    out = _require(opts, "out")
    graph = load_graph(_require(opts, "graph"))
    options = SpanningTreeOptions(
        objective_B=float(opts["objective_b"]),
        penalty_A=opts.get("penalty_a"),
        delta=opts.get("delta"),
        rosenberg_penalty=opts.get("rosenberg_penalty"),
    )
    q, enc = spanning_tree_qubo(graph, options)
    write_qubo(q, enc, out, opts.get("encoding_out"))


def cmd_qubo_solve(opts: Dict):
    out = _require(opts, "out")
    qubo_path = _require(opts, "qubo")
    q = load_qubo(qubo_path)
    enc = load_encoding(opts.get("encoding") or encoding_path_for(qubo_path))
    if enc.n_vars != q.n_vars:
        raise ConfigError(f"Encoding lists {enc.n_vars} variables but the QUBO has {q.n_vars}")

    if opts["method"] == "brute":
        energy, argmins = brute_force_minimize(q)
        bitstring = argmins[0]
        if len(argmins) > 1:
            logger.info(f"{len(argmins)} assignments tie at the minimum; reporting the first")
    else:
        window = enc.anneal_schedule(int(opts["sweeps"]))
        t_start = window.t_start if opts.get("t_start") is None else float(opts["t_start"])
        t_end = window.t_end if opts.get("t_end") is None else float(opts["t_end"])
        schedule = AnnealSchedule(t_start, t_end, window.sweeps)
        seeds = range(int(opts["seed"]), int(opts["seed"]) + int(opts["restarts"]))
        energy, bitstring, _ = anneal_restarts(q, schedule, seeds, int(opts["threads"]))

    decoding = decode_tree(bitstring, enc)
    if not decoding.feasible:
        logger.warning(f"Best assignment is infeasible: {decoding.violations}")
    write_json(solve_report(energy, bitstring, decoding), out)


HANDLERS = {
    "qaoa": cmd_qaoa,
    "landscape": cmd_landscape,
    "grover": cmd_grover,
    "qubo build": cmd_qubo_build,
    "qubo solve": cmd_qubo_solve,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level or "INFO"), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)
    try:
        opts = resolve_options(args)
        if args.log_level is None:
            level = getattr(logging, str(opts["log_level"]).upper(), None)
            if not isinstance(level, int):
                raise ConfigError(f"Unknown log level '{opts['log_level']}'")
            logging.getLogger().setLevel(level)
        HANDLERS[opts["command"]](opts)
    except (OversizeError, DisconnectedGraphError, NoHitError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INSTANCE
    except (ValueError, KeyError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
