"""Command-line front end.

Subcommands::

    mipgym generate --family set_cover --params n_rows=50,n_cols=250,density=0.05 \\
        --seed 0 --count 5 --out-dir instances/
    mipgym solve --instance instances/set_cover_s0_i0.lp --trace
    mipgym run --env branching --policy random --family combinatorial_auction \\
        --tier desk --reward -nnodes --seeds 0..9 --threads 4 --out table.csv

Reward expressions follow ``[-]name[*k][+EXPR]`` — terms joined by ``+``,
each an optionally negated metric name with an optional ``*k`` scale,
e.g. ``-nnodes*0.5+isdone``.  Metric names: nnodes, lpiterations,
solvingtime, isdone, primalintegral, dualintegral, primaldualintegral
(the integrals honor ``--opt-ref``).

Exit status is 0 on success and 1 on any structural error (bad files,
unknown families or policies, invalid expressions, incompatible
compositions).
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import rewards
from .engine import Engine
from .errors import (
    ConfigurationError,
    EnvProtocolError,
    GenerationError,
    InvalidActionError,
    ParameterError,
    ParseError,
    StructureError,
)
from .generators import FAMILIES, GeneratorConfig, preset
from .model import read_problem, stats, write_problem
from .observations import CandidateFeatures, NodeBipartite
from .policies import POLICIES
from .runner import report_table, run_episodes

_REWARD_NAMES = {
    "nnodes": rewards.NNodes,
    "lpiterations": rewards.LPIterations,
    "solvingtime": rewards.SolvingTime,
    "isdone": rewards.IsDone,
    "primalintegral": rewards.PrimalIntegral,
    "dualintegral": rewards.DualIntegral,
    "primaldualintegral": rewards.PrimalDualIntegral,
}

_INTEGRAL_NAMES = {"primalintegral", "dualintegral", "primaldualintegral"}

_TERM_RE = re.compile(r"^(-?)([a-z_]+)(?:\*(-?\d+(?:\.\d+)?))?$")

_OBSERVATIONS = {
    "bipartite": NodeBipartite,
    "candidate": CandidateFeatures,
    "none": None,
}

_TASKS = {
    "branching": "Branching",
    "configuring": "Configuring",
    "default": "DefaultSolve",
}


def parse_reward_expr(expr, opt_ref=0.0):
    """Compile a reward expression into a fresh-function factory.

    Grammar: ``[-]name[*k][+EXPR]``.  Returns a zero-argument callable
    building a new reward-function tree on each call.
    """
    terms = []
    for raw in expr.split("+"):
        raw = raw.strip().lower()
        match = _TERM_RE.match(raw)
        if not match:
            raise ConfigurationError(
                f"bad reward term {raw!r}; expected [-]name[*k]"
            )
        sign, name, scale = match.groups()
        if name not in _REWARD_NAMES:
            raise ConfigurationError(
                f"unknown reward {name!r}; expected one of {sorted(_REWARD_NAMES)}"
            )
        factor = float(scale) if scale is not None else 1.0
        if sign:
            factor = -factor
        terms.append((name, factor))

    def build():
        total = None
        for name, factor in terms:
            cls = _REWARD_NAMES[name]
            fn = cls(opt_ref=opt_ref) if name in _INTEGRAL_NAMES else cls()
            fn = factor * fn
            total = fn if total is None else total + fn
        return total

    return build


def _parse_params(text):
    """Parse ``k=v,k=v`` option strings; values become int/float/str."""
    params = {}
    if not text:
        return params
    for pair in text.split(","):
        pair = pair.strip()
        if not pair:
            continue
        if "=" not in pair:
            raise ConfigurationError(f"bad parameter {pair!r}; expected key=value")
        key, value = pair.split("=", 1)
        key = key.strip()
        value = value.strip()
        try:
            parsed = int(value)
        except ValueError:
            try:
                parsed = float(value)
            except ValueError:
                parsed = value
        params[key] = parsed
    return params


def _parse_seed_range(text):
    """``A..B`` inclusive, or a single ``N`` → (base_seed, n_episodes)."""
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigurationError(f"bad seed range {text!r}") from None
    if lo < 0:
        raise ConfigurationError(f"seeds must be non-negative, got {text!r}")
    if hi < lo:
        raise ConfigurationError(f"empty seed range {text!r}")
    return lo, hi - lo + 1


def _cmd_generate(args):
    params = _parse_params(args.params)
    if params:
        config = GeneratorConfig(family=args.family, params=params, seed=args.seed)
    else:
        config = preset(args.family, args.tier, seed=args.seed)
    generator = config.build()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index in range(args.count):
        instance = generator.generate(index)
        for suffix in (".lp", ".json"):
            path = out_dir / (instance.name + suffix)
            write_problem(instance, path)
        print(out_dir / instance.name)
    return 0


def _cmd_solve(args):
    instance = read_problem(args.instance)
    shape = stats(instance)
    print(
        f"instance: {instance.name} ({shape.n_vars} vars, "
        f"{shape.n_constraints} constraints, {instance.sense})"
    )
    engine = Engine(params=_parse_params(args.params))
    engine.start(instance)
    engine.autosolve()
    if args.trace:
        for event in engine.events:
            print(
                f"[{event.wall_time:9.4f}s] {event.kind:<12} "
                f"node={event.node if event.node is not None else '-':<6} "
                f"processed={event.nodes_processed:<6} "
                f"iters={event.lp_iterations_total:<8} "
                f"primal={engine.to_user_objective(event.primal_bound):<14.6g} "
                f"dual={engine.to_user_objective(event.dual_bound):.6g}"
            )
    print(f"status: {engine.status.value}")
    incumbent = engine.incumbent_objective()
    print(f"objective: {incumbent if incumbent is not None else 'none'}")
    print(f"dual bound: {engine.to_user_objective(engine.dual_bound)}")
    print(
        f"nodes: {engine.nodes_processed}, lp iterations: "
        f"{engine.lp_iterations_total}, wall time: {engine.wall_time:.3f}s"
    )
    return 0


def _cmd_run(args):
    base_seed, n_episodes = _parse_seed_range(args.seeds)
    params = _parse_params(args.params)
    if params:
        config = GeneratorConfig(family=args.family, params=params, seed=args.gen_seed)
    else:
        config = preset(args.family, args.tier, seed=args.gen_seed)
    obs_cls = _OBSERVATIONS[args.obs]
    reward_factory = (
        parse_reward_expr(args.reward, opt_ref=args.opt_ref) if args.reward else None
    )
    report = run_episodes(
        config,
        policy=args.policy,
        n_episodes=n_episodes,
        n_threads=args.threads,
        task=_TASKS[args.env],
        observation_function_factory=obs_cls,
        reward_function_factory=reward_factory,
        base_seed=base_seed,
    )
    text = report_table(report, format=_resolve_format(args))
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(report.rows)} episode rows to {args.out}")
    else:
        print(text, end="")
    failures = [row for row in report.rows if row.error]
    for row in failures:
        print(f"episode {row.episode} failed: {row.error}", file=sys.stderr)
    return 0


def _resolve_format(args):
    if args.format:
        return args.format
    if args.out:
        suffix = Path(args.out).suffix.lower()
        if suffix == ".md":
            return "md"
        if suffix in (".jsonl", ".ndjson", ".json"):
            return "json-lines"
    return "csv"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mipgym",
        description="Generate MIP instances, solve them exactly, and benchmark "
        "branching policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write instances from a seeded family")
    gen.add_argument("--family", required=True, choices=sorted(FAMILIES))
    gen.add_argument("--params", default="", help="comma-separated key=value pairs")
    gen.add_argument("--tier", default="desk", help="preset tier when --params empty")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--out-dir", required=True)

    solve = sub.add_parser("solve", help="solve one instance file exactly")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--trace", action="store_true", help="print the event log")
    solve.add_argument(
        "--params", help="solver parameters, e.g. 'branching_rule=random,node_limit=50'"
    )

    run = sub.add_parser("run", help="benchmark episodes in parallel")
    run.add_argument("--env", default="branching", choices=sorted(_TASKS))
    run.add_argument("--obs", default="none", choices=sorted(_OBSERVATIONS))
    run.add_argument("--reward", default=None, help="[-]name[*k][+EXPR]")
    run.add_argument("--opt-ref", type=float, default=0.0)
    run.add_argument("--policy", default="random", choices=sorted(POLICIES))
    run.add_argument("--seeds", default="0..9", help="A..B inclusive, or one seed")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--family", default="combinatorial_auction", choices=sorted(FAMILIES))
    run.add_argument("--params", default="", help="family params; else --tier preset")
    run.add_argument("--tier", default="desk")
    run.add_argument("--gen-seed", type=int, default=0)
    run.add_argument("--out", default=None)
    run.add_argument("--format", default=None, choices=["csv", "md", "json-lines"])
    return parser


_COMMANDS = {"generate": _cmd_generate, "solve": _cmd_solve, "run": _cmd_run}

_STRUCTURAL_ERRORS = (
    ConfigurationError,
    EnvProtocolError,
    GenerationError,
    InvalidActionError,
    ParameterError,
    ParseError,
    StructureError,
    FileNotFoundError,
    ValueError,
)


def _join_reward_value(argv):
    """Fold ``--reward -nnodes`` into ``--reward=-nnodes`` so argparse
    does not mistake a leading-minus expression for an option flag."""
    out = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token == "--reward" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--reward={argv[i + 1]}")
            skip = True
        else:
            out.append(token)
    return out


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(_join_reward_value(list(argv)))
    try:
        return _COMMANDS[args.command](args)
    except _STRUCTURAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
