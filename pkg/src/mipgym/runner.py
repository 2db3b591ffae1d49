"""Parallel episode runner and benchmark report tables.

``run_episodes`` plays ``n_episodes`` episodes, one fresh environment
(and engine) per episode, optionally across a thread pool.  Episode
``k`` always uses environment seed ``base_seed + k``, instance ``k`` of
the generator stream, and a policy freshly built for that episode — so
row ``k`` is a pure function of the episode recipe and results are
identical for any thread count.  A failing episode is recorded as an
``error`` row and the run continues.

``report_table`` renders a report as ``csv``, ``md``, or ``json-lines``
with a stable column order, appending per-(family, policy) aggregates:
plain geometric means and the shifted geometric mean of node counts
(shift 10, subtracted back after averaging).
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .engine import TERMINAL_STATUSES
from .env import make_env
from .errors import ConfigurationError
from .generators import GeneratorConfig, InstanceGenerator
from .policies import make_policy

GEOMEAN_SHIFT = 10.0

EPISODE_COLUMNS = (
    "episode",
    "family",
    "policy",
    "seed",
    "status",
    "nodes",
    "lp_iterations",
    "wall_time",
    "gap",
    "total_reward",
    "error",
)

AGGREGATE_COLUMNS = (
    "family",
    "policy",
    "n_episodes",
    "geomean_nodes",
    "shifted_geomean_nodes",
    "geomean_lp_iterations",
    "mean_wall_time",
)


@dataclass
class EpisodeRow:
    episode: int
    family: str
    policy: str
    seed: int
    status: str
    nodes: int
    lp_iterations: int
    wall_time: float
    gap: float
    total_reward: float
    error: str = ""

    def as_dict(self):
        return {name: getattr(self, name) for name in EPISODE_COLUMNS}


@dataclass
class BenchmarkReport:
    """One row per episode, ordered by episode index."""

    rows: list = field(default_factory=list)

    def aggregates(self):
        """Per-(family, policy) geometric means over non-error rows."""
        groups = {}
        for row in self.rows:
            if row.error:
                continue
            groups.setdefault((row.family, row.policy), []).append(row)
        out = []
        for (family, policy), rows in sorted(groups.items()):
            nodes = [row.nodes for row in rows]
            iters = [row.lp_iterations for row in rows]
            out.append(
                {
                    "family": family,
                    "policy": policy,
                    "n_episodes": len(rows),
                    "geomean_nodes": geometric_mean(nodes),
                    "shifted_geomean_nodes": shifted_geometric_mean(nodes),
                    "geomean_lp_iterations": geometric_mean(iters),
                    "mean_wall_time": sum(r.wall_time for r in rows) / len(rows),
                }
            )
        return out


def geometric_mean(values):
    """Plain geometric mean; 0 if any value is 0; nan for empty input."""
    values = list(values)
    if not values:
        return math.nan
    if any(v == 0 for v in values):
        return 0.0
    return math.exp(sum(math.log(v) for v in values) / len(values))


def shifted_geometric_mean(values, shift=GEOMEAN_SHIFT):
    """exp(mean(log(v + shift))) - shift; tempers the effect of outliers."""
    values = list(values)
    if not values:
        return math.nan
    return math.exp(sum(math.log(v + shift) for v in values) / len(values)) - shift


def relative_gap(primal, dual):
    """|primal - dual| / max(1, |primal|, |dual|); 0 when equal (even at
    infinity, e.g. a proven-infeasible instance); inf if only one bound
    is infinite."""
    if primal == dual:
        return 0.0
    if math.isinf(primal) or math.isinf(dual):
        return math.inf
    return abs(primal - dual) / max(1.0, abs(primal), abs(dual))


def _materialize(instances, n_episodes):
    """Resolve the instance source into a per-episode instance getter."""
    if isinstance(instances, GeneratorConfig):
        instances = instances.build()
    if isinstance(instances, InstanceGenerator):
        return instances.generate, instances.family
    pool = list(itertools.islice(iter(instances), n_episodes))
    if len(pool) < n_episodes:
        raise ConfigurationError(
            f"need {n_episodes} instances, got only {len(pool)}"
        )

    def getter(k):
        return pool[k]

    return getter, None


def _family_of(instance, default):
    if default:
        return default
    return instance.metadata.get("family", instance.name)


def run_episodes(
    instances,
    policy="random",
    n_episodes=10,
    n_threads=1,
    task="Branching",
    observation_function_factory=None,
    reward_function_factory=None,
    params=None,
    base_seed=0,
):
    """Play episodes and collect a :class:`BenchmarkReport`.

    ``instances`` may be a generator config, a generator, or any
    iterable of instances (consumed up front).  ``policy`` is a policy
    kind name (Branching task only).  The function factories are
    zero-argument callables invoked fresh per episode (observation and
    reward functions are stateful); the episode's summed reward lands
    in the ``total_reward`` column.
    """
    if n_threads < 1:
        raise ConfigurationError(f"n_threads must be >= 1, got {n_threads}")
    if n_episodes < 0:
        raise ConfigurationError(f"n_episodes must be >= 0, got {n_episodes}")
    if task == "Branching":
        make_policy(policy, seed=0)
    # Validate the env composition once, up front: a bad task name,
    # parameter map, or task/observation pairing is a structural error
    # for the whole run, not a per-episode failure.
    make_env(
        task,
        observation_function=(
            observation_function_factory() if observation_function_factory else None
        ),
        reward_function=(
            reward_function_factory() if reward_function_factory else None
        ),
        params=params,
    )
    get_instance, family_default = _materialize(instances, n_episodes)

    def play(k):
        seed = base_seed + k
        try:
            instance = get_instance(k)
            env = make_env(
                task,
                observation_function=(
                    observation_function_factory()
                    if observation_function_factory
                    else None
                ),
                reward_function=(
                    reward_function_factory() if reward_function_factory else None
                ),
                params=params,
            )
            env.seed(seed)
            chooser = make_policy(policy, seed=seed) if task == "Branching" else None
            obs, action_set, reward, done = env.reset(instance)
            total_reward = reward
            while not done:
                if task == "Branching":
                    action = chooser(env.engine)
                elif task == "Configuring":
                    action = {}
                else:
                    action = None
                obs, action_set, reward, done, info = env.step(action)
                total_reward += reward
            engine = env.engine
            assert engine.status in TERMINAL_STATUSES
            info = env._info()
            return EpisodeRow(
                episode=k,
                family=_family_of(instance, family_default),
                policy=policy if task == "Branching" else task.lower(),
                seed=seed,
                status=info["status"],
                nodes=info["nodes_processed"],
                lp_iterations=info["lp_iterations_total"],
                wall_time=info["wall_time"],
                gap=relative_gap(info["primal_bound"], info["dual_bound"]),
                total_reward=total_reward,
            )
        except Exception as exc:  # noqa: BLE001 - failures become rows
            return EpisodeRow(
                episode=k,
                family=family_default or "unknown",
                policy=policy if task == "Branching" else task.lower(),
                seed=seed,
                status="error",
                nodes=0,
                lp_iterations=0,
                wall_time=0.0,
                gap=math.nan,
                total_reward=math.nan,
                error=f"{type(exc).__name__}: {exc}",
            )

    if n_episodes == 0:
        return BenchmarkReport(rows=[])
    if n_threads == 1:
        rows = [play(k) for k in range(n_episodes)]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(play, range(n_episodes)))
    return BenchmarkReport(rows=rows)


# -- rendering -------------------------------------------------------------


def _format_cell(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _render_csv(report):
    lines = [",".join(EPISODE_COLUMNS)]
    for row in report.rows:
        d = row.as_dict()
        lines.append(
            ",".join(_format_cell(d[c]).replace(",", ";") for c in EPISODE_COLUMNS)
        )
    lines.append("")
    lines.append(",".join(AGGREGATE_COLUMNS))
    for agg in report.aggregates():
        lines.append(",".join(_format_cell(agg[c]) for c in AGGREGATE_COLUMNS))
    return "\n".join(lines) + "\n"


def _md_table(columns, dict_rows):
    lines = [
        "| " + " | ".join(columns) + " |",
        "| " + " | ".join("---" for _ in columns) + " |",
    ]
    for d in dict_rows:
        lines.append("| " + " | ".join(_format_cell(d[c]) for c in columns) + " |")
    return lines


def _render_md(report):
    lines = ["## Episodes", ""]
    lines += _md_table(EPISODE_COLUMNS, [r.as_dict() for r in report.rows])
    lines += ["", "## Aggregates", ""]
    lines += _md_table(AGGREGATE_COLUMNS, report.aggregates())
    return "\n".join(lines) + "\n"


def _render_json_lines(report):
    lines = []
    for row in report.rows:
        payload = {"kind": "episode"}
        payload.update(row.as_dict())
        lines.append(json.dumps(_json_safe(payload)))
    for agg in report.aggregates():
        payload = {"kind": "aggregate"}
        payload.update(agg)
        lines.append(json.dumps(_json_safe(payload)))
    return "\n".join(lines) + "\n"


def _json_safe(mapping):
    out = {}
    for key, value in mapping.items():
        if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
            out[key] = _format_cell(value)
        else:
            out[key] = value
    return out


_RENDERERS = {
    "csv": _render_csv,
    "md": _render_md,
    "json-lines": _render_json_lines,
}


def report_table(report, format="csv"):
    """Render a report in ``csv``, ``md``, or ``json-lines`` form."""
    try:
        renderer = _RENDERERS[format]
    except KeyError:
        raise ConfigurationError(
            f"unknown format {format!r}; expected one of {sorted(_RENDERERS)}"
        ) from None
    return renderer(report)
