"""Branch-and-bound engine with pausable branching decisions.

The engine solves LP relaxations exactly (no cuts, no presolve) and walks
the search tree node by node.  Control is inverted: :meth:`Engine.start`
processes nodes until the first fractional LP optimum, then pauses in
``AWAITING_BRANCH`` so the caller can pick the branching variable via
:meth:`Engine.branch`.  :meth:`Engine.autosolve` instead runs to a terminal
status using the configured internal branching rule.

All internal objective values, bounds, and events are in minimization
form; maximization instances are negated on entry and reporting layers
convert back (see :meth:`Engine.to_user_objective`).

Conventions that tests rely on:

* ``nodes_processed`` counts nodes whose LP was solved; nodes discarded by
  their inherited bound before any LP work are recorded as pruned with
  ``before_solve`` set, so for completed searches
  ``nodes_processed == 1 + 2 * branchings - pruned_before_solve``.
* Every event carries a snapshot of the counters and global bounds; the
  global dual bound is non-decreasing event to event.
* All tie-breaks use the lowest variable index / lowest node id, making
  runs bit-for-bit reproducible for a fixed (instance, seed, params,
  action sequence).
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EnvProtocolError, InvalidActionError, ParameterError
from .lp import (
    INFINITY,
    LpStatus,
    SimplexWorkspace,
    lp_feasibility_residual,
)
from .model import MAXIMIZE

INT_TOL = 1e-6
PRUNE_EPS = 1e-9
FEAS_TOL = 1e-6
PSEUDOCOST_EPS = 1e-6


class EngineStatus(Enum):
    RUNNING = "running"
    AWAITING_BRANCH = "awaiting_branch"
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT_REACHED = "limit_reached"


TERMINAL_STATUSES = frozenset(
    {
        EngineStatus.OPTIMAL,
        EngineStatus.INFEASIBLE,
        EngineStatus.UNBOUNDED,
        EngineStatus.LIMIT_REACHED,
    }
)

#: Parameter domains accepted by :meth:`Engine.set_params`.  This is also
#: the action space of the Configuring environment.
PARAMETER_SPACE = {
    "node_selection": ("best_bound", "dfs"),
    "branching_rule": ("pseudocost", "most_infeasible", "random"),
    "rounding_heuristic": ("on", "off"),
    "node_limit": "int >= 1, or None",
    "time_limit": "seconds > 0, or None",
}


@dataclass
class Limits:
    node_limit: int | None = None
    lp_iteration_limit: int | None = None
    time_limit: float | None = None


@dataclass
class SearchNode:
    node_id: int
    parent: "SearchNode | None"
    depth: int
    bound_changes: tuple  # ((var, "lower"|"upper", value), ...)
    dual_bound: float  # inherited from parent until own LP is solved
    basis: object = None  # warm-start basis from the parent LP

    def bounds(self, root_lower, root_upper):
        """Effective variable bounds at this node (root bounds + path changes)."""
        lower = root_lower.copy()
        upper = root_upper.copy()
        chain = []
        node = self
        while node is not None:
            chain.append(node)
            node = node.parent
        for member in reversed(chain):
            for var, side, value in member.bound_changes:
                if side == "lower":
                    lower[var] = max(lower[var], value)
                else:
                    upper[var] = min(upper[var], value)
        return lower, upper


@dataclass
class BranchCandidateSet:
    """Fractional integer-kind variables at the paused node, ascending index."""

    indices: np.ndarray
    fractionality: np.ndarray

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return bool(np.any(self.indices == int(j)))


@dataclass
class EngineEvent:
    """One structured record in the engine's event log.

    ``data`` is kind-specific; the remaining fields snapshot the global
    counters at emission time (bounds in minimization form).
    """

    kind: str  # node_solved | pruned | incumbent | branch | terminal
    node: int | None
    data: dict
    nodes_processed: int
    lp_iterations_total: int
    nodes_created: int
    wall_time: float
    primal_bound: float
    dual_bound: float

    def to_dict(self):
        return {
            "kind": self.kind,
            "node": self.node,
            "data": dict(self.data),
            "nodes_processed": self.nodes_processed,
            "lp_iterations_total": self.lp_iterations_total,
            "nodes_created": self.nodes_created,
            "wall_time": self.wall_time,
            "primal_bound": self.primal_bound,
            "dual_bound": self.dual_bound,
        }


def _validate_param(name, value):
    if name not in PARAMETER_SPACE:
        raise ParameterError(f"unknown parameter {name!r}")
    if name in ("node_selection", "branching_rule"):
        if value not in PARAMETER_SPACE[name]:
            raise ParameterError(
                f"{name} must be one of {PARAMETER_SPACE[name]}, got {value!r}"
            )
        return value
    if name == "rounding_heuristic":
        if isinstance(value, bool):
            return value
        if value in ("on", "off"):
            return value == "on"
        raise ParameterError(
            f"rounding_heuristic must be 'on', 'off', or a bool, got {value!r}"
        )
    if name == "node_limit":
        if value is None:
            return None
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
            raise ParameterError(f"node_limit must be a positive integer, got {value!r}")
        return int(value)
    if name == "time_limit":
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
            raise ParameterError(f"time_limit must be a positive number, got {value!r}")
        if not value > 0:
            raise ParameterError(f"time_limit must be a positive number, got {value!r}")
        return float(value)
    raise AssertionError(name)


class Engine:
    """One engine instance drives exactly one episode on one instance."""

    def __init__(self, params=None):
        self._params = {
            "node_selection": "best_bound",
            "branching_rule": "pseudocost",
            "rounding_heuristic": True,
            "node_limit": None,
            "time_limit": None,
        }
        self.status = EngineStatus.RUNNING
        self._started = False
        self.instance = None
        self.events = []
        self.nodes_processed = 0
        self.lp_iterations_total = 0
        self.nodes_created = 0
        self.primal_bound = INFINITY
        self.dual_bound = -INFINITY
        self.incumbent = None
        self.current_node = None
        self.current_solution = None
        self._candidates = None
        self._current_bounds = None
        self._frontier = []
        self._wall_accum = 0.0
        self._t_enter = None
        if params:
            self.set_params(params)

    # -- configuration ----------------------------------------------------

    def set_params(self, params=None, **kwargs):
        """Apply a parameter map; only allowed before start()."""
        merged = dict(params or {})
        merged.update(kwargs)
        if self._started and merged:
            raise EnvProtocolError("set_params must be called before start()")
        validated = {k: _validate_param(k, v) for k, v in merged.items()}
        self._params.update(validated)

    @property
    def params(self):
        return dict(self._params)

    # -- reporting helpers ------------------------------------------------

    @property
    def sense_sign(self):
        """+1 for minimize, -1 for maximize (identity on internal values)."""
        return -1.0 if (self.instance and self.instance.sense == MAXIMIZE) else 1.0

    def to_user_objective(self, value):
        """Convert an internal (minimization) objective to the user's sense."""
        return self.sense_sign * value

    @property
    def wall_time(self):
        if self._t_enter is not None:
            return self._wall_accum + (time.perf_counter() - self._t_enter)
        return self._wall_accum

    def incumbent_objective(self):
        """Incumbent objective in the user's original sense, or None."""
        if self.incumbent is None:
            return None
        return self.to_user_objective(self.incumbent[1])

    def candidates(self):
        if self.status is not EngineStatus.AWAITING_BRANCH:
            raise EnvProtocolError(
                f"candidates() requires AWAITING_BRANCH, engine is {self.status.value}"
            )
        return self._candidates

    def current_bounds(self):
        """Variable bounds at the paused node (copies)."""
        if self.status is not EngineStatus.AWAITING_BRANCH:
            raise EnvProtocolError(
                f"current_bounds() requires AWAITING_BRANCH, engine is {self.status.value}"
            )
        lower, upper = self._current_bounds
        return lower.copy(), upper.copy()

    # -- lifecycle --------------------------------------------------------

    def start(self, instance, limits=None, seed=0):
        """Solve the root and run to the first branching decision or a terminal."""
        if self._started:
            raise EnvProtocolError("engine already started; use one engine per episode")
        instance.validate()
        seed = int(seed)
        if seed < 0:
            raise ParameterError("seed must be a non-negative integer")
        self._started = True
        self.instance = instance
        self.relaxation = instance.to_linear_program()
        self.int_indices = instance.integer_indices()
        self.root_lower = self.relaxation.col_lower.copy()
        self.root_upper = self.relaxation.col_upper.copy()
        self.workspace = SimplexWorkspace()
        self.rng = np.random.default_rng(np.random.SeedSequence((seed, 0xB7A2C5)))
        limits = limits or Limits()
        self._node_limit = (
            self._params["node_limit"]
            if self._params["node_limit"] is not None
            else limits.node_limit
        )
        self._time_limit = (
            self._params["time_limit"]
            if self._params["time_limit"] is not None
            else limits.time_limit
        )
        self._lp_iteration_limit = limits.lp_iteration_limit
        n = instance.n_vars
        self.pseudocost_up_sum = np.zeros(n)
        self.pseudocost_up_count = np.zeros(n, dtype=int)
        self.pseudocost_down_sum = np.zeros(n)
        self.pseudocost_down_count = np.zeros(n, dtype=int)
        self.times_branched = np.zeros(n, dtype=int)
        self._pending_pseudocost = {}
        self._next_node_id = 1
        self.nodes_created = 1
        root = SearchNode(0, None, 0, (), -INFINITY, None)
        self._push(root)
        self._enter()
        try:
            self._drive(pause_for_branch=True)
        finally:
            self._leave()
        return self

    def branch(self, variable):
        """Split the paused node on ``variable`` and continue processing."""
        if self.status is not EngineStatus.AWAITING_BRANCH:
            raise EnvProtocolError(
                f"branch() requires AWAITING_BRANCH, engine is {self.status.value}"
            )
        j = int(variable)
        if j not in self._candidates:
            raise InvalidActionError(
                f"variable {j} is not in the branching candidate set "
                f"{self._candidates.indices.tolist()}"
            )
        self._enter()
        try:
            self._apply_branch(j)
            self._drive(pause_for_branch=True)
        finally:
            self._leave()
        return self

    def autosolve(self):
        """Run to a terminal status using the internal branching rule."""
        if not self._started:
            raise EnvProtocolError("autosolve() requires start() first")
        if self.status in TERMINAL_STATUSES:
            return self
        self._enter()
        try:
            self._drive(pause_for_branch=False)
        finally:
            self._leave()
        return self

    # -- timing -----------------------------------------------------------

    def _enter(self):
        self._t_enter = time.perf_counter()

    def _leave(self):
        self._wall_accum += time.perf_counter() - self._t_enter
        self._t_enter = None

    # -- frontier ---------------------------------------------------------

    def _push(self, node):
        if self._params["node_selection"] == "dfs":
            self._frontier.append(node)
        else:
            heapq.heappush(self._frontier, (node.dual_bound, node.node_id, node))

    def _pop(self):
        if self._params["node_selection"] == "dfs":
            return self._frontier.pop()
        return heapq.heappop(self._frontier)[2]

    def _open_minimum(self):
        """Lowest dual bound among open (frontier + paused) nodes."""
        best = INFINITY
        if self._params["node_selection"] == "dfs":
            for node in self._frontier:
                best = min(best, node.dual_bound)
        elif self._frontier:
            best = self._frontier[0][0]
        if self.current_node is not None:
            best = min(best, self.current_node.dual_bound)
        return best

    # -- events -----------------------------------------------------------

    def _refresh_dual_bound(self):
        proven = min(self._open_minimum(), self.primal_bound)
        self.dual_bound = max(self.dual_bound, proven)

    def _emit(self, kind, node_id, **data):
        self._refresh_dual_bound()
        self.events.append(
            EngineEvent(
                kind=kind,
                node=node_id,
                data=data,
                nodes_processed=self.nodes_processed,
                lp_iterations_total=self.lp_iterations_total,
                nodes_created=self.nodes_created,
                wall_time=self.wall_time,
                primal_bound=self.primal_bound,
                dual_bound=self.dual_bound,
            )
        )

    # -- search loop ------------------------------------------------------

    def _drive(self, pause_for_branch):
        while True:
            if self.status in TERMINAL_STATUSES:
                return
            if self.status is EngineStatus.AWAITING_BRANCH:
                if pause_for_branch:
                    return
                self._apply_branch(self._internal_choice())
                continue
            if self.nodes_processed > 0 and self._hit_limit():
                self._finish(EngineStatus.LIMIT_REACHED)
                return
            if not self._frontier:
                done = (
                    EngineStatus.OPTIMAL
                    if self.incumbent is not None
                    else EngineStatus.INFEASIBLE
                )
                self._finish(done)
                return
            node = self._pop()
            if node.dual_bound >= self.primal_bound - PRUNE_EPS:
                self._emit(
                    "pruned", node.node_id, reason="bound", before_solve=True
                )
                continue
            self._process_node(node)

    def _hit_limit(self):
        if self._node_limit is not None and self.nodes_processed >= self._node_limit:
            return True
        if self._time_limit is not None and self.wall_time >= self._time_limit:
            return True
        return False

    def _process_node(self, node):
        if self._lp_iteration_limit is not None:
            remaining = self._lp_iteration_limit - self.lp_iterations_total
            if remaining <= 0:
                self._finish(EngineStatus.LIMIT_REACHED)
                return
            cap = int(remaining)
        else:
            cap = None
        lower, upper = node.bounds(self.root_lower, self.root_upper)
        lp = self.relaxation.with_bounds(lower, upper)
        warm = node.basis.copy() if node.basis is not None else None
        sol = self.workspace.solve(lp, warm=warm, max_iterations=cap)
        self.nodes_processed += 1
        self.lp_iterations_total += sol.iterations
        raw_objective = sol.objective

        if sol.status is LpStatus.OPTIMAL:
            node.dual_bound = max(node.dual_bound, raw_objective)
        elif sol.status is LpStatus.INFEASIBLE:
            node.dual_bound = INFINITY
        self._settle_pseudocost(node, sol)
        self.current_node = node  # open until fathomed or branched
        self._emit(
            "node_solved",
            node.node_id,
            depth=node.depth,
            lp_status=sol.status.value,
            objective=raw_objective,
            lp_iterations=sol.iterations,
        )

        if sol.status is LpStatus.ITERATION_LIMIT:
            self.current_node = None
            self._finish(EngineStatus.LIMIT_REACHED)
            return
        if sol.status is LpStatus.UNBOUNDED:
            self.current_node = None
            self._finish(EngineStatus.UNBOUNDED)
            return
        if sol.status is LpStatus.INFEASIBLE:
            self.current_node = None
            self._emit("pruned", node.node_id, reason="infeasible", before_solve=False)
            return

        x = sol.primal
        if self.int_indices.size:
            vals = x[self.int_indices]
            frac = vals - np.floor(vals)
            dist = np.minimum(frac, 1.0 - frac)
            fractional = dist > INT_TOL
        else:
            fractional = np.zeros(0, dtype=bool)

        if not fractional.any():
            if raw_objective < self.primal_bound:
                self._set_incumbent(x, raw_objective, "lp")
            self.current_node = None
            self._emit("pruned", node.node_id, reason="integral", before_solve=False)
            return

        if node.dual_bound >= self.primal_bound - PRUNE_EPS:
            self.current_node = None
            self._emit("pruned", node.node_id, reason="bound", before_solve=False)
            return

        if self._params["rounding_heuristic"]:
            self._try_rounding(x)
            if node.dual_bound >= self.primal_bound - PRUNE_EPS:
                self.current_node = None
                self._emit("pruned", node.node_id, reason="bound", before_solve=False)
                return

        idx = self.int_indices[fractional]
        self.current_solution = sol
        self._current_bounds = (lower, upper)
        self._candidates = BranchCandidateSet(
            indices=idx.copy(), fractionality=dist[fractional].copy()
        )
        self.status = EngineStatus.AWAITING_BRANCH

    def _try_rounding(self, x):
        """Round integer variables of the node LP optimum; accept if feasible."""
        rounded = x.copy()
        ints = self.int_indices
        # round half up (not banker's rounding): 0.5-valued binaries go to 1
        rounded[ints] = np.clip(
            np.floor(rounded[ints] + 0.5), self.root_lower[ints], self.root_upper[ints]
        )
        if lp_feasibility_residual(self.relaxation, rounded) > FEAS_TOL:
            return
        objective = float(np.dot(self.relaxation.objective, rounded))
        if objective < self.primal_bound:
            self._set_incumbent(rounded, objective, "rounding")

    def _set_incumbent(self, x, objective, source):
        self.incumbent = (x.copy(), float(objective))
        self.primal_bound = float(objective)
        self._emit(
            "incumbent",
            self.current_node.node_id if self.current_node else None,
            objective=float(objective),
            source=source,
        )

    def _settle_pseudocost(self, node, sol):
        pending = self._pending_pseudocost.pop(node.node_id, None)
        if pending is None or sol.status is not LpStatus.OPTIMAL:
            return
        var, direction, distance, parent_objective = pending
        if distance <= 0:
            return
        gain = max(sol.objective - parent_objective, 0.0)
        if direction == "down":
            self.pseudocost_down_sum[var] += gain / distance
            self.pseudocost_down_count[var] += 1
        else:
            self.pseudocost_up_sum[var] += gain / distance
            self.pseudocost_up_count[var] += 1

    def _apply_branch(self, j):
        node = self.current_node
        sol = self.current_solution
        value = float(sol.primal[j])
        floor = float(np.floor(value))
        ceil = float(np.ceil(value))
        basis = sol.basis.copy() if sol.basis is not None else None
        down = SearchNode(
            self._next_node_id, node, node.depth + 1,
            ((j, "upper", floor),), node.dual_bound, basis,
        )
        up = SearchNode(
            self._next_node_id + 1, node, node.depth + 1,
            ((j, "lower", ceil),), node.dual_bound, basis,
        )
        self._next_node_id += 2
        self.nodes_created += 2
        self.times_branched[j] += 1
        parent_objective = sol.objective
        self._pending_pseudocost[down.node_id] = (j, "down", value - floor, parent_objective)
        self._pending_pseudocost[up.node_id] = (j, "up", ceil - value, parent_objective)
        # push order makes dfs explore the down child first
        self._push(up)
        self._push(down)
        self.status = EngineStatus.RUNNING
        self.current_solution = None
        self._candidates = None
        self._current_bounds = None
        branched_id = node.node_id
        self.current_node = None
        self._emit(
            "branch",
            branched_id,
            variable=int(j),
            value=value,
            down_child=down.node_id,
            up_child=up.node_id,
        )

    def _internal_choice(self):
        rule = self._params["branching_rule"]
        cand = self._candidates
        if rule == "random":
            return int(self.rng.choice(cand.indices))
        if rule == "most_infeasible":
            return int(cand.indices[int(np.argmax(cand.fractionality))])
        # pseudocost product rule; uninitialized candidates are branched
        # first (most-infeasible among them) to build up history
        idx = cand.indices
        down_count = self.pseudocost_down_count[idx]
        up_count = self.pseudocost_up_count[idx]
        uninitialized = (down_count == 0) | (up_count == 0)
        if uninitialized.any():
            sub = np.flatnonzero(uninitialized)
            pick = sub[int(np.argmax(cand.fractionality[sub]))]
            return int(idx[pick])
        x = self.current_solution.primal[idx]
        f_down = x - np.floor(x)
        f_up = np.ceil(x) - x
        down_mean = self.pseudocost_down_sum[idx] / down_count
        up_mean = self.pseudocost_up_sum[idx] / up_count
        score = np.maximum(down_mean * f_down, PSEUDOCOST_EPS) * np.maximum(
            up_mean * f_up, PSEUDOCOST_EPS
        )
        return int(idx[int(np.argmax(score))])

    def _finish(self, status):
        self.status = status
        self.current_node = None
        self.current_solution = None
        self._candidates = None
        self._current_bounds = None
        if status is EngineStatus.OPTIMAL:
            self.dual_bound = self.primal_bound
        elif status is EngineStatus.INFEASIBLE:
            self.primal_bound = INFINITY
            self.dual_bound = INFINITY
        self._emit("terminal", None, status=status.value)


def solve_instance(instance, params=None, limits=None, seed=0):
    """One-call convenience: start + autosolve; returns the finished engine."""
    engine = Engine(params)
    engine.start(instance, limits=limits, seed=seed)
    engine.autosolve()
    return engine
