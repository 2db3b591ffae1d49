"""Baseline branching policies.

A policy is a callable taking the paused engine and returning a variable
index from the engine's current candidate set.  Policies only read
engine state; none of them advance the search, touch its counters, or
update its pseudocost statistics.

``StrongBranching`` scores every candidate by solving both child LP
relaxations with its own private simplex workspace, each capped at 100
iterations (a documented approximation of exact strong branching that
keeps runtime bounded).  A child proven infeasible counts as a gain of
1e8.  The score is ``max(down_gain, 1e-6) * max(up_gain, 1e-6)`` and
ties break toward the lowest variable index.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError
from .lp import LpStatus, SimplexWorkspace

STRONG_BRANCHING_EPS = 1e-6
INFEASIBLE_CHILD_GAIN = 1e8
CHILD_ITERATION_CAP = 100


class Policy:
    """Base class; subclasses implement ``select``."""

    kind = None

    def __call__(self, engine):
        candidates = engine.candidates()
        return int(self.select(engine, candidates))

    def select(self, engine, candidates):
        raise NotImplementedError


class RandomPolicy(Policy):
    """Uniform choice among the candidates, driven by the policy's seed."""

    kind = "random"

    def __init__(self, seed=0):
        self._rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x9C11)))

    def select(self, engine, candidates):
        return candidates.indices[self._rng.integers(len(candidates))]


class MostInfeasiblePolicy(Policy):
    """Candidate whose LP value is closest to 0.5 fractionality."""

    kind = "most_infeasible"

    def __init__(self, seed=0):
        pass

    def select(self, engine, candidates):
        return candidates.indices[int(np.argmax(candidates.fractionality))]


class PseudocostPolicy(Policy):
    """Product of historical per-unit gains, falling back while unseeded.

    Mirrors the engine's internal rule: while any candidate lacks
    history in some direction, pick the most fractional among those;
    otherwise maximize max(mean_down*f_down, eps) * max(mean_up*f_up, eps).
    """

    kind = "pseudocost"

    def __init__(self, seed=0):
        pass

    def select(self, engine, candidates):
        idx = candidates.indices
        down_count = engine.pseudocost_down_count[idx]
        up_count = engine.pseudocost_up_count[idx]
        fresh = (down_count == 0) | (up_count == 0)
        if fresh.any():
            frac = np.where(fresh, candidates.fractionality, -1.0)
            return idx[int(np.argmax(frac))]
        mean_down = engine.pseudocost_down_sum[idx] / down_count
        mean_up = engine.pseudocost_up_sum[idx] / up_count
        x = engine.current_solution.primal[idx]
        f_down = x - np.floor(x)
        f_up = np.ceil(x) - x
        eps = STRONG_BRANCHING_EPS
        score = np.maximum(mean_down * f_down, eps) * np.maximum(mean_up * f_up, eps)
        return idx[int(np.argmax(score))]


class StrongBranching(Policy):
    """Exhaustive one-level lookahead over both children of each candidate."""

    kind = "strong_branching"

    def __init__(self, seed=0):
        self._workspace = SimplexWorkspace()

    def _child_gain(self, lp, lower, upper, warm, node_objective):
        sol = self._workspace.solve(
            lp.with_bounds(lower, upper), warm=warm, max_iterations=CHILD_ITERATION_CAP
        )
        if sol.status is LpStatus.INFEASIBLE:
            return INFEASIBLE_CHILD_GAIN
        return max(sol.objective - node_objective, 0.0)

    def select(self, engine, candidates):
        lp = engine.relaxation
        node_sol = engine.current_solution
        node_objective = node_sol.objective
        lower, upper = engine.current_bounds()
        best_score = -math.inf
        best = None
        for j in candidates.indices:
            j = int(j)
            value = node_sol.primal[j]
            down_upper = upper.copy()
            down_upper[j] = math.floor(value)
            down = self._child_gain(lp, lower, down_upper, node_sol.basis, node_objective)
            up_lower = lower.copy()
            up_lower[j] = math.ceil(value)
            up = self._child_gain(lp, up_lower, upper, node_sol.basis, node_objective)
            score = max(down, STRONG_BRANCHING_EPS) * max(up, STRONG_BRANCHING_EPS)
            if score > best_score:
                best_score = score
                best = j
        return best


POLICIES = {
    cls.kind: cls
    for cls in (RandomPolicy, MostInfeasiblePolicy, PseudocostPolicy, StrongBranching)
}


def make_policy(kind, seed=0):
    """Build a policy by kind name ∈ {random, most_infeasible, pseudocost,
    strong_branching}."""
    try:
        cls = POLICIES[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown policy {kind!r}; expected one of {sorted(POLICIES)}"
        ) from None
    return cls(seed=seed)
