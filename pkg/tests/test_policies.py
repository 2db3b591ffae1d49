"""Tests for the baseline branching policies.

The strong-branching fixture is verified against child LPs solved by
hand (and re-derived with direct simplex calls in the test), and all
policies are checked for the membership contract — the returned action
is always in the candidate set — plus end-to-end solve exactness.
"""

import math

import numpy as np
import pytest

from mipgym.engine import Engine, EngineStatus
from mipgym.errors import ConfigurationError
from mipgym.lp import GE, LE, LpStatus, solve_lp
from mipgym.model import BINARY, INTEGER, MAXIMIZE, Constraint, MipInstance, Variable
from mipgym.policies import (
    CHILD_ITERATION_CAP,
    INFEASIBLE_CHILD_GAIN,
    POLICIES,
    STRONG_BRANCHING_EPS,
    MostInfeasiblePolicy,
    PseudocostPolicy,
    RandomPolicy,
    StrongBranching,
    make_policy,
)

from oracles import brute_force_binary, random_binary_mip

BRANCHY_SEEDS = (0, 1, 4, 6, 8, 9)


def paused(instance, params=None, seed=0):
    engine = Engine(params=params)
    engine.start(instance, seed=seed)
    assert engine.status is EngineStatus.AWAITING_BRANCH
    return engine


def two_fractional_fixture():
    """max x + 2y, x + y <= 1.5, -x + y <= 0.3, binaries.

    Unique root LP optimum (0.6, 0.9): both variables fractional.
    """
    return MipInstance(
        name="twofrac",
        sense=MAXIMIZE,
        variables=(
            Variable("x", 0.0, 1.0, BINARY, 1.0),
            Variable("y", 0.0, 1.0, BINARY, 2.0),
        ),
        constraints=(
            Constraint("cap", ((0, 1.0), (1, 1.0)), LE, 1.5),
            Constraint("diff", ((0, -1.0), (1, 1.0)), LE, 0.3),
        ),
    )


def pinned_fixture(values, kinds=None):
    """Equality rows pin each variable to the given fractional value."""
    n = len(values)
    kinds = kinds or [INTEGER] * n
    return MipInstance(
        name="pinned",
        variables=tuple(
            Variable(f"v{j}", 0.0, 10.0, kinds[j], 1.0) for j in range(n)
        ),
        constraints=tuple(
            Constraint(f"pin{j}", ((j, 1.0),), GE, float(values[j]))
            for j in range(n)
        ),
    )


class TestMembershipContract:
    @pytest.mark.parametrize("kind", sorted(POLICIES))
    @pytest.mark.parametrize("seed", BRANCHY_SEEDS)
    def test_action_always_in_candidate_set(self, kind, seed):
        engine = paused(random_binary_mip(seed))
        policy = make_policy(kind, seed=seed)
        while engine.status is EngineStatus.AWAITING_BRANCH:
            candidates = engine.candidates()
            action = policy(engine)
            assert action in candidates
            engine.branch(action)

    @pytest.mark.parametrize("kind", sorted(POLICIES))
    def test_single_candidate_returned(self, kind):
        engine = paused(pinned_fixture([2.3]))
        assert len(engine.candidates()) == 1
        assert make_policy(kind)(engine) == 0


class TestMostInfeasible:
    def test_argmax_fractionality(self):
        engine = paused(pinned_fixture([2.1, 2.6, 3.0, 1.5]))
        # fractionalities: 0.1, 0.4, 0 (not candidate), 0.5
        assert MostInfeasiblePolicy()(engine) == 3

    def test_lowest_index_tie(self):
        engine = paused(pinned_fixture([2.3, 1.5, 3.5]))
        # 0.5 ties between indices 1 and 2 -> lowest wins.
        assert MostInfeasiblePolicy()(engine) == 1


class TestRandom:
    def test_deterministic_per_seed(self):
        instance = random_binary_mip(0)
        picks = []
        for _ in range(2):
            engine = paused(instance)
            policy = RandomPolicy(seed=5)
            trail = []
            while engine.status is EngineStatus.AWAITING_BRANCH:
                action = policy(engine)
                trail.append(action)
                engine.branch(action)
            picks.append(trail)
        assert picks[0] == picks[1]

    def test_seeds_differ_somewhere(self):
        engine_states = [pinned_fixture([1.5, 2.5, 3.5, 4.5, 5.5])] * 1
        seen = set()
        for seed in range(8):
            engine = paused(engine_states[0])
            seen.add(RandomPolicy(seed=seed)(engine))
        assert len(seen) > 1


class TestPseudocost:
    def test_fresh_history_falls_back_to_most_fractional(self):
        engine = paused(pinned_fixture([2.1, 2.6]))
        assert PseudocostPolicy()(engine) == MostInfeasiblePolicy()(engine)

    def test_seeded_history_uses_product_scores(self):
        engine = paused(random_binary_mip(0))
        policy = PseudocostPolicy()
        while engine.status is EngineStatus.AWAITING_BRANCH:
            candidates = engine.candidates()
            idx = candidates.indices
            down = engine.pseudocost_down_count[idx]
            up = engine.pseudocost_up_count[idx]
            action = policy(engine)
            if ((down == 0) | (up == 0)).any():
                fresh = (down == 0) | (up == 0)
                frac = np.where(fresh, candidates.fractionality, -1.0)
                assert action == idx[int(np.argmax(frac))]
            else:
                x = engine.current_solution.primal[idx]
                score = np.maximum(
                    engine.pseudocost_down_sum[idx] / down * (x - np.floor(x)),
                    STRONG_BRANCHING_EPS,
                ) * np.maximum(
                    engine.pseudocost_up_sum[idx] / up * (np.ceil(x) - x),
                    STRONG_BRANCHING_EPS,
                )
                assert action == idx[int(np.argmax(score))]
            engine.branch(action)


class TestStrongBranching:
    def test_hand_computed_fixture(self):
        """Child gains: x -> (1.8, 0.4); y -> (1.4, infeasible-up)."""
        engine = paused(two_fractional_fixture())
        np.testing.assert_allclose(
            engine.current_solution.primal, [0.6, 0.9], atol=1e-9
        )
        assert list(engine.candidates().indices) == [0, 1]
        assert StrongBranching()(engine) == 1

    def test_hand_fixture_scores_match_direct_lp(self):
        engine = paused(two_fractional_fixture())
        lp = engine.relaxation
        node_obj = engine.current_solution.objective
        lower, upper = engine.current_bounds()
        scores = {}
        for j, value in ((0, 0.6), (1, 0.9)):
            gains = []
            for direction in ("down", "up"):
                lo, hi = lower.copy(), upper.copy()
                if direction == "down":
                    hi[j] = math.floor(value)
                else:
                    lo[j] = math.ceil(value)
                sol = solve_lp(lp.with_bounds(lo, hi))
                if sol.status is LpStatus.INFEASIBLE:
                    gains.append(INFEASIBLE_CHILD_GAIN)
                else:
                    gains.append(max(sol.objective - node_obj, 0.0))
            scores[j] = max(gains[0], STRONG_BRANCHING_EPS) * max(
                gains[1], STRONG_BRANCHING_EPS
            )
        # Down/up gains computed by hand from the geometry.
        assert scores[0] == pytest.approx(1.8 * 0.4, abs=1e-6)
        assert scores[1] == pytest.approx(1.4 * INFEASIBLE_CHILD_GAIN, rel=1e-6)
        assert max(scores, key=scores.get) == StrongBranching()(engine)

    def test_both_children_infeasible_preferred(self):
        # y appears first so the doubly-infeasible x (index 1) can only
        # win on score, not on tie-breaking.
        instance = MipInstance(
            name="deadend",
            variables=(
                Variable("y", 0.0, 1.0, INTEGER, 1.0),
                Variable("x", 0.0, 1.0, INTEGER, 1.0),
            ),
            constraints=(
                Constraint("ylow", ((0, 1.0),), GE, 0.5),
                Constraint("xlow", ((1, 1.0),), GE, 0.4),
                Constraint("xhigh", ((1, 1.0),), LE, 0.6),
            ),
        )
        engine = paused(instance)
        assert sorted(engine.candidates().indices) == [0, 1]
        assert StrongBranching()(engine) == 1

    def test_engine_state_untouched(self):
        engine = paused(random_binary_mip(0))
        before = (
            engine.nodes_processed,
            engine.lp_iterations_total,
            engine.nodes_created,
            len(engine.events),
            engine.pseudocost_down_sum.copy().tolist(),
            engine.pseudocost_up_sum.copy().tolist(),
            engine.times_branched.copy().tolist(),
        )
        action = StrongBranching()(engine)
        after = (
            engine.nodes_processed,
            engine.lp_iterations_total,
            engine.nodes_created,
            len(engine.events),
            engine.pseudocost_down_sum.tolist(),
            engine.pseudocost_up_sum.tolist(),
            engine.times_branched.tolist(),
        )
        assert before == after
        assert engine.status is EngineStatus.AWAITING_BRANCH
        engine.branch(action)  # the engine still works afterwards

    def test_iteration_cap_is_plumbed(self):
        assert CHILD_ITERATION_CAP == 100


class TestEndToEndExactness:
    @pytest.mark.parametrize("kind", sorted(POLICIES))
    def test_policy_driven_search_is_exact(self, kind):
        for seed in BRANCHY_SEEDS[:4]:
            instance = random_binary_mip(seed)
            expected = brute_force_binary(instance)
            engine = paused(instance, seed=seed)
            policy = make_policy(kind, seed=seed)
            while engine.status is EngineStatus.AWAITING_BRANCH:
                engine.branch(policy(engine))
            if expected is None:
                assert engine.status is EngineStatus.INFEASIBLE
            else:
                assert engine.status is EngineStatus.OPTIMAL
                assert engine.incumbent_objective() == pytest.approx(
                    expected, abs=1e-6
                )


class TestFactory:
    def test_known_kinds(self):
        assert set(POLICIES) == {
            "random",
            "most_infeasible",
            "pseudocost",
            "strong_branching",
        }
        for kind in POLICIES:
            assert make_policy(kind, seed=1).kind == kind

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            make_policy("alphabetical")
