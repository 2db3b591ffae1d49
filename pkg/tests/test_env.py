"""Protocol tests for the Gym-style environments.

Covers tuple shapes (4 at reset, 5 at step), reward delta semantics and
telescoping, seeding and replay reproducibility, the one-step
Configuring episode, the DefaultSolve baseline, and every protocol
error the environments promise.
"""

import numpy as np
import pytest

from mipgym.engine import BranchCandidateSet, Engine
from mipgym.env import (
    INFO_KEYS,
    Branching,
    Configuring,
    DefaultSolve,
    ParameterSpace,
    make_env,
)
from mipgym.errors import (
    ConfigurationError,
    EnvProtocolError,
    InvalidActionError,
    ParameterError,
)
from mipgym.lp import GE, LE
from mipgym.model import BINARY, INTEGER, MAXIMIZE, Constraint, MipInstance, Variable
from mipgym.observations import CandidateFeatures, NodeBipartite, NoObservation
from mipgym.rewards import IsDone, LPIterations, NNodes, SolvingTime

from oracles import brute_force_binary, random_binary_mip


def fractional_instance():
    """Root LP fractional: max 5x + 4y, 3x + 2y <= 4, binaries."""
    return MipInstance(
        name="knap",
        sense=MAXIMIZE,
        variables=(
            Variable("x", 0.0, 1.0, BINARY, 5.0),
            Variable("y", 0.0, 1.0, BINARY, 4.0),
        ),
        constraints=(Constraint("cap", ((0, 3.0), (1, 2.0)), LE, 4.0),),
    )


def integral_instance():
    """Root LP integral: min x, x >= 2, integer in [0, 4]."""
    return MipInstance(
        name="flat",
        variables=(Variable("x", 0.0, 4.0, INTEGER, 1.0),),
        constraints=(Constraint("low", ((0, 1.0),), GE, 2.0),),
    )


def run_branching_episode(env, instance, chooser=None):
    """Drive an episode; returns (rewards, infos, observations, actions)."""
    rewards, infos, observations, actions = [], [], [], []
    obs, action_set, reward, done = env.reset(instance)
    rewards.append(reward)
    observations.append(obs)
    while not done:
        if chooser is None:
            action = int(action_set.indices[0])
        else:
            action = chooser(action_set)
        actions.append(action)
        obs, action_set, reward, done, info = env.step(action)
        rewards.append(reward)
        infos.append(info)
        observations.append(obs)
    return rewards, infos, observations, actions


class TestTupleShapes:
    def test_reset_returns_exactly_four(self):
        env = Branching()
        out = env.reset(fractional_instance())
        assert isinstance(out, tuple) and len(out) == 4

    def test_step_returns_exactly_five(self):
        env = Branching()
        _, action_set, _, done = env.reset(fractional_instance())
        assert not done
        out = env.step(int(action_set.indices[0]))
        assert isinstance(out, tuple) and len(out) == 5

    def test_configuring_shapes(self):
        env = Configuring()
        out = env.reset(fractional_instance())
        assert len(out) == 4
        out = env.step({"node_selection": "dfs"})
        assert len(out) == 5

    def test_default_solve_shapes(self):
        env = DefaultSolve()
        out = env.reset(fractional_instance())
        assert len(out) == 4
        out = env.step(None)
        assert len(out) == 5


class TestReset:
    def test_root_integral_done_with_empty_action_set(self):
        env = Branching(observation_function=NodeBipartite())
        obs, action_set, reward, done = env.reset(integral_instance())
        assert done is True
        assert obs is None
        assert isinstance(action_set, BranchCandidateSet)
        assert len(action_set) == 0

    def test_fractional_root_pauses_with_candidates(self):
        env = Branching(observation_function=NodeBipartite())
        obs, action_set, reward, done = env.reset(fractional_instance())
        assert done is False
        assert obs is not None
        assert len(action_set) > 0

    def test_reset_reward_counts_root_node(self):
        env = Branching(reward_function=-NNodes())
        _, _, reward, done = env.reset(fractional_instance())
        assert reward == -1.0
        assert not done

    def test_configuring_reset_is_workless(self):
        env = Configuring(reward_function=NNodes())
        obs, action_set, reward, done = env.reset(fractional_instance())
        assert obs is None
        assert isinstance(action_set, ParameterSpace)
        assert set(action_set.names) == {
            "node_selection",
            "branching_rule",
            "rounding_heuristic",
            "node_limit",
            "time_limit",
        }
        assert reward == 0.0
        assert done is False

    def test_invalid_instance_propagates(self):
        bad = MipInstance(
            name="dup",
            variables=(
                Variable("x", 0.0, 1.0, BINARY, 1.0),
                Variable("x", 0.0, 1.0, BINARY, 1.0),
            ),
        )
        env = Branching()
        with pytest.raises(Exception):
            env.reset(bad)

    def test_reset_is_reusable(self):
        env = Branching(reward_function=-NNodes())
        first = run_branching_episode(env, fractional_instance())
        second = run_branching_episode(env, fractional_instance())
        assert first[0] == second[0]  # rewards identical across episodes

    def test_reset_mid_episode_abandons_cleanly(self):
        env = Branching()
        env.reset(fractional_instance())
        obs, action_set, reward, done = env.reset(fractional_instance())
        assert not done
        # The new episode's engine starts from scratch.
        assert env.engine.nodes_processed == 1


class TestStepProtocol:
    def test_step_before_reset(self):
        with pytest.raises(EnvProtocolError):
            Branching().step(0)

    def test_step_after_done(self):
        env = Branching()
        _, _, _, done = env.reset(integral_instance())
        assert done
        with pytest.raises(EnvProtocolError):
            env.step(0)

    def test_out_of_set_action(self):
        env = Branching()
        _, action_set, _, done = env.reset(fractional_instance())
        assert not done
        outside = set(range(10)) - {int(j) for j in action_set.indices}
        with pytest.raises(InvalidActionError):
            env.step(min(outside))

    def test_non_integer_action(self):
        env = Branching()
        env.reset(fractional_instance())
        with pytest.raises(InvalidActionError):
            env.step("x")
        with pytest.raises(InvalidActionError):
            env.step(None)

    def test_action_set_nonempty_iff_not_done(self):
        env = Branching()
        obs, action_set, reward, done = env.reset(fractional_instance())
        while not done:
            assert len(action_set) > 0
            obs, action_set, reward, done, info = env.step(int(action_set.indices[0]))
        assert len(action_set) == 0
        assert obs is None

    def test_rewards_always_finite(self):
        env = Branching(reward_function=NNodes() + 2 * LPIterations() - IsDone())
        rewards, _, _, _ = run_branching_episode(env, fractional_instance())
        assert all(np.isfinite(r) for r in rewards)


class TestInfo:
    def test_info_keys_exact(self):
        env = Branching()
        _, action_set, _, _ = env.reset(fractional_instance())
        *_, info = env.step(int(action_set.indices[0]))
        assert tuple(sorted(info)) == tuple(sorted(INFO_KEYS))

    def test_bounds_reported_in_user_sense(self):
        instance = fractional_instance()  # maximization, optimum 5
        env = Branching()
        rewards, infos, _, _ = run_branching_episode(env, instance)
        final = infos[-1]
        assert final["status"] == "optimal"
        assert final["primal_bound"] == pytest.approx(5.0, abs=1e-6)
        assert final["dual_bound"] == pytest.approx(5.0, abs=1e-6)

    def test_status_progression(self):
        env = Branching()
        _, infos, _, _ = run_branching_episode(env, fractional_instance())
        assert all(i["status"] == "awaiting_branch" for i in infos[:-1])
        assert infos[-1]["status"] in ("optimal", "infeasible")

    def test_counters_non_decreasing(self):
        env = Branching()
        _, infos, _, _ = run_branching_episode(env, random_binary_mip(4))
        for a, b in zip(infos, infos[1:]):
            assert b["nodes_processed"] >= a["nodes_processed"]
            assert b["lp_iterations_total"] >= a["lp_iterations_total"]
            assert b["wall_time"] >= a["wall_time"]


# random_binary_mip seeds whose root LP is fractional, so episodes
# actually branch and produce at least one step.
BRANCHY_SEEDS = (0, 1, 4, 6, 8, 9, 12, 13, 15, 17)


class TestTelescoping:
    @pytest.mark.parametrize("seed", BRANCHY_SEEDS)
    def test_nnodes_sum_equals_final_info(self, seed):
        env = Branching(reward_function=NNodes())
        rng = np.random.default_rng(seed)

        def chooser(action_set):
            return int(rng.choice(action_set.indices))

        rewards, infos, _, _ = run_branching_episode(
            env, random_binary_mip(seed), chooser
        )
        assert infos
        assert sum(rewards) == pytest.approx(infos[-1]["nodes_processed"], abs=1e-9)

    @pytest.mark.parametrize("seed", BRANCHY_SEEDS)
    def test_lp_iterations_sum_equals_final_info(self, seed):
        env = Branching(reward_function=LPIterations())
        rewards, infos, _, _ = run_branching_episode(env, random_binary_mip(seed))
        assert infos
        assert all(r >= 0 for r in rewards)
        assert sum(rewards) == pytest.approx(
            infos[-1]["lp_iterations_total"], abs=1e-9
        )

    def test_negated_telescoping(self):
        env = Branching(reward_function=-NNodes())
        rewards, infos, _, _ = run_branching_episode(env, random_binary_mip(1))
        assert sum(rewards) == pytest.approx(-infos[-1]["nodes_processed"], abs=1e-9)

    def test_solving_time_telescopes_to_wall_time(self):
        env = Branching(reward_function=SolvingTime())
        rewards, infos, _, _ = run_branching_episode(env, random_binary_mip(0))
        assert sum(rewards) == pytest.approx(infos[-1]["wall_time"], rel=1e-9)


class TestConfiguring:
    def test_episode_is_exactly_one_step(self):
        env = Configuring(reward_function=NNodes())
        _, action_set, reward, done = env.reset(fractional_instance())
        assert not done
        obs, action_set2, reward2, done2, info = env.step(
            {"node_selection": "dfs", "branching_rule": "most_infeasible"}
        )
        assert done2 is True
        assert obs is None
        assert info["status"] in ("optimal", "infeasible")
        assert reward2 == info["nodes_processed"]  # reset did no work
        with pytest.raises(EnvProtocolError):
            env.step({})

    def test_empty_and_none_actions_use_defaults(self):
        for action in ({}, None):
            env = Configuring()
            env.reset(fractional_instance())
            *_, done, info = env.step(action)
            assert done and info["status"] == "optimal"

    def test_configured_result_matches_direct_engine(self):
        instance = random_binary_mip(7)
        env = Configuring()
        env.reset(instance)
        *_, info = env.step({"node_selection": "dfs"})
        engine = Engine(params={"node_selection": "dfs"})
        engine.start(instance)
        engine.autosolve()
        assert info["primal_bound"] == pytest.approx(
            engine.to_user_objective(engine.primal_bound), abs=1e-9
        )
        assert info["nodes_processed"] == engine.nodes_processed

    def test_invalid_parameter_map_is_invalid_action(self):
        env = Configuring()
        env.reset(fractional_instance())
        with pytest.raises(InvalidActionError):
            env.step({"node_selection": "bogus"})
        with pytest.raises(InvalidActionError):
            env.step("dfs")

    def test_node_observation_rejected_at_construction(self):
        with pytest.raises(ConfigurationError):
            Configuring(observation_function=NodeBipartite())
        with pytest.raises(ConfigurationError):
            Configuring(observation_function=CandidateFeatures())

    def test_no_observation_accepted(self):
        env = Configuring(observation_function=NoObservation())
        obs, *_ = env.reset(fractional_instance())
        assert obs is None

    def test_action_respects_constructor_params(self):
        # Constructor params apply; the action overrides only what it names.
        env = Configuring(params={"node_limit": 1})
        env.reset(random_binary_mip(5))
        *_, info = env.step({"node_selection": "dfs"})
        assert info["status"] == "limit_reached"
        assert info["nodes_processed"] == 1


class TestDefaultSolve:
    def test_single_step_to_terminal(self):
        env = DefaultSolve(reward_function=NNodes())
        obs, action_set, reward, done = env.reset(fractional_instance())
        assert obs is None and action_set is None
        assert reward == 1.0  # root processing
        assert not done
        obs, action_set, reward2, done, info = env.step(None)
        assert done is True
        assert obs is None and action_set is None
        assert reward + reward2 == info["nodes_processed"]
        assert info["status"] == "optimal"

    def test_integral_root_finishes_at_reset(self):
        env = DefaultSolve()
        _, _, _, done = env.reset(integral_instance())
        assert done is True
        with pytest.raises(EnvProtocolError):
            env.step(None)

    def test_non_none_action_rejected(self):
        env = DefaultSolve()
        env.reset(fractional_instance())
        with pytest.raises(InvalidActionError):
            env.step(0)

    def test_matches_engine_autosolve(self):
        for seed in range(6):
            instance = random_binary_mip(seed)
            env = DefaultSolve()
            env.reset(instance)
            if env._episode_active:
                *_, info = env.step(None)
            else:
                info = env._info()
            expected = brute_force_binary(instance)
            if expected is None:
                assert info["status"] == "infeasible"
            else:
                assert info["status"] == "optimal"
                assert info["primal_bound"] == pytest.approx(expected, abs=1e-6)

    def test_node_observation_allowed_at_root(self):
        env = DefaultSolve(observation_function=NodeBipartite())
        obs, *_ , done = env.reset(fractional_instance())
        assert not done
        assert obs.variable_features.shape == (2, 14)


class TestSeeding:
    def test_default_seed_is_zero(self):
        a = Branching(params={"branching_rule": "random"})
        b = Branching(params={"branching_rule": "random"})
        b.seed(0)
        instance = random_binary_mip(12)
        ra = run_branching_episode(a, instance)
        rb = run_branching_episode(b, instance)
        assert ra[0] == rb[0] and ra[3] == rb[3]

    def test_seed_validation(self):
        env = Branching()
        with pytest.raises(ParameterError):
            env.seed(-1)
        with pytest.raises(ParameterError):
            env.seed(1.5)
        with pytest.raises(ParameterError):
            env.seed(True)

    def test_seed_during_episode_rejected(self):
        env = Branching()
        _, _, _, done = env.reset(fractional_instance())
        assert not done
        with pytest.raises(EnvProtocolError):
            env.seed(3)

    def test_seed_allowed_after_terminal(self):
        env = Branching()
        env.reset(integral_instance())
        env.seed(5)  # episode over: fine

    def test_different_seeds_can_differ(self):
        # With the random internal rule driving pruning order via random
        # branching, some instance in the pool must show a difference.
        differs = False
        for seed_pair in [(0, 1), (0, 2), (1, 3)]:
            for inst_seed in range(8):
                instance = random_binary_mip(inst_seed)
                runs = []
                for s in seed_pair:
                    env = Branching(params={"branching_rule": "random"})
                    env.seed(s)
                    env.reset(instance)
                    env.engine.autosolve()
                    runs.append(
                        tuple(
                            (e.kind, e.node) for e in env.engine.events
                        )
                    )
                if runs[0] != runs[1]:
                    differs = True
        assert differs


class TestReplay:
    @pytest.mark.parametrize("seed", [0, 4, 9])
    def test_same_seed_same_actions_byte_identical(self, seed):
        instance = random_binary_mip(seed)
        rng = np.random.default_rng(seed)

        def chooser(action_set):
            return int(rng.choice(action_set.indices))

        first = Branching(observation_function=NodeBipartite())
        first.seed(seed)
        rewards1, infos1, obs1, actions1 = run_branching_episode(
            first, instance, chooser
        )
        replayed = iter(actions1)
        second = Branching(observation_function=NodeBipartite())
        second.seed(seed)
        rewards2, infos2, obs2, actions2 = run_branching_episode(
            second, instance, lambda _: next(replayed)
        )
        assert actions1 == actions2
        assert rewards1 == rewards2
        for a, b in zip(obs1, obs2):
            if a is None:
                assert b is None
                continue
            assert a.variable_features.tobytes() == b.variable_features.tobytes()
            assert a.constraint_features.tobytes() == b.constraint_features.tobytes()
            assert a.edge_value.tobytes() == b.edge_value.tobytes()
            assert a.edge_row.tobytes() == b.edge_row.tobytes()
            assert a.edge_col.tobytes() == b.edge_col.tobytes()
        for ia, ib in zip(infos1, infos2):
            for key in INFO_KEYS:
                if key == "wall_time":
                    continue  # timing is environment noise
                assert ia[key] == ib[key]

    def test_candidate_observation_replay(self):
        instance = random_binary_mip(4)
        outs = []
        for _ in range(2):
            env = Branching(observation_function=CandidateFeatures())
            rewards, infos, obs, actions = run_branching_episode(env, instance)
            outs.append([o.features.tobytes() for o in obs if o is not None])
        assert outs[0] == outs[1]


class TestMakeEnv:
    def test_by_name_and_class(self):
        assert isinstance(make_env("Branching"), Branching)
        assert isinstance(make_env("Configuring"), Configuring)
        assert isinstance(make_env("DefaultSolve"), DefaultSolve)
        assert isinstance(make_env(Branching), Branching)

    def test_fig1_style_composition(self):
        env = make_env("Branching", NodeBipartite(), -NNodes())
        obs, action_set, reward, done = env.reset(fractional_instance())
        assert reward == -1.0
        assert obs is not None

    def test_unknown_task(self):
        with pytest.raises(ConfigurationError):
            make_env("Solving")
        with pytest.raises(ConfigurationError):
            make_env(42)

    def test_incompatible_composition(self):
        with pytest.raises(ConfigurationError):
            make_env("Configuring", NodeBipartite(), NNodes())

    def test_bad_params_fail_at_construction(self):
        with pytest.raises(ParameterError):
            make_env("Branching", params={"node_selection": "bogus"})


class TestIsolation:
    def test_interleaved_envs_do_not_interact(self):
        instance_a = random_binary_mip(0)
        instance_b = random_binary_mip(6)
        solo = Branching(reward_function=NNodes())
        solo_rewards, solo_infos, _, _ = run_branching_episode(solo, instance_a)

        env_a = Branching(reward_function=NNodes())
        env_b = Branching(reward_function=NNodes())
        obs_a, set_a, r_a, done_a = env_a.reset(instance_a)
        env_b.reset(instance_b)
        rewards = [r_a]
        infos = []
        while not done_a:
            if env_b._episode_active:
                env_b.step(int(env_b.engine.candidates().indices[0]))
            obs_a, set_a, r_a, done_a, info_a = env_a.step(int(set_a.indices[0]))
            rewards.append(r_a)
            infos.append(info_a)
        assert rewards == solo_rewards
        assert infos[-1]["nodes_processed"] == solo_infos[-1]["nodes_processed"]
