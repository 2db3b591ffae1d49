"""Gym-style environments wrapping the branch-and-bound engine.

Three tasks share one protocol:

* :class:`Branching` — the engine pauses at every fractional node and the
  agent picks the variable to branch on.
* :class:`Configuring` — the agent sets solver parameters once, then the
  engine runs to completion (episodes are exactly one step).
* :class:`DefaultSolve` — no decisions; one step runs the default search
  to completion (the baseline for benchmarking).

Protocol::

    obs, action_set, reward, done = env.reset(instance)
    while not done:
        obs, action_set, reward, done, info = env.step(action)

``reset`` returns exactly four members (no info map); ``step`` returns
five.  The terminal observation is ``None``.  Rewards are per-step deltas
covering the engine work since the previous decision point; the reset
reward covers root processing.  All stochastic choices in an episode
derive from the value passed to :meth:`seed` (default 0).

A fresh engine is built for every episode, so an environment can be
reset any number of times; one environment must only ever be driven by
one agent at a time, but independent environments are fully isolated
and can run in parallel threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import (
    PARAMETER_SPACE,
    TERMINAL_STATUSES,
    BranchCandidateSet,
    Engine,
    EngineStatus,
)
from .errors import (
    ConfigurationError,
    EnvProtocolError,
    InvalidActionError,
    ParameterError,
)
from .observations import NoObservation
from .rewards import RewardFunction

INFO_KEYS = (
    "nodes_processed",
    "lp_iterations_total",
    "wall_time",
    "primal_bound",
    "dual_bound",
    "status",
)


@dataclass(frozen=True)
class ParameterSpace:
    """Action-set descriptor for Configuring: names and their domains."""

    names: tuple
    domains: dict

    def __contains__(self, name):
        return name in self.domains

    def __len__(self):
        return len(self.names)


def _parameter_space():
    return ParameterSpace(
        names=tuple(PARAMETER_SPACE), domains=dict(PARAMETER_SPACE)
    )


class _FallbackReward(RewardFunction):
    """Default reward: always 0 (episodes still report progress via info)."""

    def _value(self, engine, done):
        return 0.0


class EnvironmentBase:
    """Shared reset/step plumbing; subclasses define the task behavior."""

    def __init__(self, observation_function=None, reward_function=None, params=None):
        self.observation_function = (
            observation_function if observation_function is not None else NoObservation()
        )
        self.reward_function = (
            reward_function if reward_function is not None else _FallbackReward()
        )
        self.params = dict(params or {})
        # Validate engine parameters eagerly so a bad map fails at
        # construction, not at the first reset.
        Engine(params=self.params)
        self.engine = None
        self._seed = 0
        self._episode_active = False

    # -- seeding -----------------------------------------------------------

    def seed(self, value):
        """Set the seed used by every subsequent episode (default 0)."""
        if self._episode_active:
            raise EnvProtocolError("seed() may not be called during an episode")
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ParameterError(f"seed must be an integer, got {value!r}")
        if value < 0:
            raise ParameterError(f"seed must be non-negative, got {value!r}")
        self._seed = int(value)

    # -- protocol ----------------------------------------------------------

    def reset(self, instance):
        """Start a new episode on ``instance``; returns a 4-tuple."""
        self.engine = Engine(params=self.params)
        self.observation_function.before_reset(self.engine)
        self.reward_function.before_reset(self.engine)
        obs, action_set, done = self._start_episode(instance)
        reward = self.reward_function.extract(self.engine, done)
        self._episode_active = not done
        return obs, action_set, reward, done

    def step(self, action):
        """Advance the episode by one decision; returns a 5-tuple."""
        if self.engine is None:
            raise EnvProtocolError("step() called before reset()")
        if not self._episode_active:
            raise EnvProtocolError("step() called on a finished episode")
        obs, action_set, done = self._apply(action)
        reward = self.reward_function.extract(self.engine, done)
        self._episode_active = not done
        return obs, action_set, reward, done, self._info()

    # -- helpers -----------------------------------------------------------

    def _info(self):
        engine = self.engine
        return {
            "nodes_processed": engine.nodes_processed,
            "lp_iterations_total": engine.lp_iterations_total,
            "wall_time": engine.wall_time,
            "primal_bound": engine.to_user_objective(engine.primal_bound),
            "dual_bound": engine.to_user_objective(engine.dual_bound),
            "status": engine.status.value,
        }

    def _observe(self, done):
        if done:
            return None
        return self.observation_function.extract(self.engine, done)

    # -- subclass interface -------------------------------------------------

    def _start_episode(self, instance):
        raise NotImplementedError

    def _apply(self, action):
        raise NotImplementedError


class Branching(EnvironmentBase):
    """Variable-selection task: one step per branching decision.

    The action set is the engine's fractional candidate set; an action is
    a candidate variable index.  At terminal events the action set is an
    empty candidate set and the observation is ``None``.
    """

    _empty_action_set = BranchCandidateSet(
        indices=np.array([], dtype=np.int64), fractionality=np.array([])
    )

    def _assemble(self):
        done = self.engine.status in TERMINAL_STATUSES
        action_set = self._empty_action_set if done else self.engine.candidates()
        return self._observe(done), action_set, done

    def _start_episode(self, instance):
        self.engine.start(instance, seed=self._seed)
        return self._assemble()

    def _apply(self, action):
        self.engine.branch(_as_index(action))
        return self._assemble()


def _as_index(action):
    if isinstance(action, (int, np.integer)) and not isinstance(action, bool):
        return int(action)
    raise InvalidActionError(f"branching action must be a variable index, got {action!r}")


class Configuring(EnvironmentBase):
    """Parameter-selection task: one decision, then the solver runs.

    ``reset`` does no solving (reward 0); the single action is a map of
    engine parameters which is applied on top of the constructor params,
    after which the episode runs to terminal in that same step.
    """

    def __init__(self, observation_function=None, reward_function=None, params=None):
        if observation_function is not None and not isinstance(
            observation_function, NoObservation
        ):
            raise ConfigurationError(
                "Configuring has no node context; only NoObservation (or None) "
                f"is compatible, got {type(observation_function).__name__}"
            )
        super().__init__(observation_function, reward_function, params)

    def _start_episode(self, instance):
        self._instance = instance
        return None, _parameter_space(), False

    def _apply(self, action):
        if action is None:
            action = {}
        if not isinstance(action, dict):
            raise InvalidActionError(
                f"configuring action must be a parameter map, got {action!r}"
            )
        try:
            self.engine.set_params(action)
        except ParameterError as exc:
            raise InvalidActionError(str(exc)) from exc
        self.engine.start(self._instance, seed=self._seed)
        self.engine.autosolve()
        return None, None, True


class DefaultSolve(EnvironmentBase):
    """No-decision baseline: ``step(None)`` runs the search to completion.

    ``reset`` processes the root (so the reset reward covers that work);
    unless the root already finished the search, exactly one ``step``
    follows.  The action set is always ``None``.
    """

    def _start_episode(self, instance):
        self.engine.start(instance, seed=self._seed)
        done = self.engine.status in TERMINAL_STATUSES
        return self._observe(done), None, done

    def _apply(self, action):
        if action is not None:
            raise InvalidActionError(
                f"DefaultSolve takes no action; pass None, got {action!r}"
            )
        self.engine.autosolve()
        return None, None, True


_TASKS = {
    "Branching": Branching,
    "Configuring": Configuring,
    "DefaultSolve": DefaultSolve,
}


def make_env(task, observation_function=None, reward_function=None, params=None):
    """Build an environment from a task name or class.

    ``task`` may be one of the strings ``"Branching"``, ``"Configuring"``,
    ``"DefaultSolve"`` or one of the environment classes themselves.
    """
    if isinstance(task, str):
        try:
            cls = _TASKS[task]
        except KeyError:
            raise ConfigurationError(
                f"unknown task {task!r}; expected one of {sorted(_TASKS)}"
            ) from None
    elif isinstance(task, type) and issubclass(task, EnvironmentBase):
        cls = task
    else:
        raise ConfigurationError(f"unknown task {task!r}")
    return cls(
        observation_function=observation_function,
        reward_function=reward_function,
        params=params,
    )
