"""Stateful reward functions with delta semantics and arithmetic composition.

Each reward function follows the two-hook contract used by the
environments:

* ``before_reset(engine)`` — called once at episode start, before any
  solving; snapshots counters / clears accumulators.
* ``extract(engine, done)`` — called once per environment event; returns
  the metric delta since the previous extract (or since ``before_reset``
  for the first one) and advances the snapshot.

Calling ``extract`` twice without the engine having produced new events
raises :class:`~mipgym.errors.EnvProtocolError` (the first extract of an
episode is exempt, since a Configuring reset does no solving).

Functions compose arithmetically: ``-NNodes()``, ``3 * LPIterations()``,
``NNodes() + LPIterations()``.  Scalars are lifted to constant functions.
Composition distributes over ``extract`` exactly, event by event.

All bound-based quantities (the integrals) read the engine's event log,
which is in minimization form; segments where a bound is infinite
contribute zero to an integral.
"""

from __future__ import annotations

import numbers

from .errors import EnvProtocolError
from .lp import INFINITY


class RewardFunction:
    """Base class wiring the hook contract and operator overloading."""

    def __init__(self):
        self._last_extract_ordinal = None

    # -- hooks -------------------------------------------------------------

    def before_reset(self, engine):
        self._last_extract_ordinal = None
        self._on_reset(engine)

    def extract(self, engine, done=False):
        ordinal = len(engine.events) if engine is not None else 0
        if (
            self._last_extract_ordinal is not None
            and ordinal == self._last_extract_ordinal
        ):
            raise EnvProtocolError(
                "reward extract() called twice for the same engine event"
            )
        self._last_extract_ordinal = ordinal
        return float(self._value(engine, done))

    # -- subclass interface ------------------------------------------------

    def _on_reset(self, engine):
        pass

    def _value(self, engine, done):
        raise NotImplementedError

    # -- composition -------------------------------------------------------

    def __neg__(self):
        return Negate(self)

    def __mul__(self, factor):
        return Scale(factor, self)

    __rmul__ = __mul__

    def __add__(self, other):
        return Sum(self, _lift(other))

    def __radd__(self, other):
        return Sum(_lift(other), self)

    def __sub__(self, other):
        return Sum(self, Negate(_lift(other)))

    def __rsub__(self, other):
        return Sum(_lift(other), Negate(self))


def _lift(value):
    if isinstance(value, RewardFunction):
        return value
    if isinstance(value, numbers.Real):
        return Constant(float(value))
    raise TypeError(f"cannot use {value!r} as a reward function")


class Constant(RewardFunction):
    """Same scalar at every event."""

    def __init__(self, value):
        super().__init__()
        self.value = float(value)

    def _value(self, engine, done):
        return self.value


class Negate(RewardFunction):
    def __init__(self, inner):
        super().__init__()
        self.inner = _lift(inner)

    def before_reset(self, engine):
        super().before_reset(engine)
        self.inner.before_reset(engine)

    def _value(self, engine, done):
        return -self.inner.extract(engine, done)


class Scale(RewardFunction):
    def __init__(self, factor, inner):
        super().__init__()
        self.factor = float(factor)
        self.inner = _lift(inner)

    def before_reset(self, engine):
        super().before_reset(engine)
        self.inner.before_reset(engine)

    def _value(self, engine, done):
        return self.factor * self.inner.extract(engine, done)


class Sum(RewardFunction):
    def __init__(self, left, right):
        super().__init__()
        self.left = _lift(left)
        self.right = _lift(right)

    def before_reset(self, engine):
        super().before_reset(engine)
        self.left.before_reset(engine)
        self.right.before_reset(engine)

    def _value(self, engine, done):
        return self.left.extract(engine, done) + self.right.extract(engine, done)


class _CounterDelta(RewardFunction):
    """Delta of a non-decreasing engine counter since the last extract."""

    def _read(self, engine):
        raise NotImplementedError

    def _on_reset(self, engine):
        self._snapshot = self._read(engine) if engine is not None else 0

    def _value(self, engine, done):
        current = self._read(engine)
        delta = current - self._snapshot
        self._snapshot = current
        return delta


class NNodes(_CounterDelta):
    """Number of nodes processed since the previous decision point."""

    def _read(self, engine):
        return engine.nodes_processed


class LPIterations(_CounterDelta):
    """Simplex iterations performed since the previous decision point."""

    def _read(self, engine):
        return engine.lp_iterations_total


class SolvingTime(_CounterDelta):
    """Engine wall time (seconds) spent since the previous decision point."""

    def _read(self, engine):
        return engine.wall_time


class IsDone(RewardFunction):
    """1 at the terminal event, 0 otherwise."""

    def _value(self, engine, done):
        return 1.0 if done else 0.0


class _BoundIntegral(RewardFunction):
    """Trapezoid integral of a bound gap over the event timeline.

    The gap is evaluated at every engine event (which snapshots wall time
    and both global bounds); segments with an infinite endpoint contribute
    zero.  ``opt_ref`` is the reference objective (minimization form),
    default 0.
    """

    def __init__(self, opt_ref=0.0):
        super().__init__()
        self.opt_ref = float(opt_ref)

    def _gap(self, event):
        raise NotImplementedError

    def _on_reset(self, engine):
        self._cursor = 0
        self._t_prev = None
        self._g_prev = None

    def _value(self, engine, done):
        total = 0.0
        events = engine.events if engine is not None else []
        for event in events[self._cursor:]:
            t = event.wall_time
            g = self._gap(event)
            if self._t_prev is not None:
                finite = (
                    abs(self._g_prev) < INFINITY and abs(g) < INFINITY
                )
                if finite:
                    total += 0.5 * (self._g_prev + g) * (t - self._t_prev)
            self._t_prev = t
            self._g_prev = g
        self._cursor = len(events)
        return total


class PrimalIntegral(_BoundIntegral):
    """Integral of (primal_bound - opt_ref) over time."""

    def _gap(self, event):
        return event.primal_bound - self.opt_ref


class DualIntegral(_BoundIntegral):
    """Integral of (opt_ref - dual_bound) over time."""

    def _gap(self, event):
        return self.opt_ref - event.dual_bound


class PrimalDualIntegral(_BoundIntegral):
    """Integral of (primal_bound - dual_bound) over time."""

    def _gap(self, event):
        return event.primal_bound - event.dual_bound
