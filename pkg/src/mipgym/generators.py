"""Seeded random instance generators for four standard problem families.

Each generator is an infinite iterator over :class:`~mipgym.model.MipInstance`::

    instances = CombinatorialAuction(n_items=100, n_bids=100)
    instance = next(instances)

Instance ``k`` of a generator depends only on ``(family, params, seed, k)``
— never on whether earlier instances were materialized — because every
instance is built from a fresh counter-keyed RNG.  Re-seeding with
:meth:`seed` restarts the stream from index 0.

Constructions (simplified versions of the standard literature models):

* ``CombinatorialAuction`` — bids are random item bundles grown with
  add-item probability 0.65; the bid price is the bundle's summed item
  value (items valued uniform[1,100]) times a 1 + 0.2·uniform[0,1]
  premium; maximize total accepted price subject to one winner per item.
* ``SetCover`` — Bernoulli(density) 0/1 coverage matrix repaired so every
  row is covered by at least two columns and every column covers at
  least one row; column costs uniform int[1,100]; minimize cost subject
  to covering every row.
* ``CapacitatedFacilityLocation`` — demands uniform int[5,35]; capacities
  uniform int[10,160] rescaled so total capacity = ratio × total demand;
  fixed cost uniform[0,90]·sqrt(capacity) + uniform[100,110]; transport
  cost 10 · demand · Euclidean distance between uniform unit-square
  points; binary open decisions, continuous assignment fractions.
* ``MaximumIndependentSet`` — preferential-attachment (Barabási–Albert)
  graph where each new node links to ``affinity`` distinct existing
  nodes; maximize chosen nodes subject to one endpoint per edge.

Every generated instance is feasible by construction (all-zeros for the
auction and independent set; all-ones after repair for set cover; open
everything for facility location, whose capacity exceeds demand).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GenerationError
from .lp import EQ, GE, LE
from .model import BINARY, CONTINUOUS, MAXIMIZE, MINIMIZE, Constraint, MipInstance, Variable


def _rng(tag, seed, index):
    return np.random.default_rng(np.random.SeedSequence((tag, seed, index)))


class InstanceGenerator:
    """Infinite, value-like iterator of instances for one family."""

    family = None
    _tag = 0

    def __init__(self, seed=0):
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise GenerationError(f"seed must be an integer, got {seed!r}")
        if seed < 0:
            raise GenerationError(f"seed must be non-negative, got {seed!r}")
        self._seed = int(seed)
        self._index = 0

    def seed(self, value):
        """Re-seed and restart the stream from instance 0."""
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise GenerationError(f"seed must be an integer, got {value!r}")
        if value < 0:
            raise GenerationError(f"seed must be non-negative, got {value!r}")
        self._seed = int(value)
        self._index = 0

    def __iter__(self):
        return self

    def __next__(self):
        instance = self.generate(self._index)
        self._index += 1
        return instance

    def generate(self, index):
        """Build instance ``index`` of the stream (independent of cursor)."""
        if index < 0:
            raise GenerationError(f"instance index must be non-negative, got {index}")
        rng = _rng(self._tag, self._seed, int(index))
        instance = self._build(rng, f"{self.family}_s{self._seed}_i{int(index)}")
        instance.metadata.update(
            family=self.family, seed=self._seed, index=int(index), **self._params()
        )
        return instance

    # -- subclass interface -------------------------------------------------

    def _params(self):
        raise NotImplementedError

    def _build(self, rng, name):
        raise NotImplementedError


def _positive_int(name, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise GenerationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise GenerationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


class CombinatorialAuction(InstanceGenerator):
    """Winner determination: one item constraint per item appearing in a bid."""

    family = "combinatorial_auction"
    _tag = 101

    def __init__(self, n_items=100, n_bids=100, seed=0):
        super().__init__(seed)
        self.n_items = _positive_int("n_items", n_items)
        self.n_bids = _positive_int("n_bids", n_bids)

    def _params(self):
        return {"n_items": self.n_items, "n_bids": self.n_bids}

    def _build(self, rng, name):
        values = rng.uniform(1.0, 100.0, size=self.n_items)
        bundles = []
        prices = []
        for _ in range(self.n_bids):
            bundle = {int(rng.integers(self.n_items))}
            while len(bundle) < self.n_items and rng.uniform() < 0.65:
                bundle.add(int(rng.integers(self.n_items)))
            items = sorted(bundle)
            premium = 1.0 + 0.2 * rng.uniform()
            bundles.append(items)
            prices.append(float(values[items].sum() * premium))
        variables = tuple(
            Variable(f"bid{b}", 0.0, 1.0, BINARY, prices[b]) for b in range(self.n_bids)
        )
        by_item = {}
        for b, bundle in enumerate(bundles):
            for item in bundle:
                by_item.setdefault(item, []).append(b)
        constraints = tuple(
            Constraint(f"item{item}", tuple((b, 1.0) for b in bids), LE, 1.0)
            for item, bids in sorted(by_item.items())
        )
        return MipInstance(
            name=name,
            sense=MAXIMIZE,
            variables=variables,
            constraints=constraints,
        )


class SetCover(InstanceGenerator):
    """Minimum-cost cover with a repaired Bernoulli coverage matrix."""

    family = "set_cover"
    _tag = 102

    def __init__(self, n_rows=500, n_cols=1000, density=0.05, seed=0):
        super().__init__(seed)
        self.n_rows = _positive_int("n_rows", n_rows)
        self.n_cols = _positive_int("n_cols", n_cols)
        if not (0.0 < density <= 1.0):
            raise GenerationError(
                f"density must be in (0, 1], got {density!r}"
            )
        if self.n_cols < 2:
            raise GenerationError(
                "set cover repair needs at least 2 columns so every row "
                f"can be covered twice, got n_cols={self.n_cols}"
            )
        self.density = float(density)

    def _params(self):
        return {"n_rows": self.n_rows, "n_cols": self.n_cols, "density": self.density}

    def _build(self, rng, name):
        a = rng.uniform(size=(self.n_rows, self.n_cols)) < self.density
        # Repair: every row covered by >= 2 columns ...
        for i in range(self.n_rows):
            short = 2 - int(a[i].sum())
            if short > 0:
                empty = np.flatnonzero(~a[i])
                picks = rng.choice(empty, size=short, replace=False)
                a[i, picks] = True
        # ... and every column covering >= 1 row.
        for j in range(self.n_cols):
            if not a[:, j].any():
                a[int(rng.integers(self.n_rows)), j] = True
        costs = rng.integers(1, 101, size=self.n_cols)
        variables = tuple(
            Variable(f"col{j}", 0.0, 1.0, BINARY, float(costs[j]))
            for j in range(self.n_cols)
        )
        constraints = tuple(
            Constraint(
                f"row{i}",
                tuple((int(j), 1.0) for j in np.flatnonzero(a[i])),
                GE,
                1.0,
            )
            for i in range(self.n_rows)
        )
        return MipInstance(
            name=name,
            sense=MINIMIZE,
            variables=variables,
            constraints=constraints,
        )


class CapacitatedFacilityLocation(InstanceGenerator):
    """Open facilities (binary) and route demand fractions (continuous)."""

    family = "capacitated_facility_location"
    _tag = 103

    def __init__(self, n_customers=100, n_facilities=100, ratio=5.0, seed=0):
        super().__init__(seed)
        self.n_customers = _positive_int("n_customers", n_customers)
        self.n_facilities = _positive_int("n_facilities", n_facilities)
        if not ratio >= 1.0:
            raise GenerationError(
                f"ratio must be >= 1 so total capacity covers demand, got {ratio!r}"
            )
        self.ratio = float(ratio)

    def _params(self):
        return {
            "n_customers": self.n_customers,
            "n_facilities": self.n_facilities,
            "ratio": self.ratio,
        }

    def _build(self, rng, name):
        nc, nf = self.n_customers, self.n_facilities
        demands = rng.integers(5, 36, size=nc).astype(float)
        capacities = rng.integers(10, 161, size=nf).astype(float)
        capacities *= self.ratio * demands.sum() / capacities.sum()
        fixed = rng.uniform(0.0, 90.0, size=nf) * np.sqrt(capacities) + rng.uniform(
            100.0, 110.0, size=nf
        )
        customers = rng.uniform(size=(nc, 2))
        facilities = rng.uniform(size=(nf, 2))
        dist = np.linalg.norm(customers[:, None, :] - facilities[None, :, :], axis=2)
        transport = 10.0 * demands[:, None] * dist

        variables = [
            Variable(f"open{j}", 0.0, 1.0, BINARY, float(fixed[j])) for j in range(nf)
        ]
        for i in range(nc):
            for j in range(nf):
                variables.append(
                    Variable(f"frac{i}_{j}", 0.0, 1.0, CONTINUOUS, float(transport[i, j]))
                )

        def frac_index(i, j):
            return nf + i * nf + j

        constraints = []
        for i in range(nc):
            constraints.append(
                Constraint(
                    f"demand{i}",
                    tuple((frac_index(i, j), 1.0) for j in range(nf)),
                    EQ,
                    1.0,
                )
            )
        for j in range(nf):
            terms = tuple((frac_index(i, j), float(demands[i])) for i in range(nc))
            constraints.append(
                Constraint(
                    f"capacity{j}", terms + ((j, -float(capacities[j])),), LE, 0.0
                )
            )
        return MipInstance(
            name=name,
            sense=MINIMIZE,
            variables=tuple(variables),
            constraints=tuple(constraints),
        )


def barabasi_albert_edges(n_nodes, affinity, rng):
    """Preferential-attachment edge list: node v >= affinity links to
    ``affinity`` distinct earlier nodes chosen by degree; the first
    attaching node links to all initial nodes.  Returns sorted (u, v)
    pairs with u < v; edge count is (n_nodes - affinity) * affinity.
    """
    edges = []
    repeated = []  # one entry per incident edge end, drives preference
    for v in range(affinity, n_nodes):
        if v == affinity:
            targets = list(range(affinity))
        else:
            targets = set()
            while len(targets) < affinity:
                targets.add(int(repeated[rng.integers(len(repeated))]))
            targets = sorted(targets)
        for u in targets:
            edges.append((u, v))
        repeated.extend(targets)
        repeated.extend([v] * affinity)
    return edges


class MaximumIndependentSet(InstanceGenerator):
    """One conflict row per graph edge; maximize the number of chosen nodes."""

    family = "maximum_independent_set"
    _tag = 104

    def __init__(self, n_nodes=500, affinity=4, seed=0):
        super().__init__(seed)
        self.n_nodes = _positive_int("n_nodes", n_nodes, minimum=2)
        self.affinity = _positive_int("affinity", affinity)
        if self.affinity >= self.n_nodes:
            raise GenerationError(
                f"affinity ({self.affinity}) must be smaller than n_nodes "
                f"({self.n_nodes})"
            )

    def _params(self):
        return {"n_nodes": self.n_nodes, "affinity": self.affinity}

    def _build(self, rng, name):
        edges = barabasi_albert_edges(self.n_nodes, self.affinity, rng)
        variables = tuple(
            Variable(f"node{v}", 0.0, 1.0, BINARY, 1.0) for v in range(self.n_nodes)
        )
        constraints = tuple(
            Constraint(f"edge{u}_{v}", ((u, 1.0), (v, 1.0)), LE, 1.0)
            for u, v in edges
        )
        return MipInstance(
            name=name,
            sense=MAXIMIZE,
            variables=variables,
            constraints=constraints,
        )


FAMILIES = {
    cls.family: cls
    for cls in (
        CombinatorialAuction,
        SetCover,
        CapacitatedFacilityLocation,
        MaximumIndependentSet,
    )
}


@dataclass(frozen=True)
class GeneratorConfig:
    """Family name, its parameters, and the stream seed."""

    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self):
        return make_generator(self)


def make_generator(config):
    """Instantiate the generator described by a :class:`GeneratorConfig`."""
    try:
        cls = FAMILIES[config.family]
    except KeyError:
        raise ConfigurationError(
            f"unknown family {config.family!r}; expected one of {sorted(FAMILIES)}"
        ) from None
    return cls(seed=config.seed, **config.params)


#: Preset parameter tiers: ``desk`` solves in seconds with autosolve on
#: modest hardware; ``paper`` approximates minute-scale benchmark sizes.
PRESETS = {
    "combinatorial_auction": {
        "desk": {"n_items": 50, "n_bids": 60},
        "paper": {"n_items": 100, "n_bids": 100},
    },
    "set_cover": {
        "desk": {"n_rows": 50, "n_cols": 250, "density": 0.05},
        "paper": {"n_rows": 500, "n_cols": 1000, "density": 0.05},
    },
    "capacitated_facility_location": {
        "desk": {"n_customers": 12, "n_facilities": 6, "ratio": 5.0},
        "paper": {"n_customers": 100, "n_facilities": 100, "ratio": 5.0},
    },
    "maximum_independent_set": {
        "desk": {"n_nodes": 40, "affinity": 4},
        "paper": {"n_nodes": 500, "affinity": 4},
    },
}


def preset(family, tier="desk", seed=0):
    """Look up a preset tier for a family as a :class:`GeneratorConfig`."""
    try:
        tiers = PRESETS[family]
    except KeyError:
        raise ConfigurationError(
            f"unknown family {family!r}; expected one of {sorted(PRESETS)}"
        ) from None
    try:
        params = tiers[tier]
    except KeyError:
        raise ConfigurationError(
            f"unknown tier {tier!r} for {family}; expected one of {sorted(tiers)}"
        ) from None
    return GeneratorConfig(family=family, params=dict(params), seed=seed)


def desk_presets(seed=0):
    """Desk-tier configs for all four families (seconds-scale autosolve)."""
    return [preset(family, "desk", seed=seed) for family in FAMILIES]
