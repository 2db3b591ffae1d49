"""Observation functions extracting features from a paused engine.

Both extractors require the engine to be AWAITING_BRANCH (there is no
node context otherwise) and read everything from the engine's
minimization-form relaxation: objective-derived features of maximization
instances carry the negated (internal) coefficients.

Feature layouts are frozen and documented column-by-column in
``docs/observations.md``; tests and the foreign bindings rely on the
exact order.  All norm divisions are guarded by ``max(norm, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import PSEUDOCOST_EPS, EngineStatus
from .errors import EnvProtocolError
from .lp import EQ, GE, INFINITY
from .model import BINARY, CONTINUOUS, INTEGER

FEAS_TOL = 1e-6

#: Column order of NodeBipartiteObs.variable_features.
VARIABLE_FEATURE_NAMES = (
    "objective_normalized",
    "is_binary",
    "is_integer",
    "is_continuous",
    "has_lower_bound",
    "has_upper_bound",
    "lp_value",
    "fractionality",
    "basis_basic",
    "basis_at_lower",
    "basis_at_upper",
    "reduced_cost_normalized",
    "has_incumbent",
    "incumbent_value",
)

#: Column order of NodeBipartiteObs.constraint_features.
CONSTRAINT_FEATURE_NAMES = (
    "rhs_normalized",
    "dual_normalized",
    "is_tight",
    "is_equality",
)

#: Column order of CandidateFeaturesObs.features.
CANDIDATE_FEATURE_NAMES = (
    "objective",
    "objective_positive",
    "objective_negative",
    "objective_l1_normalized",
    "column_degree",
    "coef_mean_normalized",
    "coef_min_normalized",
    "coef_max_normalized",
    "lp_value",
    "fractionality",
    "distance_to_floor",
    "distance_to_ceil",
    "pseudocost_up",
    "pseudocost_down",
    "pseudocost_score",
    "times_branched",
    "node_depth",
    "is_at_root",
)


@dataclass
class NodeBipartiteObs:
    """Bipartite variable/constraint view of the paused node.

    Rows are pre-normalized to <= or = sense (>= rows are negated), and
    edge values are the normalized structural coefficients
    ``a_ij / max(norm2(row i), 1)`` in row-major order.
    """

    variable_features: np.ndarray  # (n_vars, 14) float64
    constraint_features: np.ndarray  # (n_rows, 4) float64
    edge_row: np.ndarray  # (nnz,) int64
    edge_col: np.ndarray  # (nnz,) int64
    edge_value: np.ndarray  # (nnz,) float64


@dataclass
class CandidateFeaturesObs:
    """Per-candidate feature rows aligned with the candidate set order."""

    features: np.ndarray  # (n_candidates, 18) float64
    candidate_indices: np.ndarray  # (n_candidates,) int64


def _require_awaiting(engine, who):
    if engine.status is not EngineStatus.AWAITING_BRANCH:
        raise EnvProtocolError(
            f"{who} requires AWAITING_BRANCH, engine is {engine.status.value}"
        )


def _normalized_rows(engine):
    """Dense row matrix and rhs with >= rows negated; plus guarded norms."""
    lp = engine.relaxation
    a = lp.dense_matrix()
    rhs = np.asarray(lp.row_rhs, dtype=float).copy()
    flip = np.array([s == GE for s in lp.row_sense])
    if flip.any():
        a[flip] *= -1.0
        rhs[flip] *= -1.0
    norms = np.maximum(np.linalg.norm(a, axis=1), 1.0) if a.size else np.ones(len(rhs))
    return a, rhs, flip, norms


class NodeBipartite:
    """Observation function producing :class:`NodeBipartiteObs`."""

    def before_reset(self, engine):
        pass

    def extract(self, engine, done=False):
        _require_awaiting(engine, "NodeBipartite.extract")
        instance = engine.instance
        lp = engine.relaxation
        sol = engine.current_solution
        lower, upper = engine.current_bounds()
        n = instance.n_vars
        m = instance.n_constraints
        c = lp.objective
        c_norm = max(float(np.linalg.norm(c)), 1.0)
        x = sol.primal
        frac = x - np.floor(x)
        fractionality = np.minimum(frac, 1.0 - frac)
        var_status = sol.basis.var_status

        vf = np.zeros((n, 14))
        vf[:, 0] = c / c_norm
        kinds = [v.kind for v in instance.variables]
        vf[:, 1] = [k == BINARY for k in kinds]
        vf[:, 2] = [k == INTEGER for k in kinds]
        vf[:, 3] = [k == CONTINUOUS for k in kinds]
        vf[:, 4] = lower > -INFINITY
        vf[:, 5] = upper < INFINITY
        vf[:, 6] = x
        vf[:, 7] = fractionality
        vf[:, 8] = var_status == 0  # basic
        vf[:, 9] = var_status == 1  # at lower
        vf[:, 10] = var_status == 2  # at upper
        vf[:, 11] = sol.reduced_costs / c_norm
        if engine.incumbent is not None:
            vf[:, 12] = 1.0
            vf[:, 13] = engine.incumbent[0]

        a, rhs, flip, norms = _normalized_rows(engine)
        cf = np.zeros((m, 4))
        if m:
            duals = sol.duals.copy()
            duals[flip] *= -1.0
            activity = a @ x
            slack = rhs - activity
            is_eq = np.array([s == EQ for s in lp.row_sense], dtype=float)
            cf[:, 0] = rhs / norms
            cf[:, 1] = duals / norms
            cf[:, 2] = slack <= FEAS_TOL
            cf[:, 3] = is_eq

        rows, cols = np.nonzero(a)
        values = a[rows, cols] / norms[rows]
        return NodeBipartiteObs(
            variable_features=vf,
            constraint_features=cf,
            edge_row=rows.astype(np.int64),
            edge_col=cols.astype(np.int64),
            edge_value=values,
        )


class CandidateFeatures:
    """Observation function producing :class:`CandidateFeaturesObs`."""

    def before_reset(self, engine):
        pass

    def extract(self, engine, done=False):
        _require_awaiting(engine, "CandidateFeatures.extract")
        cand = engine.candidates()
        idx = cand.indices
        k = len(idx)
        lp = engine.relaxation
        sol = engine.current_solution
        c = lp.objective
        c_l1 = max(float(np.abs(c).sum()), 1.0)
        a, _, _, norms = _normalized_rows(engine)
        x = sol.primal[idx]
        floor = np.floor(x)
        f_down = x - floor
        f_up = np.ceil(x) - x

        up_count = engine.pseudocost_up_count[idx]
        down_count = engine.pseudocost_down_count[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            pc_up = np.where(
                up_count > 0, engine.pseudocost_up_sum[idx] / np.maximum(up_count, 1), 0.0
            )
            pc_down = np.where(
                down_count > 0,
                engine.pseudocost_down_sum[idx] / np.maximum(down_count, 1),
                0.0,
            )
        score = np.maximum(pc_down * f_down, PSEUDOCOST_EPS) * np.maximum(
            pc_up * f_up, PSEUDOCOST_EPS
        )

        feats = np.zeros((k, 18))
        cj = c[idx]
        feats[:, 0] = cj
        feats[:, 1] = np.maximum(cj, 0.0)
        feats[:, 2] = np.maximum(-cj, 0.0)
        feats[:, 3] = np.abs(cj) / c_l1
        for row_k, j in enumerate(idx):
            col = a[:, j]
            nz = np.flatnonzero(col)
            feats[row_k, 4] = len(nz)
            if len(nz):
                normalized = np.abs(col[nz]) / norms[nz]
                feats[row_k, 5] = normalized.mean()
                feats[row_k, 6] = normalized.min()
                feats[row_k, 7] = normalized.max()
        feats[:, 8] = x
        feats[:, 9] = cand.fractionality
        feats[:, 10] = f_down
        feats[:, 11] = f_up
        feats[:, 12] = pc_up
        feats[:, 13] = pc_down
        feats[:, 14] = score
        feats[:, 15] = engine.times_branched[idx]
        feats[:, 16] = engine.current_node.depth
        feats[:, 17] = float(engine.current_node.depth == 0)
        return CandidateFeaturesObs(
            features=feats, candidate_indices=idx.astype(np.int64).copy()
        )


class NoObservation:
    """Observation function that always yields None (DefaultSolve baseline)."""

    def before_reset(self, engine):
        pass

    def extract(self, engine, done=False):
        return None
