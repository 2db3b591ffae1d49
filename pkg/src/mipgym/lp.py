"""Bounded-variable linear programs and a revised-simplex solver.

The solver works on the standard form ``A x + s = b`` obtained by adding one
slack per row, with general (possibly infinite) bounds on every column.  A
cold solve runs a phase-1 with artificial columns followed by a phase-2
primal simplex; a warm solve reuses a caller-supplied basis and cleans up
lost primal feasibility with a bounded-variable dual simplex, falling back
to a cold solve when the basis is unusable.

Anti-cycling: the pivot rule switches from Dantzig pricing to Bland's rule
after ``bland_threshold`` consecutive degenerate pivots and switches back on
the first pivot that makes progress.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError

INFINITY = float("inf")

LE = "<="
EQ = "="
GE = ">="
ROW_SENSES = (LE, EQ, GE)


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class BasisStatus(enum.IntEnum):
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3  # nonbasic at value 0, both bounds infinite


@dataclass
class LinearProgram:
    """Minimization LP with per-column bounds and sparse rows.

    ``rows[i]`` is a list of ``(column, coefficient)`` pairs; ``row_sense[i]``
    is one of ``"<="``, ``"="``, ``">="``.
    """

    objective: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray
    rows: list
    row_sense: list
    row_rhs: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.col_lower = np.asarray(self.col_lower, dtype=float)
        self.col_upper = np.asarray(self.col_upper, dtype=float)
        self.row_rhs = np.asarray(self.row_rhs, dtype=float)

    @property
    def n_vars(self):
        return self.objective.shape[0]

    @property
    def n_rows(self):
        return len(self.rows)

    def validate(self):
        n = self.n_vars
        if self.col_lower.shape != (n,) or self.col_upper.shape != (n,):
            raise StructureError("bound arrays must match objective length")
        if len(self.row_sense) != self.n_rows or self.row_rhs.shape != (self.n_rows,):
            raise StructureError("row arrays must have one entry per row")
        if np.isnan(self.objective).any():
            raise StructureError("NaN in objective")
        if np.isnan(self.col_lower).any() or np.isnan(self.col_upper).any():
            raise StructureError("NaN in column bounds")
        if np.any(self.col_lower == INFINITY) or np.any(self.col_upper == -INFINITY):
            raise StructureError("column bound at the wrong infinity")
        if np.isnan(self.row_rhs).any():
            raise StructureError("NaN in row rhs")
        for i, row in enumerate(self.rows):
            if self.row_sense[i] not in ROW_SENSES:
                raise StructureError(f"row {i}: unknown sense {self.row_sense[i]!r}")
            for j, coef in row:
                if not 0 <= j < n:
                    raise StructureError(f"row {i}: column index {j} out of range")
                if np.isnan(coef):
                    raise StructureError(f"row {i}: NaN coefficient on column {j}")

    def with_bounds(self, lower, upper):
        """Same structure with replaced column bounds (rows are shared)."""
        return LinearProgram(self.objective, np.asarray(lower, dtype=float),
                             np.asarray(upper, dtype=float), self.rows,
                             self.row_sense, self.row_rhs)

    def dense_matrix(self):
        a = np.zeros((self.n_rows, self.n_vars))
        for i, row in enumerate(self.rows):
            for j, coef in row:
                a[i, j] += coef
        return a


@dataclass
class LpBasis:
    var_status: np.ndarray  # per structural column, BasisStatus codes
    row_status: np.ndarray  # per row (status of the row's slack)

    def copy(self):
        return LpBasis(self.var_status.copy(), self.row_status.copy())


@dataclass
class LpSolution:
    status: LpStatus
    primal: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: LpBasis | None
    objective: float
    iterations: int


@dataclass
class SimplexOptions:
    feas_tol: float = 1e-6
    opt_tol: float = 1e-6
    pivot_tol: float = 1e-9
    reduced_cost_tol: float = 1e-7
    bland_threshold: int = 200
    refactor_every: int = 100


_TIE_EPS = 1e-9


class SimplexWorkspace:
    """Reusable buffers for repeated solves of structurally identical LPs.

    One workspace per driving thread; distinct workspaces are fully
    independent.  The dense column matrix is rebuilt only when the row
    structure changes, so re-solving under different bounds (the
    branch-and-bound pattern) is cheap.
    """

    def __init__(self, options: SimplexOptions | None = None):
        self.options = options or SimplexOptions()
        self._rows_key = None
        self._A = None  # dense (m, n + 2m): structural | slack | artificial

    def _prepare(self, lp: LinearProgram):
        key = id(lp.rows)
        if key == self._rows_key and self._A is not None:
            return
        m, n = lp.n_rows, lp.n_vars
        a = np.zeros((m, n + 2 * m))
        for i, row in enumerate(lp.rows):
            for j, coef in row:
                a[i, j] += coef
        a[:, n:n + m] = np.eye(m)
        self._rows_key = key
        self._A = a

    def solve(self, lp, warm=None, max_iterations=None):
        lp.validate()
        if np.any(lp.col_lower > lp.col_upper):
            n = lp.n_vars
            return LpSolution(LpStatus.INFEASIBLE, np.zeros(n), np.zeros(lp.n_rows),
                              np.zeros(n), None, INFINITY, 0)
        if lp.n_rows == 0:
            return _solve_unconstrained(lp)
        self._prepare(lp)
        core = _Core(lp, self._A, self.options, max_iterations)
        return core.run(warm)


def solve_lp(lp, warm=None, max_iterations=None, workspace=None, options=None):
    """Solve ``min c.x  s.t. rows, l <= x <= u``; see :class:`LpSolution`.

    ``warm`` is an :class:`LpBasis` from an earlier solve of a structurally
    identical LP (typically with different bounds).
    """
    if workspace is None:
        workspace = SimplexWorkspace(options)
    return workspace.solve(lp, warm=warm, max_iterations=max_iterations)


def lp_feasibility_residual(lp, primal):
    """Max violation of ``primal`` over rows and column bounds; 0 when feasible."""
    x = np.asarray(primal, dtype=float)
    if x.shape != (lp.n_vars,):
        raise StructureError(
            f"primal has length {x.shape}, expected ({lp.n_vars},)")
    worst = 0.0
    for i, row in enumerate(lp.rows):
        act = sum(coef * x[j] for j, coef in row)
        rhs = lp.row_rhs[i]
        sense = lp.row_sense[i]
        if sense == LE:
            worst = max(worst, act - rhs)
        elif sense == GE:
            worst = max(worst, rhs - act)
        else:
            worst = max(worst, abs(act - rhs))
    lower_viol = lp.col_lower - x
    upper_viol = x - lp.col_upper
    with np.errstate(invalid="ignore"):
        worst = max(worst, float(np.nanmax(lower_viol, initial=0.0)),
                    float(np.nanmax(upper_viol, initial=0.0)))
    return max(worst, 0.0)


def dual_objective(lp, sol):
    """Dual objective implied by the solution's duals and reduced costs.

    ``y.b`` plus the reduced-cost contribution of every structural column
    held at a finite bound; equals the primal objective at optimality.
    """
    val = float(np.dot(sol.duals, lp.row_rhs))
    d = sol.reduced_costs
    for j in range(lp.n_vars):
        st = sol.basis.var_status[j] if sol.basis is not None else BasisStatus.BASIC
        if st == BasisStatus.AT_LOWER:
            val += d[j] * lp.col_lower[j]
        elif st == BasisStatus.AT_UPPER:
            val += d[j] * lp.col_upper[j]
    return val


def _solve_unconstrained(lp):
    n = lp.n_vars
    c = lp.objective
    x = np.zeros(n)
    status = np.full(n, BasisStatus.FREE, dtype=np.int8)
    for j in range(n):
        lo, up = lp.col_lower[j], lp.col_upper[j]
        if c[j] > 0:
            if lo == -INFINITY:
                return LpSolution(LpStatus.UNBOUNDED, x, np.zeros(0), c.copy(),
                                  None, -INFINITY, 0)
            x[j], status[j] = lo, BasisStatus.AT_LOWER
        elif c[j] < 0:
            if up == INFINITY:
                return LpSolution(LpStatus.UNBOUNDED, x, np.zeros(0), c.copy(),
                                  None, INFINITY, 0)
            x[j], status[j] = up, BasisStatus.AT_UPPER
        else:
            if lo != -INFINITY:
                x[j], status[j] = lo, BasisStatus.AT_LOWER
            elif up != INFINITY:
                x[j], status[j] = up, BasisStatus.AT_UPPER
    basis = LpBasis(status, np.zeros(0, dtype=np.int8))
    return LpSolution(LpStatus.OPTIMAL, x, np.zeros(0), c.copy(), basis,
                      float(np.dot(c, x)), 0)


class _Core:
    """One solve over the expanded column space [structural | slack | artificial]."""

    def __init__(self, lp, a, options, max_iterations):
        self.lp = lp
        self.opt = options
        self.m = lp.n_rows
        self.n = lp.n_vars
        self.total = self.n + 2 * self.m
        self.A = a
        self.cap = max_iterations if max_iterations is not None else 10 ** 9

        m, n = self.m, self.n
        self.lb = np.empty(self.total)
        self.ub = np.empty(self.total)
        self.lb[:n] = lp.col_lower
        self.ub[:n] = lp.col_upper
        for i, sense in enumerate(lp.row_sense):
            if sense == LE:
                self.lb[n + i], self.ub[n + i] = 0.0, INFINITY
            elif sense == GE:
                self.lb[n + i], self.ub[n + i] = -INFINITY, 0.0
            else:
                self.lb[n + i], self.ub[n + i] = 0.0, 0.0
        # artificial columns stay fixed at zero unless phase 1 activates them
        self.lb[n + m:] = 0.0
        self.ub[n + m:] = 0.0
        self.A[:, n + m:] = 0.0

        self.c = np.zeros(self.total)
        self.c[:n] = lp.objective

        self.x = np.zeros(self.total)
        self.status = np.full(self.total, BasisStatus.AT_LOWER, dtype=np.int8)
        self.basic = np.zeros(m, dtype=np.int64)
        self.binv = np.eye(m)
        self.iters = 0
        self.degenerate_run = 0
        self.bland = False
        self.since_refactor = 0

    # -- shared helpers ---------------------------------------------------

    def _nonbasic_at_bounds(self):
        for j in range(self.total):
            st = self.status[j]
            if st == BasisStatus.AT_LOWER:
                self.x[j] = self.lb[j]
            elif st == BasisStatus.AT_UPPER:
                self.x[j] = self.ub[j]
            elif st == BasisStatus.FREE:
                self.x[j] = 0.0

    def _refactor(self):
        b_mat = self.A[:, self.basic]
        self.binv = np.linalg.solve(b_mat, np.eye(self.m))
        self.since_refactor = 0
        self._recompute_basics()

    def _recompute_basics(self):
        xn = self.x.copy()
        xn[self.basic] = 0.0
        r = self.lp.row_rhs - self.A @ xn
        self.x[self.basic] = self.binv @ r

    def _duals(self, c):
        return self.binv.T @ c[self.basic]

    def _reduced(self, c):
        y = self._duals(c)
        d = c - self.A.T @ y
        d[self.basic] = 0.0
        return d, y

    def _eta_update(self, p, w):
        piv = self.binv[p] / w[p]
        w_masked = w.copy()
        w_masked[p] = 0.0
        self.binv -= np.outer(w_masked, piv)
        self.binv[p] = piv
        self.since_refactor += 1
        if self.since_refactor >= self.opt.refactor_every:
            self._refactor()

    def _note_step(self, t):
        self.iters += 1
        if t <= 1e-12:
            self.degenerate_run += 1
            if self.degenerate_run >= self.opt.bland_threshold:
                self.bland = True
        else:
            self.degenerate_run = 0
            self.bland = False

    # -- primal simplex ---------------------------------------------------

    def _primal(self, c):
        """Returns 'optimal', 'unbounded' or 'iteration_limit'."""
        opt = self.opt
        movable = (self.ub - self.lb) > 0
        while True:
            if self.iters >= self.cap:
                return "iteration_limit"
            d, _ = self._reduced(c)
            st = self.status
            viol = np.zeros(self.total)
            low = (st == BasisStatus.AT_LOWER) & movable
            upp = (st == BasisStatus.AT_UPPER) & movable
            fre = st == BasisStatus.FREE
            viol[low] = -d[low]
            viol[upp] = d[upp]
            viol[fre] = np.abs(d[fre])
            eligible = viol > opt.reduced_cost_tol
            if not eligible.any():
                return "optimal"
            if self.bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(viol))
            direction = 1.0
            if st[j] == BasisStatus.AT_UPPER or (st[j] == BasisStatus.FREE and d[j] > 0):
                direction = -1.0

            w = self.binv @ self.A[:, j]
            g = -direction * w
            xb = self.x[self.basic]
            lbb = self.lb[self.basic]
            ubb = self.ub[self.basic]
            t_row = np.full(self.m, INFINITY)
            falling = g < -opt.pivot_tol
            rising = g > opt.pivot_tol
            with np.errstate(invalid="ignore"):
                t_row[falling] = (xb[falling] - lbb[falling]) / (-g[falling])
                t_row[rising] = (ubb[rising] - xb[rising]) / g[rising]
            t_row = np.maximum(t_row, 0.0)
            t_rows_min = float(t_row.min()) if self.m else INFINITY
            t_bound = self.ub[j] - self.lb[j] if st[j] != BasisStatus.FREE else INFINITY

            t_star = min(t_rows_min, t_bound)
            if t_star == INFINITY:
                return "unbounded"

            if np.isfinite(t_bound) and t_bound <= t_rows_min + _TIE_EPS * (1.0 + t_bound):
                # bound flip: entering column jumps to its opposite bound
                self.x[self.basic] = xb + g * t_bound
                if st[j] == BasisStatus.AT_LOWER:
                    self.x[j] = self.ub[j]
                    self.status[j] = BasisStatus.AT_UPPER
                else:
                    self.x[j] = self.lb[j]
                    self.status[j] = BasisStatus.AT_LOWER
                self._note_step(t_bound)
                continue

            tie = t_row <= t_star + _TIE_EPS * (1.0 + abs(t_star))
            tie_rows = np.flatnonzero(tie)
            p = int(tie_rows[np.argmin(self.basic[tie_rows])])
            leaving = int(self.basic[p])

            self.x[self.basic] = xb + g * t_star
            self.x[j] = self.x[j] + direction * t_star
            if g[p] < 0:
                self.x[leaving] = self.lb[leaving]
                self.status[leaving] = BasisStatus.AT_LOWER
            else:
                self.x[leaving] = self.ub[leaving]
                self.status[leaving] = BasisStatus.AT_UPPER
            self.status[j] = BasisStatus.BASIC
            self.basic[p] = j
            self._eta_update(p, w)
            self._note_step(t_star)

    # -- dual simplex ------------------------------------------------------

    def _dual(self, c):
        """Restore primal feasibility keeping dual feasibility.

        Returns 'feasible', 'infeasible' or 'iteration_limit'.
        """
        opt = self.opt
        movable = (self.ub - self.lb) > 0
        dual_degenerate_run = 0
        bland = False
        while True:
            if self.iters >= self.cap:
                return "iteration_limit"
            xb = self.x[self.basic]
            lbb = self.lb[self.basic]
            ubb = self.ub[self.basic]
            below = lbb - xb
            above = xb - ubb
            viol = np.maximum(below, above)
            worst = float(viol.max()) if self.m else 0.0
            if worst <= self.opt.feas_tol:
                return "feasible"
            if bland:
                cand = np.flatnonzero(viol > self.opt.feas_tol)
                p = int(cand[np.argmin(self.basic[cand])])
            else:
                p = int(np.argmax(viol))
            leaving = int(self.basic[p])
            to_lower = below[p] >= above[p]

            alpha = self.binv[p] @ self.A
            d, _ = self._reduced(c)
            st = self.status
            # sign-eligible entering columns keep the new reduced costs feasible
            if to_lower:
                elig_low = (st == BasisStatus.AT_LOWER) & movable & (alpha < -opt.pivot_tol)
                elig_upp = (st == BasisStatus.AT_UPPER) & movable & (alpha > opt.pivot_tol)
            else:
                elig_low = (st == BasisStatus.AT_LOWER) & movable & (alpha > opt.pivot_tol)
                elig_upp = (st == BasisStatus.AT_UPPER) & movable & (alpha < -opt.pivot_tol)
            elig_fre = (st == BasisStatus.FREE) & (np.abs(alpha) > opt.pivot_tol)
            eligible = elig_low | elig_upp | elig_fre
            if not eligible.any():
                return "infeasible"
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.abs(d) / np.abs(alpha)
            ratios[~eligible] = INFINITY
            if bland:
                idx = np.flatnonzero(eligible)
                j = int(idx[0])
            else:
                rmin = float(ratios.min())
                tie = np.flatnonzero(ratios <= rmin + _TIE_EPS * (1.0 + rmin))
                j = int(tie[0])

            target = lbb[p] if to_lower else ubb[p]
            delta_b = target - xb[p]
            dz = delta_b / (-alpha[j])
            w = self.binv @ self.A[:, j]
            self.x[self.basic] = xb - w * dz
            entering_value = self.x[j] + dz
            self.x[leaving] = target
            self.status[leaving] = (BasisStatus.AT_LOWER if to_lower
                                    else BasisStatus.AT_UPPER)
            self.x[j] = entering_value
            self.status[j] = BasisStatus.BASIC
            self.basic[p] = j
            self._eta_update(p, w)
            self.iters += 1
            if abs(d[j]) <= opt.reduced_cost_tol:
                dual_degenerate_run += 1
                if dual_degenerate_run >= opt.bland_threshold:
                    bland = True
            else:
                dual_degenerate_run = 0
                bland = False

    # -- phases ------------------------------------------------------------

    def _cold_start(self):
        n, m = self.n, self.m
        for j in range(n):
            if self.lb[j] != -INFINITY:
                self.status[j] = BasisStatus.AT_LOWER
            elif self.ub[j] != INFINITY:
                self.status[j] = BasisStatus.AT_UPPER
            else:
                self.status[j] = BasisStatus.FREE
        self.status[n:n + m] = BasisStatus.AT_LOWER
        self._nonbasic_at_bounds()

        xs = self.x.copy()
        r = self.lp.row_rhs - self.A[:, :n] @ xs[:n]
        phase1_cost = np.zeros(self.total)
        need_phase1 = False
        for i in range(m):
            s = n + i
            art = n + m + i
            if self.lb[s] - 1e-12 <= r[i] <= self.ub[s] + 1e-12:
                self.basic[i] = s
                self.status[s] = BasisStatus.BASIC
                self.x[s] = r[i]
            else:
                clamped = min(max(r[i], self.lb[s]), self.ub[s])
                self.status[s] = (BasisStatus.AT_LOWER if clamped == self.lb[s]
                                  else BasisStatus.AT_UPPER)
                self.x[s] = clamped
                resid = r[i] - clamped
                sigma = 1.0 if resid > 0 else -1.0
                self.A[i, art] = sigma
                self.ub[art] = INFINITY
                self.basic[i] = art
                self.status[art] = BasisStatus.BASIC
                self.x[art] = abs(resid)
                phase1_cost[art] = 1.0
                need_phase1 = True
        self.binv = np.eye(m)
        for i in range(m):
            art = n + m + i
            if self.basic[i] == art and self.A[i, art] < 0:
                self.binv[i, i] = -1.0
        return need_phase1, phase1_cost

    def _drop_artificials(self):
        n, m = self.n, self.m
        arts = np.arange(n + m, n + 2 * m)
        self.ub[arts] = 0.0
        self.lb[arts] = 0.0
        for i in range(m):
            leaving = int(self.basic[i])
            if leaving < n + m:
                continue
            # pivot the leftover artificial out on any usable column
            row = self.binv[i] @ self.A[:, :n + m]
            row[self.status[:n + m] == BasisStatus.BASIC] = 0.0
            usable = np.flatnonzero(np.abs(row) > self.opt.pivot_tol)
            if usable.size == 0:
                # redundant row: the fixed artificial stays basic at zero
                self.x[leaving] = 0.0
                continue
            j = int(usable[0])
            w = self.binv @ self.A[:, j]
            self.status[leaving] = BasisStatus.AT_LOWER
            self.x[leaving] = 0.0
            self.status[j] = BasisStatus.BASIC
            self.basic[i] = j
            self._eta_update(i, w)
            self._recompute_basics()
            self.iters += 1

    def _try_warm(self, warm):
        n, m = self.n, self.m
        st = np.full(self.total, BasisStatus.AT_LOWER, dtype=np.int8)
        st[:n] = warm.var_status
        st[n:n + m] = warm.row_status
        if int((st[:n + m] == BasisStatus.BASIC).sum()) != m:
            return False
        for j in range(n + m):
            if st[j] == BasisStatus.AT_LOWER and self.lb[j] == -INFINITY:
                if self.ub[j] != INFINITY:
                    st[j] = BasisStatus.AT_UPPER
                else:
                    st[j] = BasisStatus.FREE
            elif st[j] == BasisStatus.AT_UPPER and self.ub[j] == INFINITY:
                if self.lb[j] != -INFINITY:
                    st[j] = BasisStatus.AT_LOWER
                else:
                    st[j] = BasisStatus.FREE
            elif st[j] == BasisStatus.FREE and (self.lb[j] != -INFINITY
                                                or self.ub[j] != INFINITY):
                st[j] = (BasisStatus.AT_LOWER if self.lb[j] != -INFINITY
                         else BasisStatus.AT_UPPER)
        self.status = st
        self.basic = np.flatnonzero(st[:n + m] == BasisStatus.BASIC).astype(np.int64)
        self._nonbasic_at_bounds()
        try:
            self._refactor()
        except np.linalg.LinAlgError:
            return False
        if not np.isfinite(self.x[self.basic]).all():
            return False
        xb = self.x[self.basic]
        feasible = (np.all(xb >= self.lb[self.basic] - self.opt.feas_tol)
                    and np.all(xb <= self.ub[self.basic] + self.opt.feas_tol))
        if feasible:
            return True
        d, _ = self._reduced(self.c)
        movable = (self.ub - self.lb) > 0
        bad_low = (st == BasisStatus.AT_LOWER) & movable & (d < -self.opt.reduced_cost_tol)
        bad_upp = (st == BasisStatus.AT_UPPER) & movable & (d > self.opt.reduced_cost_tol)
        bad_fre = (st == BasisStatus.FREE) & (np.abs(d) > self.opt.reduced_cost_tol)
        if bad_low.any() or bad_upp.any() or bad_fre.any():
            return False
        outcome = self._dual(self.c)
        if outcome == "infeasible":
            raise _DualInfeasible
        if outcome == "iteration_limit":
            raise _CapHit
        return True

    # -- driver ------------------------------------------------------------

    def run(self, warm):
        warm_ok = False
        if warm is not None and warm.var_status.shape == (self.n,) \
                and warm.row_status.shape == (self.m,):
            try:
                warm_ok = self._try_warm(warm)
            except _DualInfeasible:
                return self._finish(LpStatus.INFEASIBLE)
            except _CapHit:
                return self._finish(LpStatus.ITERATION_LIMIT)
        if not warm_ok:
            self.status[:] = BasisStatus.AT_LOWER
            need_phase1, phase1_cost = self._cold_start()
            if need_phase1:
                outcome = self._primal(phase1_cost)
                if outcome == "iteration_limit":
                    return self._finish(LpStatus.ITERATION_LIMIT)
                infeas_mass = float(self.x[self.n + self.m:].sum())
                scale = 1.0 + float(np.abs(self.lp.row_rhs).max(initial=0.0))
                if infeas_mass > self.opt.feas_tol * scale:
                    return self._finish(LpStatus.INFEASIBLE)
                self._drop_artificials()

        outcome = self._primal(self.c)
        if outcome == "iteration_limit":
            return self._finish(LpStatus.ITERATION_LIMIT)
        if outcome == "unbounded":
            return self._finish(LpStatus.UNBOUNDED)
        # guard against drift: refactor once and re-check
        self._refactor()
        xb = self.x[self.basic]
        ok = (np.all(xb >= self.lb[self.basic] - self.opt.feas_tol)
              and np.all(xb <= self.ub[self.basic] + self.opt.feas_tol))
        if not ok:
            if self._dual(self.c) != "feasible":
                return self._finish(LpStatus.INFEASIBLE)
            outcome = self._primal(self.c)
            if outcome == "unbounded":
                return self._finish(LpStatus.UNBOUNDED)
            if outcome == "iteration_limit":
                return self._finish(LpStatus.ITERATION_LIMIT)
        return self._finish(LpStatus.OPTIMAL)

    def _finish(self, status):
        n, m = self.n, self.m
        primal = self.x[:n].copy()
        if status in (LpStatus.OPTIMAL, LpStatus.ITERATION_LIMIT):
            y = self._duals(self.c)
            d = self.c[:n] - self.A[:, :n].T @ y
            d[self.status[:n] == BasisStatus.BASIC] = 0.0
            objective = float(np.dot(self.lp.objective, primal))
        else:
            y = np.zeros(m)
            d = np.zeros(n)
            objective = INFINITY if status == LpStatus.INFEASIBLE else -INFINITY
        basis = LpBasis(self.status[:n].copy(), self.status[n:n + m].copy())
        return LpSolution(status, primal, y, d, basis, objective, self.iters)


class _DualInfeasible(Exception):
    pass


class _CapHit(Exception):
    pass
