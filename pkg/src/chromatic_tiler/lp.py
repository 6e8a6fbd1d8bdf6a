"""Dense two-phase tableau simplex for the small LPs used in the pipeline.

Problems are stated as

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

Entering variables follow Dantzig's rule. Each phase first runs on a right-hand
side with small fixed offsets, which removes most degeneracy, and then
finishes on the exact data. A run of degenerate pivots switches to Bland's
rule (smallest index for entering and leaving variable) so the method cannot
cycle. The tableau is periodically rebuilt from the original data to stop
rounding drift. Problems with ``c >= 0`` and only inequality rows start from
the slack basis with the dual simplex instead, which avoids artificial
variables. Everything is deterministic.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg.blas import dger

EPS_LP = 1e-9
_PIVOT_TOL = 1e-9
_ELEMENT_TOL = 1e-7
_DEGENERATE_STREAK = 50
_PERTURB = 1e-7
_FEAS_TOL = 1e-9
_HARRIS_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPProblem:
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    @classmethod
    def build(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
        b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
        A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
        b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
        if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
            raise ValueError("constraint matrix and right-hand side sizes differ")
        return cls(c, A_ub, b_ub, A_eq, b_eq)


@dataclass
class LPSolution:
    status: str
    x: np.ndarray | None = None
    value: float | None = None
    y_ub: np.ndarray | None = None
    y_eq: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Tableau:
    """Row-reduced tableau [B^-1 A | B^-1 b] plus a reduced-cost row.

    The tableau is rebuilt from the original data every ``refactor`` pivots
    so rounding drift cannot accumulate.
    """

    def __init__(self, A, b, basis, blocked, refactor=64):
        self.A = A
        self.b = b
        self.basis = basis
        self.blocked = blocked
        self.refactor_every = refactor
        self.iterations = 0
        self.cost = np.zeros(A.shape[1])
        self.T = np.zeros((A.shape[0] + 1, A.shape[1] + 1))
        self.refactor()

    def refactor(self):
        A, m = self.A, self.A.shape[0]
        B = A[:, self.basis]
        self.T[:m] = np.linalg.solve(B, np.hstack([A, self.b[:, None]]))
        self.T[:m, self.basis] = np.eye(m)
        self.T[m, :-1] = self.cost - self.cost[self.basis] @ self.T[:m, :-1]
        self.T[m, -1] = -self.cost[self.basis] @ self.T[:m, -1]
        self._since = 0

    def set_objective(self, cost):
        self.cost = np.asarray(cost, dtype=float)
        self.refactor()

    def set_rhs(self, b):
        self.b = b
        self.refactor()

    def drop_rows(self, alive):
        self.A = self.A[alive]
        self.b = self.b[alive]
        self.basis = self.basis[alive]
        self.T = np.zeros((self.A.shape[0] + 1, self.A.shape[1] + 1))
        self.refactor()

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        # 0/1 covering data keep the pivot row and column sparse
        rows = np.flatnonzero(col)
        cols = np.flatnonzero(T[r])
        if rows.size * cols.size < 0.05 * T.size:
            T[np.ix_(rows, cols)] -= np.outer(col[rows], T[r, cols])
        else:
            # in-place rank-one update on the Fortran view of T
            dger(-1.0, T[r], col, a=T.T, overwrite_a=True)
        T[rows, j] = 0.0
        self.basis[r] = j
        self.iterations += 1
        self._since += 1
        if self._since >= self.refactor_every:
            self.refactor()

    def run(self, max_iter):
        m = self.T.shape[0] - 1
        bland = False
        streak = 0
        while True:
            T = self.T
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex exceeded {max_iter} iterations")
            red = T[m, :-1].copy()
            red[self.blocked] = 0.0
            candidates = np.flatnonzero(red < -_PIVOT_TOL)
            if candidates.size == 0:
                return OPTIMAL
            j = candidates[0] if bland else candidates[np.argmin(red[candidates])]
            col = T[:m, j]
            rows = np.flatnonzero(col > _ELEMENT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            rhs = np.maximum(T[rows, -1], 0.0)
            ratios = rhs / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + _PIVOT_TOL * max(1.0, abs(best))]
            if bland:
                r = tied[np.argmin(self.basis[tied])]
            else:
                r = tied[np.argmax(col[tied])]
            if T[r, -1] <= _PIVOT_TOL:
                streak += 1
                if streak >= _DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(r, j)

    def run_dual(self, max_iter):
        """Dual simplex from a dual feasible basis until primal feasibility."""
        m = self.T.shape[0] - 1
        bland = False
        streak = 0
        while True:
            T = self.T
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex exceeded {max_iter} iterations")
            rhs = T[:m, -1]
            neg = np.flatnonzero(rhs < -_FEAS_TOL)
            if neg.size == 0:
                return OPTIMAL
            if bland:
                r = neg[np.argmin(self.basis[neg])]
            else:
                # dual steepest edge: infeasibility over the norm of the row of B^-1
                Binv = T[:m, self.slack_cols[0] : self.slack_cols[-1] + 1]
                weight = np.einsum("ij,ij->i", Binv, Binv)
                r = neg[np.argmax(rhs[neg] ** 2 / weight[neg])]
            row = T[r, :-1].copy()
            row[self.blocked] = 0.0
            cand = np.flatnonzero(row < -_ELEMENT_TOL)
            if cand.size == 0:
                return INFEASIBLE
            d = np.maximum(T[m, cand], 0.0)
            alpha = -row[cand]
            if bland:
                ratios = d / alpha
                best = ratios.min()
                j = cand[np.flatnonzero(ratios <= best + _PIVOT_TOL * max(1.0, best))[0]]
            else:
                # Harris: widest step within tolerance, then the largest pivot under it
                limit = ((d + _HARRIS_TOL) / alpha).min()
                ok = np.flatnonzero(d / alpha <= limit)
                k = ok[np.argmax(alpha[ok])]
                j, best = cand[k], d[k] / alpha[k]
            if best <= _PIVOT_TOL:
                streak += 1
                if streak >= _DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(r, j)


def _perturbation(m):
    # fixed, distinct offsets make ties in the ratio test unlikely
    rng = np.random.default_rng(20240601)
    return _PERTURB * (1.0 + rng.random(m))


def _phase(tab, b, max_iter):
    """Run on a perturbed right-hand side, then restore it and finish.

    If the restored basis is primal infeasible the phase restarts from its
    starting basis on the exact data.
    """
    start = tab.basis.copy()
    tab.set_rhs(b + _perturbation(len(b)))
    status = tab.run(max_iter)
    tab.set_rhs(b)
    if status != OPTIMAL:
        return status
    m = tab.T.shape[0] - 1
    if tab.T[:m, -1].min() < -_FEAS_TOL * max(1.0, np.abs(b).max()):
        tab.basis[:] = start
        tab.refactor()
    return tab.run(max_iter)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=200000):
    """Solve a small dense LP; returns an ``LPSolution``.

    Dual values follow ``y = c_B B^-1`` so that for an optimal solution
    ``b_ub @ y_ub + b_eq @ y_eq == c @ x`` (``y_ub <= 0``).
    """
    prob = LPProblem.build(c, A_ub, b_ub, A_eq, b_eq)
    if prob.b_eq.size == 0 and prob.c.min(initial=0.0) >= 0 and prob.b_ub.min(initial=0.0) < 0:
        return _solve_dual_start(prob, max_iter)
    n = prob.c.size
    m_ub, m_eq = prob.b_ub.size, prob.b_eq.size
    m = m_ub + m_eq

    A = np.vstack([prob.A_ub, prob.A_eq])
    b = np.concatenate([prob.b_ub, prob.b_eq])
    sign = np.where(b < 0, -1.0, 1.0)

    # column layout: x | slack per ub row | artificial per row needing one
    needs_art = np.concatenate([prob.b_ub < 0, np.ones(m_eq, dtype=bool)])
    art_rows = np.flatnonzero(needs_art)
    n_cols = n + m_ub + art_rows.size
    S = np.zeros((m, n_cols))
    S[:, :n] = A * sign[:, None]
    rhs = b * sign
    unit_col = np.empty(m, dtype=int)
    basis = np.empty(m, dtype=int)
    for i in range(m_ub):
        S[i, n + i] = sign[i]
    for a, i in enumerate(art_rows):
        S[i, n + m_ub + a] = 1.0
        unit_col[i] = basis[i] = n + m_ub + a
    for i in range(m_ub):
        if not needs_art[i]:
            unit_col[i] = basis[i] = n + i

    art_cols = np.arange(n + m_ub, n_cols)
    blocked = np.zeros(n_cols, dtype=bool)
    refactor = max(32, min(256, m // 4))
    tab = _Tableau(S, rhs, basis, blocked, refactor)
    alive = np.ones(m, dtype=bool)

    if art_rows.size:
        cost1 = np.zeros(n_cols)
        cost1[art_cols] = 1.0
        tab.cost = cost1
        _phase(tab, rhs, max_iter)
        if tab.T[-1, -1] < -EPS_LP * max(1.0, np.abs(b).max()):
            return LPSolution(INFEASIBLE, iterations=tab.iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        for r in range(m):
            if tab.basis[r] in art_cols:
                row = np.abs(tab.T[r, : n + m_ub])
                nz = np.flatnonzero(row > _ELEMENT_TOL)
                if nz.size:
                    tab.pivot(r, nz[np.argmax(row[nz])])
                else:
                    alive[r] = False
        if not alive.all():
            tab.drop_rows(alive)
        blocked[art_cols] = True

    cost2 = np.zeros(n_cols)
    cost2[:n] = prob.c
    tab.cost = cost2
    status = _phase(tab, rhs[alive], max_iter)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, iterations=tab.iterations)
    return _extract(tab, prob, n_cols, unit_col, sign, alive)


def _solve_dual_start(prob, max_iter):
    """``c >= 0`` with inequality rows only: the slack basis is dual feasible,
    so the dual simplex needs no artificial variables."""
    n, m = prob.c.size, prob.b_ub.size
    S = np.hstack([prob.A_ub, np.eye(m)])
    basis = np.arange(n, n + m)
    tab = _Tableau(S, prob.b_ub.copy(), basis, np.zeros(n + m, dtype=bool), max(32, min(256, m // 4)))
    tab.slack_cols = np.arange(n, n + m)
    cost = np.zeros(n + m)
    cost[:n] = prob.c + _perturbation(n)
    tab.set_objective(cost)
    if tab.run_dual(max_iter) == INFEASIBLE:
        return LPSolution(INFEASIBLE, iterations=tab.iterations)
    cost[:n] = prob.c
    tab.set_objective(cost)
    if tab.run(max_iter) == UNBOUNDED:
        return LPSolution(UNBOUNDED, iterations=tab.iterations)
    return _extract(tab, prob, n + m, np.arange(n, n + m), np.ones(m), np.ones(m, dtype=bool))


def _extract(tab, prob, n_cols, unit_col, sign, alive):
    n = prob.c.size
    m_ub = prob.b_ub.size
    m = unit_col.size
    T = tab.T
    rows = T.shape[0] - 1
    x_full = np.zeros(n_cols)
    x_full[tab.basis] = np.maximum(T[:rows, -1], 0.0)
    x = x_full[:n]
    red = T[rows, :-1]
    y = np.zeros(m)
    y[alive] = (-red[unit_col] * sign)[alive]
    return LPSolution(
        OPTIMAL,
        x=x,
        value=float(prob.c @ x),
        y_ub=y[:m_ub],
        y_eq=y[m_ub:],
        iterations=tab.iterations,
    )


def check_certificate(sol, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, eps=EPS_LP):
    """Primal feasibility and duality-gap residuals of an optimal solution.

    Returns ``(max_violation, gap)``; both are within ``eps`` (scaled by the
    problem magnitude) for a trustworthy solution.
    """
    prob = LPProblem.build(c, A_ub, b_ub, A_eq, b_eq)
    x = sol.x
    viol = max(0.0, -x.min(initial=0.0))
    if prob.b_ub.size:
        viol = max(viol, (prob.A_ub @ x - prob.b_ub).max())
    if prob.b_eq.size:
        viol = max(viol, np.abs(prob.A_eq @ x - prob.b_eq).max())
    dual = prob.b_ub @ sol.y_ub + prob.b_eq @ sol.y_eq
    gap = abs(sol.value - dual)
    return viol, gap
