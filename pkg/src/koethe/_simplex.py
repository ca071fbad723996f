"""Self-contained bounded-variable revised simplex with Bland's rule.

Solves   min c.x   s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  lb <= x <= ub

with all bounds finite (callers cap free variables at a large box).  The
implementation is dense and sized for the small cutting-plane masters used
elsewhere in the package: a few hundred rows at most.  Bland's smallest
index rule is used for both the entering and the leaving choice, which
rules out cycling; the basis inverse is maintained by eta updates with a
periodic refactorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_AT_LB, _AT_UB, _BASIC = 0, 1, 2
_TOL = 1e-9
_REFACTOR_EVERY = 60


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "iteration_limit"
    x: np.ndarray | None
    objective: float


class _Tableau:
    def __init__(self, a, b, lb, ub):
        self.a = a
        self.b = b
        self.lb = lb
        self.ub = ub
        self.m, self.n = a.shape
        self.status = np.full(self.n, _AT_LB, dtype=int)
        self.basis = np.zeros(self.m, dtype=int)
        self.binv = np.eye(self.m)
        self.pivots = 0

    def refactor(self):
        self.binv = np.linalg.inv(self.a[:, self.basis])

    def nonbasic_values(self):
        xn = np.where(self.status == _AT_UB, self.ub, self.lb)
        xn[self.status == _BASIC] = 0.0
        return xn

    def basic_values(self):
        xn = self.nonbasic_values()
        rhs = self.b - self.a @ xn
        return self.binv @ rhs

    def solution(self):
        x = self.nonbasic_values()
        x[self.basis] = self.basic_values()
        return x

    def simplex(self, c, max_iter=20000):
        """Run bounded simplex on objective c; returns 'optimal' or raises."""
        for _ in range(max_iter):
            if self.pivots and self.pivots % _REFACTOR_EVERY == 0:
                self.refactor()
            xb = self.basic_values()
            y = c[self.basis] @ self.binv
            entering = -1
            direction = 0.0
            for j in range(self.n):
                if self.status[j] == _BASIC:
                    continue
                rc = c[j] - y @ self.a[:, j]
                if self.status[j] == _AT_LB and rc < -_TOL:
                    entering, direction = j, 1.0
                    break
                if self.status[j] == _AT_UB and rc > _TOL:
                    entering, direction = j, -1.0
                    break
            if entering < 0:
                return "optimal"
            d = self.binv @ self.a[:, entering]
            # entering moves by t*direction; basics move by -t*direction*d
            t_best = self.ub[entering] - self.lb[entering]
            leave_pos, leave_to = -1, _AT_LB
            for i in range(self.m):
                delta = -direction * d[i]
                if delta < -_TOL:  # basic decreases toward its lower bound
                    t = (xb[i] - self.lb[self.basis[i]]) / (-delta)
                    hit = _AT_LB
                elif delta > _TOL:  # basic increases toward its upper bound
                    t = (self.ub[self.basis[i]] - xb[i]) / delta
                    hit = _AT_UB
                else:
                    continue
                if t < t_best - _TOL or (
                    t < t_best + _TOL
                    and leave_pos >= 0
                    and self.basis[i] < self.basis[leave_pos]
                ):
                    t_best, leave_pos, leave_to = max(t, 0.0), i, hit
            if not np.isfinite(t_best):
                raise RuntimeError("unbounded direction despite finite bounds")
            if leave_pos < 0:
                # bound flip, basis unchanged
                self.status[entering] = _AT_UB if self.status[entering] == _AT_LB else _AT_LB
                continue
            leaving = self.basis[leave_pos]
            self.basis[leave_pos] = entering
            self.status[entering] = _BASIC
            self.status[leaving] = leave_to
            # eta update of binv
            piv = d[leave_pos]
            if abs(piv) < 1e-12:
                self.refactor()
                continue
            self.binv[leave_pos, :] /= piv
            for i in range(self.m):
                if i != leave_pos and abs(d[i]) > 0:
                    self.binv[i, :] -= d[i] * self.binv[leave_pos, :]
            self.pivots += 1
        return "iteration_limit"


def solve_lp(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    lb=None,
    ub=None,
    maximize=False,
) -> LPResult:
    """Solve the bounded LP; see the module docstring for the conventions."""
    c = np.asarray(c, dtype=float)
    n = c.size
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, 1e9) if ub is None else np.asarray(ub, dtype=float)
    if maximize:
        c = -c
    rows = []
    rhs = []
    slack_count = 0
    if a_ub is not None and len(a_ub):
        a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
        rows.append(a_ub)
        rhs.append(np.asarray(b_ub, dtype=float))
        slack_count = a_ub.shape[0]
    if a_eq is not None and len(a_eq):
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
        rows.append(a_eq)
        rhs.append(np.asarray(b_eq, dtype=float))
    if not rows:
        x = np.where(c > 0, lb, ub)
        return LPResult("optimal", x, float(c @ x) * (-1 if maximize else 1))
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    m = a.shape[0]
    if slack_count:
        slack_block = np.zeros((m, slack_count))
        slack_block[:slack_count, :] = np.eye(slack_count)
        a = np.hstack([a, slack_block])
        lb = np.concatenate([lb, np.zeros(slack_count)])
        ub = np.concatenate([ub, np.full(slack_count, 1e12)])
    n_real = a.shape[1]

    # phase 1: artificials close the residual at the all-lower starting point
    x0 = lb.copy()
    res = b - a @ x0
    sign = np.where(res >= 0, 1.0, -1.0)
    a1 = np.hstack([a, np.diag(sign)])
    lb1 = np.concatenate([lb, np.zeros(m)])
    ub1 = np.concatenate([ub, np.full(m, 1e15)])
    tab = _Tableau(a1, b, lb1, ub1)
    tab.basis = np.arange(n_real, n_real + m)
    tab.status[tab.basis] = _BASIC
    tab.binv = np.diag(sign)
    c1 = np.concatenate([np.zeros(n_real), np.ones(m)])
    st = tab.simplex(c1)
    if st != "optimal":
        return LPResult("iteration_limit", None, np.nan)
    x_full = tab.solution()
    if float(c1 @ x_full) > 1e-6:
        return LPResult("infeasible", None, np.nan)
    # pin artificials to zero and pivot out any that stayed basic
    tab.ub[n_real:] = 0.0
    for pos in range(tab.m):
        if tab.basis[pos] >= n_real:
            d_row = tab.binv[pos, :] @ tab.a[:, :n_real]
            cand = np.nonzero((np.abs(d_row) > 1e-7) & (tab.status[:n_real] != _BASIC))[0]
            if cand.size:
                j = int(cand[0])
                old = tab.basis[pos]
                tab.basis[pos] = j
                tab.status[j] = _BASIC
                tab.status[old] = _AT_LB
                tab.refactor()
    c2 = np.concatenate([c, np.zeros(n_real - n + m)])
    st = tab.simplex(c2)
    if st != "optimal":
        return LPResult("iteration_limit", None, np.nan)
    x_full = tab.solution()
    x = x_full[:n]
    obj = float(c @ x)
    return LPResult("optimal", x, -obj if maximize else obj)
