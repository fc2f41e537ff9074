"""Small bounded integer linear programs.

Problems are solved with HiGHS through :func:`scipy.optimize.milp`; every
returned point is re-checked in exact integer arithmetic before it is
reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import LinearConstraint, Bounds, milp

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class IlpProblem:
    """``minimize c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
    ``lb <= x <= ub``, ``x`` integer.

    ``c = None`` asks for any feasible point.  All data are integers and
    every variable must have finite bounds.
    """

    nvars: int
    c: list[int] | None
    A_ub: list[list[int]]
    b_ub: list[int]
    A_eq: list[list[int]]
    b_eq: list[int]
    lb: list[int]
    ub: list[int]

    def __post_init__(self):
        if len(self.lb) != self.nvars or len(self.ub) != self.nvars:
            raise ValueError("bounds must be given for every variable")
        for lo, hi in zip(self.lb, self.ub):
            if lo is None or hi is None or not np.isfinite(lo) or not np.isfinite(hi):
                raise ValueError("unbounded variables are not supported")
        for A, b in ((self.A_ub, self.b_ub), (self.A_eq, self.b_eq)):
            if len(A) != len(b) or any(len(r) != self.nvars for r in A):
                raise ValueError("constraint shapes do not match")
        if self.c is not None and len(self.c) != self.nvars:
            raise ValueError("objective has the wrong length")

    def is_feasible(self, x) -> bool:
        """Exact integer check of a candidate point."""
        x = [int(v) for v in x]
        if len(x) != self.nvars:
            return False
        if any(v < lo or v > hi for v, lo, hi in zip(x, self.lb, self.ub)):
            return False
        for row, b in zip(self.A_ub, self.b_ub):
            if sum(a * v for a, v in zip(row, x)) > b:
                return False
        for row, b in zip(self.A_eq, self.b_eq):
            if sum(a * v for a, v in zip(row, x)) != b:
                return False
        return True

    def objective(self, x) -> int:
        if self.c is None:
            return 0
        return sum(int(a) * int(v) for a, v in zip(self.c, x))


@dataclass
class IlpResult:
    status: str
    x: tuple[int, ...] | None
    objective: int | None


def solve_ilp(prob: IlpProblem, time_limit: float | None = 30.0) -> IlpResult:
    """Solve ``prob``; ``time_limit`` in seconds bounds the search.

    Statuses: ``optimal`` (proven optimum), ``feasible`` (a verified point:
    the answer to a problem without objective, or the incumbent when the
    time limit stopped the proof), ``infeasible`` and ``budget_exceeded``
    (time limit hit before any point was found).
    """
    n = prob.nvars
    c = np.zeros(n) if prob.c is None else np.asarray(prob.c, dtype=float)
    cons = []
    if prob.A_ub:
        cons.append(LinearConstraint(np.asarray(prob.A_ub, dtype=float), -np.inf, np.asarray(prob.b_ub, dtype=float)))
    if prob.A_eq:
        beq = np.asarray(prob.b_eq, dtype=float)
        cons.append(LinearConstraint(np.asarray(prob.A_eq, dtype=float), beq, beq))
    # HiGHS presolve returns wrong optima on some tiny programs; they are
    # small enough to solve without it
    opts = {"mip_rel_gap": 0.0, "disp": False, "presolve": False}
    if time_limit is not None:
        opts["time_limit"] = float(time_limit)
    res = milp(c, constraints=cons, integrality=np.ones(n), bounds=Bounds(prob.lb, prob.ub), options=opts)
    if res.status == 2:
        return IlpResult(INFEASIBLE, None, None)
    if res.x is None:
        return IlpResult(BUDGET_EXCEEDED, None, None)
    x = tuple(int(round(v)) for v in res.x)
    if not prob.is_feasible(x):
        raise ArithmeticError("solver point failed exact verification")
    if prob.c is None:
        return IlpResult(FEASIBLE, x, 0)
    return IlpResult(OPTIMAL if res.status == 0 else FEASIBLE, x, prob.objective(x))


def solve_ilp_bruteforce(prob: IlpProblem, max_points: int = 10**6) -> IlpResult:
    """Enumerate the whole box.  Reference solver for small problems."""
    size = 1
    for lo, hi in zip(prob.lb, prob.ub):
        size *= int(hi) - int(lo) + 1
    if size > max_points:
        raise ValueError("box too large for enumeration")
    best = None
    best_obj = None
    for x in itertools.product(*[range(int(lo), int(hi) + 1) for lo, hi in zip(prob.lb, prob.ub)]):
        if not prob.is_feasible(x):
            continue
        if prob.c is None:
            return IlpResult(FEASIBLE, tuple(x), 0)
        o = prob.objective(x)
        if best_obj is None or o < best_obj:
            best, best_obj = tuple(x), o
    if best is None:
        return IlpResult(INFEASIBLE, None, None)
    return IlpResult(OPTIMAL, best, best_obj)


def lp_relaxation_feasible(prob: IlpProblem, free_bounds: bool = True) -> bool:
    """Whether the continuous relaxation has a point.  With ``free_bounds``
    the variable box is dropped."""
    n = prob.nvars
    cons = []
    if prob.A_ub:
        cons.append(LinearConstraint(np.asarray(prob.A_ub, dtype=float), -np.inf, np.asarray(prob.b_ub, dtype=float)))
    if prob.A_eq:
        beq = np.asarray(prob.b_eq, dtype=float)
        cons.append(LinearConstraint(np.asarray(prob.A_eq, dtype=float), beq, beq))
    bounds = Bounds(-np.inf, np.inf) if free_bounds else Bounds(prob.lb, prob.ub)
    res = milp(np.zeros(n), constraints=cons, integrality=np.zeros(n), bounds=bounds, options={"presolve": False})
    return res.status == 0
