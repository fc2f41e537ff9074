"""Redundant measurement rows that break termatiko sets.

A redundant row ``r = alpha A`` (integer ``alpha``, ``r >= 0``) does not
change what the measurements determine, but it changes the Tanner graph.
Appending rows never creates termatiko sets; well chosen ones remove some.

Two row builders are provided for a termatiko set ``T`` with companion
set ``S``:

* pivot rows: for ``v0`` in ``T`` require ``r_v0 >= 1``, ``r = 0`` on the
  rest of ``T`` and on ``S``, ``r >= 0`` elsewhere, and minimize the row
  mass outside ``T`` and ``S``.  The new measurement sees ``T`` only at
  ``v0`` and misses ``S``, so ``T`` stops being termatiko.
* companion rows: ``r = 0`` on ``T``, ``0 <= r <= 1000`` elsewhere and
  ``sum_S r >= 10 |S|``.  This pushes nodes out of ``S`` and may break
  ``T``.

:func:`greedy_extend` adjoins rows one at a time, each time the pooled row
that removes the most (size weighted) listed termatiko sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import ilp
from .tanner import MeasurementMatrix, as_variable_set, binarize
from .termatiko_sets import companion_sets, is_termatiko_structural

PIVOT = "pivot"
COMPANION = "companion"

DEFAULT_COEFF_BOUND = 8
COMPANION_CAP = 1000
COMPANION_MASS = 10

OK = "ok"
BOX_INFEASIBLE = "box_infeasible"
NOT_APPLICABLE = "not_applicable"


@dataclass
class RedundantRowCandidate:
    """Outcome of one row builder.

    ``status`` is ``ok``, ``infeasible`` (no row exists for any integer
    coefficients), ``box_infeasible`` (none within the coefficient box),
    ``budget_exceeded`` or ``not_applicable`` (companion row with empty
    ``S``).  ``row`` maps columns to positive integer entries.
    """

    kind: str
    T: tuple[int, ...]
    pivot: int | None
    status: str
    coefficients: tuple[int, ...] | None = None
    row: dict[int, int] | None = None
    objective: int | None = None

    def dense(self, n: int) -> list[int]:
        out = [0] * n
        for k, v in (self.row or {}).items():
            out[k] = v
        return out


def _int_matrix(mat: MeasurementMatrix):
    if not mat.is_integer:
        raise ValueError("redundant rows need an integer matrix")
    A = [[0] * mat.n for _ in range(mat.m)]
    for (c, v), w in mat.entries().items():
        A[c][v] = int(w)
    return A


def _combine(A, alpha, n):
    row = {}
    for v in range(n):
        s = sum(a[v] * x for a, x in zip(A, alpha))
        if s < 0:
            raise ArithmeticError("combination has a negative entry")
        if s:
            row[v] = s
    return row


def _solve(prob, A, n, kind, T, pivot, time_limit):
    res = ilp.solve_ilp(prob, time_limit=time_limit)
    if res.status in (ilp.OPTIMAL, ilp.FEASIBLE):
        return RedundantRowCandidate(kind, T, pivot, OK, res.x, _combine(A, res.x, n), res.objective)
    if res.status == ilp.INFEASIBLE:
        # tell a truly impossible row from one outside the coefficient box
        status = ilp.INFEASIBLE if not ilp.lp_relaxation_feasible(prob) else BOX_INFEASIBLE
        return RedundantRowCandidate(kind, T, pivot, status)
    return RedundantRowCandidate(kind, T, pivot, res.status)


def pivot_row_problem(mat: MeasurementMatrix, T, v0: int, bound: int = DEFAULT_COEFF_BOUND) -> ilp.IlpProblem:
    """Integer program of the pivot row for ``(T, v0)``; variables are the
    row coefficients ``alpha``."""
    T = as_variable_set(T, mat.n)
    if v0 not in T:
        raise ValueError("pivot must lie in T")
    cs = companion_sets(mat, T)
    A = _int_matrix(mat)
    inside = set(T) | set(cs.S)
    m = mat.m
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    c = [0] * m
    for v in range(mat.n):
        col = [A[k][v] for k in range(m)]
        if v == v0:
            A_ub.append([-x for x in col])
            b_ub.append(-1)
        elif v in inside:
            A_eq.append(col)
            b_eq.append(0)
        else:
            A_ub.append([-x for x in col])
            b_ub.append(0)
            c = [a + b for a, b in zip(c, col)]
    return ilp.IlpProblem(m, c, A_ub, b_ub, A_eq, b_eq, [-bound] * m, [bound] * m)


def companion_row_problem(mat: MeasurementMatrix, T, bound: int = DEFAULT_COEFF_BOUND) -> ilp.IlpProblem:
    """Feasibility program of the companion row for ``T``."""
    T = as_variable_set(T, mat.n)
    cs = companion_sets(mat, T)
    A = _int_matrix(mat)
    tset, sset = set(T), set(cs.S)
    m = mat.m
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    mass = [0] * m
    for v in range(mat.n):
        col = [A[k][v] for k in range(m)]
        if v in tset:
            A_eq.append(col)
            b_eq.append(0)
            continue
        A_ub.append([-x for x in col])
        b_ub.append(0)
        A_ub.append(col)
        b_ub.append(COMPANION_CAP)
        if v in sset:
            mass = [a + b for a, b in zip(mass, col)]
    A_ub.append([-x for x in mass])
    b_ub.append(-COMPANION_MASS * len(sset))
    return ilp.IlpProblem(m, None, A_ub, b_ub, A_eq, b_eq, [-bound] * m, [bound] * m)


def pivot_row(mat: MeasurementMatrix, T, v0: int, bound: int = DEFAULT_COEFF_BOUND,
              time_limit: float | None = 30.0) -> RedundantRowCandidate:
    T = as_variable_set(T, mat.n)
    prob = pivot_row_problem(mat, T, v0, bound)
    return _solve(prob, _int_matrix(mat), mat.n, PIVOT, T, v0, time_limit)


def companion_row(mat: MeasurementMatrix, T, bound: int = DEFAULT_COEFF_BOUND,
                  time_limit: float | None = 30.0) -> RedundantRowCandidate:
    T = as_variable_set(T, mat.n)
    if not companion_sets(mat, T).S:
        return RedundantRowCandidate(COMPANION, T, None, NOT_APPLICABLE)
    prob = companion_row_problem(mat, T, bound)
    return _solve(prob, _int_matrix(mat), mat.n, COMPANION, T, None, time_limit)


# -- greedy extension ----------------------------------------------------------

@dataclass
class ExtensionStep:
    row_index: int
    candidate: RedundantRowCandidate
    score: int
    removed: list[tuple[int, ...]]


@dataclass
class ExtensionResult:
    matrix: MeasurementMatrix
    steps: list[ExtensionStep] = field(default_factory=list)
    remaining: list[tuple[int, ...]] = field(default_factory=list)
    pool_size: int = 0

    @property
    def added_rows(self) -> list[dict[int, int]]:
        return [s.candidate.row for s in self.steps]


def build_pool(mat: MeasurementMatrix, sets, bound: int = DEFAULT_COEFF_BOUND,
               time_limit: float | None = 30.0) -> list[RedundantRowCandidate]:
    """Pivot rows for every member of every set, then its companion row.

    Only successful candidates are kept; duplicate rows are dropped.
    """
    pool = []
    seen = set()
    for T in sets:
        T = as_variable_set(T, mat.n)
        cands = [pivot_row(mat, T, v0, bound, time_limit) for v0 in T]
        cands.append(companion_row(mat, T, bound, time_limit))
        for cand in cands:
            if cand.status != OK:
                continue
            key = tuple(sorted(cand.row.items()))
            if key in seen:
                continue
            seen.add(key)
            pool.append(cand)
    return pool


def greedy_extend(mat: MeasurementMatrix, sets, max_rows: int | None = None,
                  bound: int = DEFAULT_COEFF_BOUND, pool: list | None = None,
                  time_limit: float | None = 30.0) -> ExtensionResult:
    """Adjoin redundant rows greedily until no listed set survives.

    Parameters
    ----------
    sets : list of variable sets
        Termatiko sets of ``mat`` to break.
    max_rows : int, optional
        Stop after this many rows.
    pool : list of RedundantRowCandidate, optional
        Precomputed candidates; built with :func:`build_pool` otherwise.

    Each round scores every pooled row by the total size of the listed
    sets it would remove, adjoins the best one (ties: lowest pool index)
    and drops the removed sets.  Stops when the list is empty, no row
    scores above zero, or ``max_rows`` is reached.
    """
    remaining = [as_variable_set(T, mat.n) for T in sets]
    if pool is None:
        pool = build_pool(mat, remaining, bound, time_limit)
    pool = list(pool)
    current = mat
    out = ExtensionResult(mat, pool_size=len(pool))
    while remaining and pool and (max_rows is None or len(out.steps) < max_rows):
        support = binarize(current)
        best = None
        for k, cand in enumerate(pool):
            trial = support.with_rows([{v: 1 for v in cand.row}])
            removed = [T for T in remaining if not is_termatiko_structural(trial, T)]
            score = sum(len(T) for T in removed)
            if best is None or score > best[0]:
                best = (score, k, removed)
        score, k, removed = best
        if score == 0:
            break
        cand = pool.pop(k)
        current = current.with_rows([cand.row])
        out.steps.append(ExtensionStep(current.m - 1, cand, score, removed))
        gone = set(removed)
        remaining = [T for T in remaining if T not in gone]
    out.matrix = current
    out.remaining = remaining
    return out


# -- no new termatiko sets -----------------------------------------------------

def _row_space_member(A: list[list[Fraction]], r: list[Fraction]) -> bool:
    """Exact test of ``r`` in the rational row space of ``A``."""
    basis: list[tuple[int, list[Fraction]]] = []
    for row in A:
        vec = [Fraction(x) for x in row]
        for piv, b in basis:
            if vec[piv]:
                f = vec[piv] / b[piv]
                vec = [x - f * y for x, y in zip(vec, b)]
        nz = next((i for i, x in enumerate(vec) if x), None)
        if nz is not None:
            basis.append((nz, vec))
    vec = [Fraction(x) for x in r]
    for piv, b in basis:
        if vec[piv]:
            f = vec[piv] / b[piv]
            vec = [x - f * y for x, y in zip(vec, b)]
    return not any(vec)


def is_redundant_extension(mat: MeasurementMatrix, ext: MeasurementMatrix) -> bool:
    """``ext`` starts with ``mat`` and every extra row is a nonnegative
    element of the row space of ``mat``."""
    if ext.n != mat.n or ext.m < mat.m:
        return False
    for c in range(mat.m):
        for v in range(mat.n):
            if ext.get(c, v) != mat.get(c, v):
                return False
    A = [[mat.get(c, v) for v in range(mat.n)] for c in range(mat.m)]
    for c in range(mat.m, ext.m):
        if not _row_space_member(A, [ext.get(c, v) for v in range(mat.n)]):
            return False
    return True


@dataclass
class NoNewSetsReport:
    holds: bool
    new_sets: list[tuple[int, ...]]
    checked: int
    max_size: int


def check_no_new_termatiko_sets(mat: MeasurementMatrix, ext: MeasurementMatrix, max_size: int) -> NoNewSetsReport:
    """Every termatiko set of ``ext`` with at most ``max_size`` members is
    also termatiko in ``mat``.

    ``ext`` must be a redundant extension of ``mat`` (checked exactly).
    """
    if not is_redundant_extension(mat, ext):
        raise ValueError("ext is not a nonnegative row-space extension of mat")
    new = []
    checked = 0
    base = binarize(mat)
    extb = binarize(ext)
    for k in range(1, max_size + 1):
        for T in itertools.combinations(range(mat.n), k):
            checked += 1
            if is_termatiko_structural(extb, T) and not is_termatiko_structural(base, T):
                new.append(T)
    return NoNewSetsReport(not new, new, checked, max_size)
