"""Splitting a stopping set into two termatiko sets.

A 2-coloring of a variable set ``D`` in which every measurement of
``N(D)`` sees both colors gives two termatiko halves: each half's
neighborhood is ``N(D)`` and the other half lies in its companion set.

:func:`split_once` grows such a coloring greedily.  Starting from a random
GREEN node it repeatedly takes a random colored node ``v`` and paints
opposite to ``v`` every uncolored ``u`` that shares a measurement ``c``
with ``v`` whose other ``D``-neighbors all carry ``v``'s color; those
colors are forced.  When nothing is forced a random uncolored node gets a
random color.  :func:`split_exhaustive` branches on both colors instead of
guessing and so lists every valid split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tanner import MeasurementMatrix, as_variable_set
from .termatiko_sets import is_termatiko_structural

GREEN = 0
RED = 1

SUCCESS = "success"
FAIL = "fail"


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; the stream for a given seed is platform independent."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class SplitOutcome:
    status: str
    T: tuple[int, ...]
    S: tuple[int, ...]
    seed: object
    random_guesses: int
    verified: bool = False

    @property
    def balanced(self) -> bool:
        return abs(len(self.T) - len(self.S)) <= 1


def _d_rows(mat, D):
    dset = set(D)
    NDc = {}
    for v in D:
        for c in mat.col(v):
            NDc.setdefault(c, [])
    for c in NDc:
        NDc[c] = [u for u in mat.row(c) if u in dset]
    return NDc


def _valid(NDc, color) -> bool:
    for members in NDc.values():
        seen = {color[u] for u in members}
        if len(seen) < 2:
            return False
    return True


def split_once(mat: MeasurementMatrix, D, seed=None) -> SplitOutcome:
    """One randomized split attempt of ``D``.

    Returns ``status == "success"`` with the GREEN half ``T`` and the RED
    half ``S`` (both checked to be termatiko), or ``"fail"``.
    """
    D = as_variable_set(D, mat.n)
    if not D:
        raise ValueError("cannot split an empty set")
    rng = make_rng(seed)
    NDc = _d_rows(mat, D)
    color: dict[int, int] = {}
    queue: list[int] = []
    guesses = 0

    start = D[int(rng.integers(len(D)))]
    color[start] = GREEN
    queue.append(start)
    uncolored = set(D) - {start}
    while True:
        while queue:
            v = queue.pop(int(rng.integers(len(queue))))
            cv = color[v]
            opp = set()
            for c in mat.col(v):
                free = [u for u in NDc[c] if u not in color]
                if len(free) != 1:
                    continue
                if all(color[u] == cv for u in NDc[c] if u in color):
                    opp.add(free[0])
            for u in sorted(opp):
                color[u] = 1 - cv
                uncolored.discard(u)
                queue.append(u)
        if not uncolored:
            break
        pool = sorted(uncolored)
        u = pool[int(rng.integers(len(pool)))]
        color[u] = int(rng.integers(2))
        uncolored.discard(u)
        queue.append(u)
        guesses += 1

    T = tuple(v for v in D if color[v] == GREEN)
    S = tuple(v for v in D if color[v] == RED)
    if not _valid(NDc, color):
        return SplitOutcome(FAIL, T, S, seed, guesses)
    verified = is_termatiko_structural(mat, T) and is_termatiko_structural(mat, S)
    if not verified:
        raise AssertionError("valid coloring produced a non-termatiko half")
    return SplitOutcome(SUCCESS, T, S, seed, guesses, verified=True)


def split_repeated(mat: MeasurementMatrix, D, attempts: int, seed: int = 0, stop_on_success: bool = True):
    """Up to ``attempts`` independent tries; attempt ``k`` is seeded with
    ``[seed, k]``.  Returns the list of outcomes."""
    out = []
    for k in range(attempts):
        res = split_once(mat, D, seed=[seed, k])
        out.append(res)
        if stop_on_success and res.status == SUCCESS:
            break
    return out


@dataclass
class SplitReport:
    """All valid splits of ``D``; each split lists the half containing the
    smallest member of ``D`` first."""

    D: tuple[int, ...]
    splits: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    nodes: int = 0

    @property
    def count(self) -> int:
        return len(self.splits)

    def balanced(self) -> list:
        return [s for s in self.splits if abs(len(s[0]) - len(s[1])) <= 1]

    def sizes(self) -> list[tuple[int, int]]:
        return sorted({(len(a), len(b)) for a, b in self.splits})


def split_exhaustive(mat: MeasurementMatrix, D, cap: int = 24) -> SplitReport:
    """Every 2-coloring of ``D`` with both colors at each measurement.

    The smallest member is pinned GREEN.  Forced colors are propagated as
    in :func:`split_once`; the remaining choices are branched.  Refuses
    sets larger than ``cap``.
    """
    D = as_variable_set(D, mat.n)
    if not D:
        raise ValueError("cannot split an empty set")
    if len(D) > cap:
        raise ValueError(f"|D|={len(D)} exceeds the exhaustive cap {cap}")
    NDc = _d_rows(mat, D)
    checks_of = {v: [c for c in mat.col(v)] for v in D}
    report = SplitReport(D)
    color = {D[0]: GREEN}

    def propagate(assigned):
        """Extend ``color`` with forced choices; return the list of newly
        colored nodes or None on conflict."""
        stack = list(assigned)
        added = []
        while stack:
            v = stack.pop()
            for c in checks_of[v]:
                members = NDc[c]
                free = [u for u in members if u not in color]
                colors = {color[u] for u in members if u in color}
                if not free:
                    if len(colors) < 2:
                        return added, False
                elif len(free) == 1 and len(colors) == 1:
                    u = free[0]
                    color[u] = 1 - next(iter(colors))
                    added.append(u)
                    stack.append(u)
        return added, True

    def undo(nodes):
        for u in nodes:
            del color[u]

    def rec():
        report.nodes += 1
        free = [v for v in D if v not in color]
        if not free:
            if _valid(NDc, color):
                T = tuple(v for v in D if color[v] == GREEN)
                S = tuple(v for v in D if color[v] == RED)
                report.splits.append((T, S))
            return
        u = free[0]
        for col in (GREEN, RED):
            color[u] = col
            added, ok = propagate([u])
            if ok:
                rec()
            undo(added)
            del color[u]

    added, ok = propagate([D[0]])
    if ok:
        rec()
    undo(added)
    return report
