"""Stopping-set enumeration by branch and bound.

A partial set ``P`` is grown until every measurement it touches is touched
at least twice.  At each node the measurement with exactly one neighbor in
``P`` and the fewest free candidates is picked; branch ``i`` adds candidate
``u_i`` and excludes ``u_1 .. u_{i-1}``, so every set is reached once.
Once ``P`` is a stopping set it is recorded and further free variables are
tried, to reach its stopping supersets.  A node is cut when
``|P| + ceil(#unsatisfied / max column degree)`` exceeds the size cap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .tanner import MeasurementMatrix, atomic_write_text

DEFAULT_NODE_BUDGET = 10**8


@dataclass
class StoppingSetList:
    """Stopping sets of size ``<= tau``.

    ``exhaustive`` is True iff the search finished inside its node budget.
    ``anchor`` is the variable every listed set contains (None if the list
    is not restricted).  Members are 0-based.
    """

    tau: int
    exhaustive: bool
    sets: list[tuple[int, ...]]
    matrix_digest: str = ""
    anchor: int | None = None
    nodes: int = 0

    def by_size(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.sets:
            out[len(s)] = out.get(len(s), 0) + 1
        return dict(sorted(out.items()))

    def min_size(self) -> int | None:
        return min((len(s) for s in self.sets), default=None)

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "exhaustive": self.exhaustive,
            "sets": [list(s) for s in self.sets],
            "index_base": 0,
            "matrix_digest": self.matrix_digest,
            "anchor": self.anchor,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StoppingSetList":
        base = int(obj.get("index_base", 0))
        return cls(
            tau=int(obj["tau"]),
            exhaustive=bool(obj["exhaustive"]),
            sets=[tuple(sorted(int(x) - base for x in s)) for s in obj["sets"]],
            matrix_digest=obj.get("matrix_digest", ""),
            anchor=obj.get("anchor"),
        )

    def save(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> "StoppingSetList":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _csr(mat: MeasurementMatrix):
    return (np.ascontiguousarray(mat.col_ptr), np.ascontiguousarray(mat.col_idx),
            np.ascontiguousarray(mat.row_ptr), np.ascontiguousarray(mat.row_idx))


def enumerate_stopping_sets_arrays(mat: MeasurementMatrix, tau: int, anchor: int | None = None,
                                   budget: int = DEFAULT_NODE_BUDGET, capacity: int = 1 << 16):
    """Array form of :func:`enumerate_stopping_sets`.

    Returns ``(sets, sizes, exhaustive, nodes)`` where ``sets`` is an
    ``(N, tau)`` int array, each row ascending and padded with -1.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if anchor is not None and not 0 <= anchor < mat.n:
        raise ValueError("anchor outside the variable range")
    if tau == 0 or mat.n == 0:
        return np.zeros((0, max(tau, 1)), dtype=np.int64), np.zeros(0, dtype=np.int64), True, 0
    cp, ci, rp, ri = _csr(mat)
    while True:
        out = np.full((capacity, tau), -1, dtype=np.int64)
        out_size = np.zeros(capacity, dtype=np.int64)
        counters = np.zeros(3, dtype=np.int64)
        _kernels.stopping_search(cp, ci, rp, ri, mat.m, mat.n, tau, -1 if anchor is None else int(anchor),
                                 int(budget), out, out_size, counters)
        found = int(counters[1])
        if found <= capacity:
            return _sorted_rows(out[:found]), out_size[:found], not bool(counters[2]), int(counters[0])
        capacity = found


def _sorted_rows(sets: np.ndarray) -> np.ndarray:
    """Sort each row ascending, keeping the -1 padding at the end."""
    big = np.iinfo(np.int64).max
    keyed = np.where(sets < 0, big, sets)
    keyed.sort(axis=1)
    keyed[keyed == big] = -1
    return keyed


def enumerate_stopping_sets(mat: MeasurementMatrix, tau: int, anchor: int | None = None,
                            budget: int = DEFAULT_NODE_BUDGET) -> StoppingSetList:
    """All nonempty stopping sets with at most ``tau`` variables.

    Parameters
    ----------
    tau : int
        Size cap.
    anchor : int, optional
        Only list the sets containing this variable.
    budget : int
        Search-node budget.  When exceeded the list is partial and
        ``exhaustive`` is False.
    """
    sets, sizes, exhaustive, nodes = enumerate_stopping_sets_arrays(mat, tau, anchor, budget)
    listed = sorted((tuple(sorted(int(x) for x in row[:k])) for row, k in zip(sets, sizes)),
                    key=lambda s: (len(s), s))
    return StoppingSetList(tau=tau, exhaustive=exhaustive, sets=listed, matrix_digest=mat.digest(),
                           anchor=anchor, nodes=nodes)


def stopping_distance(mat: MeasurementMatrix, tau_max: int | None = None,
                      budget: int = DEFAULT_NODE_BUDGET) -> int | None:
    """Size of a smallest nonempty stopping set, or None if none has size
    ``<= tau_max`` (default ``n``).

    Raises RuntimeError when the budget runs out before the answer is known.
    """
    tau_max = mat.n if tau_max is None else min(tau_max, mat.n)
    for tau in range(1, tau_max + 1):
        _, sizes, exhaustive, _ = enumerate_stopping_sets_arrays(mat, tau, None, budget)
        if len(sizes):
            # nothing smaller exists, so any set found now has size tau
            return tau
        if not exhaustive:
            raise RuntimeError(f"node budget exhausted at tau={tau}")
    return None
