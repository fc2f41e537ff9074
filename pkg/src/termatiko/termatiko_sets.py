"""Termatiko sets: the supports on which interval passing returns zero.

For a variable set ``T`` with neighborhood ``N = N(T)`` the companion set
is ``S = {v not in T : N(v) subset of N}``.  ``T`` is termatiko iff every
measurement ``c`` in ``N``

1. is adjacent to ``S``, or
2. has at least two neighbors ``v`` in ``T`` all of whose measurements
   see ``T`` at least twice.

The verdict depends only on the support of the matrix.  The empty set is
not termatiko.  ``T`` is *class 1* when every ``c`` in ``N`` satisfies (1),
*class 2* otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import typed, types

from . import _kernels
from .ipa import ipa_run, ipa_batch, support_indicator
from .stopping import StoppingSetList, enumerate_stopping_sets, enumerate_stopping_sets_arrays, DEFAULT_NODE_BUDGET
from .tanner import MeasurementMatrix, NodeSet, as_variable_set, binarize


@dataclass(frozen=True)
class CompanionSets:
    T: tuple[int, ...]
    N: tuple[int, ...]
    S: tuple[int, ...]


def companion_sets(mat: MeasurementMatrix, T) -> CompanionSets:
    """``N(T)`` and the companion set ``S``."""
    T = as_variable_set(T, mat.n)
    tset = set(T)
    N = {c for v in T for c in mat.col(v)}
    S = tuple(v for v in range(mat.n) if v not in tset and all(c in N for c in mat.col(v)))
    return CompanionSets(T, tuple(sorted(N)), S)


def termatiko_class(mat: MeasurementMatrix, T) -> int:
    """0 if ``T`` is not termatiko, otherwise its class (1 or 2)."""
    cs = companion_sets(mat, T)
    if not cs.T:
        return 0
    tset, sset = set(cs.T), set(cs.S)
    cnt = {c: sum(1 for v in mat.row(c) if v in tset) for c in cs.N}

    def good(v):
        return all(cnt[c] >= 2 for c in mat.col(v))

    cls = 1
    for c in cs.N:
        if any(v in sset for v in mat.row(c)):
            continue
        if sum(1 for v in mat.row(c) if v in tset and good(v)) < 2:
            return 0
        cls = 2
    return cls


def is_termatiko_structural(mat: MeasurementMatrix, T) -> bool:
    """Termatiko test from the graph conditions alone."""
    return termatiko_class(mat, T) > 0


def is_termatiko_operational(mat: MeasurementMatrix, T, max_iters: int | None = None) -> bool:
    """Run interval passing on the binary signal supported on ``T`` and
    report whether the estimate is identically zero."""
    T = as_variable_set(T, mat.n)
    if not T:
        return False
    B = mat if mat.is_binary else binarize(mat)
    x = support_indicator(B.n, T)
    y = [sum(x[v] for v in B.row(c)) for c in range(B.m)]
    res = ipa_run(B, y, max_iters=max_iters)
    return all(e == 0 for e in res.estimate)


def fails_on_signal(mat: MeasurementMatrix, x, max_witness_size: int | None = None):
    """Whether interval passing fails on ``x``, with a termatiko witness.

    Runs the decoder and, on failure, looks for a termatiko subset of the
    support.  Returns ``(failed, witness)``; ``witness`` is None when the
    decoder succeeds or when no witness of size ``<= max_witness_size``
    exists among the searched subsets.
    """
    x = list(x)
    res = ipa_run(mat, [sum(w * x[v] for v, w in ((v, mat.get(c, v)) for v in mat.row(c))) for c in range(mat.m)],
                  truth=x)
    if res.success:
        return False, None
    witness = termatiko_witness(mat, [v for v in range(mat.n) if x[v] != 0], max_witness_size)
    return True, witness


def termatiko_witness(mat: MeasurementMatrix, support, max_size: int | None = None):
    """A termatiko subset of ``support``.

    The unrecovered positions of the binary run on ``support`` are tried
    first: when interval passing fails these form a termatiko set.  Failing
    that, subsets are searched by increasing size.
    """
    D = as_variable_set(support, mat.n)
    if not D:
        return None
    B = mat if mat.is_binary else binarize(mat)
    z = support_indicator(B.n, D)
    y = [sum(z[v] for v in B.row(c)) for c in range(B.m)]
    res = ipa_run(B, y)
    bad = tuple(v for v in D if res.estimate[v] != 1)
    if bad and is_termatiko_structural(B, bad):
        return bad
    top = len(D) if max_size is None else min(max_size, len(D))
    for k in range(1, top + 1):
        for T in itertools.combinations(D, k):
            if is_termatiko_structural(B, T):
                return T
    return None


# -- spectra -------------------------------------------------------------------

@dataclass
class SetSpectrum:
    """Termatiko sets grouped by size.

    ``by_size[t]`` counts the sets of size ``t`` found, split into
    ``class1[t]`` and ``class2[t]``.  ``exhaustive_up_to`` is the largest
    ``t`` for which the counts are known to be complete (0 if none).
    ``sets`` holds the sets themselves when they were listed.
    """

    by_size: dict[int, int]
    class1: dict[int, int]
    class2: dict[int, int]
    exhaustive_up_to: int
    sets: list[tuple[int, ...]] = field(default_factory=list)
    source: str = ""

    @property
    def h_min_estimate(self) -> int | None:
        return min((k for k, v in self.by_size.items() if v), default=None)

    def to_json(self) -> dict:
        return {
            "by_size": {str(k): v for k, v in sorted(self.by_size.items())},
            "class1": {str(k): v for k, v in sorted(self.class1.items())},
            "class2": {str(k): v for k, v in sorted(self.class2.items())},
            "exhaustive_up_to": self.exhaustive_up_to,
            "h_min_estimate": self.h_min_estimate,
            "source": self.source,
            "sets": [list(s) for s in self.sets],
            "index_base": 0,
        }


def _csr(mat):
    return mat.col_ptr, mat.col_idx, mat.row_ptr, mat.row_idx


def _max_packed_size(n: int) -> int:
    # keys are numbers in base n+1 with nonzero digits; keep them below 2^63
    return int(63 * math.log(2) / math.log(n + 1) - 1e-9)


def _unpack(key: int, n: int) -> tuple[int, ...]:
    out = []
    while key:
        out.append(key % (n + 1) - 1)
        key //= n + 1
    return tuple(reversed(out))


def harvest_termatiko_subsets(mat: MeasurementMatrix, sets, max_size: int, min_size: int = 1,
                              anchor: int | None = None):
    """Termatiko subsets of the given variable sets.

    Every subset of size ``min_size..max_size`` of every set in ``sets``
    (containing ``anchor`` if given) is checked once.  Returns a dict
    ``subset -> class``.
    """
    B = mat if mat.is_binary else binarize(mat)
    sets = [tuple(sorted(s)) for s in sets]
    if max_size > _max_packed_size(B.n):
        return _harvest_python(B, sets, max_size, min_size, anchor)
    width = max((len(s) for s in sets), default=1)
    arr = np.full((len(sets), max(width, 1)), -1, dtype=np.int64)
    sizes = np.zeros(len(sets), dtype=np.int64)
    for r, s in enumerate(sets):
        arr[r, :len(s)] = s
        sizes[r] = len(s)
    keys, cls = harvest_termatiko_subsets_arrays(B, arr, sizes, max_size, min_size, anchor)
    return {_unpack(int(k), B.n): int(c) for k, c in zip(keys, cls)}


def harvest_termatiko_subsets_arrays(mat: MeasurementMatrix, sets: np.ndarray, sizes: np.ndarray, max_size: int,
                                     min_size: int = 1, anchor: int | None = None):
    """Array form of :func:`harvest_termatiko_subsets`.

    ``sets`` is an int array with one ascending, -1 padded set per row.
    Returns ``(keys, classes)``: packed subsets (digits ``v + 1`` in base
    ``n + 1``, see :func:`unpack_subset`) and their classes.
    """
    B = mat if mat.is_binary else binarize(mat)
    if max_size > _max_packed_size(B.n):
        raise ValueError("subsets this large do not fit a packed key")
    sets = np.ascontiguousarray(sets, dtype=np.int64)
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    if sets.ndim != 2 or len(sizes) != len(sets):
        raise ValueError("sets must be a 2-d array with one size per row")
    if sets.shape[1] > 1:
        a, b = sets[:, :-1], sets[:, 1:]
        if ((b >= 0) & ((b <= a) | (a < 0))).any():
            raise ValueError("rows must be strictly ascending with the padding at the end")
    cp, ci, rp, ri = _csr(B)
    seen = typed.Dict.empty(types.int64, types.int64)
    cap = 1 << 16
    while True:
        keys = np.zeros(cap, dtype=np.int64)
        cls = np.zeros(cap, dtype=np.int64)
        counters = np.zeros(2, dtype=np.int64)
        seen.clear()
        _kernels.harvest_subsets(sets, sizes, min_size, max_size, -1 if anchor is None else int(anchor),
                                 cp, ci, rp, ri, B.m, B.n, seen, keys, cls, counters)
        if counters[1] <= cap:
            break
        cap = int(counters[1])
    nfound = int(counters[1])
    return keys[:nfound], cls[:nfound]


def unpack_subset(key: int, n: int) -> tuple[int, ...]:
    return _unpack(int(key), n)


def packed_sizes(keys: np.ndarray, n: int) -> np.ndarray:
    """Number of members of each packed subset."""
    keys = np.asarray(keys, dtype=np.int64).copy()
    out = np.zeros(len(keys), dtype=np.int64)
    while (keys > 0).any():
        nz = keys > 0
        out[nz] += 1
        keys[nz] //= n + 1
    return out


def _harvest_python(B, sets, max_size, min_size, anchor):
    found = {}
    seen = set()
    for D in sets:
        for t in range(min_size, min(max_size, len(D)) + 1):
            for T in itertools.combinations(D, t):
                if anchor is not None and anchor not in T:
                    continue
                if T in seen:
                    continue
                seen.add(T)
                c = termatiko_class(B, T)
                if c:
                    found[T] = c
    return found


def stopping_subset_spectrum(mat: MeasurementMatrix, stopping: StoppingSetList, max_size: int | None = None,
                             column_transitive: bool = False, keep_sets: bool = True) -> SetSpectrum:
    """Termatiko sets found among subsets of listed stopping sets.

    Every termatiko set ``T`` lies in the stopping set ``T + S``, so
    checking all subsets of all stopping sets up to size ``tau`` finds
    every termatiko set whose own stopping closure has size ``<= tau``.
    Sets whose closure is larger are missed; the counts are therefore
    lower bounds and ``exhaustive_up_to`` is 0.

    When ``stopping`` is anchored at a variable, only subsets containing the
    anchor are checked.  With ``column_transitive=True`` (an automorphism
    group acting transitively on the columns) the counts are scaled to the
    whole matrix by ``n / t``; the listed sets then stay anchored.  This
    needs a complete (not budget-truncated) anchored list.
    """
    width = max((len(s) for s in stopping.sets), default=1)
    arr = np.full((len(stopping.sets), width), -1, dtype=np.int64)
    sizes = np.zeros(len(stopping.sets), dtype=np.int64)
    for r, D in enumerate(stopping.sets):
        arr[r, :len(D)] = D
        sizes[r] = len(D)
    return _spectrum_from_arrays(mat, arr, sizes, stopping.tau, stopping.exhaustive, stopping.anchor, max_size,
                                 column_transitive, keep_sets)


def _spectrum_from_arrays(mat, arr, sizes, tau, exhaustive, anchor, max_size, column_transitive, keep_sets):
    max_size = tau if max_size is None else min(max_size, tau)
    if anchor is not None and not column_transitive:
        raise ValueError("an anchored list only gives totals for column-transitive matrices")
    if anchor is not None and not exhaustive:
        # a truncated list is not invariant under the automorphisms
        raise ValueError("anchored counts need a complete stopping-set list; raise the node budget")
    B = mat if mat.is_binary else binarize(mat)
    if max_size <= _max_packed_size(B.n):
        keys, cls = harvest_termatiko_subsets_arrays(B, arr, sizes, max_size, 1, anchor)
        t_of = packed_sizes(keys, B.n)
        listed = [_unpack(int(k), B.n) for k in keys] if keep_sets else []
    else:
        found = _harvest_python(B, [tuple(int(x) for x in row[:k]) for row, k in zip(arr, sizes)],
                                max_size, 1, anchor)
        listed = list(found)
        t_of = np.array([len(T) for T in listed], dtype=np.int64)
        cls = np.array([found[T] for T in listed], dtype=np.int64)
    by, c1, c2 = {}, {}, {}
    for t in range(1, max_size + 1):
        at = t_of == t
        by[t] = int(at.sum())
        c1[t] = int((at & (cls == 1)).sum())
        c2[t] = int((at & (cls == 2)).sum())
    if anchor is not None:
        def scale(d):
            out = {}
            for t, k in d.items():
                if (k * B.n) % t:
                    raise AssertionError("anchored count not divisible: the matrix is not column transitive")
                out[t] = k * B.n // t
            return out
        by, c1, c2 = scale(by), scale(c1), scale(c2)
    src = f"subsets of stopping sets up to size {tau}" + (" (exhaustive list)" if exhaustive else " (partial list)")
    sets = sorted(listed, key=lambda s: (len(s), s)) if keep_sets else []
    return SetSpectrum(by, c1, c2, 0, sets, src)


def heuristic_spectrum(mat: MeasurementMatrix, tau: int, max_size: int | None = None,
                       budget: int = DEFAULT_NODE_BUDGET, anchor: int | None = None,
                       column_transitive: bool = False, keep_sets: bool = True) -> SetSpectrum:
    """Enumerate stopping sets up to ``tau`` and harvest their subsets.

    Works on arrays throughout, so long lists never become Python tuples.
    See :func:`stopping_subset_spectrum` for ``anchor`` and
    ``column_transitive``.
    """
    arr, sizes, exhaustive, _ = enumerate_stopping_sets_arrays(mat, tau, anchor, budget)
    return _spectrum_from_arrays(mat, arr, sizes, tau, exhaustive, anchor, max_size, column_transitive, keep_sets)


@dataclass
class ExhaustiveResult:
    size: int
    count: int
    class1: int
    complete: bool
    checked: int
    sets: list[tuple[int, ...]]
    anchor: int | None = None


def exhaustive_termatiko_sets(mat: MeasurementMatrix, t: int, anchor: int | None = None,
                              budget: int = 10**10, capacity: int = 1 << 16) -> ExhaustiveResult:
    """Check every ``t``-subset (containing ``anchor`` if given).

    ``complete`` is False when the budget stopped the scan.  Only the
    first ``capacity`` sets found are listed; ``count`` counts all.
    """
    B = mat if mat.is_binary else binarize(mat)
    if t < 1 or t > B.n:
        return ExhaustiveResult(t, 0, 0, True, 0, [], anchor)
    out = np.full((capacity, t), -1, dtype=np.int64)
    out_cls = np.zeros(capacity, dtype=np.int64)
    counters = np.zeros(4, dtype=np.int64)
    _kernels.exhaustive_size(t, -1 if anchor is None else int(anchor), *_csr(B), B.m, B.n, int(budget),
                             out, out_cls, counters)
    k = int(min(counters[1], capacity))
    sets = [tuple(int(x) for x in row) for row in out[:k]]
    return ExhaustiveResult(t, int(counters[1]), int(counters[3]), not bool(counters[2]), int(counters[0]),
                            sets, anchor)


def certify_spectrum(mat: MeasurementMatrix, spectrum: SetSpectrum, up_to: int, anchor: int | None = None,
                     budget: int = 10**10) -> tuple[SetSpectrum, dict[int, int]]:
    """Raise ``exhaustive_up_to`` by exhaustive counting.

    For ``t = 1 .. up_to`` all ``t``-subsets are checked (anchored and
    scaled by ``n / t`` when ``anchor`` is given, which needs a
    column-transitive matrix).  ``exhaustive_up_to`` becomes the largest
    ``t`` such that every size ``<= t`` was counted completely and agrees
    with the spectrum.  Returns the updated spectrum and the exact counts.
    """
    exact = {}
    agree = 0
    ok = True
    for t in range(1, up_to + 1):
        res = exhaustive_termatiko_sets(mat, t, anchor, budget, capacity=1)
        if not res.complete:
            break
        cnt = res.count if anchor is None else res.count * mat.n // t
        exact[t] = cnt
        if ok and spectrum.by_size.get(t, 0) == cnt:
            agree = t
        else:
            ok = False
    out = SetSpectrum(spectrum.by_size, spectrum.class1, spectrum.class2, max(agree, spectrum.exhaustive_up_to),
                      spectrum.sets, spectrum.source)
    return out, exact


# -- distance bounds -------------------------------------------------------------

def girth_at_least_6(mat: MeasurementMatrix) -> bool:
    """No two columns share two or more rows (no 4-cycles)."""
    seen = set()
    for row in mat.rows:
        for a, b in itertools.combinations(row, 2):
            if (a, b) in seen:
                return False
            seen.add((a, b))
    return True


def column_regular_degree(mat: MeasurementMatrix) -> int | None:
    deg = mat.col_degrees()
    if deg.size == 0 or (deg != deg[0]).any():
        return None
    return int(deg[0])


@dataclass
class TermatikoDistanceBounds:
    lower: int
    upper: int | None
    lower_reason: str
    upper_reason: str
    witness: tuple[int, ...] | None = None
    indeterminate: bool = False

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper


def termatiko_distance_bounds(mat: MeasurementMatrix, witnesses=(), search_up_to: int = 0,
                              anchor: int | None = None, budget: int = 10**10) -> TermatikoDistanceBounds:
    """Bounds on the smallest termatiko set size.

    Lower bound: 1, or the column degree ``a`` for a column-regular matrix
    without 4-cycles, then raised by exhaustive searches of sizes
    ``lower .. search_up_to`` that find nothing.  Upper bound: the smallest
    verified entry of ``witnesses`` (e.g. stopping sets or split halves).
    If a search runs out of budget the result is flagged indeterminate.
    """
    B = mat if mat.is_binary else binarize(mat)
    a = column_regular_degree(B)
    if a is not None and girth_at_least_6(B):
        lower, lreason = a, "column-regular without 4-cycles"
    else:
        lower, lreason = 1, "trivial"
    upper, ureason, wit = None, "", None
    for T in witnesses:
        T = as_variable_set(T, B.n)
        if T and is_termatiko_structural(B, T) and (upper is None or len(T) < upper):
            upper, ureason, wit = len(T), "witness", T
    indeterminate = False
    t = lower
    while t <= search_up_to and (upper is None or t < upper):
        res = exhaustive_termatiko_sets(B, t, anchor, budget, capacity=1)
        if not res.complete:
            indeterminate = True
            break
        if res.count:
            upper, ureason, wit = t, "exhaustive search", res.sets[0]
            break
        lower, lreason = t + 1, f"exhaustive search of size {t}" + ("" if anchor is None else f" through column {anchor}")
        t += 1
    return TermatikoDistanceBounds(lower, upper, lreason, ureason, wit, indeterminate)
