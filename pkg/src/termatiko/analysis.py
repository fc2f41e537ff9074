"""Frame-error rates of interval passing and inclusion-exclusion bounds.

Signals are binary: by the support reduction, whether interval passing
recovers a nonnegative signal depends only on its support, so the frame
error rate at weight ``w`` is the fraction of ``w``-supports on which the
binary run does not return the support.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest

from .ipa import ipa_batch
from .tanner import MeasurementMatrix, binarize, atomic_write_text

TRIAL_CHUNK = 10_000


@dataclass
class FerPoint:
    weight: int
    failures: int
    trials: int
    value: float
    ci_lo: float
    ci_hi: float
    exact: Fraction | None = None


def _binary(mat):
    return mat if mat.is_binary else binarize(mat)


def _failures(B: MeasurementMatrix, supports: np.ndarray) -> int:
    """Number of rows of ``supports`` (shape (K, w)) where decoding fails."""
    K = supports.shape[0]
    if K == 0:
        return 0
    X = np.zeros((K, B.n), dtype=np.int64)
    np.put_along_axis(X, supports, 1, axis=1)
    H = _dense_int(B)
    Y = X @ H.T
    est, _, _, _ = ipa_batch(B, Y)
    return int((est != X).any(axis=1).sum())


_DENSE_CACHE: dict[str, np.ndarray] = {}


def _dense_int(B):
    key = B.digest()
    if key not in _DENSE_CACHE:
        H = np.zeros((B.m, B.n), dtype=np.int64)
        r, c = B.edges()
        H[r, c] = 1
        _DENSE_CACHE[key] = H
    return _DENSE_CACHE[key]


def fer_exhaustive(mat: MeasurementMatrix, w: int, max_supports: int = 10**7, chunk: int = 50_000) -> Fraction:
    """Exact frame error rate at weight ``w`` over all ``C(n, w)`` supports.

    Refuses (``ValueError``) when there are more than ``max_supports``.
    """
    B = _binary(mat)
    if not 0 <= w <= B.n:
        raise ValueError("weight outside 0..n")
    total = math.comb(B.n, w)
    if total > max_supports:
        raise ValueError(f"C({B.n},{w}) = {total} supports exceeds the budget")
    if w == 0:
        return Fraction(0)
    fails = 0
    it = itertools.combinations(range(B.n), w)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        fails += _failures(B, np.array(block, dtype=np.int64))
    return Fraction(fails, total)


def wilson_interval(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(failures, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def _sim_chunk(args):
    B, w, size, entropy = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
    # a uniform w-subset per trial: the w smallest of n uniform keys
    keys = rng.random((size, B.n))
    supports = np.argpartition(keys, w - 1, axis=1)[:, :w] if w < B.n else np.tile(np.arange(B.n), (size, 1))
    return _failures(B, np.sort(supports, axis=1))


def fer_simulate(mat: MeasurementMatrix, weights, trials: int, seed: int = 0, workers: int = 1) -> list[FerPoint]:
    """Monte Carlo frame error rate with Wilson 95% intervals.

    Trials run in chunks of ``TRIAL_CHUNK``; chunk ``k`` at weight ``w``
    draws from the stream seeded by ``[seed, w, k]``, so results do not
    depend on ``workers``.
    """
    B = _binary(mat)
    out = []
    for w in weights:
        w = int(w)
        if not 1 <= w <= B.n:
            raise ValueError("weights must lie in 1..n")
        jobs = []
        done = 0
        k = 0
        while done < trials:
            size = min(TRIAL_CHUNK, trials - done)
            jobs.append((B, w, size, [int(seed), w, k]))
            done += size
            k += 1
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                fails = sum(ex.map(_sim_chunk, jobs))
        else:
            fails = sum(_sim_chunk(j) for j in jobs)
        lo, hi = wilson_interval(fails, trials)
        out.append(FerPoint(w, fails, trials, fails / trials, lo, hi))
    return out


def fer_table_csv(points) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["weight", "value", "ci_lo", "ci_hi"])
    for p in points:
        if p.exact is not None:
            wr.writerow([p.weight, str(p.exact), "", ""])
        else:
            wr.writerow([p.weight, repr(p.value), repr(p.ci_lo), repr(p.ci_hi)])
    return buf.getvalue()


def write_fer_csv(path, points) -> None:
    atomic_write_text(path, fer_table_csv(points))


# -- inclusion-exclusion lower bound -------------------------------------------

def antichain_filter(sets) -> list[tuple[int, ...]]:
    """Drop duplicates and every set that strictly contains another."""
    uniq = sorted({tuple(sorted(s)) for s in sets}, key=lambda s: (len(s), s))
    kept: list[tuple[int, ...]] = []
    masks: list[int] = []
    for s in uniq:
        m = 0
        for v in s:
            m |= 1 << v
        if any(k & m == k for k in masks):
            continue
        kept.append(s)
        masks.append(m)
    return kept


def union_size_counts(sets, max_union: int, depth: int | None = None, node_budget: int = 10**8):
    """``counts[k][u]``: number of ``k``-subfamilies whose union has ``u``
    members, for ``u <= max_union`` and ``k <= depth``.

    Subfamilies whose union already exceeds ``max_union`` are pruned along
    with all their extensions (unions only grow).
    """
    masks = []
    for s in sets:
        m = 0
        for v in s:
            m |= 1 << v
        masks.append(m)
    L = len(masks)
    depth = L if depth is None else min(depth, L)
    counts = [dict() for _ in range(depth + 1)]
    nodes = 0
    # iterative DFS: (next index, union mask, k)
    stack = [(0, 0, 0)]
    while stack:
        start, U, k = stack.pop()
        if k >= depth:
            continue
        for i in range(start, L):
            V = U | masks[i]
            u = V.bit_count() if hasattr(V, "bit_count") else bin(V).count("1")
            if u > max_union:
                continue
            nodes += 1
            if nodes > node_budget:
                raise RuntimeError("inclusion-exclusion node budget exhausted")
            counts[k + 1][u] = counts[k + 1].get(u, 0) + 1
            stack.append((i + 1, V, k + 1))
    return counts


def is_antichain(sets) -> bool:
    masks = sorted({sum(1 << v for v in s) for s in sets}, key=lambda m: bin(m).count("1"))
    if len(masks) != len(sets):
        return False
    return not any(a & b == a for i, a in enumerate(masks) for b in masks[i + 1:])


def pie_lower_bound(n: int, sets, weights, depth: int | None = None, filter_antichain: bool = False,
                    node_budget: int = 10**8) -> dict[int, Fraction]:
    """Inclusion-exclusion bound on the frame error rate.

    ``FER(w) >= (1/C(n,w)) sum_{k=1}^{depth} (-1)^(k-1) sum_{|I|=k}
    C(n - |U_I|, w - |U_I|)`` where ``U_I`` is the union of the sets in
    ``I``.  ``depth=None`` uses every order, which gives the exact
    probability that a uniform ``w``-support contains a listed set; an even
    ``depth`` gives a Bonferroni lower bound.  When every listed set is
    termatiko the result lower-bounds the frame error rate.

    ``sets`` must be an antichain (``ValueError`` otherwise) unless
    ``filter_antichain`` asks for :func:`antichain_filter` to be applied.
    """
    if depth is not None and (depth % 2 or depth < 2):
        raise ValueError("truncation depth must be a positive even number to give a lower bound")
    fam = [tuple(sorted(s)) for s in sets]
    if filter_antichain:
        fam = antichain_filter(fam)
    elif not is_antichain(fam):
        raise ValueError("tracked sets must form an antichain; see antichain_filter")
    if not fam:
        raise ValueError("at least one tracked set is required")
    weights = [int(w) for w in weights]
    wmax = max(weights, default=0)
    counts = union_size_counts(fam, wmax, depth, node_budget)
    out = {}
    for w in weights:
        total = 0
        for k in range(1, len(counts)):
            sign = 1 if k % 2 else -1
            for u, cnt in counts[k].items():
                if u <= w:
                    total += sign * cnt * math.comb(n - u, w - u)
        out[w] = Fraction(total, math.comb(n, w))
    return out


# -- ensembles ------------------------------------------------------------------

def protograph_lift(proto, L: int, rng: np.random.Generator) -> MeasurementMatrix:
    """Lift a protomatrix by ``L``.

    Entry ``e`` becomes an ``L x L`` binary block of row weight ``e``: the
    cyclic shifts of a random weight-``e`` first row, in random row order.
    """
    proto = np.asarray(proto, dtype=np.int64)
    mp, np_ = proto.shape
    entries = {}
    for a in range(mp):
        for b in range(np_):
            e = int(proto[a, b])
            if e == 0:
                continue
            if e > L:
                raise ValueError("protomatrix entry exceeds the lifting size")
            first = rng.choice(L, size=e, replace=False)
            order = rng.permutation(L)
            for r in range(L):
                shift = order[r]
                for p in first:
                    entries[(a * L + r, b * L + (int(p) + int(shift)) % L)] = 1
    return MeasurementMatrix(mp * L, np_ * L, entries)


def is_codeword_support(mat: MeasurementMatrix, D) -> bool:
    """Every measurement touches ``D`` an even number of times."""
    cnt: dict[int, int] = {}
    for v in D:
        for c in mat.col(v):
            cnt[c] = cnt.get(c, 0) + 1
    return all(k % 2 == 0 for k in cnt.values())


def min_codeword_weight(mat: MeasurementMatrix, stopping_sets) -> int | None:
    """Smallest listed stopping set that is a codeword support.

    Every nonzero GF(2) codeword support is a stopping set, so over a
    complete list of stopping sets up to ``tau`` this is the minimum
    distance (when it is at most ``tau``).
    """
    return min((len(s) for s in stopping_sets if is_codeword_support(mat, s)), default=None)
