"""Interval-passing reconstruction of nonnegative sparse signals.

Every variable keeps an interval ``[mu_v, M_v]`` known to contain ``x_v``.
Each iteration every measurement computes, for each neighbor, the interval
implied by the others' bounds; a variable then keeps the largest lower and
the smallest upper bound it receives.  The loop stops at the first
iteration where no bound moves.  The estimate is the final lower bound.

Three engines share these semantics:

* exact rational arithmetic (``mode="exact"``, any nonnegative matrix),
* an int64 engine used automatically for binary matrices with integer
  measurements (exact, vectorized, also batched),
* ``float64`` with tolerance ``eps`` (``mode="approx"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq as _Q

from .tanner import MeasurementMatrix, binarize, as_variable_set


class IpaInitializationError(ValueError):
    """A variable has no measurements, so no initial upper bound exists."""


class _PositiveInfinity:
    """Tagged symbolic +infinity used by the counter-braid initialization."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "+inf"

    def __reduce__(self):
        return (_PositiveInfinity, ())


POS_INF = _PositiveInfinity()


@dataclass
class IpaState:
    """Snapshot of one half iteration.

    ``phase == "variable"`` carries the variable bounds ``mu`` and ``M``
    after iteration ``iteration`` (iteration 0 is the initialization).
    ``phase == "measurement"`` carries the per-edge intervals
    ``edge_mu[(c, v)]`` and ``edge_M[(c, v)]`` sent in that iteration.
    """

    iteration: int
    phase: str
    mu: list | None = None
    M: list | None = None
    edge_mu: dict | None = None
    edge_M: dict | None = None


@dataclass
class IpaResult:
    estimate: list
    mu: list
    M: list
    iterations: int
    converged: bool
    recovered_mask: np.ndarray | None = None
    trace: list = field(default_factory=list)

    @property
    def success(self) -> bool | None:
        """True iff every entry was recovered (needs the true signal)."""
        if self.recovered_mask is None:
            return None
        return bool(self.recovered_mask.all())


def _check_init(mat: MeasurementMatrix) -> None:
    deg = mat.col_degrees()
    empty = np.flatnonzero(deg == 0)
    if empty.size:
        raise IpaInitializationError(f"variable {int(empty[0])} has no measurements")


def _measurements(mat, y, exact):
    y = list(y)
    if len(y) != mat.m:
        raise ValueError(f"expected {mat.m} measurements, got {len(y)}")
    if exact:
        y = [Fraction(v) if not isinstance(v, float) else Fraction(v) for v in y]
    else:
        y = [float(v) for v in y]
    if any(v < 0 for v in y):
        raise ValueError("measurements must be nonnegative")
    return y


def default_max_iters(mat: MeasurementMatrix) -> int:
    return 10 * (mat.m + mat.n)


def _is_fast(mat, y) -> bool:
    if not mat.is_binary:
        return False
    for v in y:
        if isinstance(v, float) or (isinstance(v, Fraction) and v.denominator != 1):
            return False
    return True


# -- exact rational engine ---------------------------------------------------

def _run_exact(mat, y, max_iters, infinite_start, want_trace):
    # gmpy2 rationals are an order of magnitude faster than Fraction here
    zero = _Q(0)
    a = mat.entries()
    rows = [[(v, _Q(a[(c, v)])) for v in vs] for c, vs in enumerate(mat.rows)]
    yq = [_Q(v) for v in y]
    n = mat.n
    mu = [zero] * n
    if infinite_start:
        M = [POS_INF] * n
    else:
        M = [min(yq[c] / _Q(a[(c, v)]) for c in mat.col(v)) for v in range(n)]
    trace = []
    if want_trace:
        trace.append(IpaState(0, "variable", mu=_out(mu), M=_out(M)))

    it = 0
    converged = False
    while it < max_iters:
        it += 1
        new_mu = [None] * n
        new_M = [None] * n
        emu = {} if want_trace else None
        eM = {} if want_trace else None
        for c, row in enumerate(rows):
            # row sums, with infinite upper bounds counted apart
            s_M = zero
            n_inf = 0
            s_mu = zero
            for v, w in row:
                if M[v] is POS_INF:
                    n_inf += 1
                else:
                    s_M += w * M[v]
                s_mu += w * mu[v]
            yc = yq[c]
            for v, w in row:
                if M[v] is POS_INF:
                    others_inf = n_inf - 1
                    others_M = s_M
                else:
                    others_inf = n_inf
                    others_M = s_M - w * M[v]
                if others_inf:
                    lo = zero
                else:
                    lo = (yc - others_M) / w
                    if lo < 0:
                        lo = zero
                hi = (yc - (s_mu - w * mu[v])) / w
                if want_trace:
                    emu[(c, v)] = Fraction(int(lo.numerator), int(lo.denominator))
                    eM[(c, v)] = Fraction(int(hi.numerator), int(hi.denominator))
                cur = new_mu[v]
                if cur is None or lo > cur:
                    new_mu[v] = lo
                cur = new_M[v]
                if cur is None or hi < cur:
                    new_M[v] = hi
        if want_trace:
            trace.append(IpaState(it, "measurement", edge_mu=emu, edge_M=eM))
            trace.append(IpaState(it, "variable", mu=_out(new_mu), M=_out(new_M)))
        done = new_mu == mu and new_M == M
        mu, M = new_mu, new_M
        if done:
            converged = True
            break
    return _out(mu), _out(M), it, converged, trace


def _out(vals):
    return [v if v is POS_INF else Fraction(int(v.numerator), int(v.denominator)) for v in vals]


# -- int64 / float64 vectorized engine ------------------------------------

class _EdgeLayout:
    """Edge arrays sorted by row and a permutation grouping them by column."""

    def __init__(self, mat: MeasurementMatrix, dtype):
        er, ec = mat.edges()
        self.er = er
        self.ec = ec
        if dtype is np.int64:
            self.w = np.ones(len(er), dtype=np.int64)
        else:
            self.w = np.array([float(x) for x in mat.edge_values()], dtype=np.float64)
        self.m = mat.m
        self.n = mat.n
        order = np.lexsort((er, ec))
        self.by_col = order
        starts = np.zeros(mat.n, dtype=np.int64)
        starts[1:] = np.cumsum(mat.col_degrees())[:-1]
        self.col_starts = starts


def _row_sum(layout, vals):
    """Per-row sums of edge values; ``vals`` has shape (..., E)."""
    out = np.zeros(vals.shape[:-1] + (layout.m,), dtype=vals.dtype)
    if vals.ndim == 1:
        np.add.at(out, layout.er, vals)
    else:
        # rows are contiguous because edges are row-sorted
        idx = np.flatnonzero(np.diff(layout.er, prepend=-1))
        sums = np.add.reduceat(vals, idx, axis=-1) if vals.shape[-1] else vals
        out[..., layout.er[idx]] = sums
    return out


def _col_reduce(layout, vals, op):
    v = vals[..., layout.by_col]
    return op.reduceat(v, layout.col_starts, axis=-1)


def _run_vector(mat, Y, max_iters, infinite_start, dtype, eps):
    """Batched engine.  ``Y`` has shape (B, m).  Returns arrays of shape (B, n)."""
    lay = _EdgeLayout(mat, dtype)
    Y = np.asarray(Y, dtype=dtype)
    B = Y.shape[0]
    yE = Y[:, lay.er]
    w = lay.w
    mu = np.zeros((B, mat.n), dtype=dtype)
    if infinite_start:
        M = np.zeros((B, mat.n), dtype=dtype)
        Minf = np.ones((B, mat.n), dtype=bool)
    else:
        M = _col_reduce(lay, yE / w if dtype is np.float64 else yE, np.minimum)
        Minf = np.zeros((B, mat.n), dtype=bool)
    iters = np.zeros(B, dtype=np.int64)
    active = np.ones(B, dtype=bool)
    it = 0
    while it < max_iters and active.any():
        it += 1
        idx = np.flatnonzero(active)
        mu_a, M_a, Minf_a, yE_a = mu[idx], M[idx], Minf[idx], yE[idx]
        ME = M_a[:, lay.ec]
        MinfE = Minf_a[:, lay.ec]
        muE = mu_a[:, lay.ec]
        wM = np.where(MinfE, 0, w * ME)
        s_M = _row_sum(lay, wM)[:, lay.er]
        n_inf = _row_sum(lay, MinfE.astype(np.int64))[:, lay.er]
        s_mu = _row_sum(lay, w * muE)[:, lay.er]
        others_inf = n_inf - MinfE
        lo = yE_a - (s_M - wM)
        hi = yE_a - (s_mu - w * muE)
        if dtype is np.float64:
            lo = lo / w
            hi = hi / w
        lo = np.where(others_inf > 0, 0, np.maximum(lo, 0))
        new_mu = _col_reduce(lay, lo, np.maximum)
        new_M = _col_reduce(lay, hi, np.minimum)
        new_Minf = np.zeros_like(Minf_a)
        if dtype is np.float64:
            same = (np.abs(new_mu - mu_a) <= eps).all(axis=1) & (np.abs(new_M - M_a) <= eps).all(axis=1)
        else:
            same = (new_mu == mu_a).all(axis=1) & (new_M == M_a).all(axis=1)
        same &= ~Minf_a.any(axis=1)
        mu[idx], M[idx], Minf[idx] = new_mu, new_M, new_Minf
        iters[idx] = it
        active[idx[same]] = False
    return mu, M, iters, ~active


def _to_list(arr, exact):
    if exact:
        return [Fraction(int(x)) for x in arr]
    return [float(x) for x in arr]


# -- public API ---------------------------------------------------------------

def ipa_run(mat: MeasurementMatrix, y: Sequence, mode: str = "exact", max_iters: int | None = None,
            eps: float = 1e-9, truth: Sequence | None = None, trace: bool = False,
            infinite_start: bool = False) -> IpaResult:
    """Run interval passing on measurements ``y``.

    Parameters
    ----------
    mat : MeasurementMatrix
    y : sequence
        Measurements, length ``mat.m``.  Numbers, strings ``"p/q"`` or
        Fractions.
    mode : {"exact", "approx"}
        ``exact`` uses rational (or int64 when lossless) arithmetic and
        compares bounds for equality.  ``approx`` uses float64 and treats
        changes up to ``eps`` as no change.
    max_iters : int, optional
        Defaults to ``10 * (m + n)``.  Hitting the cap gives
        ``converged=False``.
    truth : sequence, optional
        True signal; fills ``recovered_mask``.
    trace : bool
        Record per-half-iteration snapshots (exact engine only).
    infinite_start : bool
        Start every upper bound at +infinity instead of ``min_c y_c/a_cv``.
    """
    if mode not in ("exact", "approx"):
        raise ValueError("mode must be 'exact' or 'approx'")
    _check_init(mat)
    if max_iters is None:
        max_iters = default_max_iters(mat)
    exact = mode == "exact"
    y = _measurements(mat, y, exact)

    tr = []
    # the vectorized engine only pays off on larger graphs
    if exact and (trace or not _is_fast(mat, y) or mat.nnz < 2000):
        mu, M, it, conv, tr = _run_exact(mat, y, max_iters, infinite_start, trace)
    else:
        if exact:
            dtype = np.int64
            Y = np.array([[int(v) for v in y]], dtype=np.int64)
        else:
            dtype = np.float64
            Y = np.array([y], dtype=np.float64)
        mu_a, M_a, its, conv_a = _run_vector(mat, Y, max_iters, infinite_start, dtype, eps)
        mu, M = _to_list(mu_a[0], exact), _to_list(M_a[0], exact)
        it, conv = int(its[0]), bool(conv_a[0])
    res = IpaResult(estimate=list(mu), mu=list(mu), M=list(M), iterations=it, converged=conv, trace=tr)
    if truth is not None:
        truth = list(truth)
        if len(truth) != mat.n:
            raise ValueError("truth has the wrong length")
        if exact:
            res.recovered_mask = np.array([Fraction(t) == e for t, e in zip(truth, mu)])
        else:
            res.recovered_mask = np.array([abs(float(t) - e) <= eps for t, e in zip(truth, mu)])
    return res


def ipa_trace(mat: MeasurementMatrix, y: Sequence, max_iters: int | None = None,
              infinite_start: bool = False) -> list[IpaState]:
    """All half-iteration snapshots of an exact run."""
    return ipa_run(mat, y, trace=True, max_iters=max_iters, infinite_start=infinite_start).trace


def ipa_batch(mat: MeasurementMatrix, Y, max_iters: int | None = None,
              infinite_start: bool = False, chunk: int = 4096):
    """Exact interval passing on many measurement vectors at once.

    ``mat`` must be binary and ``Y`` an integer array of shape (B, m).
    Returns ``(estimate, M, iterations, converged)`` with leading axis B.
    """
    if not mat.is_binary:
        raise ValueError("batched engine needs a binary matrix")
    _check_init(mat)
    if max_iters is None:
        max_iters = default_max_iters(mat)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
    if Y.shape[1] != mat.m:
        raise ValueError("measurement vectors have the wrong length")
    if (Y < 0).any():
        raise ValueError("measurements must be nonnegative")
    parts = [_run_vector(mat, Y[s:s + chunk], max_iters, infinite_start, np.int64, 0.0)
             for s in range(0, Y.shape[0], chunk)]
    if not parts:
        z = np.zeros((0, mat.n), dtype=np.int64)
        return z, z.copy(), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(4))


def counter_braid_decode(mat: MeasurementMatrix, y: Sequence, max_iters: int | None = None,
                         trace: bool = False) -> IpaResult:
    """Counter-braid decoding: interval passing from ``[0, +inf]``.

    Only binary matrices are accepted.  Upper bounds start at a symbolic
    +infinity; a measurement whose other neighbors include an infinite
    upper bound sends lower bound 0.
    """
    if not mat.is_binary:
        raise ValueError("counter braids use binary matrices only")
    return ipa_run(mat, y, mode="exact", max_iters=max_iters, trace=trace, infinite_start=True)


def measure(mat: MeasurementMatrix, x: Sequence) -> list[Fraction]:
    """Exact product ``A x``."""
    x = [Fraction(v) for v in x]
    if len(x) != mat.n:
        raise ValueError("signal has the wrong length")
    y = [Fraction(0)] * mat.m
    for (c, v), w in mat.entries().items():
        y[c] += w * x[v]
    return y


def support_indicator(n: int, support) -> list[int]:
    s = set(as_variable_set(support, n))
    return [1 if v in s else 0 for v in range(n)]


def recovery_equivalence_check(mat: MeasurementMatrix, x: Sequence):
    """Compare recovered positions on ``(A, x)`` and on ``(bin(A), 1_supp(x))``.

    Returns ``(mask_weighted, mask_binary, equal)``.
    """
    x = [Fraction(v) for v in x]
    if any(v < 0 for v in x):
        raise ValueError("signal must be nonnegative")
    res_a = ipa_run(mat, measure(mat, x), truth=x)
    B = binarize(mat)
    z = [1 if v != 0 else 0 for v in x]
    res_b = ipa_run(B, measure(B, z), truth=z)
    return res_a.recovered_mask, res_b.recovered_mask, bool((res_a.recovered_mask == res_b.recovered_mask).all())
