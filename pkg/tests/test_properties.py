"""Randomized invariants of interval passing and the file formats."""

from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from termatiko.ipa import counter_braid_decode, ipa_run, ipa_trace, measure, recovery_equivalence_check
from termatiko.tanner import (MeasurementMatrix, binarize, format_alist, format_csv, format_dense, parse_alist,
                              parse_csv, parse_dense)
from termatiko.termatiko_sets import is_termatiko_operational, is_termatiko_structural

FAST = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


WEIGHTS = st.sampled_from(sorted({Fraction(p, q) for p in range(1, 15) for q in range(1, 8)}))
BITS = st.integers(0, 2**8 - 1)


@st.composite
def supports(draw, max_m=6, max_n=9):
    """Row supports of a matrix without empty columns."""
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    cols = []
    for _ in range(n):
        mask = draw(BITS) % (1 << m) or 1
        cols.append([c for c in range(m) if mask >> c & 1])
    return m, n, cols


@st.composite
def binary_matrices(draw, max_m=6, max_n=9):
    m, n, cols = draw(supports(max_m, max_n))
    return MeasurementMatrix(m, n, {(c, v): 1 for v, cs in enumerate(cols) for c in cs})


@st.composite
def rational_matrices(draw, max_m=6, max_n=9):
    m, n, cols = draw(supports(max_m, max_n))
    return MeasurementMatrix(m, n, {(c, v): draw(WEIGHTS) for v, cs in enumerate(cols) for c in cs})


@st.composite
def subsets(draw, n, min_size=0):
    mask = draw(st.integers(0, 2**n - 1))
    out = {v for v in range(n) if mask >> v & 1}
    if len(out) < min_size:
        out.add(draw(st.integers(0, n - 1)))
    return out


SIGNAL = st.sampled_from([Fraction(k, 4) for k in range(1, 21)])
POSITIVE = st.sampled_from([Fraction(k, 3) for k in range(1, 16)])


def signal(draw, n, values):
    mask = draw(st.integers(0, 2**n - 1))
    return [draw(values) if mask >> v & 1 else 0 for v in range(n)]


def variable_states(mat, y):
    return [(s.iteration, s.mu, s.M) for s in ipa_trace(mat, y) if s.phase == "variable"]


@FAST
@given(st.data())
def test_bounds_sandwich_the_signal_and_tighten(data):
    A = data.draw(rational_matrices())
    x = signal(data.draw, A.n, SIGNAL)
    states = variable_states(A, measure(A, x))
    for _, mu, M in states:
        assert all(lo <= xv <= hi for lo, xv, hi in zip(mu, x, M))
    for (_, mu0, M0), (k, mu1, M1) in zip(states[1:], states[2:]):
        assert all(a <= b for a, b in zip(mu0, mu1)) and all(a >= b for a, b in zip(M0, M1))


def _pad(states, length):
    return states + [states[-1]] * (length - len(states))


@FAST
@given(st.data())
def test_enlarging_a_binary_support_shifts_the_bounds(data):
    A = data.draw(binary_matrices())
    small = data.draw(subsets(A.n))
    big = small | data.draw(subsets(A.n))
    D = big - small
    x = [1 if v in small else 0 for v in range(A.n)]
    xp = [1 if v in big else 0 for v in range(A.n)]
    s, sp = variable_states(A, measure(A, x)), variable_states(A, measure(A, xp))
    # converged runs stay at their fixed point
    length = max(len(s), len(sp))
    for (_, mu, M), (_, lam, Lam) in zip(_pad(s, length), _pad(sp, length)):
        for v in range(A.n):
            d = 1 if v in D else 0
            assert lam[v] <= mu[v] + d <= M[v] + d <= Lam[v]


@FAST
@given(st.data())
def test_weighted_and_binary_recovery_masks_agree(data):
    A = data.draw(rational_matrices())
    x = signal(data.draw, A.n, POSITIVE)
    _, _, equal = recovery_equivalence_check(A, x)
    assert equal


@FAST
@given(st.data())
def test_structural_and_operational_checkers_agree(data):
    A = data.draw(rational_matrices(max_m=7, max_n=11))
    T = data.draw(subsets(A.n, min_size=1))
    assert is_termatiko_structural(A, T) == is_termatiko_operational(A, T)


@settings(max_examples=300, deadline=None)
@given(binary_matrices(), st.data())
def test_counter_braids_agree_with_interval_passing(B, data):
    x = signal(data.draw, B.n, st.integers(1, 4))
    y = measure(B, x)
    assert counter_braid_decode(B, y).estimate == ipa_run(B, y).estimate


@settings(max_examples=300, deadline=None)
@given(rational_matrices(max_m=8, max_n=12))
def test_format_round_trips(A):
    assert parse_dense(format_dense(A)) == A
    assert parse_csv(format_csv(A)) == A
    B = binarize(A)
    assert parse_alist(format_alist(B)) == B


@settings(max_examples=200, deadline=None)
@given(rational_matrices())
def test_binarize_keeps_the_support(A):
    B = binarize(A)
    assert B.is_binary and set(B.entries()) == set(A.entries())
    assert np.array_equal(B.col_degrees(), A.col_degrees())
