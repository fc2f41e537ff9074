import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from support import random_binary_matrix
from termatiko.analysis import (antichain_filter, fer_exhaustive, fer_simulate, fer_table_csv, is_antichain,
                                is_codeword_support, min_codeword_weight, pie_lower_bound, protograph_lift,
                                union_size_counts, wilson_interval, write_fer_csv)
from termatiko.array_ldpc import build_H, size3_termatiko_sets
from termatiko.instances import partial_recovery_demo
from termatiko.ipa import ipa_run, support_indicator
from termatiko.stopping import enumerate_stopping_sets


def brute_fer(mat, w):
    fails = 0
    for D in itertools.combinations(range(mat.n), w):
        x = support_indicator(mat.n, D)
        y = [sum(x[v] for v in mat.row(c)) for c in range(mat.m)]
        if ipa_run(mat, y).estimate != x:
            fails += 1
    return Fraction(fails, math.comb(mat.n, w))


def test_exhaustive_fer_matches_per_support_runs():
    A, _, _ = partial_recovery_demo()
    for w in range(0, 5):
        assert fer_exhaustive(A, w) == brute_fer(A, w)
    # {2, 3} and {3} fail, so every support containing 3 but missing 4 fails
    assert fer_exhaustive(A, 1) > 0


def test_exhaustive_fer_budget():
    with pytest.raises(ValueError):
        fer_exhaustive(build_H(5, 3), 10, max_supports=10**4)


def test_small_array_matrix_fer_at_weight_three():
    H = build_H(5, 3)
    assert fer_exhaustive(H, 3) == Fraction(100, 2300)
    assert fer_exhaustive(H, 2) == 0


def test_inclusion_exclusion_single_set():
    n = 10
    b = pie_lower_bound(n, [(1, 2, 3)], [3, 4, 5, 2])
    for w, v in b.items():
        assert v == Fraction(math.comb(n - 3, w - 3) if w >= 3 else 0, math.comb(n, w))


def test_inclusion_exclusion_equals_union_probability():
    rng = np.random.default_rng(4)
    n = 9
    for _ in range(20):
        fam = antichain_filter([tuple(sorted(rng.choice(n, int(rng.integers(1, 4)), replace=False).tolist()))
                                for _ in range(5)])
        for w in range(1, n + 1):
            hit = sum(1 for D in itertools.combinations(range(n), w) if any(set(T) <= set(D) for T in fam))
            assert pie_lower_bound(n, fam, [w])[w] == Fraction(hit, math.comb(n, w))
            for depth in (2, 4):
                assert pie_lower_bound(n, fam, [w], depth=depth)[w] <= Fraction(hit, math.comb(n, w))


def test_inclusion_exclusion_on_small_array_matrix():
    H = build_H(5, 3)
    sets = size3_termatiko_sets(5)
    assert antichain_filter(sets) == sets
    full = pie_lower_bound(H.n, sets, [3, 4])
    assert full[3] == fer_exhaustive(H, 3)
    assert full[4] <= fer_exhaustive(H, 4)
    assert pie_lower_bound(H.n, sets, [4], depth=2)[4] <= full[4]


def test_inclusion_exclusion_contract():
    with pytest.raises(ValueError):
        pie_lower_bound(5, [(1, 2), (1, 2, 3)], [3])
    assert pie_lower_bound(5, [(1, 2), (1, 2, 3)], [3], filter_antichain=True)[3] == Fraction(3, 10)
    with pytest.raises(ValueError):
        pie_lower_bound(5, [(1, 2)], [3], depth=3)
    with pytest.raises(ValueError):
        pie_lower_bound(5, [], [3])


def test_antichain_filter():
    assert antichain_filter([(1, 2), (1, 2, 3), (4,)]) == [(4,), (1, 2)]
    assert is_antichain([(4,), (1, 2)]) and not is_antichain([(1, 2), (1, 2, 3)])
    assert not is_antichain([(1, 2), (2, 1)])


def test_union_size_counts_prune():
    c = union_size_counts([(0, 1), (1, 2), (3, 4)], max_union=3)
    assert c[1] == {2: 3}
    assert c[2] == {3: 1}
    assert c[3] == {}


def test_simulation_is_reproducible_and_worker_independent():
    H = build_H(5, 3)
    a = fer_simulate(H, [3, 4], 3000, seed=9)
    b = fer_simulate(H, [3, 4], 3000, seed=9)
    assert [p.failures for p in a] == [p.failures for p in b]
    c = fer_simulate(H, [3], 25_000, seed=9, workers=2)
    d = fer_simulate(H, [3], 25_000, seed=9, workers=1)
    assert c[0].failures == d[0].failures
    with pytest.raises(ValueError):
        fer_simulate(H, [0], 10)


def test_singleton_failure_bounds_the_rate():
    # columns 0 and 1 are identical, so {0} is termatiko and FER(w) >= w/n
    from termatiko.tanner import MeasurementMatrix
    from termatiko.termatiko_sets import is_termatiko_structural

    base = random_binary_matrix(np.random.default_rng(1), 6, 12).to_dense(int)
    base[:, 1] = base[:, 0]
    A = MeasurementMatrix.from_dense(base.tolist())
    assert is_termatiko_structural(A, (0,))
    for p in fer_simulate(A, [1, 2, 3], 20_000, seed=2):
        exact = fer_exhaustive(A, p.weight)
        assert exact >= Fraction(p.weight, A.n)
        assert p.ci_lo <= exact <= p.ci_hi


def test_wilson_interval_brackets():
    lo, hi = wilson_interval(50, 1000)
    assert lo < 0.05 < hi
    assert wilson_interval(0, 10)[0] == 0


def test_fer_csv(tmp_path):
    H = build_H(5, 3)
    pts = fer_simulate(H, [3], 100, seed=0)
    text = fer_table_csv(pts)
    assert text.splitlines()[0] == "weight,value,ci_lo,ci_hi"
    write_fer_csv(tmp_path / "f.csv", pts)
    assert (tmp_path / "f.csv").read_text() == text


def test_protograph_lift_degrees():
    rng = np.random.default_rng(0)
    H = protograph_lift([[3, 3]], 20, rng)
    assert H.shape == (20, 40)
    assert set(H.col_degrees()) == {3} and set(H.row_degrees()) == {6}
    with pytest.raises(ValueError):
        protograph_lift([[5]], 4, rng)


def test_codeword_helpers():
    H = build_H(5, 3)
    st = enumerate_stopping_sets(H, 6)
    assert min_codeword_weight(H, st.sets) == 6
    assert all(is_codeword_support(H, D) for D in st.sets)
    assert not is_codeword_support(H, (0,))
