import time
from fractions import Fraction

import numpy as np
import pytest

from support import random_binary_matrix
from termatiko.array_ldpc import build_H
from termatiko.instances import partial_recovery_demo, weighted_demo
from termatiko.ipa import (POS_INF, IpaInitializationError, counter_braid_decode, ipa_batch, ipa_run, ipa_trace,
                           measure, recovery_equivalence_check, support_indicator)
from termatiko.tanner import MeasurementMatrix


def test_weighted_demo_recovers_exactly():
    A, x, y = weighted_demo()
    assert measure(A, x) == [Fraction(v) for v in y]
    res = ipa_run(A, y, truth=x)
    assert res.estimate == [1, 8, 3, 0, 0, 0]
    assert all(isinstance(v, Fraction) for v in res.estimate)
    assert res.converged and res.iterations <= 3
    assert res.success


def test_weighted_demo_trace():
    A, _, y = weighted_demo()
    tr = ipa_trace(A, y)
    init = tr[0]
    assert init.phase == "variable" and init.iteration == 0
    assert init.mu == [0] * 6
    assert init.M == [1, 8, 3, 3, 1, Fraction(8, 3)]
    first = next(s for s in tr if s.phase == "measurement")
    assert (first.edge_mu[(0, 0)], first.edge_M[(0, 0)]) == (1, 20)
    assert (first.edge_mu[(3, 2)], first.edge_M[(3, 2)]) == (Fraction(11, 12), 3)
    final = [s for s in tr if s.phase == "variable"][-1]
    assert final.mu == final.M == [1, 8, 3, 0, 0, 0]


def test_partial_recovery():
    A, x, y = partial_recovery_demo()
    res = ipa_run(A, y, truth=x)
    assert res.estimate == [0, 0, 1, 0, 0, 0]
    assert res.converged
    assert list(res.recovered_mask) == [True, True, True, False, True, True]


def test_approx_mode_agrees():
    A, _, y = weighted_demo()
    res = ipa_run(A, y, mode="approx")
    assert np.allclose(res.estimate, [1, 8, 3, 0, 0, 0])


def test_counter_braids_reach_the_same_fixed_point():
    A, x, y = partial_recovery_demo()
    ref = ipa_run(A, y)
    cb = counter_braid_decode(A, y, trace=True)
    assert cb.estimate == ref.estimate
    assert cb.trace[0].M == [POS_INF] * 6
    with pytest.raises(ValueError):
        counter_braid_decode(weighted_demo()[0], weighted_demo()[2])


def test_input_validation():
    A = MeasurementMatrix(2, 3, {(0, 0): 1, (1, 1): 1})
    with pytest.raises(IpaInitializationError):
        ipa_run(A, [1, 1])
    B, _, y = weighted_demo()
    with pytest.raises(ValueError):
        ipa_run(B, y[:-1])
    with pytest.raises(ValueError):
        ipa_run(B, [1, -1, 0, 0])
    with pytest.raises(ValueError):
        ipa_run(B, y, mode="fast")


def test_iteration_cap_reports_nonconvergence():
    A, _, y = weighted_demo()
    res = ipa_run(A, y, max_iters=1)
    assert not res.converged and res.iterations == 1


def test_zero_measurements_give_zero():
    A, _, _ = weighted_demo()
    res = ipa_run(A, [0, 0, 0, 0])
    assert res.estimate == [0] * 6 and res.iterations <= 2


def test_batch_engine_matches_exact_engine(rng):
    for _ in range(30):
        m, n = int(rng.integers(3, 9)), int(rng.integers(3, 13))
        H = random_binary_matrix(rng, m, n)
        X = (rng.random((20, n)) < 0.3).astype(np.int64)
        Y = X @ H.to_dense(int).T
        est, M, _, conv = ipa_batch(H, Y)
        assert conv.all()
        for b in range(20):
            ref = ipa_run(H, Y[b].tolist())
            assert [int(v) for v in ref.estimate] == est[b].tolist()
            assert [int(v) for v in ref.M] == M[b].tolist()


def test_vector_engine_on_a_large_matrix():
    # nnz >= 2000 routes integer problems to the vectorized engine
    H = build_H(23, 4)
    assert H.nnz >= 2000
    rng = np.random.default_rng(3)
    for _ in range(5):
        supp = rng.choice(H.n, size=12, replace=False)
        x = support_indicator(H.n, supp)
        y = [int(v) for v in measure(H, x)]
        fast = ipa_run(H, y)
        slow = ipa_run(H, y, trace=True)
        assert [int(v) for v in fast.estimate] == [int(v) for v in slow.estimate]
        assert fast.iterations == slow.iterations


def test_recovery_equivalence_on_weighted_demo():
    A, x, _ = weighted_demo()
    ma, mb, eq = recovery_equivalence_check(A, x)
    assert eq and ma.all()


def test_small_runs_are_fast():
    A, _, y = weighted_demo()
    ipa_run(A, y)
    t = time.perf_counter()
    for _ in range(100):
        ipa_run(A, y)
    assert (time.perf_counter() - t) / 100 < 1e-3
