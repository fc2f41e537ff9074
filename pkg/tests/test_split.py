import numpy as np
import pytest

from termatiko.array_ldpc import build_H, catalog_entry, load_support
from termatiko.split import FAIL, SUCCESS, make_rng, split_exhaustive, split_once, split_repeated
from termatiko.tanner import neighbors_of_set, restricted_neighbors
from termatiko.termatiko_sets import is_termatiko_operational, is_termatiko_structural


def _codeword(name):
    t = catalog_entry(name)
    q = t.smallest_q()
    T, S = t.instantiate(q)
    return build_H(q, t.a), T, S


def test_rng_streams_are_reproducible():
    assert make_rng(5).integers(0, 1 << 30, 4).tolist() == make_rng(5).integers(0, 1 << 30, 4).tolist()


def test_split_once_success_is_verified():
    H, T, S = _codeword("h54_w8")
    D = sorted(T + S)
    outs = split_repeated(H, D, 50, seed=1)
    res = outs[-1]
    assert res.status == SUCCESS and res.verified
    assert sorted(res.T + res.S) == D
    assert is_termatiko_structural(H, res.T) and is_termatiko_operational(H, res.S)
    for c in neighbors_of_set(H, D):
        seen = restricted_neighbors(H, c, D).members
        assert set(seen) & set(res.T) and set(seen) & set(res.S)


def test_split_once_is_deterministic_per_seed():
    H, T, S = _codeword("hq3_w6")
    D = sorted(T + S)
    a = split_once(H, D, seed=[3, 1])
    b = split_once(H, D, seed=[3, 1])
    assert (a.status, a.T, a.S, a.random_guesses) == (b.status, b.T, b.S, b.random_guesses)


def test_exhaustive_finds_the_catalog_split():
    H, T, S = _codeword("h74_w8")
    rep = split_exhaustive(H, sorted(T + S))
    assert rep.count >= 1
    halves = {frozenset(x) for split in rep.splits for x in split}
    assert frozenset(T) in halves and frozenset(S) in halves
    for a, b in rep.splits:
        assert is_termatiko_structural(H, a) and is_termatiko_structural(H, b)


def test_unsplittable_support():
    q, a, cols = load_support("h74_w20")
    H = build_H(q, a)
    rep = split_exhaustive(H, cols)
    assert rep.count == 0 and rep.balanced() == []
    outs = split_repeated(H, cols, 20, seed=0)
    assert all(o.status == FAIL for o in outs)


def test_non_stopping_set_cannot_split():
    H = build_H(5, 3)
    rep = split_exhaustive(H, [0, 1, 2])
    assert rep.count == 0
    assert split_once(H, [0, 1, 2], seed=0).status == FAIL


def test_errors():
    H = build_H(5, 3)
    with pytest.raises(ValueError):
        split_exhaustive(H, [])
    with pytest.raises(ValueError):
        split_exhaustive(H, list(range(25)), cap=24)
