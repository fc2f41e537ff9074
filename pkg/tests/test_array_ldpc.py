import numpy as np
import pytest

from termatiko.analysis import is_codeword_support
from termatiko.array_ldpc import (Automorphism, apply_automorphism, automorphisms, build_H, catalog_entry,
                                  check_params, column_from_rows, column_id, column_pair, column_rows,
                                  eval_linear, is_automorphism, load_support, orbit, parse_linear, row_pair,
                                  size3_count, size3_termatiko_sets, split_catalog, strip_row,
                                  termatiko_distance_table)
from termatiko.tanner import neighbors_of_set
from termatiko.termatiko_sets import termatiko_class


def test_shape_and_degrees():
    H = build_H(5, 3)
    assert H.shape == (15, 25)
    assert set(H.col_degrees()) == {3}
    assert set(H.row_degrees()) == {5}


def test_first_two_block_rows():
    H = build_H(5, 3).to_dense(int)
    # strip 0: identity blocks, strip 1: P^j
    assert (H[0:5, 0:5] == np.eye(5, dtype=int)).all()
    P = np.roll(np.eye(5, dtype=int), 1, axis=0)
    assert (H[5:10, 5:10] == P).all()
    assert (H[10:15, 5:10] == P @ P).all()


def test_index_bijections():
    q = 7
    for v in range(q * q):
        assert column_id(q, *column_pair(q, v)) == v
    for c in range(3 * q):
        assert strip_row(q, *row_pair(q, c)) == c
    assert column_rows(q, 3, 2, 3) == (2, 5, 1)
    assert build_H(q, 3).col(column_id(q, 2, 3)) == (strip_row(q, 0, 2), strip_row(q, 1, 5), strip_row(q, 2, 1))
    assert column_from_rows(q, [2, 5, 1]) == column_id(q, 2, 3)
    with pytest.raises(ValueError):
        column_from_rows(q, [2, 5, 0])


def test_parameter_checks():
    for q, a in ((4, 3), (5, 6), (1, 1)):
        with pytest.raises(ValueError):
            check_params(q, a)
    with pytest.raises(ValueError):
        build_H(9, 3)


def test_automorphisms_preserve_the_graph():
    q, a = 5, 3
    H = build_H(q, a)
    auts = list(automorphisms(q))
    assert len(auts) == (q - 1) * q * q
    for aut in auts[::7]:
        col_map = aut.column_map()
        row_map = np.array([aut.row(c) for c in range(a * q)])
        assert is_automorphism(H, col_map, row_map)
    bad = np.arange(q * q)
    bad[[0, 1]] = bad[[1, 0]]
    assert not is_automorphism(H, bad, np.arange(a * q))


def test_automorphisms_map_termatiko_sets_to_termatiko_sets():
    q, a = 7, 3
    H = build_H(q, a)
    T = size3_termatiko_sets(q)[0]
    for aut in list(automorphisms(q))[::11]:
        assert termatiko_class(H, apply_automorphism(q, a, aut, T)) > 0
    assert apply_automorphism(q, a, Automorphism(q, 1, 0, 0), T) == tuple(sorted(T))


@pytest.mark.parametrize("q", [5, 7, 11])
def test_size3_family(q):
    H = build_H(q, 3)
    sets = size3_termatiko_sets(q)
    assert len(sets) == size3_count(q) == q * q * (q - 1) * (q - 2) // 3
    for T in sets[:: max(1, len(sets) // 50)]:
        assert termatiko_class(H, T) == 1
        assert len(neighbors_of_set(H, T)) == 9


def test_orbit_sizes_divide_group_order():
    q = 5
    T = size3_termatiko_sets(q)[0]
    assert ((q - 1) * q * q) % len(orbit(q, T)) == 0


def test_linear_forms():
    f = parse_linear("2i-3j+4")
    assert f == {"i": 2, "j": -3, "": 4}
    assert eval_linear(f, {"i": 1, "j": 2}, 7) == 0
    assert eval_linear(parse_linear("-q+1"), {}, 7) == 1 - 7 + 7
    with pytest.raises(ValueError):
        parse_linear("2*i")


def test_catalog_templates_are_split_codewords():
    cat = split_catalog()
    assert len(cat) >= 9
    for t in cat:
        q = t.smallest_q()
        H = build_H(q, t.a)
        T, S = t.instantiate(q)
        D = T + S
        assert len(set(D)) == len(D) == t.weight, t.name
        assert is_codeword_support(H, D), t.name
        assert termatiko_class(H, T) and termatiko_class(H, S), t.name


def test_catalog_entry_lookup_and_invalid_q():
    t = catalog_entry("h54_w8")
    assert t.a == 4 and t.valid_q(5) and not t.valid_q(7)
    with pytest.raises(ValueError):
        t.instantiate(7)
    with pytest.raises(KeyError):
        catalog_entry("missing")


def test_distance_table():
    rendered = {(q, a): termatiko_distance_table(q, a).render()
                for q, a in ((5, 3), (7, 3), (5, 4), (7, 4), (11, 4), (7, 5))}
    assert rendered[(5, 3)] == rendered[(7, 3)] == "3"
    assert rendered[(5, 4)] == rendered[(7, 4)] == "4"
    assert termatiko_distance_table(11, 4).lower == 5
    assert termatiko_distance_table(7, 5).lower == 6


def test_stored_support_is_a_codeword():
    q, a, cols = load_support("h74_w20")
    assert (q, a, len(cols)) == (7, 4, 20)
    assert is_codeword_support(build_H(q, a), cols)
