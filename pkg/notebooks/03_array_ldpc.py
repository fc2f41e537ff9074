"""
Array LDPC matrices
===================

The matrices H(q, a), their size-3 termatiko family, codewords split into
two termatiko halves, and the resulting distance table.
"""

from termatiko.analysis import is_codeword_support
from termatiko.array_ldpc import (build_H, load_support, size3_count, split_catalog, termatiko_distance_table)
from termatiko.split import split_exhaustive, split_repeated
from termatiko.termatiko_sets import exhaustive_termatiko_sets

# H(q, a) has q*q columns and a*q rows; column (i, j) meets row value i + k*j
# of strip k.
H = build_H(5, 3)
print("H(5,3):", H.shape, "column degrees", set(H.col_degrees()), "row degrees", set(H.row_degrees()))

# For a = 3 every size-3 termatiko set is of one shape, giving q^2 (q-1)(q-2)/3
# sets; the exhaustive search over all triples agrees.
for q in (5, 7):
    res = exhaustive_termatiko_sets(build_H(q, 3), 3)
    print(f"q={q}: closed form {size3_count(q)}, exhaustive {res.count}")

# Coloring a codeword so that each of its checks sees both colors gives two
# termatiko halves.
for t in split_catalog():
    q = t.smallest_q()
    T, S = t.instantiate(q)
    print(f"{t.name:10s} q={q:2d} halves {len(T)}+{len(S)} codeword {is_codeword_support(build_H(q, t.a), T + S)}")

# The randomized splitter recovers such splits from the codeword alone.
t = split_catalog()[2]
T, S = t.instantiate(t.smallest_q())
tries = split_repeated(build_H(t.smallest_q(), t.a), T + S, attempts=50, seed=1)
print(f"randomized split of {t.name}: {tries[-1].status} after {len(tries)} attempts, halves",
      tries[-1].T, tries[-1].S)

# Some codewords cannot be split at all; the exhaustive coloring proves it.
q, a, cols = load_support("h74_w20")
print("weight-20 support of H(7,4): valid splits", split_exhaustive(build_H(q, a), cols).count)

# Bounds on the smallest termatiko set size.
for q, a in ((5, 3), (7, 4), (11, 4), (11, 5), (7, 7)):
    print(f"h({q},{a}) = {termatiko_distance_table(q, a).render()}")
