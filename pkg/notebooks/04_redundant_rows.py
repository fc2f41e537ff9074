"""
Redundant rows
==============

Adding nonnegative combinations of existing rows never creates termatiko
sets and can remove some.
"""

from termatiko.array_ldpc import build_H, size3_termatiko_sets
from termatiko.instances import redundancy_demo
from termatiko.redundancy import check_no_new_termatiko_sets, companion_row, greedy_extend, pivot_row
from termatiko.termatiko_sets import is_termatiko_structural

# In the 5x5 demo matrix {0, 1} is termatiko. The difference of rows 1 and 0
# is a nonnegative row of the row space; adding it breaks the set.
A, E, extra = redundancy_demo()
print("extra row:", extra)
print("{0,1} termatiko before:", is_termatiko_structural(A, (0, 1)), "after:", is_termatiko_structural(E, (0, 1)))
print("no new sets up to size 5:", check_no_new_termatiko_sets(A, E, 5).holds)

# The pivot construction looks for a row that touches T and misses S; the
# companion construction a row that misses T and clears a measurement.
print("pivot row:", pivot_row(A, (0, 1), 0).status, "companion row:", companion_row(A, (0, 1)).status)

# The greedy search scores candidates by how many listed sets they break.
res = greedy_extend(A, [(0, 1)])
print("greedy rows:", [s.candidate.row for s in res.steps], "remaining:", res.remaining)

# On H(5,3) every measurement of a size-3 set sees the set once, and no
# nonnegative combination of rows breaks any of them: greedy adds nothing.
H = build_H(5, 3)
sets = size3_termatiko_sets(5)
res = greedy_extend(H, sets[:10])
print("H(5,3): rows added", len(res.steps), "sets remaining", len(res.remaining))
