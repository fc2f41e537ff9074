"""
Interval passing on small matrices
==================================

Exact reconstruction of a sparse nonnegative signal, the bound tables of a
run, and a support on which decoding only partly succeeds.
"""

from fractions import Fraction

from termatiko.instances import partial_recovery_demo, weighted_demo
from termatiko.ipa import counter_braid_decode, ipa_run, ipa_trace, recovery_equivalence_check

# A 4x6 weighted matrix and a 3-sparse signal. Exact arithmetic recovers the
# signal from four measurements.
A, x, y = weighted_demo()
res = ipa_run(A, y)
print("estimate:", [str(v) for v in res.estimate], "iterations:", res.iterations)
assert res.estimate == [Fraction(v) for v in x]

# Every variable carries an interval [mu, M]. The trace lists the intervals
# after each iteration; they shrink until lower and upper bounds meet.
for s in ipa_trace(A, y):
    if s.phase == "variable":
        print(f"iter {s.iteration}:", " ".join(f"[{lo},{hi}]" for lo, hi in zip(s.mu, s.M)))

# The recovered positions depend only on the support of the matrix and of
# the signal: the binary problem gives the same mask.
mask_a, mask_b, same = recovery_equivalence_check(A, x)
print("weighted mask:", mask_a.astype(int), "binary mask:", mask_b.astype(int), "equal:", same)

# A binary matrix and a 2-sparse signal whose support is not a stopping set.
# Variable 2 is recovered, variable 3 is reported as zero.
P, xp, yp = partial_recovery_demo()
print("partial recovery:", [str(v) for v in ipa_run(P, yp).estimate], "truth:", xp)

# Counter braids start every upper bound at +infinity and give the same
# answer on binary matrices.
print("counter braids:", [str(v) for v in counter_braid_decode(P, yp).estimate])
