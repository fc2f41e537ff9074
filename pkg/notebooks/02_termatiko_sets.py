"""
Termatiko sets
==============

Supports on which interval passing returns all zeros, recognized from the
graph alone and confirmed by running the decoder.
"""

import itertools

import numpy as np

from termatiko.instances import class1_demo, class2_demo, partial_recovery_demo
from termatiko.ipa import measure
from termatiko.tanner import MeasurementMatrix, is_stopping_set
from termatiko.termatiko_sets import (companion_sets, fails_on_signal, is_termatiko_operational,
                                      is_termatiko_structural, termatiko_class)

# Companion set S: variables outside T whose measurements all touch T.
A, T = class1_demo()
cs = companion_sets(A, T)
print("T =", cs.T, "N(T) =", cs.N, "S =", cs.S, "class", termatiko_class(A, T))

# A class-2 set has a measurement that sees no companion variable; two
# members of T whose checks all see T twice make up for it.
B, T2 = class2_demo()
print("T =", T2, "class", termatiko_class(B, T2), "operational:", is_termatiko_operational(B, T2))

# The structural test and the decoder agree on every small subset of a
# random matrix.
rng = np.random.default_rng(0)
dense = (rng.random((6, 10)) < 0.35).astype(int)
dense[rng.integers(0, 6, 10), np.arange(10)] = 1  # no empty columns
R = MeasurementMatrix.from_dense(dense.tolist())
agree = all(is_termatiko_structural(R, S) == is_termatiko_operational(R, S)
            for k in (1, 2, 3) for S in itertools.combinations(range(R.n), k))
print("checkers agree on all subsets of size <= 3:", agree)

# Every nonempty stopping set is termatiko, but not the other way round:
# {3} is termatiko in the partial-recovery matrix without being stopping.
P, x, _ = partial_recovery_demo()
print("{3} stopping:", is_stopping_set(P, (3,)), "termatiko:", is_termatiko_structural(P, (3,)))

# A failing signal always contains a termatiko witness.
failed, witness = fails_on_signal(P, [0, 0, 2, 5, 0, 0])
print("decoding failed:", failed, "witness:", witness)
print("measurements:", [str(v) for v in measure(P, x)])
