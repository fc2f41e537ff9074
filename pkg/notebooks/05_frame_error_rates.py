"""
Frame error rates
=================

Exact, simulated and inclusion-exclusion estimates of how often interval
passing fails on random supports of a given weight.
"""

import numpy as np

from termatiko.analysis import (antichain_filter, fer_exhaustive, fer_simulate, min_codeword_weight,
                                pie_lower_bound, protograph_lift)
from termatiko.array_ldpc import build_H, size3_termatiko_sets
from termatiko.stopping import enumerate_stopping_sets, stopping_distance
from termatiko.termatiko_sets import stopping_subset_spectrum

# On H(5,3) a weight-3 support fails exactly when it is one of the 100
# size-3 termatiko sets.
H = build_H(5, 3)
sets = size3_termatiko_sets(5)
for w in (3, 4, 5):
    exact = fer_exhaustive(H, w)
    bound = pie_lower_bound(H.n, sets, [w])[w]
    sim = fer_simulate(H, [w], 20_000, seed=w)[0]
    print(f"w={w}: exact {float(exact):.5f}  bound {float(bound):.5f}  "
          f"simulated {sim.value:.5f} [{sim.ci_lo:.5f}, {sim.ci_hi:.5f}]")

# Truncating inclusion-exclusion after an even number of terms still gives
# a lower bound.
print("depth 2 at w=5:", float(pie_lower_bound(H.n, sets, [5], depth=2)[5]))

# A random lift of the (3,6) base graph: smallest termatiko sets sit at or
# below the stopping distance, which sits at or below the smallest codeword
# found.
G = protograph_lift([[3, 3]], 50, np.random.default_rng(7))
s = stopping_distance(G, 14)
stop = enumerate_stopping_sets(G, s + 4)
spectrum = stopping_subset_spectrum(G, stop, max_size=s)
print("stopping distance", s, "codeword weight", min_codeword_weight(G, stop.sets),
      "smallest termatiko set found", spectrum.h_min_estimate)
fam = antichain_filter(spectrum.sets)
for p in fer_simulate(G, [4, 8], 3000, seed=1):
    print(f"w={p.weight}: bound {float(pie_lower_bound(G.n, fam, [p.weight], depth=2)[p.weight]):.2e}"
          f"  simulated {p.value:.2e}")
