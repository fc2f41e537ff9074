"""Reference implementations used only as test oracles."""

from __future__ import annotations

import itertools

import numpy as np

from termatiko.tanner import MeasurementMatrix


def random_binary_matrix(rng: np.random.Generator, m: int, n: int, density: float = 0.35) -> MeasurementMatrix:
    """Random binary matrix with no empty column."""
    H = (rng.random((m, n)) < density).astype(int)
    for v in range(n):
        if not H[:, v].any():
            H[rng.integers(m), v] = 1
    return MeasurementMatrix.from_dense(H.tolist())


def random_column_regular(rng: np.random.Generator, m: int, n: int, dv: int) -> MeasurementMatrix:
    cols = [sorted(rng.choice(m, size=dv, replace=False).tolist()) for _ in range(n)]
    return MeasurementMatrix.from_supports(m, n, cols)


def brute_stopping_sets(mat: MeasurementMatrix, tau: int) -> list[tuple[int, ...]]:
    out = []
    for k in range(1, tau + 1):
        for D in itertools.combinations(range(mat.n), k):
            cnt = {}
            for v in D:
                for c in mat.col(v):
                    cnt[c] = cnt.get(c, 0) + 1
            if all(x >= 2 for x in cnt.values()):
                out.append(D)
    return out


def f2_nullspace(H: np.ndarray) -> np.ndarray:
    """Basis (rows) of the GF(2) nullspace of ``H``."""
    A = (np.asarray(H) % 2).astype(np.uint8).copy()
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if A[i, c]), None)
        if p is None:
            continue
        A[[r, p]] = A[[p, r]]
        for i in range(m):
            if i != r and A[i, c]:
                A[i] ^= A[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = np.zeros(n, dtype=np.uint8)
        x[f] = 1
        for i, pc in enumerate(pivots):
            x[pc] = A[i, f]
        basis.append(x)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), n)
