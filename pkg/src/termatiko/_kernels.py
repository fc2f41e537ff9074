"""Compiled kernels for the combinatorial searches.

All kernels take the Tanner graph as CSR arrays: ``col_ptr/col_idx`` map a
variable to its measurements and ``row_ptr/row_idx`` a measurement to its
variables.  Scratch arrays are passed in zeroed and handed back zeroed.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def structural_class(T, t, col_ptr, col_idx, row_ptr, row_idx, cntT, inT, smemo, cmark, stamp):
    """Classify the set ``T[:t]``.

    Returns 0 if not termatiko, 1 if every measurement of ``N(T)`` sees the
    companion set, 2 if termatiko otherwise.  ``smemo`` and ``cmark`` are
    stamp arrays: entries equal to ``stamp`` (or ``-stamp``) belong to this
    call.
    """
    if t == 0:
        return 0
    for p in range(t):
        v = T[p]
        inT[v] = True
        for e in range(col_ptr[v], col_ptr[v + 1]):
            cntT[col_idx[e]] += 1
    result = 1
    for p in range(t):
        v = T[p]
        for e in range(col_ptr[v], col_ptr[v + 1]):
            c = col_idx[e]
            if cmark[c] == stamp:
                continue
            cmark[c] = stamp
            sees_s = False
            for f in range(row_ptr[c], row_ptr[c + 1]):
                u = row_idx[f]
                if inT[u]:
                    continue
                # smemo[u] == stamp: u in S, == -stamp: u not in S
                if smemo[u] != stamp and smemo[u] != -stamp:
                    ins = True
                    for g in range(col_ptr[u], col_ptr[u + 1]):
                        if cntT[col_idx[g]] == 0:
                            ins = False
                            break
                    smemo[u] = stamp if ins else -stamp
                if smemo[u] == stamp:
                    sees_s = True
                    break
            if sees_s:
                continue
            good = 0
            for f in range(row_ptr[c], row_ptr[c + 1]):
                u = row_idx[f]
                if not inT[u]:
                    continue
                ok = True
                for g in range(col_ptr[u], col_ptr[u + 1]):
                    if cntT[col_idx[g]] < 2:
                        ok = False
                        break
                if ok:
                    good += 1
                    if good >= 2:
                        break
            if good < 2:
                result = 0
                break
            result = 2
        if result == 0:
            break
    for p in range(t):
        v = T[p]
        inT[v] = False
        for e in range(col_ptr[v], col_ptr[v + 1]):
            cntT[col_idx[e]] -= 1
    return result


class Scratch:
    """Scratch buffers for :func:`structural_class`."""

    def __init__(self, m, n):
        self.cntT = np.zeros(m, dtype=np.int32)
        self.inT = np.zeros(n, dtype=np.bool_)
        self.smemo = np.zeros(n, dtype=np.int64)
        self.cmark = np.zeros(m, dtype=np.int64)
        self.stamp = 0

    def next_stamp(self):
        self.stamp += 1
        return self.stamp


# -- stopping-set search ---------------------------------------------------

@njit(cache=True)
def _ss_node(col_ptr, col_idx, row_ptr, row_idx, dv_max, tau, state, cnt, members, size,
             out, out_size, counters, cand, base):
    """Evaluate the node with members ``members[:size]``.

    Writes the branching candidates to ``cand[base:]`` and returns their
    number (0: nothing to branch on).
    """
    best_c = -1
    best_k = 1 << 30
    unsat = 0
    for p in range(size):
        v = members[p]
        for e in range(col_ptr[v], col_ptr[v + 1]):
            c = col_idx[e]
            if cnt[c] != 1:
                continue
            unsat += 1
            k = 0
            for f in range(row_ptr[c], row_ptr[c + 1]):
                if state[row_idx[f]] == 0:
                    k += 1
            if k == 0:
                return 0
            if k < best_k:
                best_k = k
                best_c = c
    if unsat > 0:
        if size + (unsat + dv_max - 1) // dv_max > tau:
            return 0
        k = 0
        for f in range(row_ptr[best_c], row_ptr[best_c + 1]):
            u = row_idx[f]
            if state[u] == 0:
                cand[base + k] = u
                k += 1
        return k
    # members form a stopping set
    j = counters[1]
    if j < out.shape[0]:
        for p in range(size):
            out[j, p] = members[p]
        out_size[j] = size
    counters[1] += 1
    if size >= tau:
        return 0
    k = 0
    for u in range(state.shape[0]):
        if state[u] == 0:
            cand[base + k] = u
            k += 1
    return k


@njit(cache=True)
def _ss_from(col_ptr, col_idx, row_ptr, row_idx, dv_max, tau, state, cnt, members,
             out, out_size, counters, budget):
    """Depth-first search below the single-member set ``members[:1]``.

    Frame ``d`` holds the node of size ``d + 1``; it branches over its
    candidates, including candidate ``i`` and excluding the earlier ones.
    """
    n = state.shape[0]
    cand = np.empty((tau + 1) * n, dtype=np.int64)
    f_k = np.zeros(tau + 1, dtype=np.int64)
    f_i = np.zeros(tau + 1, dtype=np.int64)
    f_u = np.full(tau + 1, -1, dtype=np.int64)
    counters[0] += 1
    f_k[0] = _ss_node(col_ptr, col_idx, row_ptr, row_idx, dv_max, tau, state, cnt, members, 1,
                      out, out_size, counters, cand, 0)
    f_i[0] = 0
    f_u[0] = -1
    d = 0
    while d >= 0:
        u = f_u[d]
        if u >= 0:
            for e in range(col_ptr[u], col_ptr[u + 1]):
                cnt[col_idx[e]] -= 1
            state[u] = 2
            f_u[d] = -1
        if f_i[d] < f_k[d] and counters[2] == 0:
            u = cand[d * n + f_i[d]]
            f_i[d] += 1
            state[u] = 1
            members[d + 1] = u
            for e in range(col_ptr[u], col_ptr[u + 1]):
                cnt[col_idx[e]] += 1
            f_u[d] = u
            counters[0] += 1
            if counters[0] > budget:
                counters[2] = 1
                continue
            k = _ss_node(col_ptr, col_idx, row_ptr, row_idx, dv_max, tau, state, cnt, members, d + 2,
                         out, out_size, counters, cand, (d + 1) * n)
            if k > 0:
                d += 1
                f_k[d] = k
                f_i[d] = 0
                f_u[d] = -1
        else:
            for i in range(f_k[d]):
                state[cand[d * n + i]] = 0
            d -= 1


@njit(cache=True)
def stopping_search(col_ptr, col_idx, row_ptr, row_idx, m, n, tau, anchor, budget, out, out_size, counters):
    """Enumerate nonempty stopping sets of size ``<= tau``.

    With ``anchor >= 0`` only sets containing ``anchor`` are listed.
    Sets past ``out``'s capacity are counted but not stored.
    ``counters`` = ``[nodes, found, aborted]``.
    """
    dv_max = 1
    for v in range(n):
        d = col_ptr[v + 1] - col_ptr[v]
        if d > dv_max:
            dv_max = d
    state = np.zeros(n, dtype=np.int8)
    cnt = np.zeros(m, dtype=np.int32)
    members = np.zeros(tau + 1, dtype=np.int64)
    if anchor >= 0:
        starts = np.array([anchor], dtype=np.int64)
    else:
        starts = np.arange(n)
    for v0 in starts:
        if anchor < 0:
            for u in range(v0):
                state[u] = 2
        state[v0] = 1
        members[0] = v0
        for e in range(col_ptr[v0], col_ptr[v0 + 1]):
            cnt[col_idx[e]] += 1
        _ss_from(col_ptr, col_idx, row_ptr, row_idx, dv_max, tau, state, cnt, members,
                 out, out_size, counters, budget)
        for e in range(col_ptr[v0], col_ptr[v0 + 1]):
            cnt[col_idx[e]] -= 1
        state[v0] = 0
        if anchor < 0:
            for u in range(v0):
                state[u] = 0
        if counters[2]:
            break


# -- subset harvesting -------------------------------------------------------

@njit(cache=True)
def harvest_subsets(sets, sizes, min_size, max_size, anchor, col_ptr, col_idx, row_ptr, row_idx,
                    m, n, seen, found_keys, found_class, counters):
    """Check every subset of size in ``[min_size, max_size]`` of each listed set.

    ``sets`` rows hold sorted members padded with -1.  With ``anchor >= 0``
    only subsets containing ``anchor`` are checked.  A subset is keyed by
    its members plus one, in base ``n + 1``; ``seen`` (a typed dict) maps keys of checked
    subsets to their class.  Termatiko subsets are appended to
    ``found_keys``/``found_class`` while capacity allows; ``counters`` holds
    ``[checked, found]``.
    """
    cntT = np.zeros(m, dtype=np.int32)
    inT = np.zeros(n, dtype=np.bool_)
    smemo = np.zeros(n, dtype=np.int64)
    cmark = np.zeros(m, dtype=np.int64)
    stamp = 0
    T = np.zeros(max_size + 1, dtype=np.int64)
    idx = np.zeros(max_size + 1, dtype=np.int64)
    elems = np.zeros(sets.shape[1], dtype=np.int64)
    for r in range(sets.shape[0]):
        s = sizes[r]
        # with an anchor, the anchor is forced first and subsets are drawn
        # from the rest
        ne = 0
        has_anchor = False
        for p in range(s):
            x = sets[r, p]
            if x == anchor:
                has_anchor = True
            else:
                elems[ne] = x
                ne += 1
        if anchor >= 0 and not has_anchor:
            continue
        fixed = 1 if anchor >= 0 else 0
        for t in range(min_size, max_size + 1):
            k = t - fixed
            if k < 0 or k > ne:
                continue
            for p in range(k):
                idx[p] = p
            while True:
                # assemble T sorted
                q = 0
                placed = fixed == 0
                for p in range(k):
                    x = elems[idx[p]]
                    if not placed and anchor < x:
                        T[q] = anchor
                        q += 1
                        placed = True
                    T[q] = x
                    q += 1
                if not placed:
                    T[q] = anchor
                    q += 1
                key = 0
                for p in range(t):
                    key = key * (n + 1) + T[p] + 1
                if key not in seen:
                    stamp += 1
                    cls = structural_class(T, t, col_ptr, col_idx, row_ptr, row_idx, cntT, inT, smemo, cmark, stamp)
                    seen[key] = cls
                    counters[0] += 1
                    if cls > 0:
                        j = counters[1]
                        if j < found_keys.shape[0]:
                            found_keys[j] = key
                            found_class[j] = cls
                        counters[1] += 1
                # next combination of k out of ne
                p = k - 1
                while p >= 0 and idx[p] == ne - k + p:
                    p -= 1
                if p < 0:
                    break
                idx[p] += 1
                for q2 in range(p + 1, k):
                    idx[q2] = idx[q2 - 1] + 1


@njit(cache=True)
def exhaustive_size(t, anchor, col_ptr, col_idx, row_ptr, row_idx, m, n, budget, out, out_cls, counters):
    """Check all ``t``-subsets of the variables (containing ``anchor`` if >= 0).

    Termatiko sets are written to ``out`` rows (classes to ``out_cls``)
    while capacity allows.  ``counters`` = ``[checked, found, aborted,
    class-1 found]``.
    """
    cntT = np.zeros(m, dtype=np.int32)
    inT = np.zeros(n, dtype=np.bool_)
    smemo = np.zeros(n, dtype=np.int64)
    cmark = np.zeros(m, dtype=np.int64)
    stamp = 0
    pool = np.zeros(n, dtype=np.int64)
    npool = 0
    for v in range(n):
        if v != anchor:
            pool[npool] = v
            npool += 1
    fixed = 1 if anchor >= 0 else 0
    k = t - fixed
    if k < 0 or k > npool:
        return
    idx = np.arange(k)
    T = np.zeros(t, dtype=np.int64)
    while True:
        q = 0
        placed = fixed == 0
        for p in range(k):
            x = pool[idx[p]]
            if not placed and anchor < x:
                T[q] = anchor
                q += 1
                placed = True
            T[q] = x
            q += 1
        if not placed:
            T[q] = anchor
        stamp += 1
        cls = structural_class(T, t, col_ptr, col_idx, row_ptr, row_idx, cntT, inT, smemo, cmark, stamp)
        counters[0] += 1
        if cls > 0:
            j = counters[1]
            if j < out.shape[0]:
                for p in range(t):
                    out[j, p] = T[p]
                out_cls[j] = cls
            counters[1] += 1
            if cls == 1:
                counters[3] += 1
        if counters[0] >= budget:
            # stop only if more combinations remain
            p = k - 1
            while p >= 0 and idx[p] == npool - k + p:
                p -= 1
            if p >= 0:
                counters[2] = 1
            return
        p = k - 1
        while p >= 0 and idx[p] == npool - k + p:
            p -= 1
        if p < 0:
            break
        idx[p] += 1
        for q2 in range(p + 1, k):
            idx[q2] = idx[q2 - 1] + 1
