"""Jitted core loop shared by the batch sorter and the particle simulation.

The alive set is represented as a Fenwick tree of 0/1 flags indexed by label
rank, which gives the predecessor query (largest alive rank strictly below a
given rank) in O(log n) with small constants. Ranks are known up front
because both callers hold the full input before processing, so labels are
rank-compressed once with an argsort.

The loop mirrors the streaming reference implementation in
:mod:`heapstream.heap_sorter` step for step; the two are cross-checked by the
test suite.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def advance(ranks: np.ndarray, caps: np.ndarray, order: np.ndarray):
    """Run the insertion dynamics over a rank-compressed label sequence.

    Args:
        ranks: ranks[i] = rank of the i-th label among all n labels (0-based).
        caps: capacity of the i-th arrival.
        order: inverse permutation, order[r] = index of the arrival of rank r.

    Returns:
        father: index of the arrival each arrival attached to, -1 for roots.
        death: index of the arrival that consumed an arrival's last life,
            -1 if it is still alive at the end.
        r_values: running number of roots after each arrival.
    """
    n = ranks.size
    tree = np.zeros(n + 1, dtype=np.int64)   # Fenwick over rank+1 positions
    lives = np.zeros(n, dtype=np.int64)      # remaining lives by rank
    father = np.empty(n, dtype=np.int64)
    death = np.full(n, -1, dtype=np.int64)
    r_values = np.empty(n, dtype=np.int64)
    top = 1
    while top * 2 <= n:
        top *= 2
    roots = 0
    for i in range(n):
        r = ranks[i]
        # alive count among ranks 0..r-1
        k = 0
        j = r
        while j > 0:
            k += tree[j]
            j -= j & (-j)
        if k == 0:
            father[i] = -1
            roots += 1
        else:
            # k-th alive rank == largest alive rank < r; Fenwick select
            pos = 0
            rem = k
            step = top
            while step > 0:
                nxt = pos + step
                if nxt <= n and tree[nxt] < rem:
                    pos = nxt
                    rem -= tree[nxt]
                step >>= 1
            father[i] = order[pos]
            lives[pos] -= 1
            if lives[pos] == 0:
                death[order[pos]] = i
                j = pos + 1
                while j <= n:
                    tree[j] -= 1
                    j += j & (-j)
        lives[r] = caps[i]
        j = r + 1
        while j <= n:
            tree[j] += 1
            j += j & (-j)
        r_values[i] = roots
    return father, death, r_values


def run_ranked(labels: np.ndarray, caps: np.ndarray):
    """Rank-compress `labels` (assumed pairwise distinct) and run the kernel."""
    n = labels.size
    order = np.argsort(labels)
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n, dtype=np.int64)
    caps = np.ascontiguousarray(caps, dtype=np.int64)
    return advance(ranks, caps, order)
