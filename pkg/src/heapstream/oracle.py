"""Independent ground-truth computations for the test suite.

Nothing here shares code with the sorter or the particle system: the minimum
partition is an exhaustive memoized search over all online placements, and
the decreasing-subsequence length has both a patience-style O(n log n) method
and a quadratic dynamic program to check it against.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_EXHAUSTIVE_N = 12


def min_heap_partition(sequence: Sequence[tuple[float, int]]) -> int:
    """Exact minimum number of trees over every online placement strategy.

    Each element may attach to any currently alive vertex with a strictly
    smaller label (spending one of its lives) or open a new tree. States are
    memoized on (position, multiset of (label rank, remaining lives)); label
    values beyond their rank cannot influence the future.
    """
    n = len(sequence)
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive search supports n <= {MAX_EXHAUSTIVE_N}, got {n}")
    labels = [float(u) for u, _ in sequence]
    if len(set(labels)) != n:
        raise ValueError("labels must be pairwise distinct")
    order = sorted(labels)
    rank = {u: i for i, u in enumerate(order)}
    ranks = [rank[u] for u in labels]
    caps = [int(nu) for _, nu in sequence]

    memo: dict[tuple, int] = {}

    def best(i: int, alive: tuple) -> int:
        if i == n:
            return 0
        key = (i, alive)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r, cap = ranks[i], caps[i]
        # open a new tree
        result = 1 + best(i + 1, _with_new(alive, r, cap))
        # or attach to any alive vertex with smaller rank
        for j, (vr, vl) in enumerate(alive):
            if vr < r:
                result = min(result, best(i + 1, _attach(alive, j, r, cap)))
        memo[key] = result
        return result

    return best(0, ())


def _with_new(alive: tuple, r: int, cap: int) -> tuple:
    return tuple(sorted(alive + ((r, cap),)))


def _attach(alive: tuple, j: int, r: int, cap: int) -> tuple:
    vr, vl = alive[j]
    rest = alive[:j] + alive[j + 1:]
    if vl > 1:
        rest = rest + ((vr, vl - 1),)
    return tuple(sorted(rest + ((r, cap),)))


def lds_length(labels: Sequence[float]) -> int:
    """Length of the longest strictly decreasing subsequence (patience method
    on negated labels, O(n log n))."""
    tails: list[float] = []
    for u in labels:
        v = -float(u)
        i = bisect_left(tails, v)
        if i == len(tails):
            tails.append(v)
        else:
            tails[i] = v
    return len(tails)


def lds_length_quadratic(labels: Sequence[float]) -> int:
    """O(n^2) dynamic program for the same quantity; cross-check oracle."""
    x = np.asarray(labels, dtype=np.float64)
    n = x.size
    if n == 0:
        return 0
    best = np.ones(n, dtype=np.int64)
    for i in range(1, n):
        smaller = x[:i] > x[i]
        if smaller.any():
            best[i] = 1 + best[:i][smaller].max()
    return int(best.max())


@dataclass
class ValidationReport:
    passed: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.passed


def check_forest_valid(forest, sequence: Sequence[tuple[float, int]]) -> ValidationReport:
    """Verify heap property, capacity bounds, arrival order, and that the
    forest's vertex multiset equals the input sequence. Failures are reported,
    not raised."""
    violations: list[str] = []
    pairs = [(float(u), int(nu)) for u, nu in sequence]
    vertices = forest.vertices

    if len(vertices) != len(pairs):
        violations.append(f"forest has {len(vertices)} vertices, input has {len(pairs)}")
    got = sorted((v.label, v.capacity) for v in vertices)
    if got != sorted(pairs):
        violations.append("vertex (label, capacity) multiset differs from input sequence")

    child_count: dict[int, int] = {}
    for v in vertices:
        if v.parent is not None:
            child_count[v.parent] = child_count.get(v.parent, 0) + 1
            p = vertices[v.parent]
            if not v.label > p.label:
                violations.append(
                    f"heap property violated on edge {p.label!r} -> {v.label!r}")
            if not v.arrival > p.arrival:
                violations.append(
                    f"arrival order violated: child {v.vid} arrived at {v.arrival}, "
                    f"parent {p.vid} at {p.arrival}")
    for vid, cnt in child_count.items():
        cap = vertices[vid].capacity
        if cnt > cap:
            violations.append(f"vertex {vid} has {cnt} children, capacity {cap}")

    return ValidationReport(passed=not violations, violations=violations)
