"""Streaming greedy sorter: place each arriving (label, capacity) pair as a
child of the alive vertex with the largest label strictly below it, or open a
new tree when no such vertex exists. A vertex is alive while it has used
strictly fewer lives than its capacity; receiving a child costs the parent
one life.

Two engines compute the same dynamics:

* a streaming engine backed by an ordered map (`sortedcontainers.SortedList`)
  with O(log n) predecessor queries, which also materializes the forest;
* a batch engine (:mod:`heapstream._kernels`) that rank-compresses the labels
  and runs a jitted Fenwick loop, used for trace-only runs at large n.

The test suite checks the two produce identical traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from sortedcontainers import SortedList

from .offspring import OffspringDistribution, sample_array

FOREST_DUMP_MAX_N = 100_000  # above this, CLI runs trace-only


class AliveSet:
    """Ordered map label -> (remaining lives, vertex id) with predecessor query."""

    def __init__(self) -> None:
        self._keys = SortedList()
        self._info: dict[float, list] = {}  # label -> [lives, vid]

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, label: float) -> bool:
        return label in self._info

    def predecessor(self, u: float):
        """Largest alive label strictly below u, or None."""
        i = self._keys.bisect_left(u)
        if i == 0:
            return None
        label = self._keys[i - 1]
        lives, vid = self._info[label]
        return label, lives, vid

    def add(self, label: float, lives: int, vid) -> None:
        if label in self._info:
            raise ValueError(f"label {label!r} already alive")
        if lives < 1:
            raise ValueError("entries must enter with at least one life")
        self._keys.add(label)
        self._info[label] = [lives, vid]

    def consume_life(self, label: float) -> bool:
        """Decrement a life; remove the entry when it hits zero. Returns True
        if the entry died."""
        entry = self._info[label]
        entry[0] -= 1
        if entry[0] == 0:
            self._keys.remove(label)
            del self._info[label]
            return True
        return False

    def items(self):
        for label in self._keys:
            lives, vid = self._info[label]
            yield label, lives, vid

    def as_dict(self) -> dict[float, int]:
        return {label: lives for label, lives, _ in self.items()}


@dataclass(frozen=True)
class Placement:
    kind: str                 # "root" | "child"
    parent: Optional[int]     # vertex id of the father, None for roots

    @property
    def is_root(self) -> bool:
        return self.kind == "root"


@dataclass(frozen=True)
class HeapVertex:
    vid: int
    label: float
    capacity: int
    parent: Optional[int]
    arrival: int              # equal to vid; kept explicit for dump/validation


class HeapForest:
    """Forest built by the sorter; vertex ids are arrival indices."""

    def __init__(self) -> None:
        self.vertices: list[HeapVertex] = []
        self.roots: list[int] = []
        self._children: dict[int, list[int]] = {}

    def __len__(self) -> int:
        return len(self.vertices)

    def add_vertex(self, label: float, capacity: int, parent: Optional[int]) -> int:
        vid = len(self.vertices)
        self.vertices.append(HeapVertex(vid, label, capacity, parent, vid))
        self._children[vid] = []
        if parent is None:
            self.roots.append(vid)
        else:
            self._children[parent].append(vid)
        return vid

    def children(self, vid: int) -> list[int]:
        return list(self._children[vid])

    def tree_count(self) -> int:
        return len(self.roots)

    def to_tree_dicts(self) -> list[dict]:
        """Recursive {label, capacity, children} dump, trees in creation order."""
        def build(vid: int) -> dict:
            v = self.vertices[vid]
            return {
                "label": v.label,
                "capacity": v.capacity,
                "children": [build(c) for c in self._children[vid]],
            }
        return [build(r) for r in self.roots]


@dataclass
class SortTrace:
    """Per-step record of a sorter run. r_values[n-1] is the number of trees
    after n insertions. placements is None for trace-only (batch) runs;
    labels/capacities are populated when the caller asked to keep them."""

    r_values: np.ndarray
    placements: Optional[list[Placement]] = None
    labels: Optional[np.ndarray] = None
    capacities: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __len__(self) -> int:
        return int(self.r_values.size)

    def tree_count(self, n: int) -> int:
        if not 1 <= n <= self.r_values.size:
            raise ValueError(f"n={n} outside [1, {self.r_values.size}]")
        return int(self.r_values[n - 1])


def tree_count(trace: SortTrace, n: int) -> int:
    return trace.tree_count(n)


class HeapSorter:
    """Streaming engine. Feed labels one at a time with :meth:`insert`."""

    def __init__(self, track_forest: bool = True) -> None:
        self.alive = AliveSet()
        self.forest = HeapForest() if track_forest else None
        self.r_values: list[int] = []
        self.placements: list[Placement] = []
        self._seen: set[float] = set()
        self._roots = 0

    def insert(self, u: float, nu: int) -> Placement:
        u = float(u)
        nu = int(nu)
        if u in self._seen:
            raise ValueError(f"duplicate label {u!r}")
        if nu < 1:
            raise ValueError(f"capacity must be >= 1, got {nu}")
        pred = self.alive.predecessor(u)
        if pred is None:
            placement = Placement("root", None)
            self._roots += 1
        else:
            label, _, vid = pred
            self.alive.consume_life(label)
            placement = Placement("child", vid)
        vid = self.forest.add_vertex(u, nu, placement.parent) if self.forest is not None \
            else len(self._seen)
        self.alive.add(u, nu, vid)
        self._seen.add(u)
        self.r_values.append(self._roots)
        self.placements.append(placement)
        return placement


def run(sequence: Iterable[tuple[float, int]]) -> tuple[HeapForest, SortTrace]:
    """Sort an explicit (label, capacity) sequence; labels must be distinct."""
    pairs = [(float(u), int(nu)) for u, nu in sequence]
    seen: dict[float, int] = {}
    for i, (u, _) in enumerate(pairs):
        if u in seen:
            raise ValueError(f"duplicate label {u!r} at positions {seen[u]} and {i}")
        seen[u] = i
    sorter = HeapSorter(track_forest=True)
    for u, nu in pairs:
        sorter.insert(u, nu)
    trace = SortTrace(
        r_values=np.array(sorter.r_values, dtype=np.int64),
        placements=sorter.placements,
        labels=np.array([u for u, _ in pairs], dtype=np.float64),
        capacities=np.array([nu for _, nu in pairs], dtype=np.int64),
    )
    return sorter.forest, trace


def run_random(dist: OffspringDistribution, n: int, seed: int,
               keep_sequence: bool = False, engine: str = "batch") -> SortTrace:
    """Run the sorter on U_i ~ Uniform[0,1], nu_i ~ dist, both i.i.d.

    Deterministic given (dist, n, seed); trace-only (no forest). `engine` is
    "batch" (jitted kernel) or "stream" (ordered-map reference); both yield
    identical traces.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels, caps = random_sequence(dist, n, seed)
    if engine == "batch":
        from . import _kernels
        _, _, r_values = _kernels.run_ranked(labels, caps)
    elif engine == "stream":
        sorter = HeapSorter(track_forest=False)
        for u, nu in zip(labels, caps):
            sorter.insert(u, nu)
        r_values = np.array(sorter.r_values, dtype=np.int64)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return SortTrace(
        r_values=r_values,
        placements=None,
        labels=labels if keep_sequence else None,
        capacities=caps if keep_sequence else None,
        seed=seed,
    )


def random_sequence(dist: OffspringDistribution, n: int, seed: int):
    """The (labels, capacities) arrays run_random processes. Labels are redrawn
    wholesale on a floating-point collision so they are always pairwise
    distinct yet still a deterministic function of the seed."""
    rng = np.random.default_rng(seed)
    labels = rng.random(n)
    while np.unique(labels).size != n:
        labels = rng.random(n)
    caps = sample_array(dist, rng, n)
    return labels, caps


def ratio_to_log(trace: SortTrace, n: int) -> float:
    """R(n)/log n, the normalized tree count (n >= 2)."""
    if n < 2:
        raise ValueError("ratio undefined for n < 2")
    return trace.tree_count(n) / math.log(n)
