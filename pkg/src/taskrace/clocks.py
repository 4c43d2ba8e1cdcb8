"""Epochs, sparse vector clocks, the split read-only/read-write clock,
joinsets, and the small lookup cache.

A task's vector clock is split into an immutable `ro` part that siblings and
descendants share by handle, and a small private `rw` part. Spawning a child
either shares the parent's `ro` handle and copies the tiny `rw`, or, once
`rw` has grown past the threshold, merges both parts into a fresh immutable
`ro` for the child. Either way the child observes the same clock values, so
detection results are threshold-independent; the threshold only trades copy
cost against sharing.

`ro` dictionaries must never be mutated once they are reachable from more
than one SplitClock; all code here builds new dictionaries instead.
"""

from __future__ import annotations

from typing import NamedTuple, Optional


class Epoch(NamedTuple):
    task: int
    clock: int

    def __str__(self) -> str:
        return f"{self.clock}@{self.task}"


VectorClock = dict[int, int]


class ClockStats:
    """Mutable counters shared by one analysis run."""

    __slots__ = ("vc_entries_allocated", "vc_full_merges", "vc_entries_full_copy",
                 "cache_hits", "cache_misses")

    def __init__(self):
        self.vc_entries_allocated = 0
        self.vc_full_merges = 0
        self.vc_entries_full_copy = 0
        self.cache_hits = 0
        self.cache_misses = 0

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in self.__slots__}


def vc_merge(a: VectorClock, b: VectorClock) -> VectorClock:
    """Pointwise maximum of two sparse clocks."""
    out = dict(a)
    for t, c in b.items():
        if c > out.get(t, 0):
            out[t] = c
    return out


def epoch_leq_vc(e: Epoch, vc_ro: VectorClock, vc_rw: VectorClock) -> bool:
    """True iff the epoch is covered by the combined clock (absent entries are 0)."""
    known = vc_rw.get(e.task, 0)
    ro = vc_ro.get(e.task, 0)
    if ro > known:
        known = ro
    return e.clock <= known


class SplitClock:
    __slots__ = ("ro", "rw", "threshold")

    def __init__(self, ro: VectorClock, rw: VectorClock, threshold: int):
        self.ro = ro
        self.rw = rw
        self.threshold = threshold

    @classmethod
    def empty(cls, threshold: int) -> "SplitClock":
        return cls({}, {}, threshold)

    def lookup(self, task: int) -> int:
        a = self.ro.get(task, 0)
        b = self.rw.get(task, 0)
        return a if a > b else b

    def entry_count(self) -> int:
        # ro and rw keys are disjoint by construction at spawn time
        return len(self.ro) + len(self.rw)


def spawn_derive(parent: SplitClock, parent_epoch: Epoch,
                 stats: Optional[ClockStats] = None) -> SplitClock:
    """Derive a child's split clock at a spawn.

    parent_epoch is the parent's pre-increment epoch; the caller bumps the
    parent clock afterwards. When the parent's rw part has outgrown the
    threshold, both parts merge into a fresh immutable ro block; otherwise
    the ro handle is shared as-is and only the rw dictionary is copied.
    """
    if len(parent.rw) > parent.threshold:
        ro = vc_merge(parent.ro, parent.rw)
        rw = {parent_epoch.task: parent_epoch.clock}
        if stats is not None:
            stats.vc_full_merges += 1
            stats.vc_entries_allocated += len(ro) + 1
    else:
        ro = parent.ro
        rw = dict(parent.rw)
        rw[parent_epoch.task] = parent_epoch.clock
        if stats is not None:
            stats.vc_entries_allocated += len(rw)
    if stats is not None:
        stats.vc_entries_full_copy += len(ro) + len(rw)
    return SplitClock(ro, rw, parent.threshold)


class JoinSet:
    """Immutable set of already-joined task ids.

    Inheriting at a spawn shares the handle, which gives snapshot isolation
    for free: a later add builds a new JoinSet and cannot leak into children
    that inherited earlier.
    """

    __slots__ = ("_ids",)

    def __init__(self, ids: frozenset[int] = frozenset()):
        self._ids = ids

    def add(self, task: int) -> "JoinSet":
        if task in self._ids:
            return self
        return JoinSet(self._ids | {task})

    def __contains__(self, task: int) -> bool:
        return task in self._ids

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self):
        return iter(self._ids)

    def members(self) -> frozenset[int]:
        return self._ids


def joinset_inherit(parent: JoinSet) -> JoinSet:
    return parent


def joinset_add(s: JoinSet, task: int) -> JoinSet:
    return s.add(task)


class ClockCache:
    """Tiny recency store over SplitClock lookups.

    Purely an accelerator: a capacity of 0 disables it, and any mutation of
    the underlying rw part must be followed by invalidate(). The engine never
    mutates a split clock after construction, so it never needs to.
    """

    __slots__ = ("capacity", "_entries")

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: list[list[int]] = []

    def invalidate(self) -> None:
        self._entries.clear()

    def lookup(self, sc: SplitClock, task: int, stats: Optional[ClockStats] = None) -> int:
        entries = self._entries
        for i, pair in enumerate(entries):
            if pair[0] == task:
                if i:
                    entries.insert(0, entries.pop(i))
                if stats is not None:
                    stats.cache_hits += 1
                return pair[1]
        value = sc.lookup(task)
        if stats is not None:
            stats.cache_misses += 1
        entries.insert(0, [task, value])
        if len(entries) > self.capacity:
            entries.pop()
        return value


def cached_lookup(sc: SplitClock, cache: Optional[ClockCache], task: int,
                  stats: Optional[ClockStats] = None) -> int:
    if cache is None or cache.capacity == 0:
        return sc.lookup(task)
    return cache.lookup(sc, task, stats)

