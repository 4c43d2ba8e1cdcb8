"""Brute-force ground truth for small traces.

Builds the happens-before graph over all events (per-task program order,
spawn edges into a child's first event, join edges from a joined child's
last event into the join point), closes it transitively with bitsets, and
enumerates every conflicting access pair that may happen in parallel with
disjoint locksets. Lock acquire/release contribute no ordering edges, only
the lockset snapshots, so the resulting pair set depends on the task
structure and per-task orders alone and is identical across relinearizations
of the same program.
"""

from __future__ import annotations

from typing import NamedTuple

from .lockset import LockSet, are_disjoint, with_acquired, with_released
from .trace import EventKind, Trace, require_valid


class SizeLimitError(Exception):
    pass


class AccessRecord(NamedTuple):
    task: int
    seq: int                # per-task access ordinal, stable across schedules
    var: int
    is_write: bool
    lockset: LockSet
    line: int
    index: int              # event index within this linearization


class RacePair(NamedTuple):
    a: AccessRecord         # earlier in this linearization
    b: AccessRecord

    @property
    def kinds(self) -> str:
        return ("W" if self.a.is_write else "R") + ("W" if self.b.is_write else "R")


class HbGraph:
    """Transitive closure over event indices, one int bitmask per node."""

    def __init__(self, trace: Trace):
        events = trace.events
        n = len(events)
        succs: list[list[int]] = [[] for _ in range(n)]
        last_of: dict[int, int] = {}
        pending_spawn: dict[int, int] = {}
        for i, ev in enumerate(events):
            if ev.actor in last_of:
                succs[last_of[ev.actor]].append(i)
            elif ev.actor in pending_spawn:
                succs[pending_spawn[ev.actor]].append(i)
            last_of[ev.actor] = i
            if ev.kind is EventKind.SPAWN:
                pending_spawn[ev.child] = i
            elif ev.kind is EventKind.JOIN and ev.child in last_of:
                succs[last_of[ev.child]].append(i)
        reach = [0] * n
        for i in range(n - 1, -1, -1):
            mask = 0
            for j in succs[i]:
                mask |= (1 << j) | reach[j]
            reach[i] = mask
        self._reach = reach

    def reaches(self, i: int, j: int) -> bool:
        return bool(self._reach[i] >> j & 1)

    def mhp(self, i: int, j: int) -> bool:
        return i != j and not self.reaches(i, j) and not self.reaches(j, i)


def collect_accesses(trace: Trace) -> list[AccessRecord]:
    held: dict[int, LockSet] = {}
    seq: dict[int, int] = {}
    out = []
    for i, ev in enumerate(trace.events):
        if ev.kind is EventKind.ACQUIRE:
            held[ev.actor] = with_acquired(held.get(ev.actor, ()), ev.lock)
        elif ev.kind is EventKind.RELEASE:
            held[ev.actor] = with_released(held.get(ev.actor, ()), ev.lock)
        elif ev.is_access:
            k = seq.get(ev.actor, 0)
            seq[ev.actor] = k + 1
            out.append(AccessRecord(ev.actor, k, ev.var, ev.kind is EventKind.WRITE,
                                    held.get(ev.actor, ()), ev.line, i))
    return out


def apparent_races(trace: Trace, max_events: int = 500) -> list[RacePair]:
    """All conflicting, parallel, disjoint-lockset access pairs, earliest first.

    Quadratic in the number of accesses on top of a cubic-ish closure; the
    size cap keeps it honest.
    """
    require_valid(trace)
    if len(trace.events) > max_events:
        raise SizeLimitError(f"{len(trace.events)} events exceeds cap {max_events}")
    graph = HbGraph(trace)
    by_var: dict[int, list[AccessRecord]] = {}
    for rec in collect_accesses(trace):
        by_var.setdefault(rec.var, []).append(rec)
    pairs = []
    for recs in by_var.values():
        for x in range(len(recs)):
            a = recs[x]
            for y in range(x + 1, len(recs)):
                b = recs[y]
                if not (a.is_write or b.is_write):
                    continue
                if not are_disjoint(a.lockset, b.lockset):
                    continue
                if graph.mhp(a.index, b.index):
                    pairs.append(RacePair(a, b))
    pairs.sort(key=lambda p: (p.a.index, p.b.index))
    return pairs


def apparent_racy_vars(trace: Trace, max_events: int = 500) -> set[int]:
    return {p.a.var for p in apparent_races(trace, max_events)}


def racy_access_indices(trace: Trace, max_events: int = 500) -> set[int]:
    """Event indices of the later access in each racy pair (where a detector
    driven in trace order is expected to report)."""
    return {p.b.index for p in apparent_races(trace, max_events)}
