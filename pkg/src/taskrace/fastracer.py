"""The main detector: split-clock happens-before plus lockset-indexed,
constant-per-lockset variable metadata.

Per-task state is an epoch, a split vector clock, a joinset, a lockset, and
an immutable inheritance label (see ivc). Joins never merge clocks; the
joined child's id goes into the parent's joinset and the happens-before check
consults program order, the split clock, and the joinset.

Per variable, one metadata record is kept for each distinct lockset the
variable has been accessed with. Each record holds at most two reader and two
writer entries. A current access races with an entry when their locksets are
disjoint and the entry's epoch is not ordered before the access. Entries with
the same lockset as the access are updated: ordered entries are overwritten
in place, and when a third mutually-parallel access arrives, the two whose
tasks have the shallowest common ancestor are kept. Discarding the third is
sound because any later access that races with it must also race with one of
the two kept entries, provided every finish-scope end joins all tasks spawned
transitively in its scope (the convention the workload generator emits).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import lockset as ls
from .clocks import ClockCache, ClockStats, Epoch, JoinSet, SplitClock, spawn_derive
from .ivc import Ivc, ROOT_IVC, derive_child_ivc, select_pair_highest_lca
from .report import AnalysisResult, RaceKind, RaceReport
from .trace import ROOT_TASK, EventKind, Trace, require_valid


@dataclass
class RacerOptions:
    threshold: int = 8
    cache_capacity: int = 4
    paper_strict: bool = False
    same_epoch_skip: bool = True


class AccessEntry(NamedTuple):
    epoch: Epoch
    ivc: Ivc


class TaskState:
    __slots__ = ("id", "clock", "sc", "joined", "ls", "ivc", "cache")

    def __init__(self, task_id: int, sc: SplitClock, joined: JoinSet,
                 locks: ls.LockSet, ivc: Ivc, cache: Optional[ClockCache]):
        self.id = task_id
        self.clock = 1
        self.sc = sc
        self.joined = joined
        self.ls = locks
        self.ivc = ivc
        self.cache = cache

    @property
    def epoch(self) -> Epoch:
        return Epoch(self.id, self.clock)


class LockMetadata:
    """Access history for one variable under one lockset: two slots each way."""

    __slots__ = ("lockset", "rd1", "rd2", "wr1", "wr2")

    def __init__(self, lockset: ls.LockSet):
        self.lockset = lockset
        self.rd1: Optional[AccessEntry] = None
        self.rd2: Optional[AccessEntry] = None
        self.wr1: Optional[AccessEntry] = None
        self.wr2: Optional[AccessEntry] = None

    def occupied(self) -> int:
        return sum(e is not None for e in (self.rd1, self.rd2, self.wr1, self.wr2))


class FastRacerEngine:
    def __init__(self, options: Optional[RacerOptions] = None):
        self.options = options or RacerOptions()
        self.stats = ClockStats()
        self.tasks: dict[int, TaskState] = {
            ROOT_TASK: TaskState(ROOT_TASK, SplitClock.empty(self.options.threshold),
                                 JoinSet(), ls.EMPTY, ROOT_IVC, self._new_cache())
        }
        self.vars: dict[int, list[LockMetadata]] = {}
        self.reports: list[RaceReport] = []
        self.max_ivc_length = 0
        self.events_processed = 0

    def _new_cache(self) -> Optional[ClockCache]:
        cap = self.options.cache_capacity
        return ClockCache(cap) if cap > 0 else None

    # -- synchronization operations -------------------------------------

    def on_spawn(self, parent_id: int, child_id: int) -> TaskState:
        if child_id in self.tasks:
            raise ValueError(f"task id {child_id} reused")
        parent = self.tasks[parent_id]
        pre = parent.epoch
        child_sc = spawn_derive(parent.sc, pre, self.stats)
        child = TaskState(child_id, child_sc, parent.joined, parent.ls,
                          derive_child_ivc(parent.ivc, parent.clock), self._new_cache())
        if child_sc.ro is not parent.sc.ro:
            # the merge fired; let the parent share the merged block so its
            # next spawns are cheap (observationally identical lookups)
            parent.sc = SplitClock(child_sc.ro, {}, parent.sc.threshold)
            if parent.cache is not None:
                parent.cache.invalidate()
        parent.clock += 1
        self.tasks[child_id] = child
        if len(child.ivc) > self.max_ivc_length:
            self.max_ivc_length = len(child.ivc)
        return child

    def on_join(self, parent_id: int, child_id: int) -> None:
        parent = self.tasks[parent_id]
        parent.joined = parent.joined.add(child_id)

    def on_lock_op(self, task_id: int, lock: int, acquire: bool) -> None:
        t = self.tasks[task_id]
        t.ls = ls.with_acquired(t.ls, lock) if acquire else ls.with_released(t.ls, lock)

    # -- happens-before ---------------------------------------------------

    def check_hb_task(self, e: Epoch, t: TaskState) -> bool:
        u = e.task
        if u == t.id:
            return e.clock <= t.clock
        if u in t.joined:
            return True
        if t.cache is not None:
            return e.clock <= t.cache.lookup(t.sc, u, self.stats)
        return e.clock <= t.sc.lookup(u)

    # -- accesses ---------------------------------------------------------

    def on_access(self, task_id: int, var: int, is_write: bool, line: int) -> list[RaceReport]:
        t = self.tasks[task_id]
        entries = self.vars.get(var)
        if entries is None:
            entries = self.vars[var] = []
        cur = AccessEntry(t.epoch, t.ivc)
        new_reports: list[RaceReport] = []

        def race(prior: AccessEntry, kind: RaceKind) -> None:
            new_reports.append(RaceReport(kind, var, prior.epoch, cur.epoch, line))

        matching: Optional[LockMetadata] = None
        for p in entries:
            if ls.are_disjoint(p.lockset, t.ls):
                if is_write:
                    if p.rd1 is not None and not self.check_hb_task(p.rd1.epoch, t):
                        race(p.rd1, RaceKind.READ_WRITE)
                    if p.rd2 is not None and not self.check_hb_task(p.rd2.epoch, t):
                        race(p.rd2, RaceKind.READ_WRITE)
                    if p.wr1 is not None and not self.check_hb_task(p.wr1.epoch, t):
                        race(p.wr1, RaceKind.WRITE_WRITE)
                    if p.wr2 is not None and not self.check_hb_task(p.wr2.epoch, t):
                        race(p.wr2, RaceKind.WRITE_WRITE)
                else:
                    if p.wr1 is not None and not self.check_hb_task(p.wr1.epoch, t):
                        race(p.wr1, RaceKind.WRITE_READ)
                    if p.wr2 is not None and not self.check_hb_task(p.wr2.epoch, t):
                        race(p.wr2, RaceKind.WRITE_READ)
            if p.lockset == t.ls:
                matching = p

        skip_update = self.options.paper_strict and not is_write and new_reports
        if not skip_update:
            if matching is None:
                matching = LockMetadata(t.ls)
                entries.append(matching)
            self._update_slots(matching, cur, t, is_write)

        self.reports.extend(new_reports)
        return new_reports

    def _update_slots(self, p: LockMetadata, cur: AccessEntry, t: TaskState,
                      is_write: bool) -> None:
        s1 = p.wr1 if is_write else p.rd1
        s2 = p.wr2 if is_write else p.rd2
        if self.options.same_epoch_skip:
            if (s1 is not None and s1.epoch == cur.epoch) or \
               (s2 is not None and s2.epoch == cur.epoch):
                return
        if s1 is None:
            s1 = cur
        elif s2 is None:
            s2 = cur
        elif self.check_hb_task(s1.epoch, t):
            s1 = cur
        elif self.check_hb_task(s2.epoch, t):
            s2 = cur
        else:
            # three mutually parallel accesses with one lockset: keep the two
            # whose common ancestor sits closest to the root
            keep = select_pair_highest_lca(s1.ivc, s2.ivc, cur.ivc)
            if keep == (0, 2):
                s2 = cur
            elif keep == (1, 2):
                s1 = cur
            # keep == (0, 1): the current access is discarded
        if is_write:
            p.wr1, p.wr2 = s1, s2
        else:
            p.rd1, p.rd2 = s1, s2

    # -- driving ----------------------------------------------------------

    def run(self, trace: Trace) -> AnalysisResult:
        for ev in trace.events:
            kind = ev.kind
            if kind is EventKind.READ:
                self.on_access(ev.actor, ev.target, False, ev.line)
            elif kind is EventKind.WRITE:
                self.on_access(ev.actor, ev.target, True, ev.line)
            elif kind is EventKind.SPAWN:
                self.on_spawn(ev.actor, ev.target)
            elif kind is EventKind.JOIN:
                self.on_join(ev.actor, ev.target)
            elif kind is EventKind.ACQUIRE:
                self.on_lock_op(ev.actor, ev.target, True)
            else:
                self.on_lock_op(ev.actor, ev.target, False)
            self.events_processed += 1
        return self.result()

    def result(self) -> AnalysisResult:
        counters = self.stats.as_dict()
        counters["max_ivc_length"] = self.max_ivc_length
        counters["tasks_spawned"] = len(self.tasks) - 1
        counters["events_processed"] = self.events_processed
        counters["metadata_lockset_entries"] = sum(len(v) for v in self.vars.values())
        counters["metadata_occupied_entries"] = sum(
            p.occupied() for v in self.vars.values() for p in v)
        return AnalysisResult(reports=list(self.reports),
                              racy_vars={r.var for r in self.reports},
                              counters=counters)


def analyze_trace(trace: Trace, options: Optional[RacerOptions] = None) -> AnalysisResult:
    """Validate, then run the detector over the trace in order."""
    require_valid(trace)
    return FastRacerEngine(options).run(trace)
