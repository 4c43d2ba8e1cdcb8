"""Task-level FastTrack baseline: full vector clocks everywhere.

Every task keeps a complete sparse vector clock (its own entry included),
locks carry release clocks, and joins merge the child's whole clock into the
parent. Per variable there is one last-write epoch and adaptive read
metadata that inflates from an epoch to a vector clock once reads become
concurrent. This is the reference point for the split-clock engine's space
counters and for lock-free differential testing; with locks its verdicts
depend on the observed order of acquire/release, which the main detector's
lockset scheme deliberately avoids.
"""

from __future__ import annotations

from typing import Optional

from .clocks import Epoch, VectorClock
from .report import AnalysisResult, RaceKind, RaceReport
from .trace import ROOT_TASK, EventKind, Trace, require_valid


class FtTaskState:
    __slots__ = ("id", "clock", "vc")

    def __init__(self, task_id: int):
        self.id = task_id
        self.clock = 1
        self.vc: VectorClock = {task_id: 1}

    @property
    def epoch(self) -> Epoch:
        return Epoch(self.id, self.clock)


class FtVarState:
    __slots__ = ("write", "read_epoch", "read_vc")

    def __init__(self):
        self.write: Optional[Epoch] = None
        self.read_epoch: Optional[Epoch] = None
        self.read_vc: Optional[VectorClock] = None


class FastTrackEngine:
    def __init__(self):
        self.tasks: dict[int, FtTaskState] = {ROOT_TASK: FtTaskState(ROOT_TASK)}
        self.locks: dict[int, VectorClock] = {}
        self.vars: dict[int, FtVarState] = {}
        self.reports: list[RaceReport] = []
        self.vc_entries_allocated = 1  # root's own entry
        self.read_vc_inflations = 0
        self.events_processed = 0

    # -- synchronization operations -------------------------------------

    def on_spawn(self, parent_id: int, child_id: int) -> None:
        parent = self.tasks[parent_id]
        child = FtTaskState(child_id)
        child.vc = dict(parent.vc)
        child.vc[child_id] = 1
        self.vc_entries_allocated += len(child.vc)
        parent.clock += 1
        parent.vc[parent_id] = parent.clock
        self.tasks[child_id] = child

    def on_join(self, parent_id: int, child_id: int) -> None:
        parent = self.tasks[parent_id]
        pvc = parent.vc
        for t, c in self.tasks[child_id].vc.items():
            if c > pvc.get(t, 0):
                if t not in pvc:
                    self.vc_entries_allocated += 1
                pvc[t] = c

    def on_acquire(self, task_id: int, lock: int) -> None:
        lvc = self.locks.get(lock)
        if not lvc:
            return
        tvc = self.tasks[task_id].vc
        for t, c in lvc.items():
            if c > tvc.get(t, 0):
                if t not in tvc:
                    self.vc_entries_allocated += 1
                tvc[t] = c

    def on_release(self, task_id: int, lock: int) -> None:
        t = self.tasks[task_id]
        self.locks[lock] = dict(t.vc)
        self.vc_entries_allocated += len(t.vc)
        t.clock += 1
        t.vc[task_id] = t.clock

    # -- accesses ---------------------------------------------------------

    def _leq(self, e: Epoch, vc: VectorClock) -> bool:
        return e.clock <= vc.get(e.task, 0)

    def on_access(self, task_id: int, var: int, is_write: bool, line: int) -> list[RaceReport]:
        t = self.tasks[task_id]
        v = self.vars.get(var)
        if v is None:
            v = self.vars[var] = FtVarState()
        cur = t.epoch
        new_reports: list[RaceReport] = []

        if is_write:
            if v.write == cur:
                return new_reports
            if v.write is not None and not self._leq(v.write, t.vc):
                new_reports.append(RaceReport(RaceKind.WRITE_WRITE, var, v.write, cur, line))
            if v.read_vc is not None:
                for u, c in v.read_vc.items():
                    if c > t.vc.get(u, 0):
                        new_reports.append(
                            RaceReport(RaceKind.READ_WRITE, var, Epoch(u, c), cur, line))
            elif v.read_epoch is not None and not self._leq(v.read_epoch, t.vc):
                new_reports.append(RaceReport(RaceKind.READ_WRITE, var, v.read_epoch, cur, line))
            if not new_reports:
                v.write = cur
        else:
            if v.read_epoch == cur:
                return new_reports
            if v.write is not None and not self._leq(v.write, t.vc):
                new_reports.append(RaceReport(RaceKind.WRITE_READ, var, v.write, cur, line))
            if v.read_vc is not None:
                if task_id not in v.read_vc:
                    self.vc_entries_allocated += 1
                v.read_vc[task_id] = t.clock
            elif v.read_epoch is None or self._leq(v.read_epoch, t.vc):
                v.read_epoch = cur
            else:
                v.read_vc = {v.read_epoch.task: v.read_epoch.clock, task_id: t.clock}
                v.read_epoch = None
                self.read_vc_inflations += 1
                self.vc_entries_allocated += 2

        self.reports.extend(new_reports)
        return new_reports

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
                self.on_acquire(ev.actor, ev.target)
            else:
                self.on_release(ev.actor, ev.target)
            self.events_processed += 1
        return self.result()

    def result(self) -> AnalysisResult:
        counters = {
            "vc_entries_allocated": self.vc_entries_allocated,
            "read_vc_inflations": self.read_vc_inflations,
            "tasks_spawned": len(self.tasks) - 1,
            "events_processed": self.events_processed,
        }
        return AnalysisResult(reports=list(self.reports),
                              racy_vars={r.var for r in self.reports},
                              counters=counters)


def ft_analyze(trace: Trace) -> AnalysisResult:
    """Validate, then run the FastTrack baseline over the trace in order."""
    require_valid(trace)
    return FastTrackEngine().run(trace)
