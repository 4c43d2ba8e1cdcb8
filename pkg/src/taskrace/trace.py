"""Event model, trace file format, async-finish validation, relinearization.

A trace is a linearized execution of an async-finish task program: one event
per line, whitespace separated, `#` starts a comment.

    spawn <parent> <child>
    join <parent> <child>
    acquire <task> <lock>
    release <task> <lock>
    read <task> <var>
    write <task> <var>

All ids are decimal nonnegative integers. Task 0 is the preexisting root task
and is never spawned. Every event belongs to exactly one acting task (the
first id); the second id of a spawn or join names the child, which is not the
actor. A task may therefore be joined by several of its ancestors, which is
how a nested finish scope is encoded: each enclosing scope's owner joins the
task with its own `join` line.

Joins are terminally strict: `join p c` requires p to be a strict ancestor of
c in the spawn tree, and may only appear after every event of c and of all of
c's transitive descendants. Locks are non-reentrant per task; the validator
does not enforce cross-task mutual exclusion, because a trace records one of
many possible schedules and lock ordering is deliberately schedule-relaxed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

TaskId = int
LockId = int
VarId = int

ROOT_TASK: TaskId = 0


class EventKind(Enum):
    SPAWN = "spawn"
    JOIN = "join"
    ACQUIRE = "acquire"
    RELEASE = "release"
    READ = "read"
    WRITE = "write"


_ACCESS_KINDS = (EventKind.READ, EventKind.WRITE)


class Event(NamedTuple):
    kind: EventKind
    actor: int
    target: int
    line: int

    @property
    def parent(self) -> int:
        return self.actor

    @property
    def task(self) -> int:
        return self.actor

    @property
    def child(self) -> int:
        return self.target

    @property
    def lock(self) -> int:
        return self.target

    @property
    def var(self) -> int:
        return self.target

    @property
    def is_access(self) -> bool:
        return self.kind in _ACCESS_KINDS


class Trace(NamedTuple):
    events: tuple[Event, ...]

    def __len__(self) -> int:
        return len(self.events)


class TraceError(Exception):
    pass


class ParseError(TraceError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class InvalidTraceError(TraceError):
    """Raised by operations that require a valid trace as input."""

    def __init__(self, errors: list["ValidationError"]):
        super().__init__("; ".join(str(e) for e in errors[:5]))
        self.errors = errors


class ValidationReason(Enum):
    UNKNOWN_TASK = "UnknownTask"
    REUSED_TASK_ID = "ReusedTaskId"
    EVENT_AFTER_JOIN = "EventAfterJoin"
    NON_ANCESTOR_JOIN = "NonAncestorJoin"
    JOIN_BEFORE_DESCENDANT_DONE = "JoinBeforeDescendantDone"
    DOUBLE_ACQUIRE = "DoubleAcquire"
    RELEASE_NOT_HELD = "ReleaseNotHeld"
    UNJOINED_TASK_AT_END = "UnjoinedTaskAtEnd"


@dataclass(frozen=True)
class ValidationError:
    position: int
    reason: ValidationReason
    message: str

    def __str__(self) -> str:
        return f"line {self.position}: {self.reason.value}: {self.message}"


_KEYWORDS = {k.value: k for k in EventKind}


def _parse_id(token: str, lineno: int) -> int:
    if token.startswith("-"):
        raise ParseError(lineno, f"negative id {token!r}")
    if not (token.isascii() and token.isdigit()):
        raise ParseError(lineno, f"malformed id {token!r}")
    return int(token)


def parse_trace(text: str | bytes) -> Trace:
    """Parse trace text into a Trace, raising ParseError on the first bad line.

    Comment (`#`) and blank lines are skipped; surviving events keep their
    1-based file line numbers.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = body.split()
        if not tokens:
            continue
        kind = _KEYWORDS.get(tokens[0])
        if kind is None:
            raise ParseError(lineno, f"unknown keyword {tokens[0]!r}")
        if len(tokens) != 3:
            raise ParseError(lineno, f"expected 2 ids after {tokens[0]!r}, got {len(tokens) - 1}")
        actor = _parse_id(tokens[1], lineno)
        target = _parse_id(tokens[2], lineno)
        events.append(Event(kind, actor, target, lineno))
    return Trace(tuple(events))


def write_trace(trace: Trace) -> str:
    """Format a trace: one event per line, single spaces, newline-terminated."""
    return "".join(f"{e.kind.value} {e.actor} {e.target}\n" for e in trace.events)


def _is_ancestor(parent_of: dict[int, int], a: int, t: int) -> bool:
    """True iff a is a strict ancestor of t in the spawn tree."""
    cur = t
    while cur in parent_of:
        cur = parent_of[cur]
        if cur == a:
            return True
    return False


def validate_trace(trace: Trace, strict: bool = False) -> list[ValidationError]:
    """Check async-finish well-formedness; returns all violations (empty = ok).

    In strict mode every non-root task must have been joined by the end of
    the trace.
    """
    errors: list[ValidationError] = []
    parent_of: dict[int, int] = {}
    introduced: set[int] = {ROOT_TASK}
    joined: set[int] = set()
    held: dict[int, set[int]] = {}
    last_act: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    join_events: list[Event] = []

    def err(line: int, reason: ValidationReason, msg: str) -> None:
        errors.append(ValidationError(line, reason, msg))

    for ev in trace.events:
        actor_known = ev.actor in introduced
        if not actor_known:
            err(ev.line, ValidationReason.UNKNOWN_TASK, f"task {ev.actor} was never spawned")
        elif ev.actor in joined:
            err(ev.line, ValidationReason.EVENT_AFTER_JOIN, f"task {ev.actor} acts after being joined")
        if actor_known:
            last_act[ev.actor] = ev.line

        if ev.kind is EventKind.SPAWN:
            if ev.child in introduced:
                err(ev.line, ValidationReason.REUSED_TASK_ID, f"task id {ev.child} already in use")
            else:
                introduced.add(ev.child)
                parent_of[ev.child] = ev.actor
                children.setdefault(ev.actor, []).append(ev.child)
        elif ev.kind is EventKind.JOIN:
            if ev.child not in introduced:
                err(ev.line, ValidationReason.UNKNOWN_TASK, f"task {ev.child} was never spawned")
            elif not _is_ancestor(parent_of, ev.actor, ev.child):
                err(ev.line, ValidationReason.NON_ANCESTOR_JOIN,
                    f"task {ev.actor} is not an ancestor of {ev.child}")
            else:
                joined.add(ev.child)
                join_events.append(ev)
        elif ev.kind is EventKind.ACQUIRE:
            locks = held.setdefault(ev.actor, set())
            if ev.lock in locks:
                err(ev.line, ValidationReason.DOUBLE_ACQUIRE,
                    f"task {ev.actor} already holds lock {ev.lock}")
            else:
                locks.add(ev.lock)
        elif ev.kind is EventKind.RELEASE:
            locks = held.setdefault(ev.actor, set())
            if ev.lock not in locks:
                err(ev.line, ValidationReason.RELEASE_NOT_HELD,
                    f"task {ev.actor} does not hold lock {ev.lock}")
            else:
                locks.discard(ev.lock)

    # Latest acting line anywhere in each task's subtree, for the
    # descendants-done check below. Post-order over the spawn forest; ids are
    # fresh but not necessarily increasing, so order must follow the tree.
    subtree_last: dict[int, int] = {}
    roots = [t for t in introduced if t not in parent_of]
    stack: list[tuple[int, bool]] = [(t, False) for t in roots]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            latest = last_act.get(t, 0)
            for c in children.get(t, ()):
                latest = max(latest, subtree_last[c])
            subtree_last[t] = latest
        else:
            stack.append((t, True))
            stack.extend((c, False) for c in children.get(t, ()))

    for ev in join_events:
        late = max((subtree_last.get(c, 0) for c in children.get(ev.child, ())), default=0)
        if late > ev.line:
            err(ev.line, ValidationReason.JOIN_BEFORE_DESCENDANT_DONE,
                f"a descendant of task {ev.child} acts at line {late}")

    if strict:
        end = trace.events[-1].line + 1 if trace.events else 1
        for t in sorted(introduced - {ROOT_TASK} - joined):
            err(end, ValidationReason.UNJOINED_TASK_AT_END, f"task {t} never joined")

    errors.sort(key=lambda e: e.position)
    return errors


def require_valid(trace: Trace, strict: bool = False) -> None:
    errors = validate_trace(trace, strict=strict)
    if errors:
        raise InvalidTraceError(errors)


def _descendants(children: dict[int, list[int]], root: int) -> list[int]:
    out = []
    stack = [root]
    while stack:
        t = stack.pop()
        for c in children.get(t, ()):
            out.append(c)
            stack.append(c)
    return out


def relinearize(trace: Trace, seed: int) -> Trace:
    """Produce another valid linearization of the same events, seed-driven.

    Preserved: per-task event order, spawn before any child event, all events
    of a joined task's subtree before the join, acquire/release order per
    task. Everything else is shuffled by a deterministic topological sort.
    """
    require_valid(trace)
    events = trace.events
    n = len(events)
    succs: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n

    def edge(a: int, b: int) -> None:
        succs[a].append(b)
        indeg[b] += 1

    prev_of_task: dict[int, int] = {}
    first_of_task: dict[int, int] = {}
    last_of_task: dict[int, int] = {}
    spawn_idx: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    for i, ev in enumerate(events):
        if ev.actor in prev_of_task:
            edge(prev_of_task[ev.actor], i)
        else:
            first_of_task[ev.actor] = i
        prev_of_task[ev.actor] = i
        last_of_task[ev.actor] = i
        if ev.kind is EventKind.SPAWN:
            spawn_idx[ev.child] = i
            children.setdefault(ev.actor, []).append(ev.child)

    for i, ev in enumerate(events):
        if ev.kind is EventKind.SPAWN and ev.child in first_of_task:
            edge(i, first_of_task[ev.child])
        elif ev.kind is EventKind.JOIN:
            for t in [ev.child] + _descendants(children, ev.child):
                edge(spawn_idx[t], i)
                if t in last_of_task:
                    edge(last_of_task[t], i)

    rng = random.Random(seed)
    ready = [i for i in range(n) if indeg[i] == 0]
    out = []
    while ready:
        i = ready.pop(rng.randrange(len(ready)))
        out.append(events[i])
        for j in sorted(succs[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    assert len(out) == n, "dependency cycle in a validated trace"
    return Trace(tuple(ev._replace(line=k + 1) for k, ev in enumerate(out)))

