"""Seeded generation of well-formed async-finish traces, plus builtin goldens.

The generator emits the depth-first serial schedule of a random async-finish
program. Task bodies interleave plain or lock-protected accesses, bare
spawns, and nested finish blocks. Every spawn is recorded in the innermost
open finish scope; when a scope closes, its owner joins every task spawned
transitively inside the scope (in spawn order) that it has not joined
already, and the scope's task list bubbles into the enclosing scope. The
root's body runs inside an implicit outermost scope, so the trace is always
strict-valid.

That join convention matters: the detector's joinsets do not close
transitively over nested joins, so an ancestor learns of a completed task
only if it joins that task itself. Joining the whole scope at every finish
end (the behaviour async-finish runtimes implement) is exactly what makes
per-task joinsets equivalent to the brute-force happens-before oracle. Bare
spawns escape to scopes owned by ancestors, which is how joins to a
grandparent, and not just the immediate parent, show up in generated traces.

A fixed fraction of variables is designated "hot" and drawn with boosted
probability, so multi-reader and three-parallel-writer paths get exercised.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .trace import Event, EventKind, Trace, parse_trace


@dataclass(frozen=True)
class GenParams:
    seed: int
    max_depth: int = 4
    max_fanout: int = 3
    n_vars: int = 8
    n_locks: int = 2
    n_accesses: int = 20
    lock_prob: float = 0.3
    write_prob: float = 0.4
    max_tasks: int = 12
    hot_frac: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.lock_prob <= 1.0:
            raise ValueError("lock_prob out of range")
        if not 0.0 <= self.write_prob <= 1.0:
            raise ValueError("write_prob out of range")
        if not 0.0 <= self.hot_frac <= 1.0:
            raise ValueError("hot_frac out of range")
        if self.n_vars < 1 or self.max_tasks < 1 or self.n_accesses < 0:
            raise ValueError("counts must be positive")
        if self.max_depth < 0 or self.max_fanout < 0 or self.n_locks < 0:
            raise ValueError("counts must be positive")


class _Scope:
    __slots__ = ("owner", "spawned")

    def __init__(self, owner: int):
        self.owner = owner
        self.spawned: list[int] = []


class _Gen:
    def __init__(self, p: GenParams):
        self.p = p
        self.rng = random.Random(p.seed)
        self.rows: list[tuple[EventKind, int, int]] = []
        self.next_id = 1
        self.tasks_used = 1
        self.accesses_left = p.n_accesses
        self.fanout: dict[int, int] = {}
        self.owner_joined: dict[int, set[int]] = {}
        self.scopes: list[_Scope] = []
        n_hot = max(1, round(p.hot_frac * p.n_vars))
        self.hot_vars = list(range(min(n_hot, p.n_vars)))

    def emit(self, kind: EventKind, a: int, b: int) -> None:
        self.rows.append((kind, a, b))

    def pick_var(self) -> int:
        if self.rng.random() < 0.5:
            return self.rng.choice(self.hot_vars)
        return self.rng.randrange(self.p.n_vars)

    def can_spawn(self, task: int, depth: int) -> bool:
        return (depth < self.p.max_depth
                and self.tasks_used < self.p.max_tasks
                and self.fanout.get(task, 0) < self.p.max_fanout)

    def access_group(self, task: int) -> None:
        locks: list[int] = []
        if self.p.n_locks > 0 and self.rng.random() < self.p.lock_prob:
            count = 2 if self.p.n_locks > 1 and self.rng.random() < 0.25 else 1
            locks = self.rng.sample(range(self.p.n_locks), count)
            for lk in locks:
                self.emit(EventKind.ACQUIRE, task, lk)
        n = min(self.accesses_left, self.rng.randint(1, 2))
        for _ in range(n):
            kind = EventKind.WRITE if self.rng.random() < self.p.write_prob else EventKind.READ
            self.emit(kind, task, self.pick_var())
            self.accesses_left -= 1
        for lk in reversed(locks):
            self.emit(EventKind.RELEASE, task, lk)

    def spawn_child(self, task: int, depth: int) -> None:
        child = self.next_id
        self.next_id += 1
        self.tasks_used += 1
        self.fanout[task] = self.fanout.get(task, 0) + 1
        self.emit(EventKind.SPAWN, task, child)
        self.scopes[-1].spawned.append(child)
        self.task_body(child, depth + 1)

    def close_scope(self) -> None:
        scope = self.scopes.pop()
        already = self.owner_joined.setdefault(scope.owner, set())
        for t in scope.spawned:
            if t not in already:
                self.emit(EventKind.JOIN, scope.owner, t)
                already.add(t)
        if self.scopes:
            self.scopes[-1].spawned.extend(scope.spawned)

    def finish_block(self, task: int, depth: int) -> None:
        self.scopes.append(_Scope(task))
        for _ in range(self.rng.randint(1, 2)):
            if self.can_spawn(task, depth):
                self.spawn_child(task, depth)
            elif self.accesses_left > 0:
                self.access_group(task)
        self.close_scope()

    def segment(self, task: int, depth: int) -> None:
        roll = self.rng.random()
        if roll < 0.55 and self.accesses_left > 0:
            self.access_group(task)
        elif roll < 0.80 and self.can_spawn(task, depth):
            self.spawn_child(task, depth)
        elif self.can_spawn(task, depth):
            self.finish_block(task, depth)
        elif self.accesses_left > 0:
            self.access_group(task)

    def task_body(self, task: int, depth: int) -> None:
        for _ in range(self.rng.randint(0, 3)):
            self.segment(task, depth)

    def run(self) -> Trace:
        self.scopes.append(_Scope(0))
        while self.accesses_left > 0:
            self.segment(0, 0)
        self.close_scope()
        events = tuple(Event(kind, a, b, i + 1)
                       for i, (kind, a, b) in enumerate(self.rows))
        return Trace(events)


def generate(params: GenParams) -> Trace:
    """Deterministically generate a strict-valid trace from the parameters."""
    return _Gen(params).run()


def spawn_chain_trace(n_tasks: int) -> Trace:
    """A depth-n spawn chain where every task writes once; joins run bottom-up.

    Worst case for full vector clock copying, used by the space counters
    comparison.
    """
    rows = []
    for t in range(n_tasks - 1):
        rows.append(f"spawn {t} {t + 1}")
    for t in range(n_tasks - 1, 0, -1):
        rows.append(f"write {t} {t}")
        rows.append(f"join {t - 1} {t}")
    rows.append("write 0 0")
    return parse_trace("\n".join(rows))


# Golden traces encoding the two worked examples the detector is checked
# against. Tasks: 0 is the root; in fig_var1_var2 tasks 1 and 2 are the
# root's children and tasks 3 and 4 are spawned by task 2. Variable 100 is
# written by tasks 1, 3, 4 under lock 10 (no race); variable 101 has an
# unprotected write/read pair between tasks 1 and 2.
_FIG_VAR1_VAR2 = """\
spawn 0 1
spawn 0 2
spawn 2 3
spawn 2 4
acquire 1 10
write 1 100
release 1 10
write 1 101
read 2 101
acquire 3 10
write 3 100
release 3 10
acquire 4 10
write 4 100
release 4 10
join 2 3
join 2 4
join 0 1
join 0 2
join 0 3
join 0 4
"""

# Readers: tasks 1, 2, 3 read variable 7; task 3 is spawned only after the
# root has joined task 1, so its read supersedes task 1's entry; task 4 then
# writes in parallel with tasks 2 and 3.
_FIG_READERS = """\
spawn 0 1
spawn 0 2
read 1 7
read 2 7
join 0 1
spawn 0 3
read 3 7
spawn 0 4
write 4 7
join 0 2
join 0 3
join 0 4
"""

_BUILTINS = {
    "fig_var1_var2": _FIG_VAR1_VAR2,
    "fig_readers": _FIG_READERS,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


class UnknownBuiltinError(KeyError):
    pass


def builtin(name: str) -> Trace:
    text = _BUILTINS.get(name)
    if text is None:
        raise UnknownBuiltinError(f"unknown builtin trace {name!r} (have: {', '.join(BUILTIN_NAMES)})")
    return parse_trace(text)
