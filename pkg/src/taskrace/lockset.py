"""Immutable lockset snapshots.

A lockset is a sorted tuple of lock ids, so equality is structural and the
value is hashable; snapshots stored in variable metadata share the handle and
never change when the owning task later acquires or releases.
"""

from __future__ import annotations

LockSet = tuple[int, ...]

EMPTY: LockSet = ()


class DoubleAcquireError(ValueError):
    pass


class ReleaseNotHeldError(ValueError):
    pass


def with_acquired(s: LockSet, lock: int) -> LockSet:
    if lock in s:
        raise DoubleAcquireError(f"lock {lock} already held")
    return tuple(sorted(s + (lock,)))


def with_released(s: LockSet, lock: int) -> LockSet:
    if lock not in s:
        raise ReleaseNotHeldError(f"lock {lock} not held")
    return tuple(x for x in s if x != lock)


def are_disjoint(a: LockSet, b: LockSet) -> bool:
    if not a or not b:
        return True
    for x in a:
        if x in b:
            return False
    return True
