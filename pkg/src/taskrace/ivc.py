"""Inheritance vector clocks.

Every task carries an immutable tuple of clock labels identifying its path
from the root of the spawn tree: a child's tuple is the parent's tuple plus
the parent's clock at the spawn. Since the parent clock increments at every
spawn, sibling edges get distinct labels and the tuple names the path
uniquely. An ancestor's tuple is always a strict prefix of a descendant's,
which is what makes the three-way scan below find the pair with the
shallowest (closest to root) common ancestor.

The explicit InheritanceTree here is a test oracle only; the detector never
builds it.
"""

from __future__ import annotations

from .trace import EventKind, Trace

Ivc = tuple[int, ...]

ROOT_IVC: Ivc = ()


def derive_child_ivc(parent_ivc: Ivc, parent_clock: int) -> Ivc:
    """Child label at a spawn: parent's label plus the parent's pre-increment clock."""
    return parent_ivc + (parent_clock,)


def select_pair_highest_lca(a: Ivc, b: Ivc, c: Ivc) -> tuple[int, int]:
    """Pick two of three labels whose tasks have the shallowest common ancestor.

    Walks all three tuples in lockstep. At the first position where one label
    ends, that task is an ancestor of the other two: keep it plus the
    lower-index other. At the first position where one value differs from the
    other two, keep the odd one out plus the lower-index other. Three-way
    ties (all different, or all identical tuples) resolve to (0, 1). When two
    tuples are identical the third is kept with the lower-index duplicate;
    the detector never passes that case (its three epochs always belong to
    distinct tasks).
    """
    ivcs = (a, b, c)
    i = 0
    while True:
        ended = tuple(j for j in range(3) if len(ivcs[j]) <= i)
        if ended:
            if len(ended) == 3:
                return (0, 1)
            if len(ended) == 2:
                other = next(j for j in range(3) if j not in ended)
                return tuple(sorted((ended[0], other)))  # type: ignore[return-value]
            j = ended[0]
            k = min(x for x in range(3) if x != j)
            lo, hi = (j, k) if j < k else (k, j)
            return (lo, hi)
        va, vb, vc = a[i], b[i], c[i]
        if va == vb == vc:
            i += 1
            continue
        if va != vb and vb != vc and va != vc:
            return (0, 1)
        if va == vb:
            odd = 2
        elif va == vc:
            odd = 1
        else:
            odd = 0
        keep = min(x for x in range(3) if x != odd)
        return (keep, odd) if keep < odd else (odd, keep)


class UnknownTaskError(KeyError):
    pass


class InheritanceTree:
    """Explicit spawn tree with parent-walking LCA, used to check the scan."""

    def __init__(self, root: int = 0):
        self.root = root
        self.parent: dict[int, int] = {}
        self.depth: dict[int, int] = {root: 0}

    @classmethod
    def from_trace(cls, trace: Trace, root: int = 0) -> "InheritanceTree":
        tree = cls(root)
        for ev in trace.events:
            if ev.kind is EventKind.SPAWN:
                tree.add_child(ev.parent, ev.child)
        return tree

    def add_child(self, parent: int, child: int) -> None:
        if parent not in self.depth:
            raise UnknownTaskError(parent)
        self.parent[child] = parent
        self.depth[child] = self.depth[parent] + 1

    def tasks(self) -> list[int]:
        return sorted(self.depth)

    def max_depth(self) -> int:
        return max(self.depth.values())

    def lca_depth(self, x: int, y: int) -> int:
        if x not in self.depth:
            raise UnknownTaskError(x)
        if y not in self.depth:
            raise UnknownTaskError(y)
        while self.depth[x] > self.depth[y]:
            x = self.parent[x]
        while self.depth[y] > self.depth[x]:
            y = self.parent[y]
        while x != y:
            x = self.parent[x]
            y = self.parent[y]
        return self.depth[x]
