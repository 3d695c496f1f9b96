"""Node multiplicities via exact structural interning.

Three equivalence relations are computed, each in O(n log n) or better:

* identical: same root-path length with pairwise equal *ordered* subtrees
  (class sizes sigma(v), maximum S);
* rooted-congruent: same orbit under root-fixing automorphisms
  (class sizes mu(root, v), maximum M);
* free-congruent: same orbit under all automorphisms of the underlying free
  tree (class sizes mu_F(v), maximum M_F).

Every relation is built the same way: a bottom-up subtree code, then a
top-down pass interning (code(v), class(parent(v))).
"""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .tree import FreeTree, RootedTree, to_free

IDENTICAL = "identical"
ROOTED = "rooted-congruent"
FREE = "free-congruent"


class CanonicalTable:
    """Maps structural keys to dense integer ids, in first-seen order."""

    __slots__ = ("ids",)

    def __init__(self):
        self.ids: Dict[Hashable, int] = {}

    def intern(self, key: Hashable) -> int:
        ids = self.ids
        return ids.setdefault(key, len(ids))

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class NodeClassification:
    relation: str
    class_of: Tuple[int, ...]
    class_size: Tuple[int, ...]

    @classmethod
    def from_labels(cls, relation: str, labels: Sequence[int]) -> "NodeClassification":
        # relabel so ids are dense in order of first appearance by node index
        remap: Dict[int, int] = {}
        class_of = tuple(remap.setdefault(c, len(remap)) for c in labels)
        sizes = [0] * len(remap)
        for c in class_of:
            sizes[c] += 1
        return cls(relation, class_of, tuple(sizes))

    @property
    def n(self) -> int:
        return len(self.class_of)

    def multiplicity(self, v: int) -> int:
        return self.class_size[self.class_of[v]]

    def multiplicities(self) -> List[int]:
        size = self.class_size
        return [size[c] for c in self.class_of]

    def max_size(self) -> int:
        return max(self.class_size)

    def argmax(self, nodes: Optional[Sequence[int]] = None) -> int:
        """Smallest node index (optionally among ``nodes``) of maximal multiplicity."""
        size, cls = self.class_size, self.class_of
        if nodes is None:
            nodes = range(self.n)
        return max(nodes, key=lambda v: (size[cls[v]], -v))

    def blocks(self) -> frozenset:
        groups: Dict[int, List[int]] = {}
        for v, c in enumerate(self.class_of):
            groups.setdefault(c, []).append(v)
        return frozenset(frozenset(g) for g in groups.values())


# -- rooted ordered trees ------------------------------------------------------


def ordered_codes(t: RootedTree) -> List[int]:
    """code(v) equal iff the subtrees at v are equal as ordered trees."""
    ids: Dict[Tuple[int, ...], int] = {}
    code = [0] * t.n
    children = t.children
    for v in range(t.n - 1, -1, -1):
        key = tuple([code[c] for c in children[v]])
        code[v] = ids.setdefault(key, len(ids))
    return code


def unordered_codes(t: RootedTree) -> List[int]:
    """AHU codes: equal iff the subtrees at v are isomorphic as unordered trees."""
    ids: Dict[Tuple[int, ...], int] = {}
    code = [0] * t.n
    children = t.children
    for v in range(t.n - 1, -1, -1):
        key = tuple(sorted([code[c] for c in children[v]]))
        code[v] = ids.setdefault(key, len(ids))
    return code


def _propagate(parent: Sequence[int], code: Sequence[int], order: Sequence[int]) -> List[int]:
    """class(v) = intern(code(v), class(parent(v))) with ``order`` parents-first."""
    ids: Dict[Tuple[int, int], int] = {}
    cls = [0] * len(code)
    for v in order:
        p = parent[v]
        key = (code[v], cls[p] if p >= 0 else -1)
        cls[v] = ids.setdefault(key, len(ids))
    return cls


def identical_classes(t: RootedTree) -> NodeClassification:
    cls = _propagate(t.parent, ordered_codes(t), range(t.n))
    return NodeClassification.from_labels(IDENTICAL, cls)


def leaf_multiplicity(t: RootedTree) -> int:
    """S(T): the largest identical-class size."""
    return identical_classes(t).max_size()


def rooted_orbit_classes(t: RootedTree) -> NodeClassification:
    cls = _propagate(t.parent, unordered_codes(t), range(t.n))
    return NodeClassification.from_labels(ROOTED, cls)


def automorphic_multiplicity(t: RootedTree) -> int:
    """M(T): the largest orbit under root-fixing automorphisms."""
    return rooted_orbit_classes(t).max_size()


def max_leaf_degree(t: RootedTree) -> Tuple[int, int]:
    """(L, witness): the most leaf children under a single node, 0 for n = 1."""
    deg = t.degrees
    best, arg = 0, 0
    for v, ch in enumerate(t.children):
        if len(ch) > best:
            count = sum(1 for c in ch if deg[c] == 0)
            if count > best:
                best, arg = count, v
    return best, arg


def _aut_from_codes(children: Sequence[Sequence[int]], code: Sequence[int]) -> int:
    order = 1
    for ch in children:
        if len(ch) > 1:
            for m in Counter(code[c] for c in ch).values():
                if m > 1:
                    order *= math.factorial(m)
    return order


def rooted_aut_order(t: RootedTree) -> int:
    """|Aut(T_root)|, the root-fixing automorphism count."""
    return _aut_from_codes(t.children, unordered_codes(t))


# -- free trees -------------------------------------------------------------------


def center(f: FreeTree) -> Tuple[int, ...]:
    """The one or two nodes left after repeatedly stripping all leaves."""
    n = f.n
    if n <= 2:
        return tuple(range(n))
    adj = f.adjacency
    deg = [len(nb) for nb in adj]
    layer = [v for v in range(n) if deg[v] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for u in layer:
            for v in adj[u]:
                deg[v] -= 1
                if deg[v] == 1:
                    nxt.append(v)
        layer = nxt
    return tuple(sorted(layer))


@dataclass
class _CenteredView:
    """The free tree hung from its center (a virtual node for a central edge)."""
    parent: List[int]
    children: List[List[int]]
    order: List[int]  # BFS order, parents first
    centers: Tuple[int, ...]
    code: List[int] = field(default_factory=list)


def _centered(f: FreeTree) -> _CenteredView:
    n = f.n
    adj = f.adjacency
    centers = center(f)
    parent = [-1] * (n + 1)
    children: List[List[int]] = [[] for _ in range(n + 1)]
    if len(centers) == 1:
        roots = [centers[0]]
        order = [centers[0]]
    else:
        # virtual root with index n
        roots = list(centers)
        order = [n] + roots
        for c in roots:
            parent[c] = n
        children[n] = roots
    seen = [False] * n
    for r in roots:
        seen[r] = True
    queue = deque(roots)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                children[u].append(v)
                order.append(v)
                queue.append(v)
    view = _CenteredView(parent, children, order, centers)
    ids: Dict[Tuple[int, ...], int] = {}
    code = [0] * (n + 1)
    for v in reversed(order):
        key = tuple(sorted([code[c] for c in children[v]]))
        code[v] = ids.setdefault(key, len(ids))
    view.code = code
    return view


def free_orbit_classes(f: FreeTree) -> NodeClassification:
    view = _centered(f)
    cls = _propagate(view.parent, view.code, view.order)
    return NodeClassification.from_labels(FREE, cls[:f.n])


def free_multiplicity(f: FreeTree) -> int:
    """M_F: the largest orbit under all automorphisms of the free tree."""
    return free_orbit_classes(f).max_size()


def aut_order(f: FreeTree) -> int:
    """|Aut(F)| as an exact integer."""
    view = _centered(f)
    return _aut_from_codes(view.children, view.code)


# -- one-shot report ------------------------------------------------------------

STATS = ("S", "M", "MF", "L")


@dataclass(frozen=True)
class MultiplicityReport:
    n: int
    S: Optional[int] = None
    M: Optional[int] = None
    M_F: Optional[int] = None
    L: Optional[int] = None
    witnesses: Dict[str, int] = field(default_factory=dict)
    aut_order: Optional[int] = None

    def as_dict(self) -> dict:
        out = {"n": self.n}
        for key, val in (("S", self.S), ("M", self.M), ("M_F", self.M_F), ("L", self.L)):
            if val is not None:
                out[key] = val
        out["witnesses"] = dict(self.witnesses)
        if self.aut_order is not None:
            out["aut_order"] = self.aut_order
        return out


def analyze(t: RootedTree, stats: Sequence[str] = STATS, with_aut: bool = True) -> MultiplicityReport:
    """Compute the requested statistics with one witness node each.

    Witnesses are preorder indices; for S, M and M_F the witness is the
    smallest-index leaf attaining the maximum.
    """
    unknown = set(stats) - set(STATS)
    if unknown:
        raise ValueError(f"unknown statistics {sorted(unknown)}; choose from {STATS}")
    leaves = t.leaves()
    values: Dict[str, int] = {}
    witnesses: Dict[str, int] = {}
    if "S" in stats:
        c = identical_classes(t)
        w = c.argmax(leaves)
        values["S"], witnesses["S"] = c.multiplicity(w), w
    if "M" in stats:
        c = rooted_orbit_classes(t)
        w = c.argmax(leaves)
        values["M"], witnesses["M"] = c.multiplicity(w), w
    free = None
    if "MF" in stats or with_aut:
        free = to_free(t)
    if "MF" in stats:
        c = free_orbit_classes(free)
        w = c.argmax(leaves)
        values["M_F"], witnesses["M_F"] = c.multiplicity(w), w
    if "L" in stats:
        values["L"], witnesses["L"] = max_leaf_degree(t)
    return MultiplicityReport(
        n=t.n,
        S=values.get("S"),
        M=values.get("M"),
        M_F=values.get("M_F"),
        L=values.get("L"),
        witnesses=witnesses,
        aut_order=aut_order(free) if with_aut else None,
    )
