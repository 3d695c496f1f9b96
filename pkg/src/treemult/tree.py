"""Rooted ordered trees stored as preorder degree sequences, and free trees."""
from __future__ import annotations

import re
from collections import deque
from typing import Iterable, List, Sequence, Tuple

import numpy as np


class InvalidDegreeSequence(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class SumMismatch(InvalidDegreeSequence):
    """The degrees do not sum to n - 1."""


class PrematureClose(InvalidDegreeSequence):
    """Some proper prefix already closes the tree (ballot condition fails)."""


class RootedTree:
    """Rooted ordered tree; node i is the i-th node in preorder.

    ``parent[0]`` is -1.  Children are listed left to right.  Instances are
    treated as immutable.
    """

    __slots__ = ("degrees", "parent", "children", "n")

    def __init__(self, degrees: Tuple[int, ...], parent: Tuple[int, ...],
                 children: Tuple[Tuple[int, ...], ...]):
        self.degrees = degrees
        self.parent = parent
        self.children = children
        self.n = len(degrees)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, RootedTree) and self.degrees == other.degrees

    def __hash__(self) -> int:
        return hash(self.degrees)

    def __repr__(self) -> str:
        if self.n <= 20:
            return f"RootedTree({list(self.degrees)})"
        return f"RootedTree(n={self.n})"

    def leaves(self) -> List[int]:
        return [v for v, k in enumerate(self.degrees) if k == 0]

    def depths(self) -> List[int]:
        depth = [0] * self.n
        par = self.parent
        for v in range(1, self.n):
            depth[v] = depth[par[v]] + 1
        return depth


def _check_ballot(seq: Sequence[int]) -> None:
    n = len(seq)
    arr = np.asarray(seq, dtype=np.int64)
    if n == 0:
        raise InvalidDegreeSequence("empty degree sequence", 0)
    if (arr < 0).any():
        i = int(np.argmax(arr < 0))
        raise InvalidDegreeSequence(f"negative degree {seq[i]} at index {i + 1}", i + 1)
    total = int(arr.sum())
    if total != n - 1:
        raise SumMismatch(f"degrees sum to {total}, expected n - 1 = {n - 1}", n)
    # partial sums over t = 1..n-1 must exceed t - 1
    walk = np.cumsum(arr[:-1] - 1)
    bad = np.flatnonzero(walk < 0)
    if bad.size:
        t = int(bad[0]) + 1
        raise PrematureClose(f"prefix of length {t} closes the tree early", t)


def from_degree_sequence(seq: Iterable[int]) -> RootedTree:
    """Validate a preorder degree sequence and derive parent/children arrays."""
    degrees = tuple(int(x) for x in seq)
    _check_ballot(degrees)
    n = len(degrees)
    parent = [-1] * n
    children: List[List[int]] = [[] for _ in range(n)]
    stack = [0]
    slots = [degrees[0]]
    for v in range(1, n):
        while not slots[-1]:
            stack.pop()
            slots.pop()
        p = stack[-1]
        parent[v] = p
        children[p].append(v)
        slots[-1] -= 1
        stack.append(v)
        slots.append(degrees[v])
    return RootedTree(degrees, tuple(parent), tuple(map(tuple, children)))


def rotation_index(seq: Sequence[int]) -> int:
    """Index r such that seq[r:] + seq[:r] satisfies the ballot conditions.

    Cycle lemma: with the walk S_t = sum_{i<=t} (x_i - 1) and S_n = -1, the
    valid rotation starts right after the first time the walk hits its minimum.
    """
    arr = np.asarray(seq, dtype=np.int64)
    n = arr.size
    if n == 0:
        raise InvalidDegreeSequence("empty degree sequence", 0)
    total = int(arr.sum())
    if total != n - 1:
        raise SumMismatch(f"degrees sum to {total}, expected n - 1 = {n - 1}", n)
    walk = np.cumsum(arr - 1)
    return (int(np.argmin(walk)) + 1) % n


def cycle_rotate(seq: Sequence[int]) -> Tuple[int, RootedTree]:
    r = rotation_index(seq)
    seq = list(seq)
    return r, from_degree_sequence(seq[r:] + seq[:r])


# -- builders -----------------------------------------------------------------


def path(n: int) -> RootedTree:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return from_degree_sequence([1] * (n - 1) + [0])


def star(n: int) -> RootedTree:
    if n < 1:
        raise ValueError("star needs n >= 1")
    return from_degree_sequence([n - 1] + [0] * (n - 1))


def complete_kary(k: int, height: int) -> RootedTree:
    if k < 2 or height < 0:
        raise ValueError("complete_kary needs k >= 2 and height >= 0")

    def seq(h):
        if h == 0:
            return [0]
        sub = seq(h - 1)
        return [k] + sub * k

    return from_degree_sequence(seq(height))


def join(*subtrees: RootedTree) -> RootedTree:
    """A new root whose ordered children are the roots of ``subtrees``."""
    degrees = [len(subtrees)]
    for t in subtrees:
        degrees.extend(t.degrees)
    return from_degree_sequence(degrees)


# -- free trees ---------------------------------------------------------------


class FreeTree:
    __slots__ = ("adjacency", "n")

    def __init__(self, adjacency: Sequence[Sequence[int]]):
        self.adjacency = tuple(tuple(nb) for nb in adjacency)
        self.n = len(self.adjacency)
        _check_free(self.adjacency)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "FreeTree":
        adj: List[List[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        return cls(adj)

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def __repr__(self) -> str:
        return f"FreeTree(n={self.n}, edges={self.edges() if self.n <= 12 else '...'})"


def _check_free(adj: Sequence[Sequence[int]]) -> None:
    n = len(adj)
    if n == 0:
        raise ValueError("free tree needs at least one node")
    n_half_edges = sum(len(nb) for nb in adj)
    if n_half_edges != 2 * (n - 1):
        raise ValueError(f"a tree on {n} nodes has {n - 1} edges, got {n_half_edges / 2:g}")
    for u, nb in enumerate(adj):
        for v in nb:
            if u not in adj[v]:
                raise ValueError(f"adjacency not symmetric at edge ({u}, {v})")
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    if not all(seen):
        raise ValueError("adjacency is not connected")


def to_free(t: RootedTree) -> FreeTree:
    adj = [list(ch) for ch in t.children]
    for v in range(1, t.n):
        adj[v].append(t.parent[v])
    ft = FreeTree.__new__(FreeTree)
    ft.adjacency = tuple(map(tuple, adj))
    ft.n = t.n
    return ft


# -- text format ---------------------------------------------------------------

_COMMENT = re.compile(r"#[^\n]*")


def format_tree(t: RootedTree) -> str:
    return " ".join(map(str, (t.n,) + t.degrees))


def parse_trees(text: str) -> List[RootedTree]:
    """Parse ``n d_1 ... d_n`` records; whitespace and newlines are interchangeable."""
    tokens = _COMMENT.sub("", text).split()
    trees = []
    pos = 0
    while pos < len(tokens):
        try:
            n = int(tokens[pos])
        except ValueError:
            raise ValueError(f"token {pos + 1}: expected node count, got {tokens[pos]!r}") from None
        if n < 1:
            raise ValueError(f"token {pos + 1}: node count must be positive, got {n}")
        body = tokens[pos + 1:pos + 1 + n]
        if len(body) < n:
            raise ValueError(f"tree {len(trees) + 1}: expected {n} degrees, found {len(body)}")
        trees.append(from_degree_sequence(int(x) for x in body))
        pos += n + 1
    return trees


def write_trees(trees: Iterable[RootedTree], fh) -> None:
    for t in trees:
        fh.write(format_tree(t) + "\n")
