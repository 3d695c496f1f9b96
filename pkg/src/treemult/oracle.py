"""Brute-force reference implementations for tests.

Nothing here shares code with :mod:`treemult.multiplicity`: shapes are compared
by direct recursion and automorphisms are enumerated explicitly.  Size caps
are part of the contract.
"""
from __future__ import annotations

import itertools
import math
from typing import Dict, Iterator, List, Sequence

from .multiplicity import FREE, IDENTICAL, ROOTED, NodeClassification
from .offspring import OffspringDistribution
from .tree import FreeTree, RootedTree, from_degree_sequence

MAX_ENUMERATE = 12
MAX_IDENTICAL = 200
MAX_ROOTED = 10
MAX_FREE = 8


class OracleBudgetExceeded(ValueError):
    pass


def _cap(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise OracleBudgetExceeded(f"{what} is capped at n <= {limit}, got n = {n}")


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def enumerate_ordered_trees(n: int) -> List[RootedTree]:
    """All rooted ordered trees on n nodes, lexicographic in degree sequence."""
    if n < 1:
        raise ValueError("n must be positive")
    _cap(n, MAX_ENUMERATE, "enumeration")
    out = []

    def extend(prefix: List[int], open_slots: int) -> None:
        # open_slots = subtrees still owed after this prefix
        placed = len(prefix)
        if placed == n:
            if open_slots == 0:
                out.append(from_degree_sequence(prefix))
            return
        if open_slots == 0:
            return
        remaining = n - placed
        for k in range(0, remaining):
            if open_slots - 1 + k > remaining - 1:
                break
            prefix.append(k)
            extend(prefix, open_slots - 1 + k)
            prefix.pop()

    extend([], 1)
    return out


def enumerate_full_binary_trees(n: int) -> List[RootedTree]:
    """All ordered trees on n nodes whose degrees are 0 or 2 (n odd, n <= 31)."""
    if n < 1 or n % 2 == 0:
        raise ValueError("full binary trees have an odd number of nodes")
    _cap(n, 31, "full binary enumeration")

    def shapes(m: int) -> List[List[int]]:
        if m == 1:
            return [[0]]
        out = []
        for left in range(1, m - 1, 2):
            for a in shapes(left):
                for b in shapes(m - 1 - left):
                    out.append([2] + a + b)
        return out

    return [from_degree_sequence(seq) for seq in shapes(n)]


# -- identical -----------------------------------------------------------------


def _same_ordered(t: RootedTree, a: int, b: int) -> bool:
    ca, cb = t.children[a], t.children[b]
    if len(ca) != len(cb):
        return False
    return all(_same_ordered(t, x, y) for x, y in zip(ca, cb))


def _root_path(t: RootedTree, v: int) -> List[int]:
    out = [v]
    while t.parent[out[-1]] >= 0:
        out.append(t.parent[out[-1]])
    return out


def identical_classes_bruteforce(t: RootedTree) -> NodeClassification:
    _cap(t.n, MAX_IDENTICAL, "identical_classes_bruteforce")
    paths = [_root_path(t, v) for v in range(t.n)]
    label = list(range(t.n))
    for v in range(t.n):
        for w in range(v):
            if label[w] != w:
                continue
            pv, pw = paths[v], paths[w]
            if len(pv) == len(pw) and all(_same_ordered(t, a, b) for a, b in zip(pv, pw)):
                label[v] = w
                break
    return NodeClassification.from_labels(IDENTICAL, label)


# -- rooted automorphisms ------------------------------------------------------------


def _isomorphisms(t: RootedTree, a: int, b: int) -> Iterator[Dict[int, int]]:
    """Every map from subtree(a) onto subtree(b) preserving the parent relation."""
    ca, cb = t.children[a], t.children[b]
    if len(ca) != len(cb):
        return
    for perm in itertools.permutations(cb):
        partial = [list(_isomorphisms(t, x, y)) for x, y in zip(ca, perm)]
        if any(not options for options in partial):
            continue
        for combo in itertools.product(*partial):
            f = {a: b}
            for piece in combo:
                f.update(piece)
            yield f


def rooted_automorphisms(t: RootedTree, limit: int = MAX_ROOTED) -> List[Dict[int, int]]:
    _cap(t.n, limit, "rooted_automorphisms")
    return list(_isomorphisms(t, 0, 0))


def _orbits(n: int, maps: Sequence[Dict[int, int]], relation: str) -> NodeClassification:
    label = list(range(n))
    for f in maps:
        for v, w in f.items():
            lv, lw = label[v], label[w]
            if lv != lw:
                lo, hi = min(lv, lw), max(lv, lw)
                label = [lo if x == hi else x for x in label]
    return NodeClassification.from_labels(relation, label)


def rooted_orbits_bruteforce(t: RootedTree, limit: int = MAX_ROOTED) -> NodeClassification:
    return _orbits(t.n, rooted_automorphisms(t, limit), ROOTED)


# -- free automorphisms ---------------------------------------------------------------


def free_automorphisms(f: FreeTree, limit: int = MAX_FREE) -> List[List[int]]:
    """Every vertex bijection that preserves adjacency (and non-adjacency).

    Bijections are built position by position and a branch is dropped as soon
    as an assigned pair breaks adjacency, so each survivor is checked on all
    pairs.  ``limit`` raises the size cap for spot checks on symmetric-poor trees.
    """
    n = f.n
    _cap(n, limit, "free_automorphisms")
    adj = [[False] * n for _ in range(n)]
    for u, v in f.edges():
        adj[u][v] = adj[v][u] = True
    out: List[List[int]] = []
    image = [-1] * n
    used = [False] * n

    def place(i: int) -> None:
        if i == n:
            out.append(list(image))
            return
        for w in range(n):
            if used[w]:
                continue
            if all(adj[i][j] == adj[w][image[j]] for j in range(i)):
                image[i] = w
                used[w] = True
                place(i + 1)
                used[w] = False
        image[i] = -1

    place(0)
    return out


def free_orbits_bruteforce(f: FreeTree, limit: int = MAX_FREE) -> NodeClassification:
    maps = [dict(enumerate(g)) for g in free_automorphisms(f, limit)]
    return _orbits(f.n, maps, FREE)


def stabilizer_order(f: FreeTree, u: int, limit: int = MAX_FREE) -> int:
    return sum(1 for g in free_automorphisms(f, limit) if g[u] == u)


# -- probabilities ------------------------------------------------------------


def conditioned_probability(d: OffspringDistribution, t: RootedTree) -> float:
    """Unnormalized BGW weight prod_i p_{xi_i}."""
    return math.prod(d.pmf(k) for k in t.degrees)


def conditioned_law(d: OffspringDistribution, n: int) -> Dict[RootedTree, float]:
    """Exact law of the size-n conditioned tree over its positive-weight shapes."""
    weights = {t: conditioned_probability(d, t) for t in enumerate_ordered_trees(n)}
    weights = {t: w for t, w in weights.items() if w > 0}
    z = math.fsum(weights.values())
    if z == 0:
        raise ValueError(f"no tree of size {n} has positive weight under {d.name}")
    return {t: w / z for t, w in weights.items()}
