"""Random conditioned BGW trees, unconditioned BGW trees and truncated Kesten trees.

Randomness comes from numpy's PCG64 bit generator.  Per-trial streams are
derived from a master seed as ``seed XOR splitmix64(key)``, where ``key`` is
the trial index (or a 64-bit digest of a longer trial label), so results do
not depend on how trials are scheduled.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .offspring import OffspringDistribution
from .tree import RootedTree, from_degree_sequence, rotation_index

MASK64 = (1 << 64) - 1
DEFAULT_MAX_DRAWS = 10 ** 9
_TAIL_CUTOFF = 1e-12  # infinite laws: cells beyond this tail mass go to one overflow cell


class InfeasibleSize(ValueError):
    pass


class AttemptBudgetExceeded(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def splitmix64(x: int) -> int:
    """The splitmix64 output function (Steele, Lea, Flood 2014)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def label_key(*parts) -> int:
    """64-bit key for a trial label such as (family, n, trial)."""
    digest = hashlib.blake2b("|".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RandomSource:
    """A seeded PCG64 stream.  Single owner; derive() for independent substreams."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, key: int) -> "RandomSource":
        return RandomSource(self.seed ^ splitmix64(int(key) & MASK64))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"


def _as_source(rng) -> RandomSource:
    return rng if isinstance(rng, RandomSource) else RandomSource(rng)


# -- conditioned trees ------------------------------------------------------------


def check_feasible(d: OffspringDistribution, n: int) -> None:
    if n < 1:
        raise InfeasibleSize(f"size must be positive, got {n}")
    lam = d.span
    if (n - 1) % lam:
        raise InfeasibleSize(
            f"no {d.name} tree has {n} nodes: n - 1 = {n - 1} is not a multiple of the span {lam}")


class _CountTable:
    """Offspring cells for multinomial draws; the last cell may be an overflow cell."""

    def __init__(self, d: OffspringDistribution):
        if d.finite_support:
            self.values = np.arange(len(d.probs), dtype=np.int64)
            self.probs = d._table
            self.overflow = None
        else:
            k = 1
            while d.tail_mass(k) >= _TAIL_CUTOFF:
                k += 1
            head = np.array([d.pmf(i) for i in range(k)])
            self.values = np.arange(k, dtype=np.int64)
            self.probs = np.append(head, d.tail_mass(k))
            self.overflow = k


@lru_cache(maxsize=64)
def _count_table(d: OffspringDistribution) -> _CountTable:
    return _CountTable(d)


def _sample_by_counts(d, n, gen, max_draws) -> np.ndarray:
    """Offspring sequence of n iid draws conditioned on summing to n - 1.

    Rejection on the multinomial count vector, then a uniform arrangement:
    the same law as rejecting whole sequences, at O(support) cost per attempt.
    """
    table = _count_table(d)
    used = 0
    while True:
        used += n
        if used > max_draws:
            raise AttemptBudgetExceeded(
                f"gave up after {used - n} draws sampling {d.name} at n = {n}")
        counts = gen.multinomial(n, table.probs)
        if table.overflow is None:
            total = int(counts @ table.values)
            extra = None
        else:
            total = int(counts[:-1] @ table.values)
            extra = None
            if counts[-1]:
                extra = d.draw_tail(gen, table.overflow, int(counts[-1]))
                total += int(extra.sum())
        if total != n - 1:
            continue
        head = counts if table.overflow is None else counts[:-1]
        seq = np.repeat(table.values, head)
        if extra is not None:
            seq = np.concatenate([seq, extra])
        return gen.permutation(seq)


def _sample_by_sequence(d, n, gen, max_draws) -> np.ndarray:
    """Plain rejection: draw xi_1..xi_n, restart as soon as the sum passes n - 1."""
    used = 0
    block = max(64, min(n, 1 << 16))
    while True:
        seq = np.empty(0, dtype=np.int64)
        total = 0
        ok = True
        while seq.size < n:
            take = min(block, n - seq.size)
            chunk = d.draw(gen, take)
            used += take
            running = total + np.cumsum(chunk)
            if running[-1] > n - 1:
                used -= take - (int(np.argmax(running > n - 1)) + 1)
                ok = False
                break
            total = int(running[-1])
            seq = np.concatenate([seq, chunk])
        if ok and total == n - 1:
            return seq
        if used > max_draws:
            raise AttemptBudgetExceeded(
                f"gave up after {used} draws sampling {d.name} at n = {n}")


def sample_conditioned(d: OffspringDistribution, n: int, rng, *,
                       max_draws: int = DEFAULT_MAX_DRAWS, method: str = "counts") -> RootedTree:
    """A BGW tree conditioned to have exactly n nodes.

    Draw an iid offspring sequence conditioned on summing to n - 1, then
    rotate it into the unique valid preorder sequence (cycle lemma).
    ``method="sequence"`` is the textbook rejection sampler; ``"counts"``
    rejects on the multinomial count vector instead and is far faster.  Both
    produce the same law, not the same stream.
    """
    check_feasible(d, n)
    gen = _as_source(rng).gen
    if method == "counts":
        seq = _sample_by_counts(d, n, gen, max_draws)
    elif method == "sequence":
        seq = _sample_by_sequence(d, n, gen, max_draws)
    else:
        raise ValueError(f"unknown method {method!r}")
    r = rotation_index(seq)
    return from_degree_sequence(np.roll(seq, -r).tolist())


# -- unconditioned trees ---------------------------------------------------------------


def _grow_preorder(d: OffspringDistribution, gen: np.random.Generator, budget: int,
                   first_block: int = 16) -> np.ndarray:
    """Preorder offspring sequence of one BGW tree; BudgetExceeded past ``budget`` nodes."""
    pieces = []
    pending = 1
    size = 0
    block = first_block
    while True:
        chunk = d.draw(gen, block)
        open_after = pending + np.cumsum(chunk - 1)
        closed = np.flatnonzero(open_after == 0)
        if closed.size:
            end = int(closed[0]) + 1
            if size + end > budget:
                raise BudgetExceeded(f"tree exceeds the budget of {budget} nodes")
            pieces.append(chunk[:end])
            return np.concatenate(pieces)
        size += block
        if size > budget:
            raise BudgetExceeded(f"tree exceeds the budget of {budget} nodes")
        pieces.append(chunk)
        pending = int(open_after[-1])
        block = min(2 * block, 1 << 20)


def sample_unconditioned(d: OffspringDistribution, rng, node_budget: int) -> RootedTree:
    """One unconditioned BGW tree, generated depth-first."""
    if node_budget < 1:
        raise ValueError("node_budget must be positive")
    seq = _grow_preorder(d, _as_source(rng).gen, node_budget)
    return from_degree_sequence(seq.tolist())


def unconditioned_size(d: OffspringDistribution, rng, node_budget: int) -> int:
    """Size of an unconditioned tree without building it; -1 when over budget."""
    try:
        return int(_grow_preorder(d, _as_source(rng).gen, node_budget, first_block=4).size)
    except BudgetExceeded:
        return -1


# -- Kesten trees -----------------------------------------------------------------


def size_biased_table(d: OffspringDistribution) -> Tuple[np.ndarray, np.ndarray]:
    """(values, cdf) of zeta with P{zeta = i} = i p_i.

    Extended until the cumulative mass exceeds 1 - 1e-12; the residual mass is
    assigned to the last entry.
    """
    values, cdf = [], []
    acc = 0.0
    i = 1
    limit = d.max_degree
    while acc <= 1.0 - 1e-12 and (limit is None or i <= limit):
        q = i * d.pmf(i)
        if q > 0:
            acc += q
            values.append(i)
            cdf.append(acc)
        i += 1
    cdf[-1] = 1.0
    return np.array(values, dtype=np.int64), np.array(cdf)


@dataclass(frozen=True)
class KestenTree:
    """Depth-k truncation of Kesten's tree.

    ``spine`` holds the marked nodes at distance < depth, root first; their
    children are fully generated.  Nodes at distance == depth are kept as
    leaves of ``tree``; ``open_boundary`` marks those whose offspring count
    (drawn but not expanded) was positive, so genuine leaves can be told apart.
    """
    tree: RootedTree
    spine: Tuple[int, ...]
    depth: int
    open_boundary: frozenset

    def spine_leaf_degrees(self) -> List[int]:
        t = self.tree
        out = []
        for v in self.spine:
            out.append(sum(1 for c in t.children[v]
                           if t.degrees[c] == 0 and c not in self.open_boundary))
        return out


def sample_kesten_truncated(d: OffspringDistribution, depth: int, rng) -> KestenTree:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    gen = _as_source(rng).gen
    values, cdf = size_biased_table(d)
    # nodes in generation order; preorder is recovered at the end
    kids: List[List[int]] = [[]]
    node_depth = [0]
    marked = [0]
    open_nodes = set()

    def new_node(parent: int) -> int:
        kids.append([])
        node_depth.append(node_depth[parent] + 1)
        kids[parent].append(len(kids) - 1)
        return len(kids) - 1

    unmarked: List[int] = []
    cur = 0
    for _ in range(depth):
        zeta = int(values[np.searchsorted(cdf, gen.random(), side="right")])
        mark = int(gen.integers(zeta))
        nxt = -1
        for j in range(zeta):
            c = new_node(cur)
            if j == mark:
                nxt = c
            else:
                unmarked.append(c)
        marked.append(nxt)
        cur = nxt

    # unmarked children root independent BGW trees, grown level by level
    frontier = unmarked
    while frontier:
        degs = d.draw(gen, len(frontier))
        nxt_frontier = []
        for v, k in zip(frontier, degs.tolist()):
            if not k:
                continue
            if node_depth[v] >= depth:
                open_nodes.add(v)
                continue
            for _ in range(k):
                nxt_frontier.append(new_node(v))
        frontier = nxt_frontier
    # the last marked node sits on the boundary and is never a leaf of T_inf
    open_nodes.add(marked[-1])

    preorder = []
    stack = [0]
    while stack:
        v = stack.pop()
        preorder.append(v)
        stack.extend(reversed(kids[v]))
    relabel = {v: i for i, v in enumerate(preorder)}
    tree = from_degree_sequence(len(kids[v]) for v in preorder)
    return KestenTree(
        tree=tree,
        spine=tuple(relabel[v] for v in marked[:depth]),
        depth=depth,
        open_boundary=frozenset(relabel[v] for v in open_nodes),
    )


def kesten_depth(n: int) -> int:
    """ceil(n^(1/3)) + 1, computed exactly in integers."""
    c = round(n ** (1 / 3))
    while c ** 3 < n:
        c += 1
    while c > 0 and (c - 1) ** 3 >= n:
        c -= 1
    return c + 1
