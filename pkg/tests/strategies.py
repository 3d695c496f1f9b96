"""Shared tree generators for the test suite."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from treemult.tree import cycle_rotate


def tree_from_composition(n, cuts):
    bounds = [0] + sorted(cuts) + [n - 1]
    seq = [bounds[i + 1] - bounds[i] for i in range(n)]
    return cycle_rotate(seq)[1]


@st.composite
def ordered_trees(draw, min_n=1, max_n=40):
    """Uniform random ordered trees: a random composition rotated into place."""
    n = draw(st.integers(min_n, max_n))
    cuts = draw(st.lists(st.integers(0, n - 1), min_size=n - 1, max_size=n - 1))
    return tree_from_composition(n, cuts)


def random_tree(gen: np.random.Generator, n: int):
    return tree_from_composition(n, gen.integers(0, n, size=n - 1).tolist())
