import math

import numpy as np
import pytest

from treemult.experiments import sampler_law
from treemult.offspring import make_family
from treemult.sampler import (AttemptBudgetExceeded, BudgetExceeded, InfeasibleSize, RandomSource,
                              check_feasible, kesten_depth, label_key, sample_conditioned,
                              sample_kesten_truncated, sample_unconditioned, size_biased_table,
                              splitmix64, unconditioned_size)

FAMILIES = ["full-binary", "t-ary:3", "cayley", "catalan", "binomial:3", "motzkin", "geometric-half"]


def test_splitmix64_reference():
    # first outputs of the reference generator seeded with 0
    state = 0
    outs = []
    for _ in range(3):
        outs.append(splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) % 2 ** 64
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_derive_and_label_key():
    src = RandomSource(42)
    assert src.derive(1).seed == 42 ^ splitmix64(1)
    assert src.derive(1).seed != src.derive(2).seed
    assert label_key("full-binary", 5, 0) == label_key("full-binary", 5, 0)
    assert label_key("full-binary", 5, 0) != label_key("full-binary", 5, 1)
    a = RandomSource(3).gen.integers(0, 2 ** 32, size=5)
    b = RandomSource(3).gen.integers(0, 2 ** 32, size=5)
    assert (a == b).all()


def test_full_binary_three():
    d = make_family("full-binary")
    for seed in range(20):
        assert list(sample_conditioned(d, 3, seed).degrees) == [2, 0, 0]


def test_infeasible_sizes():
    d = make_family("full-binary")
    with pytest.raises(InfeasibleSize, match="full-binary"):
        sample_conditioned(d, 4, 0)
    with pytest.raises(InfeasibleSize):
        check_feasible(make_family("t-ary:3"), 5)
    check_feasible(make_family("t-ary:3"), 7)
    with pytest.raises(InfeasibleSize):
        check_feasible(make_family("motzkin"), 0)


def test_unknown_method():
    with pytest.raises(ValueError):
        sample_conditioned(make_family("motzkin"), 5, 0, method="magic")


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("method", ["counts", "sequence"])
def test_sampled_trees_are_valid(family, method):
    d = make_family(family)
    for i, n in enumerate([1, 7, 31, 301]):
        t = sample_conditioned(d, n, i, method=method)
        assert t.n == n
        assert all(d.pmf(k) > 0 for k in t.degrees)


@pytest.mark.parametrize("family, n", [("catalan", 4), ("full-binary", 5), ("motzkin", 5),
                                       ("cayley", 5), ("geometric-half", 4)])
@pytest.mark.parametrize("method", ["counts", "sequence"])
def test_law_small(family, n, method):
    _, tv = sampler_law(family, n, 20000, seed=3, method=method)
    assert tv < 0.03


def test_determinism():
    d = make_family("cayley")
    a = [sample_conditioned(d, 200, RandomSource(9).derive(i)) for i in range(5)]
    b = [sample_conditioned(d, 200, RandomSource(9).derive(i)) for i in range(5)]
    assert a == b
    assert len(set(a)) == 5


def test_attempt_budget():
    d = make_family("motzkin")
    with pytest.raises(AttemptBudgetExceeded):
        sample_conditioned(d, 5000, 1, max_draws=5000)
    with pytest.raises(AttemptBudgetExceeded):
        sample_conditioned(d, 5000, 1, max_draws=5000, method="sequence")


def test_large_tree():
    t = sample_conditioned(make_family("full-binary"), 100001, 0)
    assert t.n == 100001 and set(t.degrees) == {0, 2}


# -- unconditioned ---------------------------------------------------------------


def test_unconditioned_full_binary_sizes():
    d = make_family("full-binary")
    src = RandomSource(17)
    sizes = np.array([unconditioned_size(d, src.derive(i), 10 ** 6) for i in range(20000)])
    done = sizes[sizes > 0]
    assert (done % 2 == 1).all()
    n = len(sizes)
    for size, p in [(1, 1 / 2), (3, 1 / 8), (5, 1 / 16)]:
        se = math.sqrt(p * (1 - p) / n)
        assert abs((sizes == size).mean() - p) < 4 * se


def test_unconditioned_tree_and_budget():
    d = make_family("motzkin")
    t = sample_unconditioned(d, 5, 10 ** 6)
    assert t.n >= 1
    with pytest.raises(BudgetExceeded):
        for seed in range(1000):
            sample_unconditioned(d, seed, 3)
    assert unconditioned_size(d, 0, 1) in (1, -1)


# -- Kesten -----------------------------------------------------------------------


def test_size_biased_table():
    values, cdf = size_biased_table(make_family("motzkin"))
    assert list(values) == [1, 2]
    assert cdf == pytest.approx([1 / 3, 1.0])
    values, cdf = size_biased_table(make_family("cayley"))
    assert cdf[-1] == 1.0 and values[0] == 1


def test_kesten_depth_zero():
    k = sample_kesten_truncated(make_family("motzkin"), 0, 1)
    assert k.tree.n == 1 and k.spine == () and k.open_boundary == frozenset({0})
    assert k.spine_leaf_degrees() == []


def test_kesten_full_binary_spine():
    k = sample_kesten_truncated(make_family("full-binary"), 6, 2)
    assert len(k.spine) == 6
    assert all(k.tree.degrees[v] == 2 for v in k.spine)


@pytest.mark.parametrize("family", FAMILIES)
def test_kesten_structure(family):
    d = make_family(family)
    for seed in range(20):
        k = sample_kesten_truncated(d, 5, seed)
        t = k.tree
        depth = t.depths()
        assert max(depth) <= 5
        # the spine is a root path, one node per level
        assert k.spine[0] == 0
        for a, b in zip(k.spine, k.spine[1:]):
            assert t.parent[b] == a
        assert [depth[v] for v in k.spine] == list(range(5))
        assert all(t.degrees[v] >= 1 for v in k.spine)
        assert all(depth[v] == 5 and t.degrees[v] == 0 for v in k.open_boundary)


def test_kesten_root_degree_law():
    d = make_family("motzkin")
    src = RandomSource(23)
    degs = np.array([sample_kesten_truncated(d, 1, src.derive(i)).tree.degrees[0]
                     for i in range(20000)])
    for k, p in [(1, 1 / 3), (2, 2 / 3)]:
        se = math.sqrt(p * (1 - p) / len(degs))
        assert abs((degs == k).mean() - p) < 4 * se


@pytest.mark.parametrize("n, k", [(1, 2), (8, 3), (9, 4), (27, 4), (28, 5), (1000, 11), (1001, 12),
                                  (10 ** 5, 48)])
def test_kesten_depth(n, k):
    assert kesten_depth(n) == k
