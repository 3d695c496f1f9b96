import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from treemult.offspring import (InvalidDistribution, bound_constants, custom, gamma_constant,
                                load_custom, make_family, min_entropy, parse_family,
                                renyi_entropy, shannon_entropy, span)

BUILTINS = ["full-binary", "t-ary:3", "t-ary:5", "cayley", "catalan", "binomial:3",
            "binomial:10", "motzkin", "geometric-half"]

LOG2E = math.log2(math.e)
I0_2 = math.fsum(1 / math.factorial(k) ** 2 for k in range(20))


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_are_critical(name):
    d = make_family(name)
    assert abs(d.total_mass - 1) < 1e-12
    assert abs(d.mean - 1) < 1e-12
    assert d.variance > 0
    assert d.pmf(0) > 0


def test_full_binary():
    d = make_family("full-binary")
    assert d.pmf(0) == d.pmf(2) == 0.5
    assert d.pmf(1) == 0
    assert span(d) == 2


def test_cayley_pmf_and_two_exp():
    d = make_family("cayley")
    for i in range(10):
        assert d.pmf(i) == pytest.approx(1 / (math.e * math.factorial(i)), rel=1e-14)
    assert d.finite_two_exp
    # E 2^xi = e, summed independently
    assert math.fsum(2 ** i * d.pmf(i) for i in range(60)) == pytest.approx(math.e, rel=1e-14)


def test_geometric_half_has_no_upper_bound():
    d = make_family("geometric-half")
    assert not d.finite_two_exp
    assert bound_constants(d) == (pytest.approx(1 / 8), None)


def test_custom_not_critical():
    with pytest.raises(InvalidDistribution, match="mean"):
        custom([0.5, 0.5])


@pytest.mark.parametrize("probs, msg", [
    ([0.0, 1.0], "variance"),
    ([0.5, 0.2, 0.2], "sum"),
    ([-0.1, 1.2, -0.1], "p_0"),
])
def test_custom_rejections(probs, msg):
    with pytest.raises(InvalidDistribution, match=msg):
        custom(probs)


@pytest.mark.parametrize("tag, params", [("t-ary", (1,)), ("binomial", (1,)), ("nope", ())])
def test_bad_family_params(tag, params):
    with pytest.raises(InvalidDistribution):
        make_family(tag, params)


def test_inline_params():
    assert make_family("t-ary:4") == make_family("t-ary", (4,))
    assert make_family("catalan") == make_family("binomial", (2,))


def test_load_custom(tmp_path):
    path = tmp_path / "law.txt"
    path.write_text("# Catalan law\n0 1/4\n1 0.5   # trailing comment\n\n2 1/4\n")
    d = load_custom(path)
    assert d.probs == (0.25, 0.5, 0.25)
    assert parse_family(f"custom:{path}") == d


@pytest.mark.parametrize("body, msg", [
    ("0 0.5\n0 0.5\n", "duplicate"),
    ("0 0.5 1\n", "expected"),
    ("-1 0.5\n", "negative"),
    ("0 0.5\n1 0.5\n", "mean"),
    ("# nothing\n", "no entries"),
])
def test_load_custom_errors(tmp_path, body, msg):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(InvalidDistribution, match=msg):
        load_custom(path)


# -- entropies --------------------------------------------------------------------


@pytest.mark.parametrize("name, expected", [
    ("full-binary", 1.0),
    ("motzkin", math.log2(3)),
    ("catalan", math.log2(8 / 3)),
    ("cayley", 2 * LOG2E - math.log2(I0_2)),
    ("geometric-half", math.log2(3)),  # sum 4^-(i+1) = 1/3
])
def test_renyi_two(name, expected):
    assert renyi_entropy(make_family(name), 2) == pytest.approx(expected, abs=1e-12)


def test_cayley_renyi_value():
    # numeric value, from the Bessel series above
    assert renyi_entropy(make_family("cayley"), 2) == pytest.approx(1.6966186857, abs=1e-9)


def test_renyi_rejects_small_alpha():
    with pytest.raises(ValueError):
        renyi_entropy(make_family("motzkin"), 1.0)


@pytest.mark.parametrize("name, expected", [
    ("full-binary", 1.0),
    ("motzkin", math.log2(3)),
    ("geometric-half", 2.0),
])
def test_shannon(name, expected):
    assert shannon_entropy(make_family(name)) == pytest.approx(expected, abs=1e-12)


def test_shannon_geometric_closed_form():
    # sum (i+1)/2^(i+1) evaluated by brute force
    direct = math.fsum((i + 1) / 2 ** (i + 1) for i in range(200))
    assert shannon_entropy(make_family("geometric-half")) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("name, expected", [
    ("full-binary", 1.0), ("geometric-half", 1.0), ("cayley", LOG2E)])
def test_min_entropy(name, expected):
    assert min_entropy(make_family(name)) == pytest.approx(expected, abs=1e-14)


# -- gamma and bounds -------------------------------------------------------------


@pytest.mark.parametrize("name, expected", [
    ("full-binary", 1 / 16),
    ("motzkin", 1 / 81),
    ("geometric-half", 1 / 256),
    ("catalan", 1 / 256),
    ("cayley", 1 / (4 * math.e ** 4)),
])
def test_gamma(name, expected):
    assert gamma_constant(make_family(name)) == pytest.approx(expected, rel=1e-13)


def test_cayley_gamma_decimal():
    # 1/(4 e^4) evaluated directly
    assert gamma_constant(make_family("cayley")) == pytest.approx(0.00457890972218, abs=1e-14)


def _gamma_bruteforce(d, kmax=200, order=None):
    ks = list(range(2, kmax)) if order is None else order
    return max(d.pmf(0) ** k * d.pmf(k) ** (k / (k - 1)) for k in ks)


@pytest.mark.parametrize("name", BUILTINS)
def test_gamma_matches_bruteforce_and_order_free(name):
    d = make_family(name)
    g = gamma_constant(d)
    ks = list(range(2, 200))
    assert g == _gamma_bruteforce(d)
    assert g == _gamma_bruteforce(d, order=ks[::-1])
    assert g == _gamma_bruteforce(d, order=sorted(ks, key=lambda k: (k * 7919) % 197))


@pytest.mark.parametrize("name, lower, upper", [
    ("full-binary", 1 / 4, 2.0),
    ("motzkin", 1 / math.log2(81), 2 / math.log2(3)),
    ("geometric-half", 1 / 8, None),
])
def test_bound_constants(name, lower, upper):
    lo, up = bound_constants(make_family(name))
    assert lo == pytest.approx(lower, rel=1e-13)
    if upper is None:
        assert up is None
    else:
        assert up == pytest.approx(upper, rel=1e-13)


@pytest.mark.parametrize("name, lam", [("full-binary", 2), ("t-ary:3", 3), ("motzkin", 1),
                                       ("cayley", 1), ("geometric-half", 1)])
def test_span(name, lam):
    assert span(make_family(name)) == lam


def test_custom_span():
    # support {0, 4, 8}: 4/8 + 8/16 = 1
    d = custom([13 / 16, 0, 0, 0, 1 / 8, 0, 0, 0, 1 / 16])
    assert span(d) == 4


# -- properties --------------------------------------------------------------------


@st.composite
def critical_pmfs(draw):
    m = draw(st.integers(2, 8))
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=m + 1, max_size=m + 1))
    total = sum(w)
    q = [x / total for x in w]
    mu = sum(i * p for i, p in enumerate(q))
    if mu > 1:
        a = 1 / mu
        p = [a * x for x in q]
        p[0] += 1 - a
    else:
        a = (m - 1) / (m - mu)
        p = [a * x for x in q]
        p[m] += 1 - a
    s = math.fsum(p)
    return custom([x / s for x in p])


def _chain_ok(d, a, b):
    h = shannon_entropy(d)
    ha, hb = renyi_entropy(d, a), renyi_entropy(d, b)
    hinf = min_entropy(d)
    tol = 1e-10
    chain = [h, ha, hb, hinf, (b - 1) / b * hb, (a - 1) / a * ha, 0.0]
    return all(x >= y - tol for x, y in zip(chain, chain[1:]))


@pytest.mark.parametrize("name", BUILTINS)
@pytest.mark.parametrize("a, b", [(1.1, 1.5), (1.5, 2), (2, 4), (4, 16), (1.1, 16)])
def test_entropy_chain_builtins(name, a, b):
    assert _chain_ok(make_family(name), a, b)


@settings(max_examples=150, deadline=None)
@given(critical_pmfs(), st.floats(1.01, 8), st.floats(0.01, 8))
def test_entropy_chain_custom(d, a, gap):
    assert _chain_ok(d, a, a + gap)


@pytest.mark.parametrize("name", BUILTINS)
def test_strict_power_mean_inequality(name):
    d = make_family(name)
    two = d.power_sum(2) ** 0.5
    for k in range(3, 11):
        assert d.power_sum(k) ** (1 / k) < two


@pytest.mark.parametrize("name", BUILTINS)
def test_renyi_monotone_in_alpha(name):
    d = make_family(name)
    vals = [renyi_entropy(d, a) for a in (1.1, 1.5, 2, 4, 16)]
    assert all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))


def test_binomial_approaches_cayley():
    h64 = renyi_entropy(make_family("binomial:64"), 2)
    assert abs(h64 - renyi_entropy(make_family("cayley"), 2)) < 0.01


def test_fraction_input_exactness():
    d = custom([float(Fraction(1, 3))] * 3)
    assert d.mean == pytest.approx(1, abs=1e-15)
