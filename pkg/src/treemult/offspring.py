"""Critical offspring distributions and the entropy constants built from them.

A distribution is immutable once constructed.  Finite-support laws keep an
explicit probability table; the two infinite-support families (Poisson(1) and
geometric(1/2)) evaluate their pmf in closed form and sum series term by term
until an analytic majorant certifies the remaining tail is below ``SERIES_TOL``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

SERIES_TOL = 1e-13
_SUM_TOL = 1e-12

FAMILIES = (
    "full-binary",
    "t-ary",
    "cayley",
    "binomial",
    "catalan",
    "motzkin",
    "geometric-half",
    "custom",
)


class InvalidDistribution(ValueError):
    """Raised when a pmf is not a critical offspring law."""


@dataclass(frozen=True)
class OffspringDistribution:
    family: str
    params: Tuple = ()
    probs: Optional[Tuple[float, ...]] = None  # None for infinite support
    finite_two_exp: bool = True

    # -- identity -----------------------------------------------------------

    @property
    def name(self) -> str:
        if self.family in ("t-ary", "binomial"):
            return f"{self.family}:{self.params[0]}"
        return self.family

    def __str__(self) -> str:
        return self.name

    @property
    def finite_support(self) -> bool:
        return self.probs is not None

    @property
    def max_degree(self) -> Optional[int]:
        return None if self.probs is None else len(self.probs) - 1

    # -- pmf ----------------------------------------------------------------

    def pmf(self, i: int) -> float:
        if i < 0:
            return 0.0
        if self.probs is not None:
            return self.probs[i] if i < len(self.probs) else 0.0
        if self.family == "cayley":
            return math.exp(-1.0 - math.lgamma(i + 1))
        # geometric-half
        return math.ldexp(1.0, -(i + 1))

    def _ratio_bound(self, k: int) -> float:
        """Upper bound on p_{i+1}/p_i valid for every i >= k (infinite families)."""
        if self.family == "cayley":
            return 1.0 / (k + 1)
        return 0.5

    def _series(self, term: Callable[[int, float], float],
                tail: Callable[[int, float, float], float]) -> float:
        """Sum term(i, p_i) over the support.

        For infinite support, ``tail(k, p_k, r)`` must bound the sum of all
        terms with index >= k, given the pmf ratio bound ``r`` from k onward.
        """
        if self.probs is not None:
            return math.fsum(term(i, p) for i, p in enumerate(self.probs) if p > 0)
        parts = []
        i = 0
        while True:
            p = self.pmf(i)
            if i >= 2 and p > 0:
                bound = tail(i, p, self._ratio_bound(i))
                if bound < SERIES_TOL:
                    break
            parts.append(term(i, p))
            i += 1
        return math.fsum(parts)

    def power_sum(self, alpha: float) -> float:
        """Sum of p_i ** alpha."""
        return self._series(
            lambda i, p: p ** alpha,
            lambda k, p, r: p ** alpha / (1.0 - r ** alpha),
        )

    def moment(self, m: int) -> float:
        def tail(k, p, r):
            rho = ((k + 1) / k) ** m * r
            return math.inf if rho >= 1 else k ** m * p / (1.0 - rho)
        return self._series(lambda i, p: i ** m * p, tail)

    @property
    def total_mass(self) -> float:
        return self._series(lambda i, p: p, lambda k, p, r: p / (1.0 - r))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        return self.moment(2) - self.mean ** 2

    @property
    def span(self) -> int:
        return span(self)

    def support(self, mass: float = 1.0 - 1e-16) -> Iterator[Tuple[int, float]]:
        """Yield (i, p_i) with p_i > 0; infinite laws stop once ``mass`` is covered."""
        if self.probs is not None:
            for i, p in enumerate(self.probs):
                if p > 0:
                    yield i, p
            return
        acc = 0.0
        i = 0
        while acc < mass:
            p = self.pmf(i)
            acc += p
            yield i, p
            i += 1

    # -- sampling -------------------------------------------------------------

    def draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        """``size`` independent offspring counts as an int64 array."""
        if self.family == "cayley":
            return gen.poisson(1.0, size).astype(np.int64)
        if self.family == "geometric-half":
            return gen.geometric(0.5, size).astype(np.int64) - 1
        return gen.choice(len(self.probs), size=size, p=self._table).astype(np.int64)

    @property
    def _table(self) -> np.ndarray:
        t = np.asarray(self.probs, dtype=float)
        return t / t.sum()

    def tail_mass(self, k: int) -> float:
        """P{xi >= k}, summed forward so tiny tails keep relative precision."""
        if self.probs is not None:
            return math.fsum(self.probs[k:])
        if self.family == "geometric-half":
            return math.ldexp(1.0, -k)
        # pmf ratios shrink like 1/(i+1); stop once terms are negligible relative to the head
        parts = [self.pmf(k)]
        i = k + 1
        while parts[-1] > 1e-18 * parts[0]:
            parts.append(self.pmf(i))
            i += 1
        return math.fsum(parts)

    def draw_tail(self, gen: np.random.Generator, k: int, size: int) -> np.ndarray:
        """Draws from the law of xi conditioned on xi >= k."""
        if self.family == "geometric-half":
            return k + gen.geometric(0.5, size).astype(np.int64) - 1
        out = np.empty(size, dtype=np.int64)
        mass = self.tail_mass(k)
        for j, u in enumerate(gen.random(size)):
            target = u * mass
            i, acc = k, 0.0
            while True:
                acc += self.pmf(i)
                if acc >= target or self.pmf(i + 1) == 0.0:
                    break
                i += 1
            out[j] = i
        return out


# -- constructors -------------------------------------------------------------


def _binomial_probs(d: int) -> Tuple[float, ...]:
    q = 1.0 / d
    return tuple(math.comb(d, i) * q ** i * (1.0 - q) ** (d - i) for i in range(d + 1))


def make_family(tag: str, params: Sequence = ()) -> OffspringDistribution:
    """Build one of the built-in families, or a validated custom finite law.

    ``tag`` may carry its integer parameter inline (``"t-ary:3"``,
    ``"binomial:5"``).  For ``custom`` pass the list p_0, p_1, ... as params.
    """
    if ":" in tag and tag.split(":", 1)[0] in ("t-ary", "binomial"):
        tag, arg = tag.split(":", 1)
        params = (int(arg),)
    params = tuple(params)
    if tag == "full-binary":
        return OffspringDistribution("full-binary", (), (0.5, 0.0, 0.5))
    if tag == "t-ary":
        (t,) = params or (None,)
        if t is None or int(t) != t or t < 2:
            raise InvalidDistribution(f"t-ary needs an integer t >= 2, got {t!r}")
        t = int(t)
        probs = [0.0] * (t + 1)
        probs[0] = (t - 1) / t
        probs[t] = 1.0 / t
        return OffspringDistribution("t-ary", (t,), tuple(probs))
    if tag == "cayley":
        return OffspringDistribution("cayley", (), None, True)
    if tag == "catalan":
        return make_family("binomial", (2,))
    if tag == "binomial":
        (d,) = params or (None,)
        if d is None or int(d) != d or d < 2:
            raise InvalidDistribution(f"binomial needs an integer d >= 2, got {d!r}")
        d = int(d)
        return OffspringDistribution("binomial", (d,), _binomial_probs(d))
    if tag == "motzkin":
        return OffspringDistribution("motzkin", (), (1 / 3, 1 / 3, 1 / 3))
    if tag == "geometric-half":
        return OffspringDistribution("geometric-half", (), None, False)
    if tag == "custom":
        return custom(params)
    raise InvalidDistribution(f"unknown family {tag!r}; expected one of {', '.join(FAMILIES)}")


def custom(probs: Sequence[float]) -> OffspringDistribution:
    """Finite-support law p_0..p_m, checked for criticality."""
    probs = [float(p) for p in probs]
    while probs and probs[-1] == 0.0:
        probs.pop()
    if not probs:
        raise InvalidDistribution("empty pmf")
    for i, p in enumerate(probs):
        if not math.isfinite(p) or p < 0:
            raise InvalidDistribution(f"p_{i} = {p} is not a probability")
    total = math.fsum(probs)
    if abs(total - 1.0) > _SUM_TOL:
        raise InvalidDistribution(f"probabilities sum to {total!r}, expected 1")
    mean = math.fsum(i * p for i, p in enumerate(probs))
    if abs(mean - 1.0) > _SUM_TOL:
        raise InvalidDistribution(f"mean = {mean!r} != 1: distribution is not critical")
    var = math.fsum(i * i * p for i, p in enumerate(probs)) - mean ** 2
    if var <= _SUM_TOL:
        raise InvalidDistribution("variance = 0: distribution is degenerate")
    return OffspringDistribution("custom", tuple(probs), tuple(probs), True)


def load_custom(path) -> OffspringDistribution:
    """Read ``i p_i`` pairs (one per line, ``#`` comments); p_i may be a fraction."""
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidDistribution(f"line {lineno}: expected 'i p_i', got {raw!r}")
        try:
            i = int(parts[0])
            p = float(Fraction(parts[1]))
        except ValueError as exc:
            raise InvalidDistribution(f"line {lineno}: {exc}") from None
        if i < 0:
            raise InvalidDistribution(f"line {lineno}: negative offspring count {i}")
        if i in entries:
            raise InvalidDistribution(f"line {lineno}: duplicate entry for i = {i}")
        entries[i] = p
    if not entries:
        raise InvalidDistribution(f"{path}: no entries")
    probs = [0.0] * (max(entries) + 1)
    for i, p in entries.items():
        probs[i] = p
    return custom(probs)


def parse_family(spec: str) -> OffspringDistribution:
    """CLI/config form: ``full-binary``, ``t-ary:3``, ``binomial:5``, ``custom:path``."""
    if spec.startswith("custom:"):
        return load_custom(spec.split(":", 1)[1])
    return make_family(spec)


# -- entropies and constants --------------------------------------------------


def renyi_entropy(d: OffspringDistribution, alpha: float) -> float:
    """Renyi entropy of order alpha > 1, in bits."""
    if alpha == math.inf:
        return min_entropy(d)
    if not alpha > 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    return -math.log2(d.power_sum(alpha)) / (alpha - 1.0)


def shannon_entropy(d: OffspringDistribution) -> float:
    def tail(k, p, r):
        if p >= 1 / math.e:
            return math.inf
        return p * (math.log2(1 / p) / (1 - r) + math.log2(1 / r) * r / (1 - r) ** 2)
    return d._series(lambda i, p: p * math.log2(1.0 / p) if p > 0 else 0.0, tail)


def min_entropy(d: OffspringDistribution) -> float:
    return math.log2(1.0 / max(p for _, p in d.support()))


def gamma_constant(d: OffspringDistribution) -> float:
    """max over k >= 2 of p_0^k * p_k^(k/(k-1))."""
    p0 = d.pmf(0)
    best = 0.0
    k = 2
    while p0 ** k >= best:
        if d.max_degree is not None and k > d.max_degree:
            break
        pk = d.pmf(k)
        if pk > 0:
            best = max(best, p0 ** k * pk ** (k / (k - 1)))
        k += 1
    return best


def bound_constants(d: OffspringDistribution) -> Tuple[float, Optional[float]]:
    """Coefficients of log2 n in the lower and (if E 2^xi < inf) upper bound."""
    lower = 1.0 / math.log2(1.0 / gamma_constant(d))
    upper = 2.0 / renyi_entropy(d, 2) if d.finite_two_exp else None
    return lower, upper


def span(d: OffspringDistribution) -> int:
    """gcd of the positive support."""
    if d.probs is None:
        return 1  # both infinite families charge p_1
    return reduce(math.gcd, (i for i, p in enumerate(d.probs) if i >= 1 and p > 0), 0)


def bessel_i0_2() -> float:
    """I_0(2) = sum 1/(k!)^2."""
    return math.fsum(1.0 / math.factorial(k) ** 2 for k in range(30))


def exact_forms(d: OffspringDistribution) -> Tuple[str, str, str, str]:
    """Symbolic (gamma, H2, lower bound, upper bound) strings for table output."""
    fam = d.family
    if fam == "full-binary":
        return "1/16", "1", "log2(n)/4", "2 log2(n)"
    if fam == "t-ary":
        t = d.params[0]
        return (f"(1-1/{t})^{t} (1/{t})^({t}/{t - 1})", f"log2(1/(1-2/{t}+2/{t}^2))",
                "log2(n)/log2(1/gamma)", "2 log2(n)/H2")
    if fam == "cayley":
        return "1/(4e^4)", "log2(e^2/I0(2))", "log2(n)/(2+4 log2(e))", "2 log2(n)/log2(e^2/I0(2))"
    if fam == "binomial" and d.params[0] == 2:
        return "1/256", "log2(8/3)", "log256(n)", "2 log2(n)/log2(8/3)"
    if fam == "binomial":
        dd = d.params[0]
        return (f"(1/4)(1-1/{dd})^{4 * dd - 2}", "log2(1/sum p_i^2)",
                f"log2(n)/(2-{4 * dd - 2} log2(1-1/{dd}))", "2 log2(n)/H2")
    if fam == "motzkin":
        return "1/81", "log2(3)", "log81(n)", "2 log3(n)"
    if fam == "geometric-half":
        return "1/256", "log2(3)", "log256(n)", "—"
    upper = "2 log2(n)/H2"
    return "max_k p0^k pk^(k/(k-1))", "log2(1/sum p_i^2)", "log2(n)/log2(1/gamma)", upper
