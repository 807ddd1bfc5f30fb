"""Seeded random valuations, one generator per valuation class.

Each generator builds its class by construction and then re-checks the
class predicate, so a generator bug surfaces as an error instead of a
mislabelled pool.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .model import TABLE_NMAX, ValuationTable, classify_valuation, members

CLASSES = ("monotone", "submodular", "subadditive", "superadditive", "simple")


@dataclass(frozen=True)
class GenSpec:
    n: int
    cls: str = "monotone"
    seed: int = 0
    value_grid: int = 2  # largest denominator a sampled rational may have
    levels: int = 4  # sampled numerators are drawn from 0..levels

    def __post_init__(self):
        if not 1 <= self.n <= TABLE_NMAX:
            raise ValueError(f"n must be in 1..{TABLE_NMAX}, got {self.n}")
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}; choose from {', '.join(CLASSES)}")
        if self.value_grid < 1 or self.levels < 1:
            raise ValueError("value_grid and levels must be >= 1")

    def rng(self) -> random.Random:
        return random.Random(self.seed)


def _rational(rng: random.Random, spec: GenSpec, low: int = 0) -> Fraction:
    return Fraction(rng.randint(low, spec.levels), rng.randint(1, spec.value_grid))


def _check(v: ValuationTable, flag: str) -> ValuationTable:
    if not classify_valuation(v)[flag]:
        raise AssertionError(f"generator produced a table that is not {flag}")
    return v


def gen_monotone(spec: GenSpec) -> ValuationTable:
    """Sample every coalition, then take v(T) = max of the samples over subsets of T."""
    rng = spec.rng()
    size = 1 << spec.n
    # sparse samples keep the number of distinct values (and GM components) small
    sample = [_rational(rng, spec) if rng.random() < 0.5 else Fraction(0) for _ in range(size)]
    sample[0] = Fraction(0)
    vals = list(sample)
    for mask in range(1, size):
        best = vals[mask]
        for p in members(mask):
            lower = vals[mask & ~(1 << p)]
            if lower > best:
                best = lower
        vals[mask] = best
    return ValuationTable(spec.n, vals)


def _weight_table(n: int, weights: Sequence, f: Callable) -> ValuationTable:
    vals = []
    for mask in range(1 << n):
        vals.append(Fraction(f(sum((weights[p] for p in members(mask)), 0))))
    return ValuationTable(n, vals)


def superadditive_from_weights(weights: Sequence, f: Callable) -> ValuationTable:
    """v(S) = f(sum of weights in S); superadditive when f is convex with f(0) = 0."""
    return _check(_weight_table(len(weights), weights, f), "superadditive")


def subadditive_from_weights(weights: Sequence, f: Callable) -> ValuationTable:
    """v(S) = f(sum of weights in S); subadditive when f is concave with f(0) = 0."""
    return _check(_weight_table(len(weights), weights, f), "subadditive")


def _piecewise(slopes: Sequence[Fraction]) -> Callable[[int], Fraction]:
    # f on the integers: f(0)=0 and f(g+1) - f(g) = slopes[g]
    cum = [Fraction(0)]
    for s in slopes:
        cum.append(cum[-1] + s)
    return lambda g: cum[g]


def gen_superadditive(spec: GenSpec) -> ValuationTable:
    """Integer weights through a convex piecewise-linear map.

    Slopes rise strictly at every integer, so f(a+b) > f(a) + f(b) whenever
    a, b > 0: two players with positive weight always create a surplus.
    """
    rng = spec.rng()
    weights = [rng.randint(0, 2) for _ in range(spec.n)]
    slopes, s = [], Fraction(0)
    for _ in range(sum(weights)):
        s += _rational(rng, spec, low=1)
        slopes.append(s)
    return superadditive_from_weights(weights, _piecewise(slopes))


def gen_subadditive(spec: GenSpec) -> ValuationTable:
    """Integer weights through a concave non-decreasing piecewise-linear map."""
    rng = spec.rng()
    weights = [rng.randint(0, 2) for _ in range(spec.n)]
    total = sum(weights)
    steps = sorted((_rational(rng, spec) for _ in range(total)), reverse=True)
    return subadditive_from_weights(weights, _piecewise(steps))


def gen_submodular(spec: GenSpec) -> ValuationTable:
    """Weighted coverage: each player covers a random subset of weighted elements."""
    rng = spec.rng()
    n_elems = rng.randint(1, 2 * spec.n)
    weight = [_rational(rng, spec, low=1) for _ in range(n_elems)]
    covers = [0] * spec.n
    for e in range(n_elems):
        for p in range(spec.n):
            if rng.random() < 0.4:
                covers[p] |= 1 << e
    vals = []
    for mask in range(1 << spec.n):
        covered = 0
        for p in members(mask):
            covered |= covers[p]
        vals.append(sum((weight[e] for e in members(covered)), Fraction(0)))
    return _check(ValuationTable(spec.n, vals), "submodular")


def upward_closure(n: int, minimal: Sequence[int]) -> ValuationTable:
    vals = [0] * (1 << n)
    for mask in range(1 << n):
        if any(mask & m == m for m in minimal):
            vals[mask] = 1
    return ValuationTable(n, vals)


def gen_socg(spec: GenSpec) -> ValuationTable:
    """Indicator of the upward closure of a few random nonempty coalitions."""
    rng = spec.rng()
    grand = (1 << spec.n) - 1
    k = rng.randint(1, 3)
    minimal = [rng.randint(1, grand) for _ in range(k)]
    return _check(upward_closure(spec.n, minimal), "simple")


GENERATORS = {
    "monotone": gen_monotone,
    "submodular": gen_submodular,
    "subadditive": gen_subadditive,
    "superadditive": gen_superadditive,
    "simple": gen_socg,
}


def generate(spec: GenSpec) -> ValuationTable:
    return GENERATORS[spec.cls](spec)


def pool_seed(cls: str, n: int, index: int) -> int:
    """Stable 64-bit seed, independent of Python's hash randomisation."""
    digest = hashlib.blake2b(f"{cls}:{n}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def seeded_pool(cls: str, n: int, count: int, start: int = 0, **knobs) -> Iterator[ValuationTable]:
    for i in range(start, start + count):
        yield generate(GenSpec(n, cls, pool_seed(cls, n, i), **knobs))


def _monotone_boolean(n: int) -> list[tuple[int, ...]]:
    # f on n variables is a pair (f0, f1) of functions on n-1 variables with f0 <= f1
    if n == 0:
        return [(0,), (1,)]
    smaller = _monotone_boolean(n - 1)
    out = []
    for f0 in smaller:
        for f1 in smaller:
            if all(a <= b for a, b in zip(f0, f1)):
                out.append(f0 + f1)
    return out


def all_socgs(n: int) -> list[ValuationTable]:
    """Every simple game on n players (for n = 1..5 this is 1, 4, 18, 166, 7579 tables)."""
    if n > 5:
        raise ValueError("exhaustive simple-game enumeration is limited to n <= 5")
    return [ValuationTable(n, f) for f in _monotone_boolean(n) if f[0] == 0 and f[-1] == 1]
