"""Greedy monotone decomposition and the rules built on top of it.

A monotone valuation is peeled into a positive combination of 0-1 valuations:
take the smallest positive residual value ``c``, mark every coalition whose
residual is still positive, subtract ``c`` from those, repeat.  Component
``k`` is then the indicator of ``v(T) > c_1 + ... + c_{k-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DecompositionError, ZeroGame
from .model import (
    ONE,
    ZERO,
    Game,
    Trajectory,
    ValuationTable,
    coalition_key,
    format_rational,
    prefix_subgame,
    split_scale,
    submasks,
    trajectory_from_increments,
)
from .rules import require_superadditive, rule_scale, select_first_critical, sharing_increments, ulmes_members


@dataclass(frozen=True)
class Decomposition:
    components: tuple[tuple[Fraction, ValuationTable], ...]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(c for c, _ in self.components)

    def value(self, mask: int) -> Fraction:
        return sum((c * table[mask] for c, table in self.components), ZERO)


def gm_decompose(v: ValuationTable) -> Decomposition:
    got = v._cache.get("gm")
    if got is not None:
        return got
    if v[v.grand] == 0:
        raise ZeroGame("the grand coalition has value 0; nothing to decompose")
    residual = list(v.values)
    distinct = len({x for x in residual if x > 0})
    comps = []
    while True:
        positive = [x for x in residual if x > 0]
        if not positive:
            break
        # any minimiser gives the same component: only the minimum value matters
        c = min(positive)
        indicator = [ONE if x > 0 else ZERO for x in residual]
        residual = [x - c if x > 0 else x for x in residual]
        comps.append((c, ValuationTable(v.n, indicator)))
        left = len({x for x in residual if x > 0})
        if left >= distinct:
            raise DecompositionError("distinct positive residual values did not decrease")
        distinct = left
    got = Decomposition(tuple(comps))
    v._cache["gm"] = got
    return got


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    coalition: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_recomposition(v: ValuationTable, d: Decomposition) -> CheckResult:
    """v(T) == sum_k c_k * vbar_k(T) for every T, and every component is a 0-1 monotone table."""
    for k, (c, table) in enumerate(d.components):
        if c <= 0:
            return CheckResult(False, None, f"component {k} has non-positive coefficient {c}")
        if table.n != v.n or any(x != 0 and x != 1 for x in table.values):
            return CheckResult(False, None, f"component {k} is not 0-1 valued")
        vals = table.values
        for mask in range(len(vals)):
            for p in range(v.n):
                b = 1 << p
                if not mask & b and vals[mask] > vals[mask | b]:
                    return CheckResult(False, mask, f"component {k} not monotone at {{{coalition_key(mask)}}}")
    for mask in range(1 << v.n):
        if d.value(mask) != v[mask]:
            return CheckResult(False, mask, f"recomposition breaks at {{{coalition_key(mask)}}}")
    return CheckResult(True)


def verify_prefix_consistency(game: Game, t: int) -> CheckResult:
    """Decomposing G and its prefix sub-game G^t gives the same values on every T in the prefix."""
    sub = prefix_subgame(game, t)
    prefix = sub.ground
    try:
        full = gm_decompose(game.valuation)
    except ZeroGame:
        full = Decomposition(())
    try:
        part = gm_decompose(sub.valuation)
    except ZeroGame:
        part = Decomposition(())
    for mask in submasks(prefix):
        if full.value(mask) != part.value(mask):
            return CheckResult(False, mask, f"decompositions disagree at {{{coalition_key(mask)}}}")
    return CheckResult(True)


def decomposition_document(d: Decomposition) -> dict:
    return {
        "components": [
            {
                "coef": format_rational(c),
                "winning": [coalition_key(m) for m, x in enumerate(table.values) if x == 1],
            }
            for c, table in d.components
        ]
    }


# ---------------------------------------------------------------------------
# extended rules

_COMPONENT_SELECTORS = {"RFC": select_first_critical, "ULMES": ulmes_members}


def _component_increments(v: ValuationTable, order: tuple, base: str, den: int) -> list:
    """Weighted component credits over the scale ``den * lcm(1..n)``.

    ``den`` must be a common denominator of v's values, which makes every
    coefficient ``c * den`` an integer.
    """
    select = _COMPONENT_SELECTORS[base]
    incs = []
    for w, table in _integer_weights(v, den):
        # 0-1 components have denominator 1, so their credits are over lcm(1..n)
        incs.extend((t, j, w * x) for t, j, x in sharing_increments(table, order, select))
    return incs


def _integer_weights(v: ValuationTable, den: int) -> list:
    key = ("weights", den)
    got = v._cache.get(key)
    if got is None:
        try:
            d = gm_decompose(v)
        except ZeroGame:
            d = Decomposition(())
        got = []
        for c, table in d.components:
            weight = c * den
            if weight.denominator != 1:
                raise DecompositionError(f"coefficient {c} is not a multiple of 1/{den}")
            got.append((weight.numerator, table))
        v._cache[key] = got
    return got


def residual_table(v: ValuationTable) -> ValuationTable:
    """w(S) = v(S) - sum of singleton values in S; monotone whenever v is superadditive."""
    got = v._cache.get("residual")
    if got is None:
        single = v.singletons()
        vals = []
        for mask in range(1 << v.n):
            total = v[mask]
            m, p = mask, 0
            while m:
                if m & 1:
                    total -= single[p]
                m >>= 1
                p += 1
            vals.append(total)
        got = ValuationTable(v.n, vals)
        v._cache["residual"] = got
    return got


def _ir_eulmes_increments(v: ValuationTable, order: tuple) -> list:
    require_superadditive(v)
    ints, den = v.scaled()
    unit = split_scale(v.n)
    incs = [(t, p, ints[1 << p] * unit) for t, p in enumerate(order) if ints[1 << p]]
    incs.extend(_component_increments(residual_table(v), order, "ULMES", den))
    return incs


def run_extended(base: str, game: Game) -> Trajectory:
    """Coefficient-weighted sum of ``base`` run on every component of the decomposition.

    ``base`` is ``RFC`` (eRFC), ``ULMES`` (eULMES) or ``IR-ULMES`` (IR-eULMES).
    IR-eULMES grants singleton values first and runs eULMES on the residual
    game ``v(S) - sum_{i in S} v({i})``.
    """
    key = base.upper()
    if key == "IR-ULMES":
        incs = _ir_eulmes_increments(game.valuation, game.order)
    elif key in _COMPONENT_SELECTORS:
        incs = _component_increments(game.valuation, game.order, key, game.valuation.scaled()[1])
    else:
        raise ValueError(f"extended rules are built on RFC, ULMES or IR-ULMES, got {base!r}")
    return trajectory_from_increments(game.n, len(game.order), incs, rule_scale(game.valuation))


def run_erfc(game: Game) -> Trajectory:
    return run_extended("RFC", game)


def run_eulmes(game: Game) -> Trajectory:
    return run_extended("ULMES", game)


def run_ir_eulmes(game: Game) -> Trajectory:
    return run_extended("IR-ULMES", game)
