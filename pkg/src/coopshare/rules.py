"""Online value-sharing rules.

Every rule walks the arrival order once and, at each arrival, hands the new
marginal value to a *sharing set* in equal parts.  The rules differ only in
how that set is chosen, so each one is a small selector plugged into
:func:`_run_sharing`.  The SV rule is the exception: it recomputes the
whole allocation at every prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import NotSimpleGame, NotSuperadditive, StepOutOfRange
from .model import (
    ZERO,
    Game,
    Trajectory,
    ValuationTable,
    classify_valuation,
    coalition_key,
    dummy_mask,
    members,
    popcount,
    shapley_scaled,
    split_scale,
    superadditivity_violation,
    trajectory_from_increments,
)


@dataclass(frozen=True)
class SharingSet:
    step: int  # 1-based arrival step
    members: int  # bitmask

    def players(self) -> list[int]:
        return members(self.members)


# A selector gets (valuation, order, step index t (0-based), prefix mask) and
# returns the bitmask of players that split the step's marginal value.
Selector = Callable[[ValuationTable, tuple, int, int], int]


def rule_scale(v: ValuationTable) -> int:
    """Common denominator of every share an equal-split rule can hand out on ``v``."""
    return v.scaled()[1] * split_scale(v.n)


def sharing_increments(v: ValuationTable, order: tuple, select: Selector) -> list:
    """``(step, player, amount)`` credits of an equal-split rule.

    Amounts are integers over :func:`rule_scale`, so the splitting is exact
    without any Fraction arithmetic.
    """
    ints = v.scaled()[0]
    unit = split_scale(v.n)
    incs = []
    mask = 0
    for t, arriver in enumerate(order):
        prev = mask
        mask |= 1 << arriver
        mc = ints[mask] - ints[prev]
        if mc:
            sharers = select(v, order, t, mask)
            share = mc * unit // popcount(sharers)
            incs.extend((t, j, share) for j in members(sharers))
    return incs


def _run_sharing(game: Game, select: Selector) -> Trajectory:
    v = game.valuation
    incs = sharing_increments(v, game.order, select)
    return trajectory_from_increments(game.n, len(game.order), incs, rule_scale(v))


def _select_arriver(v, order, t, mask):
    return 1 << order[t]


def _select_all(v, order, t, mask):
    return mask


def _select_non_dummies_exhaustive(v, order, t, mask):
    return mask & ~dummy_mask(v, mask)


def _select_non_dummies_fast(v, order, t, mask):
    vals = v.scaled()[0]
    return sum(1 << j for j in members(mask) if vals[1 << j] != 0)


def _ndmes_selector(v: ValuationTable, dummy_test: str) -> Selector:
    if dummy_test == "auto":
        dummy_test = "fast" if classify_valuation(v)["subadditive"] else "exhaustive"
    if dummy_test == "fast":
        return _select_non_dummies_fast
    if dummy_test == "exhaustive":
        return _select_non_dummies_exhaustive
    raise ValueError(f"unknown dummy_test {dummy_test!r}")


def ulmes_members(v: ValuationTable, order: tuple, t: int, mask: int) -> int:
    vals = v.scaled()[0]
    target = vals[mask]
    s = mask
    # the arriver order[t] is never a removal candidate
    for ell in range(t - 1, -1, -1):
        cand = s & ~(1 << order[ell])
        if vals[cand] == target:
            s = cand
    return s


def select_first_critical(v, order, t, mask):
    vals = v.scaled()[0]
    target = vals[mask]
    for p in order[: t + 1]:
        if vals[mask & ~(1 << p)] < target:
            return 1 << p
    raise AssertionError("positive marginal without a critical player")


# ---------------------------------------------------------------------------
# public rules


def run_dmc(game: Game) -> Trajectory:
    """Each arriver keeps her whole marginal contribution."""
    return _run_sharing(game, _select_arriver)


def run_mes(game: Game) -> Trajectory:
    return _run_sharing(game, _select_all)


def run_ndmes(game: Game, dummy_test: str = "auto") -> Trajectory:
    """Marginal split among the non-dummy players of each prefix sub-game.

    ``dummy_test`` is ``"auto"`` (fast path only on certified subadditive
    tables), ``"exhaustive"`` or ``"fast"``.
    """
    return _run_sharing(game, _ndmes_selector(game.valuation, dummy_test))


def run_ulmes(game: Game) -> Trajectory:
    return _run_sharing(game, ulmes_members)


def ulmes_sharing_set(game: Game, t: int) -> SharingSet:
    if not 1 <= t <= len(game.order):
        raise StepOutOfRange(f"step {t} outside 1..{len(game.order)}")
    mask = 0
    for p in game.order[:t]:
        mask |= 1 << p
    return SharingSet(t, ulmes_members(game.valuation, game.order, t - 1, mask))


def _require_zero_one(v: ValuationTable) -> None:
    if not all(x == 0 or x == 1 for x in v.values):
        raise NotSimpleGame("RFC needs a 0-1 valued (simple) game")


def run_rfc(game: Game) -> Trajectory:
    """Whole marginal to the earliest arrived critical player (simple games)."""
    _require_zero_one(game.valuation)
    return _run_sharing(game, select_first_critical)


def run_sv(game: Game) -> Trajectory:
    """Shapley value of every prefix sub-game; rows may decrease."""
    v = game.valuation
    rows = []
    mask = 0
    scale = 1
    for p in game.order:
        mask |= 1 << p
        nums, scale = shapley_scaled(v, mask)
        rows.append(nums)
    return Trajectory.from_scaled(rows, scale)


# ---------------------------------------------------------------------------
# IR refinement


def _sharing_selector(base: str, v: ValuationTable) -> Selector:
    base = base.upper()
    if base == "MES":
        return _select_all
    if base == "NDMES":
        return _ndmes_selector(v, "auto")
    if base == "ULMES":
        return ulmes_members
    raise ValueError(f"IR refinement needs a rule with a sharing set (MES, NDMES, ULMES), got {base!r}")


def require_superadditive(v: ValuationTable) -> None:
    if classify_valuation(v)["superadditive"]:
        return
    s, t = superadditivity_violation(v)
    raise NotSuperadditive(
        f"v({{{coalition_key(s)}}}) + v({{{coalition_key(t)}}}) = {v[s] + v[t]} > "
        f"v({{{coalition_key(s | t)}}}) = {v[s | t]}",
        pair=(s, t),
    )


def ir_refine(base: str, game: Game) -> Trajectory:
    """Grant each arriver her singleton value, then split the residual marginal
    over the base rule's sharing set."""
    v = game.valuation
    require_superadditive(v)
    select = _sharing_selector(base, v)
    ints = v.scaled()[0]
    unit = split_scale(v.n)
    order = game.order
    incs = []
    mask = 0
    for t, arriver in enumerate(order):
        prev = mask
        mask |= 1 << arriver
        alone = ints[1 << arriver] * unit
        if alone:
            incs.append((t, arriver, alone))
        residual = (ints[mask] - ints[prev]) * unit - alone
        if residual:
            sharers = select(v, order, t, mask)
            share = residual // popcount(sharers)
            incs.extend((t, j, share) for j in members(sharers))
    return trajectory_from_increments(v.n, len(order), incs, rule_scale(v))


def zero_trajectory(game: Game) -> Trajectory:
    row = (ZERO,) * game.n
    return Trajectory((row,) * len(game.order))

