"""Exact axiom checkers, witness replay and the satisfaction-matrix runner.

Each checker either passes or returns the first violated inequality it
meets, as a :class:`Witness` that :func:`replay_witness` can re-derive from
scratch.  Passing means "no counterexample in the checked scope", never a
proof.
"""

from __future__ import annotations

import functools
import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .errors import ScopeTooLarge
from .gen import CLASSES, GenSpec, all_socgs, generate, pool_seed
from .model import (
    ZERO,
    Game,
    Trajectory,
    ValuationTable,
    classify_valuation,
    dummy_mask,
    enumeration_cap,
    format_rational,
    game_document,
    has_strict_surplus,
    shapley_value,
)
from .registry import TABLE_RULES, Rule, get_rule

AXIOMS = ("EFF", "STAY", "S-STAY", "EA", "PART", "OD", "IR", "SF")
TABLE_AXIOMS = ("IR", "PART", "EA", "STAY", "S-STAY", "OD", "SF")

# True = the rule is claimed to satisfy the axiom, False = claimed to fail
PUBLISHED_TABLE = {
    "dmc": dict(IR=True, PART=True, EA=False, STAY=True, **{"S-STAY": False}, OD=True, SF=True),
    "sv": dict(IR=True, PART=True, EA=True, STAY=False, **{"S-STAY": False}, OD=True, SF=True),
    "erfc": dict(IR=False, PART=False, EA=False, STAY=True, **{"S-STAY": False}, OD=True, SF=True),
    "mes": dict(IR=False, PART=True, EA=True, STAY=True, **{"S-STAY": True}, OD=False, SF=False),
    "ndmes": dict(IR=False, PART=True, EA=True, STAY=True, **{"S-STAY": True}, OD=True, SF=False),
    "ulmes": dict(IR=False, PART=True, EA=False, STAY=True, **{"S-STAY": True}, OD=True, SF=False),
    "eulmes": dict(IR=False, PART=True, EA=True, STAY=True, **{"S-STAY": True}, OD=True, SF=False),
    "ir-eulmes": dict(IR=True, PART=True, EA=True, STAY=True, **{"S-STAY": True}, OD=True, SF=False),
}

_RELATIONS: dict[str, Callable[[Fraction, Fraction], bool]] = {
    "==": lambda a, b: a == b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def normalize_axiom(name: str) -> str:
    key = name.upper().replace("_", "-")
    if key == "SSTAY":
        key = "S-STAY"
    if key not in AXIOMS:
        raise KeyError(f"unknown axiom {name!r}; choose from {', '.join(AXIOMS)}")
    return key


def _as_rule(rule) -> Rule:
    if isinstance(rule, (str, Rule)):
        return get_rule(rule)
    return Rule(getattr(rule, "__name__", "custom"), getattr(rule, "__name__", "custom"), rule)


@dataclass(frozen=True)
class Witness:
    """A violated inequality ``lhs <relation> rhs`` (the relation the axiom requires).

    ``step`` and ``ref_step`` are 1-based rows of the trajectory under
    ``game.order``; ``deviation`` is the delayed order for EA.  ``player``
    is 0-based (None for efficiency, which is about a whole row).
    """

    axiom: str
    game: Game
    player: int | None
    lhs: Fraction
    rhs: Fraction
    relation: str
    step: int | None = None
    ref_step: int | None = None
    deviation: tuple | None = None

    def document(self) -> dict:
        doc = game_document(self.game)
        doc.update(
            {
                "player": None if self.player is None else self.player + 1,
                "lhs": format_rational(self.lhs),
                "rhs": format_rational(self.rhs),
                "required": f"lhs {self.relation} rhs",
                "step": self.step,
                "ref_step": self.ref_step,
                "deviation": None if self.deviation is None else [p + 1 for p in self.deviation],
            }
        )
        return doc

    def describe(self) -> str:
        who = "" if self.player is None else f" player {self.player + 1}:"
        return f"{self.axiom}{who} {self.lhs} {self.relation} {self.rhs} is false"


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    rule: str
    ok: bool
    witness: Witness | None = None
    games_checked: int = 1

    def __bool__(self) -> bool:
        return self.ok

    @property
    def status(self) -> str:
        return "no-counterexample-found" if self.ok else "fail"

    def document(self) -> dict:
        return {
            "rule": self.rule,
            "axiom": self.axiom,
            "status": self.status,
            "witness": None if self.witness is None else self.witness.document(),
            "games_checked": self.games_checked,
        }


class Runner:
    """Memoised runs of one rule on one valuation, keyed by arrival order."""

    def __init__(self, rule, v: ValuationTable):
        self.rule = _as_rule(rule)
        self.v = v
        self._runs: dict[tuple, Trajectory] = {}
        self._finals: dict[tuple, tuple] = {}

    def trajectory(self, order: Sequence[int]) -> Trajectory:
        order = tuple(order)
        got = self._runs.get(order)
        if got is None:
            got = self.rule(Game(self.v, order))
            self._runs[order] = got
        return got

    def final(self, order: Sequence[int]) -> tuple[Fraction, ...]:
        return self.trajectory(order).final

    def scaled_final(self, order: Sequence[int]) -> tuple[tuple, int]:
        order = tuple(order)
        got = self._finals.get(order)
        if got is None:
            got = self.trajectory(order).scaled_final()
            self._finals[order] = got
        return got


def _verdict(axiom, rule, witness=None) -> AxiomVerdict:
    return AxiomVerdict(axiom, rule.name, witness is None, witness)


def _trajectory(rule: Rule, game: Game, traj: Trajectory | None) -> Trajectory:
    return traj if traj is not None else rule(game)


# ---------------------------------------------------------------------------
# witness finders on one trajectory (they return the first violation or None)


def _prefix_masks(order):
    mask = 0
    out = []
    for p in order:
        mask |= 1 << p
        out.append(mask)
    return out


def _eff_witness(game: Game, traj: Trajectory) -> Witness | None:
    vals = game.valuation.values
    for t, (row, mask) in enumerate(zip(traj.rows, _prefix_masks(game.order)), start=1):
        total = sum(row, ZERO)
        if total != vals[mask]:
            return Witness("EFF", game, None, total, vals[mask], "==", step=t)
    return None


def _stay_witness(game: Game, traj: Trajectory, axiom: str = "STAY") -> Witness | None:
    rows = traj.rows
    order = game.order
    for t in range(1, len(rows)):
        prev, row = rows[t - 1], rows[t]
        for p in order[:t]:
            if row[p] < prev[p]:
                return Witness(axiom, game, p, prev[p], row[p], "<=", step=t + 1, ref_step=t)
    return None


def _s_stay_witness(game: Game, traj: Trajectory) -> Witness | None:
    got = _stay_witness(game, traj, "S-STAY")
    if got is not None:
        return got
    vals = game.valuation.values
    rows = traj.rows
    masks = _prefix_masks(game.order)
    for t, mask in enumerate(masks):
        prev = masks[t - 1] if t else 0
        if vals[mask] <= vals[prev]:
            continue  # arriver is not contributional
        for s in range(t):
            j = game.order[s]
            if vals[mask & ~(1 << j)] < vals[mask] and not rows[t][j] > rows[s][j]:
                return Witness("S-STAY", game, j, rows[s][j], rows[t][j], "<", step=t + 1, ref_step=s + 1)
    return None


def _part_witness(game: Game, traj: Trajectory) -> Witness | None:
    vals = game.valuation.values
    masks = _prefix_masks(game.order)
    for t, mask in enumerate(masks):
        prev = masks[t - 1] if t else 0
        i = game.order[t]
        if vals[mask] > vals[prev] and not traj.rows[t][i] > 0:
            return Witness("PART", game, i, traj.rows[t][i], ZERO, ">", step=t + 1)
    return None


def _od_witness(game: Game, traj: Trajectory) -> Witness | None:
    v = game.valuation
    for t, mask in enumerate(_prefix_masks(game.order)):
        dummies = dummy_mask(v, mask)
        row = traj.rows[t]
        for j in game.order[: t + 1]:
            if dummies >> j & 1 and row[j] != 0:
                return Witness("OD", game, j, row[j], ZERO, "==", step=t + 1)
    return None


def _ir_witness(game: Game, traj: Trajectory) -> Witness | None:
    v = game.valuation
    final = traj.final
    for i in game.order:
        if final[i] < v[1 << i]:
            return Witness("IR", game, i, final[i], v[1 << i], ">=", step=len(game.order))
    return None


_TRAJECTORY_FINDERS = {
    "EFF": _eff_witness,
    "STAY": _stay_witness,
    "S-STAY": _s_stay_witness,
    "PART": _part_witness,
    "OD": _od_witness,
    "IR": _ir_witness,
}


def check_efficiency(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    rule = _as_rule(rule)
    return _verdict("EFF", rule, _eff_witness(game, _trajectory(rule, game, traj)))


def check_stay(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    rule = _as_rule(rule)
    return _verdict("STAY", rule, _stay_witness(game, _trajectory(rule, game, traj)))


def check_s_stay(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    """STAY, plus: when a contributional player arrives at step i, every earlier
    j without whom the prefix loses value must hold strictly more at row i
    than at her own arrival row.  Checked for all such j."""
    rule = _as_rule(rule)
    return _verdict("S-STAY", rule, _s_stay_witness(game, _trajectory(rule, game, traj)))


def check_part(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    rule = _as_rule(rule)
    return _verdict("PART", rule, _part_witness(game, _trajectory(rule, game, traj)))


def check_od(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    rule = _as_rule(rule)
    return _verdict("OD", rule, _od_witness(game, _trajectory(rule, game, traj)))


def check_ir(rule, game: Game, traj: Trajectory | None = None) -> AxiomVerdict:
    rule = _as_rule(rule)
    return _verdict("IR", rule, _ir_witness(game, _trajectory(rule, game, traj)))


# ---------------------------------------------------------------------------
# order-quantified checks


def _require_enumerable(n: int) -> None:
    cap = enumeration_cap()
    if n > cap:
        raise ScopeTooLarge(f"n = {n} exceeds the enumeration cap of {cap} (set COOPSHARE_NMAX to raise it)")


def delays(order: Sequence[int], player: int) -> Iterator[tuple[int, ...]]:
    """Every order that keeps the others' relative order and moves ``player`` strictly later."""
    order = tuple(order)
    pos = order.index(player)
    others = order[:pos] + order[pos + 1 :]
    for q in range(pos + 1, len(order)):
        yield others[:q] + (player,) + others[q:]


def _ea_witness(runner: Runner, bases: Iterable[tuple]) -> Witness | None:
    for base in bases:
        final, scale = runner.scaled_final(base)
        for i in base:
            for dev in delays(base, i):
                later, dev_scale = runner.scaled_final(dev)
                # cross-multiplied so equal scales compare plain integers
                if final[i] * dev_scale < later[i] * scale:
                    return Witness(
                        "EA", Game(runner.v, base), i, runner.final(base)[i], runner.final(dev)[i], ">=", deviation=dev
                    )
    return None


def check_ea(rule, v: ValuationTable, scope="all", runner: Runner | None = None) -> AxiomVerdict:
    """Delaying one's arrival never raises one's final payoff.

    ``scope`` is ``"all"`` (every base order) or one base order.
    """
    _require_enumerable(v.n)
    runner = runner or Runner(rule, v)
    if isinstance(scope, str):
        if scope != "all":
            raise ValueError(f"scope must be 'all' or an order, got {scope!r}")
        bases = itertools.permutations(range(v.n))
    else:
        bases = [tuple(scope)]
    return _verdict("EA", runner.rule, _ea_witness(runner, bases))


def average_payoff(runner: Runner) -> tuple[Fraction, ...]:
    """Exact mean of the final payoffs over all n! orders."""
    n = runner.v.n
    by_scale: dict[int, list] = {}
    count = 0
    for order in itertools.permutations(range(n)):
        nums, scale = runner.scaled_final(order)
        acc = by_scale.setdefault(scale, [0] * n)
        for p, x in enumerate(nums):
            acc[p] += x
        count += 1
    total = [Fraction(0)] * n
    for scale, acc in by_scale.items():
        total = [t + Fraction(a) / scale for t, a in zip(total, acc)]
    return tuple(t / count for t in total)


def _sf_witness(runner: Runner) -> Witness | None:
    v = runner.v
    avg = average_payoff(runner)
    sv = shapley_value(v)
    for i in range(v.n):
        if avg[i] != sv[i]:
            return Witness("SF", Game(v, tuple(range(v.n))), i, avg[i], sv[i], "==")
    return None


def check_sf(rule, v: ValuationTable, runner: Runner | None = None) -> AxiomVerdict:
    """The average final payoff over all n! orders equals the Shapley value."""
    _require_enumerable(v.n)
    runner = runner or Runner(rule, v)
    return _verdict("SF", runner.rule, _sf_witness(runner))


def check_axiom(axiom: str, rule, game: Game, scope="all") -> AxiomVerdict:
    """Dispatch by name; EA uses ``scope``, SF ignores the game's order."""
    axiom = normalize_axiom(axiom)
    if axiom == "EA":
        return check_ea(rule, game.valuation, scope)
    if axiom == "SF":
        return check_sf(rule, game.valuation)
    rule = _as_rule(rule)
    return _verdict(axiom, rule, _TRAJECTORY_FINDERS[axiom](game, rule(game)))


# ---------------------------------------------------------------------------
# replay


def _is_delay(base: tuple, dev: tuple, player: int) -> bool:
    return dev in set(delays(base, player))


def _recompute(rule: Rule, w: Witness) -> tuple[Fraction, Fraction] | None:
    """Re-derive both sides of the witness; None if its side conditions do not hold."""
    game = w.game
    v = game.valuation
    if w.axiom == "EA":
        if w.deviation is None or not _is_delay(game.order, w.deviation, w.player):
            return None
        return rule(game).final[w.player], rule(Game(v, w.deviation)).final[w.player]
    if w.axiom == "SF":
        return average_payoff(Runner(rule, v))[w.player], shapley_value(v)[w.player]
    traj = rule(game)
    masks = _prefix_masks(game.order)
    if w.axiom == "EFF":
        return sum(traj.rows[w.step - 1], ZERO), v[masks[w.step - 1]]
    if w.axiom == "IR":
        return traj.final[w.player], v[1 << w.player]
    t = w.step - 1
    prev = masks[t - 1] if t else 0
    if w.axiom == "PART":
        if game.order[t] != w.player or not v[masks[t]] > v[prev]:
            return None
        return traj.rows[t][w.player], ZERO
    if w.axiom == "OD":
        if not dummy_mask(v, masks[t]) >> w.player & 1:
            return None
        return traj.rows[t][w.player], ZERO
    s = w.ref_step - 1
    if w.relation == "<=":  # the STAY part
        if s != t - 1 or w.player not in game.order[:s + 1]:
            return None
    elif w.axiom == "S-STAY":
        if game.order[s] != w.player or s >= t:
            return None
        if not v[masks[t]] > v[prev] or not v[masks[t] & ~(1 << w.player)] < v[masks[t]]:
            return None
    return traj.rows[s][w.player], traj.rows[t][w.player]


def replay_witness(rule, witness: Witness) -> bool:
    """True iff rerunning the rule reproduces both sides exactly and they violate the relation."""
    got = _recompute(_as_rule(rule), witness)
    if got is None:
        return False
    lhs, rhs = got
    return lhs == witness.lhs and rhs == witness.rhs and not _RELATIONS[witness.relation](lhs, rhs)


# ---------------------------------------------------------------------------
# pools, search and the satisfaction matrix


@dataclass(frozen=True)
class PoolItem:
    v: ValuationTable
    orders: tuple  # base orders to check
    all_orders: bool  # whether ``orders`` is every permutation
    label: str
    superadditive: bool
    surplus: bool  # strict gain whenever two positive-valued groups merge


def _item(v: ValuationTable, label: str, base=None) -> PoolItem:
    sup, surplus = classify_valuation(v)["superadditive"], has_strict_surplus(v)
    if base is None:
        return PoolItem(v, tuple(itertools.permutations(range(v.n))), True, label, sup, surplus)
    return PoolItem(v, (tuple(base),), False, label, sup, surplus)


def _base_order(cls: str, n: int, index: int) -> tuple:
    order = list(range(n))
    random.Random(pool_seed(f"order:{cls}", n, index)).shuffle(order)
    return tuple(order)


def _winning_count(v: ValuationTable) -> int:
    return sum(1 for x in v.values if x)


def pool_items(cls: str, n: int, count: int, all_orders_max: int = 4, start: int = 0) -> Iterator[PoolItem]:
    """Games of one class at one size, smallest-first for simple games.

    Simple games with n <= 4 are enumerated exhaustively (fewest winning
    coalitions first, capped at ``count``).  Up to ``all_orders_max``
    players every arrival order is a base order; beyond that each game gets
    one seeded base order.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    if cls == "simple" and n <= 4:
        games = sorted(all_socgs(n), key=lambda v: (_winning_count(v), v.values))[start : start + count]
        for k, v in enumerate(games, start=start):
            yield _item(v, f"simple/n={n}/#{k}", None if n <= all_orders_max else _base_order(cls, n, k))
        return
    for k in range(start, start + count):
        v = generate(GenSpec(n, cls, pool_seed(cls, n, k)))
        yield _item(v, f"{cls}/n={n}/#{k}", None if n <= all_orders_max else _base_order(cls, n, k))


def fixture_items() -> list[PoolItem]:
    from .fixtures import all_fixtures

    out = []
    for name, game in all_fixtures().items():
        v = game.valuation
        # the fixture's own order first, then every other order
        rest = tuple(o for o in itertools.permutations(range(v.n)) if o != game.order)
        sup, surplus = classify_valuation(v)["superadditive"], has_strict_surplus(v)
        out.append(PoolItem(v, (game.order,) + rest, True, f"fixture/{name}", sup, surplus))
    return out


def _applies(rule: Rule, axiom: str, item: PoolItem) -> bool:
    if rule.domain == "superadditive" and axiom == "S-STAY":
        # IR and S-STAY clash when an arrival's marginal is exactly her singleton value
        return item.surplus
    if rule.domain == "superadditive" or axiom == "IR":
        return item.superadditive
    return rule.applicable(item.v)


def _witness_on_item(rule: Rule, axiom: str, item: PoolItem, runner: Runner) -> Witness | None:
    if axiom == "SF":
        return _sf_witness(runner)
    if axiom == "EA":
        return _ea_witness(runner, item.orders)
    find = _TRAJECTORY_FINDERS[axiom]
    for order in item.orders:
        got = find(Game(item.v, order), runner.trajectory(order))
        if got is not None:
            return got
    return None


def search(rule, axiom: str, cls: str, n: int, seeds: int, start: int = 0) -> AxiomVerdict:
    """First witness over a pool of ``seeds`` games, or no-counterexample-found."""
    rule = _as_rule(rule)
    axiom = normalize_axiom(axiom)
    if axiom in ("EA", "SF"):
        _require_enumerable(n)
    checked = 0
    for item in pool_items(cls, n, seeds, start=start):
        if not _applies(rule, axiom, item):
            continue
        checked += 1
        got = _witness_on_item(rule, axiom, item, Runner(rule, item.v))
        if got is not None:
            return AxiomVerdict(axiom, rule.name, False, got, checked)
    return AxiomVerdict(axiom, rule.name, True, None, checked)


@dataclass
class Cell:
    rule: str
    axiom: str
    expected: bool | None  # None when the table makes no claim
    verdict: AxiomVerdict | None = None

    @property
    def matches(self) -> bool:
        return self.expected is None or self.verdict.ok == self.expected

    def document(self) -> dict:
        doc = self.verdict.document()
        doc["expected"] = None if self.expected is None else ("no-counterexample-found" if self.expected else "fail")
        doc["matches"] = self.matches
        return doc


@dataclass(frozen=True)
class Budget:
    n_max: int = 4  # every order of every game up to this size
    small_count: int = 100  # seeded games per class and size below n_seeded
    n_seeded: int = 5  # one extra size with one base order per game
    seeded_count: int = 1000
    fixtures: bool = True

    def items(self) -> Iterator[PoolItem]:
        if self.fixtures:
            yield from fixture_items()
        for n in range(1, self.n_max + 1):
            for cls in CLASSES:
                yield from pool_items(cls, n, self.small_count, all_orders_max=self.n_max)
        if self.n_seeded > self.n_max:
            for cls in CLASSES:
                yield from pool_items(cls, self.n_seeded, self.seeded_count, all_orders_max=self.n_max)


@functools.lru_cache(maxsize=2)
def _pool(budget: Budget) -> tuple[PoolItem, ...]:
    # shared by every row in one process, so per-table caches are reused too
    return tuple(budget.items())


def _rule_row(args) -> list[Cell]:
    rule_name, axioms, budget = args
    rule = get_rule(rule_name)
    claims = PUBLISHED_TABLE.get(rule.name, {})
    open_cells = {a: 0 for a in axioms}  # axiom -> games checked so far
    found: dict[str, tuple[Witness, int]] = {}
    for item in _pool(budget):
        if not open_cells:
            break
        runner = Runner(rule, item.v)
        for axiom in list(open_cells):
            if not _applies(rule, axiom, item):
                continue
            open_cells[axiom] += 1
            got = _witness_on_item(rule, axiom, item, runner)
            if got is not None:
                checked = open_cells.pop(axiom)
                found[axiom] = (got, checked)
    cells = []
    for axiom in axioms:
        if axiom in found:
            w, checked = found[axiom]
            verdict = AxiomVerdict(axiom, rule.name, False, w, checked)
        else:
            verdict = AxiomVerdict(axiom, rule.name, True, None, open_cells[axiom])
        cells.append(Cell(rule.name, axiom, claims.get(axiom), verdict))
    return cells


def satisfaction_matrix(
    rules: Sequence[str] = TABLE_RULES,
    axioms: Sequence[str] = TABLE_AXIOMS,
    budget: Budget = Budget(),
    jobs: int = 1,
) -> list[Cell]:
    """One cell per (rule, axiom); the first witness in pool order settles a cell as failed.

    Rows are computed independently (in parallel with ``jobs > 1``) and
    returned in the requested order, so the result does not depend on
    scheduling.
    """
    axioms = [normalize_axiom(a) for a in axioms]
    tasks = [(get_rule(r).name, axioms, budget) for r in rules]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_rule_row, tasks))
    else:
        rows = [_rule_row(t) for t in tasks]
    return [cell for row in rows for cell in row]
