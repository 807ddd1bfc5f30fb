"""Core data model: coalitions as bitmasks, valuation tables, games, trajectories.

Players are 0-indexed everywhere inside the library.  Every document that
leaves or enters the library (JSON, CLI) uses 1-indexed players.

All numbers are :class:`fractions.Fraction`; nothing in here ever rounds.
"""

from __future__ import annotations

import functools
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    BadPermutation,
    GameFormatError,
    MissingCoalition,
    NegativeValue,
    NotMonotone,
    NotNormalized,
    NotSimpleGame,
    PlayerInCoalition,
    PlayerNotInGround,
    StepOutOfRange,
)

ZERO = Fraction(0)
ONE = Fraction(1)

TABLE_NMAX = 16
DEFAULT_ENUM_NMAX = 6


def enumeration_cap() -> int:
    """Largest n for which n!-enumerating checkers are allowed to run."""
    raw = os.environ.get("COOPSHARE_NMAX")
    if raw is None:
        return DEFAULT_ENUM_NMAX
    try:
        return int(raw)
    except ValueError as exc:
        raise GameFormatError(f"COOPSHARE_NMAX must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# coalitions


def bit(player: int) -> int:
    return 1 << player


def mask_of(players: Iterable[int]) -> int:
    mask = 0
    for p in players:
        mask |= 1 << p
    return mask


def members(mask: int) -> list[int]:
    out = []
    p = 0
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself (descending)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def coalition_key(mask: int) -> str:
    """Document key for a coalition: comma-joined sorted 1-indexed members."""
    return ",".join(str(p + 1) for p in members(mask))


def parse_coalition_key(key: str, n: int) -> int:
    if key == "":
        return 0
    parts = key.split(",")
    players = []
    for part in parts:
        if not part.isdigit() or part != str(int(part)):
            raise GameFormatError(f"malformed coalition key {key!r}")
        players.append(int(part))
    if len(set(players)) != len(players):
        raise GameFormatError(f"duplicate members in coalition key {key!r}")
    if players != sorted(players):
        raise GameFormatError(f"coalition key {key!r} is not in canonical (ascending) order")
    for p in players:
        if not 1 <= p <= n:
            raise GameFormatError(f"player {p} in key {key!r} outside 1..{n}")
    return mask_of(p - 1 for p in players)


def format_rational(x: Fraction) -> str:
    return str(x)


def parse_rational(raw: object) -> Fraction:
    if isinstance(raw, bool):
        raise GameFormatError(f"not a rational: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise GameFormatError(f"rationals must be strings like '7/6' or integers, got {raw!r}")
    text = raw.strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            if not den.strip().lstrip("+").isdigit():
                raise ValueError
            if int(den) == 0:
                raise GameFormatError(f"zero denominator in {raw!r}")
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except ValueError as exc:
        raise GameFormatError(f"not a rational: {raw!r}") from exc


# ---------------------------------------------------------------------------
# valuation tables


class ValuationTable:
    """Total map from every coalition of ``n`` players to a non-negative rational.

    Immutable.  Expensive derived quantities (Shapley vectors, dummy sets,
    class flags, decompositions) are memoised per instance.
    """

    __slots__ = ("n", "values", "_cache", "_hash")

    def __init__(self, n: int, values: Sequence, *, validate: bool = True):
        if not 0 <= n <= TABLE_NMAX:
            raise GameFormatError(f"player count {n} outside 0..{TABLE_NMAX}")
        vals = tuple(v if type(v) is Fraction else Fraction(v) for v in values)
        if len(vals) != 1 << n:
            raise MissingCoalition(f"expected {1 << n} coalition values, got {len(vals)}")
        self.n = n
        self.values = vals
        self._cache: dict = {}
        self._hash = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        vals = self.values
        if vals[0] != 0:
            raise NotNormalized(f"v(empty set) must be 0, got {vals[0]}")
        for mask, x in enumerate(vals):
            if x < 0:
                raise NegativeValue(f"v({{{coalition_key(mask)}}}) = {x} is negative")
        for mask in range(len(vals)):
            x = vals[mask]
            for p in range(self.n):
                b = 1 << p
                if not mask & b and vals[mask | b] < x:
                    raise NotMonotone(
                        f"v({{{coalition_key(mask)}}}) = {x} > "
                        f"v({{{coalition_key(mask | b)}}}) = {vals[mask | b]}",
                        subset=mask,
                        superset=mask | b,
                    )

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], object], **kw) -> "ValuationTable":
        return cls(n, [fn(mask) for mask in range(1 << n)], **kw)

    @classmethod
    def from_coalitions(cls, n: int, mapping: Mapping[Iterable[int], object], **kw) -> "ValuationTable":
        """Build from ``{players: value}`` with 1-indexed players; absent coalitions are 0."""
        vals = [ZERO] * (1 << n)
        for players, value in mapping.items():
            vals[mask_of(p - 1 for p in players)] = Fraction(value)
        return cls(n, vals, **kw)

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    def __getitem__(self, mask: int) -> Fraction:
        return self.values[mask]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValuationTable):
            return NotImplemented
        return self.n == other.n and self.values == other.values

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.values))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{{{coalition_key(m)}}}: {v}" for m, v in enumerate(self.values) if m)
        return f"ValuationTable(n={self.n}, {body})"

    def restrict(self, ground: int) -> "ValuationTable":
        """Table with players outside ``ground`` made dummies: w(T) = v(T & ground)."""
        if ground == self.grand:
            return self
        vals = self.values
        return ValuationTable(self.n, [vals[m & ground] for m in range(1 << self.n)], validate=False)

    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer numerators over a common denominator ``D``: v(S) = ints[S] / D."""
        got = self._cache.get("scaled")
        if got is None:
            den = 1
            for x in self.values:
                d = x.denominator
                if den % d:
                    den = den * d // math.gcd(den, d)
            ints = tuple(x.numerator * (den // x.denominator) for x in self.values)
            got = (ints, den)
            self._cache["scaled"] = got
        return got

    def singletons(self) -> tuple[Fraction, ...]:
        return tuple(self.values[1 << p] for p in range(self.n))


# ---------------------------------------------------------------------------
# games and trajectories


@dataclass(frozen=True)
class Game:
    """The triple (N, v, pi).

    ``order`` lists the arrivers; for a full game it is a permutation of all
    ``n`` players, for a prefix sub-game it covers only the first arrivers
    and the valuation has already been restricted to them.
    """

    valuation: ValuationTable
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        n = self.valuation.n
        if len(set(order)) != len(order) or any(not 0 <= p < n for p in order):
            raise BadPermutation(f"order {[p + 1 for p in order]} is not a sequence of distinct players in 1..{n}")

    @classmethod
    def new(cls, valuation: ValuationTable, order: Sequence[int] | None = None) -> "Game":
        if order is None:
            order = range(valuation.n)
        order = tuple(order)
        if len(order) != valuation.n:
            raise BadPermutation(f"order has {len(order)} players, game has {valuation.n}")
        return cls(valuation, order)

    @property
    def n(self) -> int:
        return self.valuation.n

    @property
    def ground(self) -> int:
        return mask_of(self.order)

    def with_order(self, order: Sequence[int]) -> "Game":
        return Game.new(self.valuation, order)

    def prefix_masks(self) -> list[int]:
        out = []
        mask = 0
        for p in self.order:
            mask |= 1 << p
            out.append(mask)
        return out


class Trajectory:
    """Row t (0-based here) is the cumulative allocation after the (t+1)-th arrival.

    Rules produce trajectories as integer numerators over one common
    scale; Fraction rows are only built when someone asks for them.
    """

    __slots__ = ("_rows", "_ints", "_scale")

    def __init__(self, rows: Iterable[Sequence[Fraction]]):
        self._rows = tuple(tuple(x if type(x) is Fraction else Fraction(x) for x in row) for row in rows)
        self._ints = None
        self._scale = 1

    @classmethod
    def from_scaled(cls, ints: Sequence[Sequence[int]], scale: int) -> "Trajectory":
        traj = cls.__new__(cls)
        traj._rows = None
        traj._ints = tuple(tuple(row) for row in ints)
        traj._scale = scale
        return traj

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        if self._rows is None:
            scale = self._scale
            self._rows = tuple(tuple(Fraction(x, scale) for x in row) for row in self._ints)
        return self._rows

    @property
    def final(self) -> tuple[Fraction, ...]:
        if self._rows is None:
            if not self._ints:
                return ()
            return tuple(Fraction(x, self._scale) for x in self._ints[-1])
        return self._rows[-1] if self._rows else ()

    def scaled_final(self) -> tuple[tuple, int]:
        """Final row as ``(numerators, scale)``; Fraction entries with scale 1 when unscaled."""
        if self._ints is not None:
            return (self._ints[-1] if self._ints else ()), self._scale
        return self.final, 1

    def __len__(self) -> int:
        return len(self._ints if self._ints is not None else self._rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in row) for row in self.rows)
        return f"Trajectory({body})"

    def prefix(self, t: int) -> "Trajectory":
        return Trajectory(self.rows[:t])


@functools.lru_cache(maxsize=None)
def split_scale(n: int) -> int:
    """lcm(1..n): every equal split of an integer among at most n players is exact at this scale."""
    out = 1
    for k in range(2, n + 1):
        out = out * k // math.gcd(out, k)
    return out


def trajectory_from_increments(
    n: int, steps: int, increments: Iterable[tuple[int, int, int]], scale: int = 1
) -> Trajectory:
    """Accumulate ``(step, player, amount)`` credits into cumulative rows.

    Amounts are integers meaning ``amount / scale`` (pass Fractions with
    the default scale of 1 for unscaled input).
    """
    per_step = [[0] * n for _ in range(steps)]
    for t, j, amount in increments:
        per_step[t][j] += amount
    rows = []
    acc = [0] * n
    for delta in per_step:
        acc = [a + d for a, d in zip(acc, delta)]
        rows.append(acc)
    if scale == 1 and any(type(x) is not int for row in rows for x in row):
        return Trajectory(rows)
    return Trajectory.from_scaled(rows, scale)


# ---------------------------------------------------------------------------
# documents


_GAME_KEYS = {"n", "order", "valuation"}


def game_from_document(doc: Mapping) -> Game:
    if not isinstance(doc, Mapping):
        raise GameFormatError("game document must be a JSON object")
    unknown = set(doc) - _GAME_KEYS
    if unknown:
        raise GameFormatError(f"unknown keys in game document: {sorted(unknown)}")
    missing = _GAME_KEYS - set(doc)
    if missing:
        raise GameFormatError(f"game document lacks keys: {sorted(missing)}")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= TABLE_NMAX:
        raise GameFormatError(f"n must be an integer in 1..{TABLE_NMAX}, got {n!r}")
    raw_vals = doc["valuation"]
    if not isinstance(raw_vals, Mapping):
        raise GameFormatError("valuation must be an object keyed by coalition")
    vals: list[Fraction | None] = [None] * (1 << n)
    for key, raw in raw_vals.items():
        mask = parse_coalition_key(key, n)
        vals[mask] = parse_rational(raw)
    absent = [m for m, x in enumerate(vals) if x is None]
    if absent:
        shown = ", ".join("{" + coalition_key(m) + "}" for m in absent[:5])
        raise MissingCoalition(f"{len(absent)} coalition(s) missing, e.g. {shown}")
    table = ValuationTable(n, vals)
    order = parse_order(doc["order"], n)
    return Game.new(table, order)


def parse_order(raw: object, n: int) -> tuple[int, ...]:
    if isinstance(raw, str):
        try:
            raw = [int(x) for x in raw.replace(" ", "").split(",") if x]
        except ValueError as exc:
            raise BadPermutation(f"order {raw!r} is not a comma list of players") from exc
    if not isinstance(raw, (list, tuple)) or any(isinstance(p, bool) or not isinstance(p, int) for p in raw):
        raise BadPermutation(f"order must be a list of 1-indexed players, got {raw!r}")
    if sorted(raw) != list(range(1, n + 1)):
        raise BadPermutation(f"order {list(raw)} is not a permutation of 1..{n}")
    return tuple(p - 1 for p in raw)


def load_game(data: bytes | str) -> Game:
    """Parse and validate a serialized game document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"invalid JSON: {exc}") from exc
    return game_from_document(doc)


def _no_duplicate_keys(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise GameFormatError(f"duplicate key {k!r}")
        out[k] = v
    return out


def table_document(v: ValuationTable) -> dict:
    return {coalition_key(m): format_rational(x) for m, x in enumerate(v.values)}


def game_document(game: Game) -> dict:
    return {
        "n": game.n,
        "order": [p + 1 for p in game.order],
        "valuation": table_document(game.valuation),
    }


def dump_game(game: Game) -> str:
    return json.dumps(game_document(game), indent=2) + "\n"


def vector_document(vec: Sequence[Fraction]) -> list[str]:
    return [format_rational(x) for x in vec]


def trajectory_document(traj: Trajectory, rule: str) -> dict:
    return {
        "rule": rule,
        "rows": [vector_document(r) for r in traj.rows],
        "final": vector_document(traj.final),
    }


# ---------------------------------------------------------------------------
# elementary operations


def marginal_contribution(v: ValuationTable, coalition: int, player: int) -> Fraction:
    b = 1 << player
    if coalition & b:
        raise PlayerInCoalition(f"player {player + 1} already in {{{coalition_key(coalition)}}}")
    return v[coalition | b] - v[coalition]


def prefix_subgame(game: Game, t: int) -> Game:
    """G^S for the first ``t`` arrivers (1-based ``t``)."""
    if not 1 <= t <= len(game.order):
        raise StepOutOfRange(f"step {t} outside 1..{len(game.order)}")
    order = game.order[:t]
    return Game(game.valuation.restrict(mask_of(order)), order)


def is_contributional(game: Game, t: int) -> bool:
    if not 1 <= t <= len(game.order):
        raise StepOutOfRange(f"step {t} outside 1..{len(game.order)}")
    v = game.valuation
    before = mask_of(game.order[: t - 1])
    return v[before | 1 << game.order[t - 1]] > v[before]


def is_dummy(v: ValuationTable, ground: int, j: int) -> bool:
    b = 1 << j
    if not ground & b:
        raise PlayerNotInGround(f"player {j + 1} not in {{{coalition_key(ground)}}}")
    return bool(dummy_mask(v, ground) & b)


def dummy_mask(v: ValuationTable, ground: int) -> int:
    """Bitmask of the dummy players of the sub-game on ``ground`` (exhaustive check)."""
    key = ("dummies", ground)
    cache = v._cache
    got = cache.get(key)
    if got is not None:
        return got
    vals = v.values
    out = 0
    for j in members(ground):
        b = 1 << j
        rest = ground & ~b
        for s in submasks(rest):
            if vals[s | b] != vals[s]:
                break
        else:
            out |= b
    cache[key] = out
    return out


def is_dummy_subadditive(v: ValuationTable, j: int) -> bool:
    """Dummy test valid only for subadditive tables: v({j}) == 0."""
    return v[1 << j] == 0


def pivotal_player(game: Game) -> int | None:
    v = game.valuation
    if not classify_valuation(v)["simple"]:
        raise NotSimpleGame("pivotal player is only defined for simple (0-1, v(N)=1) games")
    mask = 0
    for p in game.order:
        prev = mask
        mask |= 1 << p
        if v[mask] == 1 and v[prev] == 0:
            return p
    return None


def classify_valuation(v: ValuationTable) -> dict[str, bool]:
    """Exhaustive class flags: submodular, subadditive, superadditive, simple."""
    got = v._cache.get("classes")
    if got is None:
        got = {
            "submodular": submodularity_violation(v) is None,
            "subadditive": subadditivity_violation(v) is None,
            "superadditive": superadditivity_violation(v) is None,
            "simple": all(x == 0 or x == 1 for x in v.values) and v[v.grand] == 1,
        }
        v._cache["classes"] = got
    return dict(got)


def submodularity_violation(v: ValuationTable) -> tuple[int, int] | None:
    """First pair (S+i, S+j) breaking v(S+i)+v(S+j) >= v(S+i+j)+v(S), else None.

    The local form is equivalent to the all-pairs lattice inequality.
    """
    vals = v.values
    n = v.n
    for s in range(1 << n):
        for i in range(n):
            bi = 1 << i
            if s & bi:
                continue
            for j in range(i + 1, n):
                bj = 1 << j
                if s & bj:
                    continue
                if vals[s | bi] + vals[s | bj] < vals[s | bi | bj] + vals[s]:
                    return (s | bi, s | bj)
    return None


def _disjoint_pairs(grand: int) -> Iterator[tuple[int, int]]:
    for union in range(grand + 1):
        for s in submasks(union):
            t = union ^ s
            if s and t and s < t:
                yield s, t


def subadditivity_violation(v: ValuationTable) -> tuple[int, int] | None:
    # disjoint pairs suffice for monotone tables
    vals = v.values
    for s, t in _disjoint_pairs(v.grand):
        if vals[s] + vals[t] < vals[s | t]:
            return (s, t)
    return None


def superadditivity_violation(v: ValuationTable) -> tuple[int, int] | None:
    vals = v.values
    for s, t in _disjoint_pairs(v.grand):
        if vals[s] + vals[t] > vals[s | t]:
            return (s, t)
    return None


def strict_surplus_violation(v: ValuationTable) -> tuple[int, int] | None:
    """First disjoint pair of positive-valued coalitions whose union adds nothing on top.

    Tables without such a pair are superadditive with a strict gain whenever
    two productive groups merge; that rules out an arrival whose whole
    marginal equals her own singleton value while earlier players matter.
    """
    vals = v.values
    for s, t in _disjoint_pairs(v.grand):
        if vals[s] > 0 and vals[t] > 0 and vals[s] + vals[t] >= vals[s | t]:
            return (s, t)
    return None


def has_strict_surplus(v: ValuationTable) -> bool:
    got = v._cache.get("surplus")
    if got is None:
        got = classify_valuation(v)["superadditive"] and strict_surplus_violation(v) is None
        v._cache["surplus"] = got
    return got


def shapley_scaled(v: ValuationTable, ground: int | None = None) -> tuple[tuple[int, ...], int]:
    """Shapley vector of the sub-game on ``ground`` as integer numerators over ``n! * D``.

    ``D`` is the table's common denominator.  Uses the subset-sum formula
    with integer accumulation per coalition size; players outside
    ``ground`` get 0.  The scale depends only on the table, so rows for
    different prefixes share it.
    """
    if ground is None:
        ground = v.grand
    key = ("shapley", ground)
    got = v._cache.get(key)
    if got is not None:
        return got
    ints, den = v.scaled()
    players = members(ground)
    m = len(players)
    # acc[p][s] = sum over |S|=s of MC(S, p)
    acc = {p: [0] * max(m, 1) for p in players}
    for s in submasks(ground):
        size = popcount(s)
        base = ints[s]
        for p in players:
            b = 1 << p
            if not s & b:
                acc[p][size] += ints[s | b] - base
    out = [0] * v.n
    if m:
        lift = math.factorial(v.n) // math.factorial(m)
        weights = [math.factorial(s) * math.factorial(m - s - 1) * lift for s in range(m)]
        for p in players:
            out[p] = sum(w * a for w, a in zip(weights, acc[p]))
    got = (tuple(out), math.factorial(v.n) * den)
    v._cache[key] = got
    return got


def shapley_value(v: ValuationTable, ground: int | None = None) -> tuple[Fraction, ...]:
    """Exact Shapley vector of the sub-game on ``ground`` (default: all players)."""
    nums, scale = shapley_scaled(v, ground)
    return tuple(Fraction(x, scale) for x in nums)
