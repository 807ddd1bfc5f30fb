"""The named games used throughout tests, the matrix and the CLI examples.

Coalitions are written with 1-indexed players, unlisted coalitions are 0.
"""

from __future__ import annotations

from fractions import Fraction

from .model import Game, ValuationTable

_EX1 = {
    (1, 3): 1, (2, 3): 1, (3, 4): 3,
    (1, 2, 3): 2, (1, 3, 4): 3, (2, 3, 4): 3, (1, 2, 3, 4): 3,
}


def _game(n, mapping, order):
    return Game.new(ValuationTable.from_coalitions(n, mapping), [p - 1 for p in order])


def g_ex1() -> Game:
    return _game(4, _EX1, (1, 2, 3, 4))


def g_ex1_prime() -> Game:
    return _game(4, _EX1, (1, 2, 4, 3))


def g_2p() -> Game:
    return _game(2, {(1, 2): 1}, (1, 2))


def g_3p() -> Game:
    return _game(3, {(1, 2, 3): 1}, (1, 2, 3))


def g_app() -> Game:
    return _game(2, {(1,): 1, (2,): 2, (1, 2): 5}, (1, 2))


def g_irimp() -> Game:
    return _game(2, {(1,): 2, (2,): 3, (1, 2): 4}, (1, 2))


def g_intro() -> Game:
    return _game(3, {(1,): 1, (2,): 1, (3,): 1, (1, 2): 3, (1, 3): 3, (2, 3): 3, (1, 2, 3): 5}, (1, 2, 3))


def g_eax(x=1, y=2, v13=0, v23=Fraction(1, 2)) -> Game:
    """The early-arrival counterexample family: needs 0 <= v13 <= v23 < x < y."""
    x, y, v13, v23 = map(Fraction, (x, y, v13, v23))
    if not 0 <= v13 <= v23 < x < y:
        raise ValueError("need 0 <= v({1,3}) <= v({2,3}) < x < y")
    mapping = {
        (1, 3): v13, (2, 3): v23, (1, 2, 3): x,
        (3, 4): y, (1, 3, 4): y, (2, 3, 4): y, (1, 2, 3, 4): y,
    }
    return _game(4, mapping, (1, 2, 3, 4))


FIXTURES = {
    "g_ex1": g_ex1,
    "g_ex1_prime": g_ex1_prime,
    "g_2p": g_2p,
    "g_3p": g_3p,
    "g_app": g_app,
    "g_irimp": g_irimp,
    "g_intro": g_intro,
    "g_eax": g_eax,
}


def all_fixtures() -> dict[str, Game]:
    return {name: build() for name, build in FIXTURES.items()}
