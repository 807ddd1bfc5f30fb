import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import games, monotone_tables
from coopshare.errors import NotSimpleGame, NotSuperadditive, StepOutOfRange
from coopshare.fixtures import g_2p, g_3p, g_app, g_eax, g_ex1, g_ex1_prime, g_intro, g_irimp
from coopshare.gen import GenSpec, gen_socg, gen_superadditive, seeded_pool
from coopshare.model import (
    Game,
    ValuationTable,
    classify_valuation,
    dummy_mask,
    pivotal_player,
    prefix_subgame,
    shapley_value,
)
from coopshare.registry import RULES, get_rule
from coopshare.rules import ir_refine, run_dmc, run_mes, run_ndmes, run_rfc, run_sv, run_ulmes, ulmes_sharing_set

superadditive_tables = st.builds(
    lambda n, seed: gen_superadditive(GenSpec(n, "superadditive", seed)), st.integers(1, 4), st.integers(0, 2**32)
)
simple_tables = st.builds(lambda n, seed: gen_socg(GenSpec(n, "simple", seed)), st.integers(1, 4), st.integers(0, 2**32))


def final(traj):
    return tuple(traj.final)


class TestExamples:
    def test_dmc(self):
        assert final(run_dmc(g_3p())) == (0, 0, 1)
        assert final(run_dmc(g_intro())) == (1, 2, 2)
        one = Game.new(ValuationTable(1, [0, F(7, 2)]))
        assert final(run_dmc(one)) == (F(7, 2),)

    def test_sv(self):
        assert run_sv(g_app()).rows == ((1, 0), (2, 3))
        assert final(run_sv(g_3p())) == (F(1, 3),) * 3

    def test_rfc(self):
        assert final(run_rfc(g_2p())) == (1, 0)
        assert final(run_rfc(g_3p())) == (1, 0, 0)
        first_wins = ValuationTable.from_coalitions(3, {(1,): 1, (1, 2): 1, (1, 3): 1, (1, 2, 3): 1})
        assert final(run_rfc(Game.new(first_wins))) == (1, 0, 0)
        with pytest.raises(NotSimpleGame):
            run_rfc(g_app())

    def test_mes(self):
        assert final(run_mes(g_3p())) == (F(1, 3),) * 3
        assert final(run_mes(g_intro())) == (F(8, 3), F(5, 3), F(2, 3))
        assert final(run_mes(Game.new(ValuationTable(3, [0] * 8)))) == (0, 0, 0)

    def test_ndmes(self):
        assert final(run_ndmes(g_3p())) == (F(1, 3),) * 3
        # player 2 (0-based 1) is a dummy everywhere
        v = ValuationTable.from_coalitions(3, {(1,): 1, (1, 2): 1, (1, 3): 2, (1, 2, 3): 2, (3,): 1, (2, 3): 1})
        for order in itertools.permutations(range(3)):
            assert all(row[1] == 0 for row in run_ndmes(Game.new(v, order)).rows)

    def test_ulmes_tables(self):
        assert final(run_ulmes(g_ex1())) == (F(2, 3), F(2, 3), F(7, 6), F(1, 2))
        assert final(run_ulmes(g_ex1_prime())) == (0, 0, F(3, 2), F(3, 2))

    def test_ulmes_example_sets(self):
        # the newcomer is never dropped: player 4 stays in the last set
        assert ulmes_sharing_set(g_ex1(), 4).players() == [2, 3]
        assert ulmes_sharing_set(g_ex1(), 3).players() == [0, 1, 2]
        assert ulmes_sharing_set(g_ex1_prime(), 4).players() == [2, 3]
        with pytest.raises(StepOutOfRange):
            ulmes_sharing_set(g_ex1(), 5)

    @pytest.mark.parametrize(
        "x,y,v13,v23",
        [(1, 2, 0, F(1, 2)), (1, 2, 0, 0), (2, 5, F(1, 2), 1), (F(3, 2), 4, F(1, 3), F(1, 3))],
    )
    def test_ulmes_early_arrival_family(self, x, y, v13, v23):
        game = g_eax(x, y, v13, v23)
        x, y = F(x), F(y)
        assert run_ulmes(game).final[2] == x / 3 + (y - x) / 2
        assert run_ulmes(game.with_order((0, 1, 3, 2))).final[2] == y / 2

    def test_ulmes_eax_fixture(self):
        assert run_ulmes(g_eax()).final[2] == F(5, 6)
        assert run_ulmes(g_eax().with_order((0, 1, 3, 2))).final[2] == 1

    def test_ir_mes(self):
        assert final(ir_refine("MES", g_intro())) == (F(11, 6), F(11, 6), F(4, 3))
        additive = Game.new(ValuationTable.from_function(3, lambda s: 2 * bin(s).count("1")))
        assert final(ir_refine("MES", additive)) == (2, 2, 2)

    def test_ir_rejects_non_superadditive(self):
        with pytest.raises(NotSuperadditive) as info:
            ir_refine("MES", g_irimp())
        s, t = info.value.pair
        assert s & t == 0

    def test_ir_base_must_expose_a_set(self):
        with pytest.raises(ValueError):
            ir_refine("DMC", g_intro())

    def test_registry_lookup(self):
        assert get_rule("IR-eULMES").name == "ir-eulmes"
        assert get_rule("ir_mes").name == "ir-mes"
        with pytest.raises(KeyError):
            get_rule("nope")


class TestAgainstReference:
    @pytest.mark.parametrize("name", ["dmc", "mes", "ndmes", "ulmes", "sv", "erfc", "eulmes"])
    @given(game=games(max_n=4))
    def test_monotone(self, name, game):
        assert list(RULES[name](game).rows) == oracles.REFERENCE[name](game.valuation, game.order)

    @pytest.mark.parametrize("name", ["ir-mes", "ir-ndmes", "ir-ulmes", "ir-eulmes"])
    @given(game=games(tables=superadditive_tables))
    def test_superadditive(self, name, game):
        assert list(RULES[name](game).rows) == oracles.REFERENCE[name](game.valuation, game.order)

    @given(game=games(tables=simple_tables))
    def test_rfc(self, game):
        assert list(run_rfc(game).rows) == oracles.rfc(game.valuation, game.order)

    def test_fixtures(self):
        for game in (g_ex1(), g_ex1_prime(), g_app(), g_intro(), g_eax(), g_2p(), g_3p()):
            for name in ("dmc", "mes", "ndmes", "ulmes", "sv", "erfc", "eulmes"):
                assert list(RULES[name](game).rows) == oracles.REFERENCE[name](game.valuation, game.order)


def _applicable(game):
    for rule in RULES.values():
        if rule.applicable(game.valuation):
            yield rule


class TestInvariants:
    @given(games(max_n=4))
    def test_efficiency_and_sign(self, game):
        v = game.valuation
        for rule in _applicable(game):
            traj = rule(game)
            assert len(traj) == game.n
            for row, mask in zip(traj.rows, game.prefix_masks()):
                assert sum(row) == v[mask]
                assert all(x >= 0 for x in row)
                assert all(row[p] == 0 for p in range(game.n) if not mask >> p & 1)

    @given(games(max_n=4))
    def test_online_consistency(self, game):
        for rule in _applicable(game):
            traj = rule(game)
            for t in range(1, game.n + 1):
                sub = prefix_subgame(game, t)
                if rule.applicable(sub.valuation):
                    assert rule(sub).rows == traj.rows[:t]

    @given(games(max_n=4))
    def test_ulmes_set_keeps_prefix_value(self, game):
        v = game.valuation
        for t, mask in enumerate(game.prefix_masks(), start=1):
            s = ulmes_sharing_set(game, t)
            assert s.members & ~mask == 0
            assert v[s.members] == v[mask]
            assert s.members >> game.order[t - 1] & 1

    @given(games(tables=simple_tables))
    def test_rfc_pays_once_at_pivot(self, game):
        traj = run_rfc(game)
        pivot = pivotal_player(game)
        step = game.order.index(pivot)
        before = traj.rows[step - 1] if step else (0,) * game.n
        after = traj.rows[step]
        changed = [p for p in range(game.n) if after[p] != before[p]]
        assert len(changed) == 1 and after[changed[0]] - before[changed[0]] == 1
        assert all(row == after for row in traj.rows[step:])

    @given(games(tables=superadditive_tables))
    def test_ir_refined_individually_rational(self, game):
        v = game.valuation
        for name in ("ir-mes", "ir-ndmes", "ir-ulmes", "ir-eulmes"):
            fin = RULES[name](game).final
            assert all(fin[i] >= v[1 << i] for i in range(game.n))

    def test_sv_final_is_shapley(self):
        for v in seeded_pool("monotone", 4, 30):
            for order in itertools.permutations(range(4)):
                assert run_sv(Game.new(v, order)).final == shapley_value(v)

    @given(games(max_n=4))
    def test_ndmes_never_pays_dummies(self, game):
        for t, (row, mask) in enumerate(zip(run_ndmes(game).rows, game.prefix_masks())):
            dummies = dummy_mask(game.valuation, mask)
            assert all(row[p] == 0 for p in range(game.n) if dummies >> p & 1)

    def test_ndmes_fast_path_matches(self):
        for n in range(1, 6):
            for v in seeded_pool("subadditive", n, 100):
                assert classify_valuation(v)["subadditive"]
                for order in list(itertools.permutations(range(n)))[:6]:
                    game = Game.new(v, order)
                    assert run_ndmes(game, "fast") == run_ndmes(game, "exhaustive") == run_ndmes(game)

    def test_ndmes_fast_path_is_not_general(self):
        # v({2}) = 0 but player 2 matters together with 1: the shortcut would drop her
        v = ValuationTable.from_coalitions(2, {(1,): 1, (1, 2): 3})
        assert run_ndmes(Game.new(v), "fast") != run_ndmes(Game.new(v), "exhaustive")
        assert run_ndmes(Game.new(v)) == run_ndmes(Game.new(v), "exhaustive")
