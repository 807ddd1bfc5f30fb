import dataclasses
import itertools
import json
from fractions import Fraction as F

import pytest

from coopshare.axioms import (
    PUBLISHED_TABLE,
    Budget,
    Runner,
    Witness,
    check_axiom,
    check_ea,
    check_efficiency,
    check_ir,
    check_od,
    check_part,
    check_s_stay,
    check_sf,
    check_stay,
    delays,
    replay_witness,
    satisfaction_matrix,
    search,
)
from coopshare.errors import CoopShareError, ScopeTooLarge
from coopshare.fixtures import g_2p, g_3p, g_app, g_ex1, g_intro, g_irimp
from coopshare.gen import seeded_pool
from coopshare.model import Game, Trajectory, ValuationTable
from coopshare.registry import RULES, TABLE_RULES

# player 2 (0-based 1) is a dummy; player 1 arrives first and creates value
DUMMY_GAME = Game.new(
    ValuationTable.from_coalitions(3, {(1,): 2, (1, 2): 2, (1, 3): 3, (1, 2, 3): 3, (3,): 1, (2, 3): 1}), (0, 1, 2)
)


def corrupted(game):
    rows = [list(r) for r in RULES["mes"](game).rows]
    rows[-1][0] += 1
    return Trajectory(rows)


class TestTrajectoryChecks:
    def test_efficiency(self):
        verdict = check_efficiency("ulmes", g_ex1())
        assert verdict.ok and sum(RULES["ulmes"](g_ex1()).final) == 3
        zero = Game.new(ValuationTable(3, [0] * 8))
        assert all(check_efficiency(r, zero) for r in TABLE_RULES)

    def test_efficiency_negative_control(self):
        verdict = check_efficiency("mes", g_ex1(), corrupted(g_ex1()))
        assert not verdict.ok
        w = verdict.witness
        assert (w.lhs, w.rhs, w.step) == (4, 3, 4)

    def test_stay(self):
        found = search("sv", "STAY", "simple", 3, 18)
        assert not found.ok and replay_witness("sv", found.witness)
        assert all(check_stay("dmc", Game.new(v, o)) for v in seeded_pool("monotone", 3, 20)
                   for o in itertools.permutations(range(3)))
        assert check_stay("mes", g_ex1())

    def test_s_stay(self):
        dmc = check_s_stay("dmc", g_3p())
        assert not dmc.ok and dmc.witness.player in (0, 1)
        assert (dmc.witness.lhs, dmc.witness.rhs) == (0, 0)
        erfc = check_s_stay("erfc", g_3p())
        assert not erfc.ok and erfc.witness.player == 1
        assert check_s_stay("mes", g_3p())

    def test_s_stay_checks_every_critical_player(self):
        # after 3 arrives, players 1 and 2 are both needed; a rule paying only player 1 must fail
        def pay_first(game):
            rows = [[F(0)] * 3, [F(0)] * 3, [F(1), F(0), F(0)]]
            return Trajectory(rows)

        verdict = check_s_stay(pay_first, g_3p())
        assert not verdict.ok and verdict.witness.player == 1

    def test_part(self):
        verdict = check_part("erfc", g_2p())
        assert not verdict.ok and verdict.witness.player == 1 and verdict.witness.lhs == 0
        assert check_part("mes", g_2p())
        assert RULES["mes"](g_2p()).final[1] == F(1, 2)
        zero = Game.new(ValuationTable(2, [0] * 4))
        assert check_part("erfc", zero)

    def test_od(self):
        verdict = check_od("mes", DUMMY_GAME)
        assert not verdict.ok and verdict.witness.player == 1
        assert check_od("ndmes", DUMMY_GAME)
        assert check_od("mes", g_intro())

    def test_ir(self):
        verdict = check_ir("erfc", g_app())
        assert not verdict.ok
        assert (verdict.witness.player, verdict.witness.lhs, verdict.witness.rhs) == (1, 1, 2)
        assert check_ir("dmc", g_app()) and RULES["dmc"](g_app()).final == (1, 4)
        assert check_ir("ir-mes", g_intro())


class TestOrderChecks:
    def test_delays(self):
        assert list(delays((0, 1, 2, 3), 2)) == [(0, 1, 3, 2)]
        assert list(delays((0, 1, 2), 0)) == [(1, 0, 2), (1, 2, 0)]
        assert list(delays((0, 1, 2), 2)) == []

    def test_ea_example(self):
        verdict = check_ea("ulmes", g_ex1().valuation, g_ex1().order)
        w = verdict.witness
        assert not verdict.ok
        assert (w.player, w.lhs, w.rhs, w.deviation) == (2, F(7, 6), F(3, 2), (0, 1, 3, 2))
        assert check_ea("eulmes", g_ex1().valuation)

    def test_ea_vacuous_for_one_player(self):
        v = ValuationTable(1, [0, 3])
        assert all(check_ea(r, v) for r in TABLE_RULES if RULES[r].applicable(v))

    def test_scope_cap(self, monkeypatch):
        monkeypatch.setenv("COOPSHARE_NMAX", "3")
        with pytest.raises(ScopeTooLarge):
            check_ea("dmc", g_ex1().valuation)
        with pytest.raises(ScopeTooLarge):
            check_sf("dmc", g_ex1().valuation)
        assert check_sf("dmc", g_intro().valuation)

    def test_sf(self):
        assert check_sf("dmc", g_ex1().valuation)
        assert check_sf("sv", g_3p().valuation)
        # equal splitting happens to be fair on this symmetric game
        two = check_sf("mes", g_2p().valuation)
        assert two.ok
        verdict = check_sf("mes", g_app().valuation)
        assert not verdict.ok
        assert (verdict.witness.player, verdict.witness.lhs, verdict.witness.rhs) == (0, F(9, 4), 2)

    def test_average_matches_shapley_for_dmc(self):
        from coopshare.axioms import average_payoff
        from coopshare.model import shapley_value

        for v in seeded_pool("monotone", 4, 20):
            assert average_payoff(Runner("dmc", v)) == shapley_value(v)

    def test_dispatch(self):
        assert not check_axiom("s_stay", "dmc", g_3p()).ok
        assert not check_axiom("ea", "ulmes", g_ex1(), scope=g_ex1().order).ok
        with pytest.raises(KeyError):
            check_axiom("fairness", "dmc", g_3p())


class TestIRImpossibility:
    def test_no_rule_reaches_singleton_value(self):
        game = g_irimp()
        for rule in RULES.values():
            try:
                final = rule(game).final
            except CoopShareError:
                assert not rule.applicable(game.valuation)
                continue
            assert final[1] < 3 == game.valuation[0b10]
            traj = rule(game)
            if traj.rows[1][0] >= traj.rows[0][0]:
                # irrevocable payments leave at most 4 - 2 for player 2
                assert final[1] <= 2
            else:
                assert rule.name == "sv" and final[1] == F(5, 2)

    def test_bound_for_any_online_efficient_split(self):
        # step 1 must hand v({1}) = 2 to player 1 to be efficient; only 4 - 2 is left
        for first in (F(0), F(1), F(2)):
            traj = Trajectory([[2, 0], [2 + first, 2 - first]])
            assert check_efficiency("dmc", g_irimp(), traj)
            assert traj.final[1] <= 2


class TestReplay:
    def test_replay_every_matrix_witness(self):
        cells = satisfaction_matrix(budget=Budget(n_max=3, small_count=10, n_seeded=0, seeded_count=0))
        fails = [c for c in cells if not c.verdict.ok]
        assert fails
        for c in fails:
            assert replay_witness(c.rule, c.verdict.witness), c

    def test_tampered_witness_rejected(self):
        w = check_ea("ulmes", g_ex1().valuation, g_ex1().order).witness
        assert replay_witness("ulmes", w)
        assert not replay_witness("ulmes", dataclasses.replace(w, lhs=F(3, 2)))
        assert not replay_witness("ulmes", dataclasses.replace(w, deviation=(1, 0, 2, 3)))
        assert not replay_witness("eulmes", w)

    def test_witness_document_is_json(self):
        w = check_ir("erfc", g_app()).witness
        doc = json.loads(json.dumps(w.document()))
        assert doc["player"] == 2 and doc["lhs"] == "1" and doc["rhs"] == "2" and doc["required"] == "lhs >= rhs"


class TestMatrix:
    def test_published_table_shape(self):
        assert set(PUBLISHED_TABLE) == set(TABLE_RULES)
        assert all(len(row) == 7 for row in PUBLISHED_TABLE.values())

    def test_fixture_cells(self):
        cells = satisfaction_matrix(["erfc"], ["PART"], Budget(0, 0, 0, 0))
        (cell,) = cells
        assert not cell.verdict.ok and cell.matches
        assert cell.verdict.witness.lhs == 0 and replay_witness("erfc", cell.verdict.witness)

    def test_empty(self):
        assert satisfaction_matrix([], budget=Budget(0, 0, 0, 0)) == []

    def test_parallel_runs_agree(self):
        budget = Budget(n_max=3, small_count=5, n_seeded=4, seeded_count=5)
        one = satisfaction_matrix(["mes", "dmc"], budget=budget)
        two = satisfaction_matrix(["mes", "dmc"], budget=budget, jobs=2)
        assert [c.document() for c in one] == [c.document() for c in two]

    def test_search_not_found(self):
        verdict = search("mes", "STAY", "monotone", 3, 30)
        assert verdict.ok and verdict.games_checked == 30
