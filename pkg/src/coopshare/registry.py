"""Name -> rule lookup used by the checkers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

from .decomposition import run_erfc, run_eulmes, run_ir_eulmes
from .model import Game, Trajectory, ValuationTable, classify_valuation
from .rules import ir_refine, run_dmc, run_mes, run_ndmes, run_rfc, run_sv, run_ulmes


@dataclass(frozen=True)
class Rule:
    name: str  # CLI spelling
    label: str  # display spelling
    fn: Callable[[Game], Trajectory]
    domain: str = "monotone"  # monotone | simple | superadditive

    def __call__(self, game: Game) -> Trajectory:
        return self.fn(game)

    def applicable(self, v: ValuationTable) -> bool:
        if self.domain == "monotone":
            return True
        if self.domain == "simple":
            return all(x == 0 or x == 1 for x in v.values)
        return classify_valuation(v)["superadditive"]


_ALL = [
    Rule("dmc", "DMC", run_dmc),
    Rule("sv", "SV", run_sv),
    Rule("rfc", "RFC", run_rfc, "simple"),
    Rule("erfc", "eRFC", run_erfc),
    Rule("mes", "MES", run_mes),
    Rule("ndmes", "NDMES", run_ndmes),
    Rule("ulmes", "ULMES", run_ulmes),
    Rule("eulmes", "eULMES", run_eulmes),
    Rule("ir-mes", "IR-MES", partial(ir_refine, "MES"), "superadditive"),
    Rule("ir-ndmes", "IR-NDMES", partial(ir_refine, "NDMES"), "superadditive"),
    Rule("ir-ulmes", "IR-ULMES", partial(ir_refine, "ULMES"), "superadditive"),
    Rule("ir-eulmes", "IR-eULMES", run_ir_eulmes, "superadditive"),
]

RULES: dict[str, Rule] = {r.name: r for r in _ALL}

# the eight rows of the published summary table, in its order
TABLE_RULES = ("dmc", "sv", "erfc", "mes", "ndmes", "ulmes", "eulmes", "ir-eulmes")


def get_rule(name: str | Rule) -> Rule:
    if isinstance(name, Rule):
        return name
    key = name.lower().replace("_", "-")
    if key not in RULES:
        for rule in _ALL:
            if rule.label.lower() == key:
                return rule
        raise KeyError(f"unknown rule {name!r}; choose from {', '.join(RULES)}")
    return RULES[key]
