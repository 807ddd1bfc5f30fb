"""Exact online value-sharing rules for cooperative games with arriving players."""

from .axioms import (
    AxiomVerdict,
    Budget,
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
    replay_witness,
    satisfaction_matrix,
    search,
)
from .decomposition import (
    Decomposition,
    gm_decompose,
    run_erfc,
    run_eulmes,
    run_extended,
    run_ir_eulmes,
    verify_prefix_consistency,
    verify_recomposition,
)
from .gen import GenSpec, generate
from .model import (
    Game,
    Trajectory,
    ValuationTable,
    classify_valuation,
    is_contributional,
    is_dummy,
    is_dummy_subadditive,
    load_game,
    marginal_contribution,
    pivotal_player,
    prefix_subgame,
    shapley_value,
)
from .registry import RULES, get_rule
from .rules import ir_refine, run_dmc, run_mes, run_ndmes, run_rfc, run_sv, run_ulmes, ulmes_sharing_set

__version__ = "0.1.0"
