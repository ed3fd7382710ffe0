"""Finite-model-theory workbench.

Structures and their binary codes, first-order logic with fixed-point
operators, stage and depth instrumentation, model-comparison games,
formula transforms, word rankers, and compilation of space-bounded
machine descriptions into reachability sentences.
"""

from .structures import (
    Relation,
    Structure,
    StructureError,
    Vocabulary,
    builtin_order,
    cycle_graph,
    disjoint_union,
    encode_binary,
    enumerate_structures,
    is_partial_isomorphism,
    linear_order,
    load_structure,
    new_structure,
    path_digraph,
    structure_from_json,
    structure_to_json,
    word_structure,
)
from .formulas import (
    Formula,
    FormulaError,
    MetricReport,
    count_metrics,
    is_positive_in,
    quantifier_rank,
    to_official_syntax,
    to_text,
)
from .parser import ParseError, parse
from .evaluation import (
    Assignment,
    EvaluationError,
    FixedPointAt,
    NestedCostReport,
    NoFixedPoint,
    StageTrace,
    depth,
    depth_over_size,
    inflationary_depth,
    nested_fixpoint,
    satisfies,
    simultaneous_fixpoint,
    stages,
)
from .games import (
    GameError,
    GamePosition,
    GameResult,
    Move,
    WinSets,
    duplicator_wins_infinite,
    ef_game,
    iso_type_formula,
    optimal_move,
    pebble_game,
    pebble_win_sets,
    phi_s_infinity,
    s_rank,
    scott_formula,
    survey_ranks,
)
from .rankers import Ranker, RankerError, boundary, forward_ranker, parse_ranker, ranker_eval
from .transforms import (
    Interpretation,
    QuantifierBlock,
    TransformError,
    apply_interpretation,
    dual_formula,
    forall_count_h,
    identity_interpretation,
    iterate_qb,
    pairing_interpretation,
    pfp_disjunction_sentence,
    to_quantifier_block,
    unfold_stage_formula,
)
from .nspace import (
    CompiledSentence,
    MachineError,
    NTMSpec,
    TableEntry,
    compile_sentence,
    config_graph,
    graph_accepts,
    run_ntm,
    savitch_formula,
    sentence_truth,
)

__all__ = [name for name in dir() if not name.startswith("_")]
