import random
from itertools import product

import numpy as np
import pytest

from finmod.evaluation import Assignment, satisfies
from finmod.formulas import count_metrics
from finmod.nspace import (
    MachineError,
    NTMSpec,
    Parameters,
    SKELETON_FREE_PAIR,
    TableEntry,
    TupleCodec,
    compile_sentence,
    config_graph,
    edge_formula,
    edge_table,
    graph_accepts,
    machine_from_json,
    machine_to_json,
    run_ntm,
    savitch_formula,
    sentence_truth,
)
from finmod.structures import (
    Vocabulary,
    enumerate_structures,
    new_structure,
    rank_tuple,
    tuple_rank,
)

VOCAB_P = Vocabulary(relations=(("P", 1),), builtins=True)
VOCAB_E = Vocabulary(relations=(("E", 2),))

FIRST_BIT = NTMSpec(2, 1, 2, "logn", (TableEntry(0, 1, 0, 1, "R", 1, "R"),))
ANY_BIT = NTMSpec(
    2,
    1,
    2,
    "logn",
    (
        TableEntry(0, 0, 0, 0, "R", 0, "R"),
        TableEntry(0, 1, 0, 0, "R", 0, "R"),
        TableEntry(0, 1, 0, 1, "R", 1, "R"),
        TableEntry(0, 1, 0, 1, "L", 1, "L"),
    ),
)
ALWAYS = NTMSpec(
    2,
    1,
    2,
    "logn",
    (
        TableEntry(0, 0, 0, 1, "R", 0, "R"),
        TableEntry(0, 1, 0, 1, "R", 0, "R"),
    ),
)
NEVER = NTMSpec(2, 1, 2, "logn", ())
NARROW = NTMSpec(
    2,
    1,
    1,
    "logn",
    (
        TableEntry(0, 1, 0, 1, "R", 1, "R"),
        TableEntry(0, 0, 0, 0, "R", 0, "R"),
        TableEntry(0, 0, 1, 0, "R", 1, "L"),
    ),
)


def inputs(n):
    return list(enumerate_structures(VOCAB_P, n, 1 << 12))


# --------------------------------------------------------------- machines


def test_machine_json_round_trip():
    assert machine_from_json(machine_to_json(ANY_BIT)) == ANY_BIT


def test_machine_validation():
    with pytest.raises(MachineError):
        NTMSpec(2, 0, 1, "logn", ())  # accept cannot be the start state
    with pytest.raises(MachineError):
        NTMSpec(1, 1, 1, "logn", ())
    with pytest.raises(MachineError):
        TableEntry(0, 1, 0, 1, "U", 1, "R")


def test_simulator_against_scan_oracles():
    for a in inputs(2):
        bits = sorted(t[0] for t in a.relation("P").tuples)
        assert run_ntm(FIRST_BIT, a) == (0 in bits)
        assert run_ntm(ANY_BIT, a) == bool(bits)
        assert run_ntm(ALWAYS, a)
        assert not run_ntm(NEVER, a)


def test_simulator_state_count_guard():
    three_states = NTMSpec(3, 2, 2, "logn", (TableEntry(0, 0, 0, 1, "R", 0, "R"),))
    a = inputs(2)[0]
    with pytest.raises(MachineError):
        run_ntm(three_states, a)


# ---------------------------------------------------------- config graphs


def test_parameters_micro():
    params = Parameters.derive(FIRST_BIT, VOCAB_P, 2)
    assert (params.bits, params.work_vars, params.index_vars) == (1, 2, 1)
    assert params.tuple_len == 4 + 1 + 2 + 1


def test_parameters_degenerate_index_block():
    params = Parameters.derive(NARROW, VOCAB_P, 3)
    assert params.work_vars == 1 and params.index_vars == 0
    assert params.tuple_len == 6


def test_config_graph_shape_and_reachability():
    for machine in (FIRST_BIT, ANY_BIT):
        params = Parameters.derive(machine, VOCAB_P, 2)
        for a in inputs(2):
            graph = config_graph(machine, a)
            assert graph.size == 2**params.tuple_len
            assert graph.constant("s") == 0
            assert graph.constant("t") == graph.size - 1
            assert graph_accepts(graph) == run_ntm(machine, a)


def test_config_graph_of_empty_table_has_only_normalization_edges():
    a = inputs(2)[0]
    graph = config_graph(NEVER, a)
    accept_node = graph.size - 1
    for x, y in graph.relation("E").tuples:
        assert y == accept_node
    assert not graph_accepts(graph)


def test_degenerate_index_block_graph_equivalence():
    for a in inputs(3)[:6]:
        assert graph_accepts(config_graph(NARROW, a)) == run_ntm(NARROW, a)


def test_node_limit_guard():
    a = inputs(2)[0]
    with pytest.raises(MachineError):
        config_graph(FIRST_BIT, a, node_limit=10)


# ------------------------------------------------------ doubling skeleton


def test_skeleton_connective_count():
    for i in range(7):
        report = count_metrics(savitch_formula(i))
        assert report.connectives == 4 * i
        assert report.distinct_variables == (2 if i == 0 else 5)


def test_skeleton_base_case():
    phi = savitch_formula(0)
    assert phi == __import__("finmod.formulas", fromlist=["Rel"]).Rel(
        "E", tuple(map(__import__("finmod.formulas", fromlist=["Var"]).Var, ("x", "y")))
    )


def test_skeleton_walk_semantics():
    rng = random.Random(1)
    fx, fy = SKELETON_FREE_PAIR
    for _ in range(25):
        n = rng.choice([2, 3, 4, 5, 6])
        edges = [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.35]
        a = new_structure(VOCAB_E, n, {"E": edges})
        adjacency = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            adjacency[i, j] = True
        for i in range(4):
            phi = savitch_formula(i)
            power = adjacency.copy()
            for _ in range(i):
                power = (power.astype(np.uint8) @ power.astype(np.uint8)) > 0
            for x in range(n):
                for y in range(n):
                    got = satisfies(
                        a, phi, Assignment(values={fx: x, fy: y}), memo=True
                    )
                    assert got == bool(power[x, y])


# ------------------------------------------------------------ edge formula


def test_single_entry_table_yields_single_table_disjunct():
    edge = edge_formula(FIRST_BIT, VOCAB_P, 2)
    assert edge.table_disjuncts == 1


def test_edge_formula_matches_one_step_exhaustively_micro():
    for machine in (FIRST_BIT, ANY_BIT):
        params = Parameters.derive(machine, VOCAB_P, 2)
        edge = edge_formula(machine, VOCAB_P, 2)
        codec = TupleCodec.build(machine, VOCAB_P, 2)
        for a in inputs(2):
            matrix = edge_table(edge, a, params)
            count = 2**params.tuple_len
            for rank in range(count):
                config = rank_tuple(rank, params.tuple_len, 2)
                expected = {
                    tuple_rank(s, 2) for s in codec.successors(config, a)
                }
                assert expected == {j for j in range(count) if matrix[rank, j]}


def test_edge_formula_sampled_at_three_elements():
    params = Parameters.derive(NARROW, VOCAB_P, 3)
    edge = edge_formula(NARROW, VOCAB_P, 3)
    codec = TupleCodec.build(NARROW, VOCAB_P, 3)
    a = inputs(3)[5]
    count = 3**params.tuple_len
    rng = random.Random(7)
    env = Assignment()
    # all positive edges plus a random sample of pairs
    for rank in range(count):
        source = rank_tuple(rank, params.tuple_len, 3)
        for successor in codec.successors(source, a):
            env.values = dict(zip(edge.source_vars, source)) | dict(
                zip(edge.target_vars, successor)
            )
            assert satisfies(a, edge.formula, env)
    for _ in range(3000):
        i, j = rng.randrange(count), rng.randrange(count)
        source = rank_tuple(i, params.tuple_len, 3)
        target = rank_tuple(j, params.tuple_len, 3)
        env.values = dict(zip(edge.source_vars, source)) | dict(
            zip(edge.target_vars, target)
        )
        assert satisfies(a, edge.formula, env) == (
            tuple(target) in {tuple(s) for s in codec.successors(source, a)}
        )


def test_edge_formula_needs_two_elements():
    with pytest.raises(MachineError):
        edge_formula(FIRST_BIT, VOCAB_P, 1)


# ------------------------------------------------------ compiled sentences


def test_compiled_counts_and_parameters():
    compiled = compile_sentence(FIRST_BIT, VOCAB_P, 2)
    params = compiled.params
    assert compiled.skeleton_depth == params.tuple_len * params.bits
    assert compiled.skeleton_connectives == 4 * params.tuple_len * params.bits
    recomputed = count_metrics(compiled.sentence)
    assert recomputed == compiled.counts
    payload = compiled.to_json()
    assert payload["counts"]["skeletonConnectives"] == compiled.skeleton_connectives


def test_compiled_sentence_equals_simulator_micro():
    for machine in (FIRST_BIT, ANY_BIT):
        compiled = compile_sentence(machine, VOCAB_P, 2)
        for a in inputs(2):
            assert sentence_truth(compiled, a) == run_ntm(machine, a)


def test_compiled_sentence_rejects_mismatched_inputs():
    compiled = compile_sentence(FIRST_BIT, VOCAB_P, 2)
    other = inputs(3)[0]
    with pytest.raises(MachineError):
        sentence_truth(compiled, other)
