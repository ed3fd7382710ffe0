import math
import random
from itertools import product

import pytest

from finmod.evaluation import (
    Assignment,
    EvaluationError,
    FixedPointAt,
    NoFixedPoint,
    depth,
    depth_over_size,
    inflationary_depth,
    nested_fixpoint,
    satisfies,
    simultaneous_fixpoint,
    stages,
)
from finmod.formulas import Fixpoint, Rel, Var
from finmod.parser import parse
from finmod.structures import (
    Relation,
    Vocabulary,
    builtin_order,
    enumerate_structures,
    new_structure,
    path_digraph,
)

OSCILLATOR = parse("[pfp X(x): A u. !X(u)](x)")
VOCAB_E = Vocabulary(relations=(("E", 2),))


def test_satisfies_basics():
    p = path_digraph(3)
    tc = parse("[lfp R(x, y): E(x, y) | (E z. (R(x, z) & E(z, y)))](u, v)")
    assert satisfies(p, tc, Assignment(values={"u": 0, "v": 2}))
    assert not satisfies(p, tc, Assignment(values={"u": 2, "v": 0}))
    assert satisfies(p, parse("T"))
    assert not satisfies(p, parse("F"))


def test_pfp_without_fixpoint_is_false():
    p = path_digraph(2)
    assert not satisfies(p, OSCILLATOR, Assignment(values={"x": 0}))


def test_unbound_variable_and_arity_errors():
    p = path_digraph(3)
    with pytest.raises(EvaluationError):
        satisfies(p, parse("x = y"), Assignment(values={"x": 0}))
    with pytest.raises(EvaluationError):
        satisfies(p, parse("E(x, y, z)"), Assignment(values={"x": 0, "y": 0, "z": 0}))


def test_satisfies_ignores_non_free_bindings():
    p = path_digraph(3)
    phi = parse("E(x, y)")
    base = Assignment(values={"x": 0, "y": 1})
    noisy = Assignment(values={"x": 0, "y": 1, "z": 2, "w": 0})
    assert satisfies(p, phi, base) == satisfies(p, phi, noisy) is True


def test_oscillator_trace():
    p = path_digraph(2)
    trace = stages(p, OSCILLATOR.body, "X", ("x",))
    assert trace.verdict == NoFixedPoint(0, 2)
    assert [sorted(s.tuples) for s in trace.stages] == [[], [(0,), (1,)]]


def test_quadratic_depth_trace(quadratic_depth):
    a = builtin_order(4)
    trace = stages(a, quadratic_depth.body, "X", ("x",))
    assert trace.verdict == FixedPointAt(10)
    assert len(trace.stages) == 11
    assert trace.final.tuples == {(0,), (1,)}
    listed = [
        [],
        [0],
        [1],
        [2],
        [3],
        [2, 3],
        [1, 3],
        [0, 3],
        [1, 2],
        [0, 2],
        [0, 1],
    ]
    assert [sorted(t[0] for t in s.tuples) for s in trace.stages] == listed


def test_trace_json_schema(quadratic_depth):
    a = builtin_order(3)
    trace = stages(a, quadratic_depth.body, "X", ("x",))
    data = trace.to_json()
    assert data["verdict"] == {"fixedPointAt": 6}
    assert data["stages"][1] == [[0]]


def test_reachability_depths(reachability):
    for n in range(3, 8):
        p = path_digraph(n)
        assert depth(p, reachability.body, "R", ("x", "y")) == n - 1


def test_depth_examples(quadratic_depth, linear_inflationary):
    for n in (3, 5):
        a = builtin_order(n)
        assert depth(a, quadratic_depth.body, "X", ("x",)) == n * (n + 1) // 2
        assert inflationary_depth(a, quadratic_depth.body, "X", ("x",)) == 2
        assert depth(a, linear_inflationary.body, "X", ("x",)) == 2
        assert inflationary_depth(a, linear_inflationary.body, "X", ("x",)) == n


def test_oscillator_depths():
    a = builtin_order(4)
    assert depth(a, OSCILLATOR.body, "X", ("x",)) == math.inf
    assert inflationary_depth(a, OSCILLATOR.body, "X", ("x",)) == 1


def test_depth_over_size(quadratic_depth, reachability):
    assert depth_over_size(quadratic_depth.body, "X", ("x",), Vocabulary(builtins=True), 4) == 10
    # Exhaustive over all 512 binary relations on three points.  A directed
    # 3-cycle reaches its fixed point only at stage 3 (the diagonal enters
    # late), so the maximum is 3.
    assert depth_over_size(reachability.body, "R", ("x", "y"), VOCAB_E, 3) == 3
    assert depth_over_size(OSCILLATOR.body, "X", ("x",), VOCAB_E, 2) == math.inf


def test_depth_over_size_rejects_extra_free_variables():
    body = parse("E(x, y)")
    with pytest.raises(EvaluationError):
        depth_over_size(body, "R", ("x",), VOCAB_E, 2)


def test_positive_stages_form_chain_with_polynomial_bound(reachability):
    rng = random.Random(3)
    for _ in range(25):
        n = rng.choice([2, 3])
        edges = [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.5]
        a = new_structure(VOCAB_E, n, {"E": edges})
        trace = stages(a, reachability.body, "R", ("x", "y"))
        assert isinstance(trace.verdict, FixedPointAt)
        assert trace.verdict.depth <= n**2
        for earlier, later in zip(trace.stages, trace.stages[1:]):
            assert earlier.tuples <= later.tuples


def test_lfp_is_least_fixed_point(reachability):
    for a in enumerate_structures(VOCAB_E, 2):
        trace = stages(a, reachability.body, "R", ("x", "y"))
        least = trace.fixpoint_or_empty()
        for bits in range(2 ** (a.size**2)):
            candidate = Relation.from_bits(
                2, a.size, format(bits, f"0{a.size ** 2}b")
            )
            env = Assignment(relations={"R": candidate})
            image = {
                t
                for t in product(a.universe, repeat=2)
                if satisfies(
                    a,
                    reachability.body,
                    Assignment(
                        values={"x": t[0], "y": t[1]}, relations={"R": candidate}
                    ),
                )
            }
            if image == candidate.tuples:
                assert least.tuples <= candidate.tuples


def test_ifp_chain_always_stabilizes():
    a = builtin_order(3)
    trace = stages(
        a,
        Rel("X", (Var("x"),)),
        "X",
        ("x",),
    )
    assert isinstance(trace.verdict, FixedPointAt)


def test_operator_agreement_on_positive_bodies(reachability):
    body_text = "E(x, y) | (E z. (R(x, z) & E(z, y)))"
    for a in enumerate_structures(VOCAB_E, 2):
        for u in a.universe:
            for v in a.universe:
                env = Assignment(values={"u": u, "v": v})
                values = {
                    op: satisfies(a, parse(f"[{op} R(x, y): {body_text}](u, v)"), env)
                    for op in ("lfp", "ifp", "pfp")
                }
                assert values["lfp"] == values["ifp"] == values["pfp"]


def test_simultaneous_examples(twin_counters, staggered_counters, toggle_and_fill, threshold_counters):
    for n in (3, 5):
        a = builtin_order(n)
        assert simultaneous_fixpoint(a, list(twin_counters.defs)).iterations == n
        assert simultaneous_fixpoint(a, list(staggered_counters.defs)).iterations == 2 * n - 2
        assert simultaneous_fixpoint(a, list(toggle_and_fill.defs)).iterations == n
        assert simultaneous_fixpoint(a, list(threshold_counters.defs)).iterations == n


def test_simultaneous_closure_identity(twin_counters):
    a = builtin_order(4)
    result = simultaneous_fixpoint(a, list(twin_counters.defs))
    assert result.exists
    env = Assignment(relations=dict(result.relations))
    for rel, vars_, body in twin_counters.defs:
        recomputed = set()
        for tup in product(a.universe, repeat=len(vars_)):
            inner = env.copy()
            inner.values.update(zip(vars_, tup))
            if satisfies(a, body, inner):
                recomputed.add(tup)
        assert recomputed == result.relations[rel].tuples


def test_simultaneous_cycle_flag():
    system = [("X", ("x",), parse("A u. !X(u)"))]
    a = builtin_order(3)
    result = simultaneous_fixpoint(a, system)
    assert not result.exists


def test_nested_twin_counters(twin_counters):
    for n in (3, 4):
        a = builtin_order(n)
        (xr, xv, xb), (yr, yv, yb) = twin_counters.defs
        report = nested_fixpoint(a, (xr, xv, xb), (yr, yv, yb))
        assert report.inner_depths == [n] * (n + 1)
        assert report.total_inner_iterations == n * (n + 1)
        assert report.outer_depth == n


def test_nested_staggered(staggered_counters):
    for n in (3, 5, 6):
        a = builtin_order(n)
        (xr, xv, xb), (yr, yv, yb) = staggered_counters.defs
        report = nested_fixpoint(a, (xr, xv, xb), (yr, yv, yb))
        assert report.inner_depths == [2, 1, 1]


def test_nested_toggle_first_inner_depth(toggle_and_fill):
    for n in (3, 5):
        a = builtin_order(n)
        (xr, xv, xb), (yr, yv, yb) = toggle_and_fill.defs
        report = nested_fixpoint(a, (yr, yv, yb), (xr, xv, xb))
        assert report.inner_depths[0] == 2


def test_nested_threshold_probe(threshold_counters):
    # The plain outer iteration of this pair cycles; the inflationary
    # probe stabilizes with inner depths n, n-1, ..., 1, 0.
    n = 4
    a = builtin_order(n)
    (xr, xv, xb), (yr, yv, yb) = threshold_counters.defs
    plain = nested_fixpoint(a, (xr, xv, xb), (yr, yv, yb))
    assert not plain.outer_exists
    probe = nested_fixpoint(a, (xr, xv, xb), (yr, yv, yb), inflationary_outer=True)
    assert probe.outer_exists
    assert probe.inner_depths == list(range(n, -1, -1))
    assert probe.total_inner_iterations == n * (n + 1) // 2


def test_nested_report_json(twin_counters):
    a = builtin_order(3)
    (xr, xv, xb), (yr, yv, yb) = twin_counters.defs
    report = nested_fixpoint(a, (xr, xv, xb), (yr, yv, yb))
    data = report.to_json()
    assert data["totalInnerIterations"] == 12
    assert data["innerDepths"] == [3, 3, 3, 3]


def test_alternating_reachability_formula(alternating_reachability):
    # Independent oracle: the inductive closure computed directly.
    vocab = Vocabulary(relations=(("E", 2), ("A", 1)))
    rng = random.Random(9)
    for _ in range(20):
        n = rng.choice([2, 3])
        edges = {(i, j) for i in range(n) for j in range(n) if rng.random() < 0.5}
        universal = {(i,) for i in range(n) if rng.random() < 0.5}
        g = new_structure(vocab, n, {"E": edges, "A": universal})
        closure = set()
        changed = True
        while changed:
            changed = False
            for x in range(n):
                for y in range(n):
                    if (x, y) in closure:
                        continue
                    succs = [z for z in range(n) if (x, z) in edges]
                    if x == y:
                        hit = True
                    elif (x,) in universal:
                        hit = bool(succs) and all((z, y) in closure for z in succs)
                    else:
                        hit = any((z, y) in closure for z in succs)
                    if hit:
                        closure.add((x, y))
                        changed = True
        trace = stages(g, alternating_reachability.body, "R", ("x", "y"))
        assert trace.fixpoint_or_empty().tuples == closure
        assert isinstance(trace.verdict, FixedPointAt)
        assert trace.verdict.depth <= n


def test_fixpoint_bodies_accept_free_parameters():
    # the body may mention variables bound outside the fixed point
    a = path_digraph(4)
    phi = parse("[lfp R(x, y): (E(x, y) & x = w) | (E z. (R(x, z) & E(z, y)))](u, v)")
    # with w = 0 only paths starting at 0 are generated
    env = Assignment(values={"u": 0, "v": 3, "w": 0})
    assert satisfies(a, phi, env)
    env = Assignment(values={"u": 1, "v": 3, "w": 0})
    assert not satisfies(a, phi, env)
    trace = stages(a, phi.body, "R", ("x", "y"), Assignment(values={"w": 0}))
    assert all(t[0] == 0 for stage in trace.stages for t in stage.tuples)
