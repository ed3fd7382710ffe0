import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finmod.formulas import (
    And,
    Bot,
    Const,
    Eq,
    Exists,
    Fixpoint,
    Forall,
    FormulaError,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    SimFixpoint,
    Top,
    Var,
    count_metrics,
    count_occurrences,
    free_vars,
    is_positive_in,
    nnf,
    quantifier_rank,
    substitute,
    to_official_syntax,
    to_text,
)
from finmod.parser import ParseError, check_arities, parse
from finmod.structures import Vocabulary

X, Y, Z = Var("x"), Var("y"), Var("z")


def test_parse_transitive_closure_shape():
    phi = parse("[lfp P(x,y): E(x,y) | Ez.(P(x,z) & P(z,y))](u,v)")
    assert isinstance(phi, Fixpoint)
    assert phi.op == "lfp" and phi.rel == "P" and phi.vars == ("x", "y")
    assert free_vars(phi) == {"u", "v"}


def test_parse_sentence_rank():
    phi = parse("Ax. x=x")
    assert quantifier_rank(phi) == 1
    assert free_vars(phi) == frozenset()


def test_parse_rejects_non_positive_lfp():
    with pytest.raises(ParseError) as err:
        parse("[lfp P(x): !P(x)](x)")
    assert "positive" in str(err.value)


def test_parse_reports_position():
    with pytest.raises(ParseError) as err:
        parse("E x. (x = ")
    assert "position" in str(err.value)


def test_parse_infix_order_and_sugar():
    phi = parse("x < y & x != y")
    assert isinstance(phi, And)
    assert isinstance(phi.left, Rel) and phi.left.name == "<"
    assert isinstance(phi.right, Not)


def test_parse_precedence():
    phi = parse("!A(x) & B(x) | C(x) -> D(x) <-> E(x)")
    assert isinstance(phi, Iff)
    assert isinstance(phi.left, Implies)
    assert isinstance(phi.left.left, Or)
    assert isinstance(phi.left.left.left, And)


def test_quantifier_body_extends_right():
    phi = parse("E x. A(x) & B(x)")
    assert isinstance(phi, Exists)
    assert isinstance(phi.sub, And)


def test_parse_tuple_equality():
    phi = parse("(x, y) = (u, v)")
    assert isinstance(phi, Eq) and len(phi.lhs) == 2


def test_parse_simultaneous():
    phi = parse("[lfp sim {R(x): x = 0 ; S(y): y = 0} select S](u)")
    assert isinstance(phi, SimFixpoint)
    assert phi.select == "S" and len(phi.defs) == 2


def test_arity_checking():
    vocab = Vocabulary(relations=(("E", 2),))
    with pytest.raises(FormulaError):
        parse("E(x, y, z)", vocab)
    with pytest.raises(FormulaError):
        check_arities(parse("[lfp P(x): P(x, y)](x)"), vocab)


def test_quantifier_rank_clauses():
    assert quantifier_rank(Rel("E", (X, Y))) == 0
    assert quantifier_rank(Or(Exists("x", Top()), Top())) == 1
    a = Exists("x", Exists("y", Top()))
    b = Exists("x", Top())
    assert quantifier_rank(Or(a, b)) == 2


def test_metrics_connective_conventions():
    k2 = parse("x != y & (x != z & y != z)")
    report = count_metrics(k2)
    assert report.distinct_variables == 3
    assert report.connectives == 2

    assert count_metrics(Not(Not(parse("A(x) & B(x)")))) == count_metrics(
        parse("A(x) & B(x)")
    )
    assert count_metrics(parse("A(x) <-> B(x)")).connectives == 2
    assert count_metrics(parse("(x, y) = (u, v)")).connectives == 0
    report = count_metrics(parse("A u. E v. A(u) -> B(v)"))
    assert report.forall_symbols == 1 and report.exists_symbols == 1


def test_metrics_additive_over_or():
    left, right = parse("A(x) & B(x)"), parse("C(x) | D(x) | E(x)")
    whole = Or(left, right)
    assert (
        count_metrics(whole).connectives
        == count_metrics(left).connectives + count_metrics(right).connectives + 1
    )


def test_positivity():
    tc = parse("[lfp P(x,y): E(x,y) | Ez.(P(x,z) & P(z,y))](u,v)")
    assert is_positive_in(tc.body, "P")
    assert is_positive_in(parse("A(x)"), "R")  # vacuous
    assert not is_positive_in(parse("!R(x)"), "R")
    assert not is_positive_in(parse("R(x) -> A(x)"), "R")
    assert is_positive_in(parse("A(x) -> R(x)"), "R")
    assert not is_positive_in(parse("R(x) <-> A(x)"), "R")
    assert is_positive_in(parse("!!R(x)"), "R")


def test_positivity_of_mixed_example(staggered_counters):
    (_, _, phi_body), (_, _, psi_body) = [
        (rel, vars_, body) for rel, vars_, body in staggered_counters.defs
    ]
    assert is_positive_in(phi_body, "X") and is_positive_in(phi_body, "Y")
    assert not is_positive_in(psi_body, "X")
    assert not is_positive_in(psi_body, "Y")


def test_occurrence_counting():
    tc = parse("[lfp P(x,y): E(x,y) | Ez.(P(x,z) & P(z,y))](u,v)")
    assert count_occurrences(tc.body, "P") == 2
    assert count_occurrences(tc, "P") == 0  # bound by the fixed point


def test_official_syntax_expansions():
    assert to_official_syntax(And(Top(), Bot())) == Not(Or(Not(Top()), Not(Bot())))
    assert to_official_syntax(Forall("x", Top())) == Not(Exists("x", Not(Top())))
    atom = Rel("E", (X, Y))
    assert to_official_syntax(atom) == atom


def test_nnf_pushes_negations():
    phi = nnf(Not(parse("E x. A(x) & B(x)")))
    assert isinstance(phi, Forall)
    assert isinstance(phi.sub, Or)


def test_substitute_capture_avoidance():
    phi = Exists("y", Rel("E", (X, Y)))
    sub = substitute(phi, {"x": Y})
    assert isinstance(sub, Exists)
    assert sub.var != "y"  # bound variable renamed away from the incoming y
    assert free_vars(sub) == {"y"}


def test_lfp_constructor_validates():
    with pytest.raises(FormulaError):
        Fixpoint("lfp", "R", ("x",), Not(Rel("R", (X,))), (X,))
    with pytest.raises(FormulaError):
        Fixpoint("pfp", "R", ("x", "y"), Top(), (X,))


# ---------------------------------------------------------- round trips


_names = st.sampled_from(["x", "y", "z", "u", "v", "w"])
_terms = st.one_of(
    _names.map(Var), st.sampled_from(["0", "1", "max"]).map(Const)
)


def _formulas(depth: int = 3):
    atoms = st.one_of(
        st.builds(lambda a, b: Eq((a,), (b,)), _terms, _terms),
        st.builds(lambda a, b: Rel("E", (a, b)), _terms, _terms),
        st.builds(lambda a, b: Rel("<", (a, b)), _terms, _terms),
        st.just(Top()),
        st.just(Bot()),
    )
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Iff, sub, sub),
            st.builds(Exists, _names, sub),
            st.builds(Forall, _names, sub),
        ),
        max_leaves=12,
    )


@given(_formulas())
@settings(max_examples=200, deadline=None)
def test_print_parse_round_trip(phi):
    assert parse(to_text(phi)) == phi


def test_fixpoint_print_round_trip(quadratic_depth, staggered_counters):
    for phi in (quadratic_depth, staggered_counters):
        assert parse(to_text(phi)) == phi


def test_official_syntax_preserves_satisfaction():
    import random

    from finmod.evaluation import Assignment, satisfies
    from finmod.structures import Vocabulary, new_structure

    vocab = Vocabulary(relations=(("E", 2), ("P", 1)))
    rng = random.Random(6)
    texts = [
        "A x. (P(x) -> E y. E(x, y))",
        "E x. (P(x) <-> !(E y. E(y, x)))",
        "A x. A y. (E(x, y) | x = y | E(y, x))",
        "(E x. P(x)) & !(A y. P(y))",
    ]
    for _ in range(30):
        n = rng.choice([2, 3])
        edges = [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.4]
        points = [(i,) for i in range(n) if rng.random() < 0.5]
        a = new_structure(vocab, n, {"E": edges, "P": points})
        for text in texts:
            phi = parse(text)
            assert satisfies(a, phi) == satisfies(a, to_official_syntax(phi))


def test_positive_bodies_are_monotone():
    from itertools import product as iproduct

    from finmod.evaluation import Assignment, satisfies
    from finmod.structures import Relation, Vocabulary, enumerate_structures

    vocab = Vocabulary(relations=(("E", 2),))
    bodies = [
        parse("E(x, y) | (E z. (R(x, z) & E(z, y)))"),
        parse("R(x, y) | (A z. (E(x, z) -> R(z, y)))"),
    ]
    for body in bodies:
        assert is_positive_in(body, "R")
    for a in enumerate_structures(vocab, 2):
        n = a.size
        all_relations = [
            Relation.from_bits(2, n, format(bits, f"0{n * n}b"))
            for bits in range(2 ** (n * n))
        ]

        def image(body, rel):
            return {
                t
                for t in iproduct(a.universe, repeat=2)
                if satisfies(
                    a,
                    body,
                    Assignment(values={"x": t[0], "y": t[1]}, relations={"R": rel}),
                )
            }

        for body in bodies:
            for small in all_relations:
                for large in all_relations:
                    if small.tuples <= large.tuples:
                        assert image(body, small) <= image(body, large)
