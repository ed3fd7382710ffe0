import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finmod.structures import (
    Relation,
    StructureError,
    Vocabulary,
    builtin_order,
    cycle_graph,
    disjoint_union,
    encode_binary,
    encoding_length,
    enumerate_structures,
    enumeration_size,
    is_partial_isomorphism,
    linear_order,
    new_structure,
    path_digraph,
    structure_from_json,
    structure_to_json,
    word_structure,
)

VOCAB_E = Vocabulary(relations=(("E", 2),))


def test_path_construction():
    a = new_structure(VOCAB_E, 3, {"E": [(0, 1), (1, 2)]})
    assert a.holds("E", (0, 1)) and not a.holds("E", (1, 0))


def test_builtins_forced_at_size_two():
    a = builtin_order(2)
    assert a.relation("SUC").tuples == {(0, 1)}
    assert a.constant("max") == 1
    assert a.holds("PLUS", (1, 0, 1)) and a.holds("TIMES", (1, 1, 1))
    assert a.holds("BIT", (1, 0)) and not a.holds("BIT", (0, 0))


def test_out_of_range_entry_rejected():
    with pytest.raises(StructureError):
        new_structure(VOCAB_E, 3, {"E": [(0, 3)]})


def test_size_zero_and_builtin_minimum():
    with pytest.raises(StructureError):
        new_structure(VOCAB_E, 0, {"E": []})
    with pytest.raises(StructureError):
        new_structure(Vocabulary(builtins=True), 1)


def test_word_structure_binary():
    w = word_structure("011001")
    assert w.size == 6
    assert w.relation("R").tuples == {(1,), (2,), (5,)}


def test_word_structure_general_alphabet():
    w = word_structure("a", ("a",))
    assert w.size == 1 and w.relation("Ra").tuples == {(0,)}
    long = word_structure("1" * 10)
    assert long.size == 10


def test_word_rejects_foreign_characters():
    with pytest.raises(StructureError):
        word_structure("012")


def test_cycle_graph():
    c = cycle_graph(4)
    assert c.size == 5
    assert len(c.relation("E").tuples) == 10
    assert c.holds("E", (0, 4)) and c.holds("E", (4, 0))
    tiny = cycle_graph(1)
    assert tiny.relation("E").tuples == {(0, 1), (1, 0)}
    with pytest.raises(StructureError):
        cycle_graph(0)


def test_disjoint_union_shifts_and_adds():
    p = path_digraph(3)
    u = disjoint_union(p, p)
    assert u.size == 6
    assert u.relation("E").tuples == {(0, 1), (1, 2), (3, 4), (4, 5)}
    double_cycle = disjoint_union(cycle_graph(4), cycle_graph(4))
    assert double_cycle.size == 10
    assert len(double_cycle.relation("E").tuples) == 20


def test_disjoint_union_rejects_mismatch():
    with pytest.raises(StructureError):
        disjoint_union(path_digraph(3), word_structure("01"))
    with pytest.raises(StructureError):
        disjoint_union(path_digraph(3, endpoints=True), path_digraph(3, endpoints=True))


def test_encoding_of_marked_graph():
    vocab = Vocabulary(relations=(("E", 2),), constants=("s", "t"), builtins=True)
    g = new_structure(vocab, 3, {"E": [(0, 1), (1, 2)]}, {"s": 0, "t": 2})
    bits = encode_binary(g)
    # relation block of 9 bits, then two 2-bit constant blocks
    assert bits == "0100010000010"
    assert len(bits) == 13 == encoding_length(g)


def test_encoding_order_only_is_all_zero():
    assert encode_binary(linear_order(4)) == "0000"


def test_encoding_word_block():
    assert encode_binary(word_structure("01")) == "01"


def test_encoding_requires_order():
    with pytest.raises(StructureError):
        encode_binary(path_digraph(3))


def test_encoding_length_formula_random():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(2, 6)
        arity = rng.randint(1, 2)
        n_consts = rng.randint(0, 2)
        vocab = Vocabulary(
            relations=(("<", 2), ("Q", arity)),
            constants=tuple(f"c{i}" for i in range(n_consts)),
        )
        less = [(i, j) for i in range(n) for j in range(n) if i < j]
        tuples = [
            t
            for t in __import__("itertools").product(range(n), repeat=arity)
            if rng.random() < 0.5
        ]
        consts = {f"c{i}": rng.randrange(n) for i in range(n_consts)}
        a = new_structure(vocab, n, {"<": less, "Q": tuples}, consts)
        width = (n - 1).bit_length()
        assert len(encode_binary(a)) == n**arity + n_consts * width == encoding_length(a)


def test_relation_bits_round_trip():
    rng = random.Random(11)
    for _ in range(50):
        n = rng.randint(1, 4)
        arity = rng.randint(1, 3)
        tuples = [
            t
            for t in __import__("itertools").product(range(n), repeat=arity)
            if rng.random() < 0.5
        ]
        rel = Relation.from_tuples(arity, n, tuples)
        assert Relation.from_bits(arity, n, rel.bits()) == rel


def test_partial_isomorphism_identity_fragment():
    p = path_digraph(3)
    assert is_partial_isomorphism(p, p, [(0, 0), (1, 1)])


def test_partial_isomorphism_orders():
    two, three = linear_order(2), linear_order(3)
    assert is_partial_isomorphism(two, three, [(0, 0), (1, 2)])
    assert not is_partial_isomorphism(two, three, [(0, 0), (1, 2), (1, 1)])


def test_partial_isomorphism_empty_map():
    assert is_partial_isomorphism(path_digraph(2), path_digraph(3), [])


def test_partial_isomorphism_requires_constants():
    marked = path_digraph(3, endpoints=True)
    assert not is_partial_isomorphism(marked, marked, [])
    assert is_partial_isomorphism(marked, marked, [(0, 0), (2, 2)])


def test_enumerate_structures_counts():
    vocab_p = Vocabulary(relations=(("P", 1),))
    assert len(list(enumerate_structures(vocab_p, 2))) == 4
    assert len(list(enumerate_structures(VOCAB_E, 2))) == 16
    with pytest.raises(StructureError) as err:
        list(enumerate_structures(VOCAB_E, 6, limit=1 << 24))
    assert str(2**36) in str(err.value)
    assert enumeration_size(VOCAB_E, 6) == 2**36


def test_enumerate_structures_distinct():
    seen = set()
    for a in enumerate_structures(VOCAB_E, 2):
        key = frozenset(a.relation("E").tuples)
        assert key not in seen
        seen.add(key)


def test_json_round_trip():
    vocab = Vocabulary(relations=(("E", 2),), constants=("s", "t"))
    a = new_structure(vocab, 3, {"E": [(0, 1), (1, 2)]}, {"s": 0, "t": 2})
    assert structure_from_json(structure_to_json(a)) == a


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=1, max_value=5))
@settings(max_examples=25, deadline=None)
def test_disjoint_union_sizes_add(l, k):
    a, b = cycle_graph(l), cycle_graph(k)
    assert disjoint_union(a, b).size == a.size + b.size
