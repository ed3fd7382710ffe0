"""Nondeterministic space-bounded machines compiled to reachability sentences.

A machine description runs against the binary code of an ordered input
structure.  Its configurations at input size n are packed into tuples

    (q, w_1..w_h, s, r_1..r_a, p, v_1..v_t, v)

of universe elements: machine state, work-tape variables of ceil(log2 n)
bits each, input section index, in-section tuple digits, in-constant bit
position, work-variable index digits, and bit position inside the work
variable.  Three consistent views are provided: a direct simulator, the
configuration graph (one node per tuple, edges per machine step), and a
compiled first-order sentence - a doubling-reachability skeleton whose
single edge atom is replaced by a transition-table disjunction and whose
variables widen to configuration tuples.

Acceptance is normalized: entering the accept state steps to the all-max
configuration, which loops on itself, so acceptance is equivalent to the
all-max node being reachable from the all-zero start node and survives
the exact-length walk semantics of the doubling skeleton.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .evaluation import Assignment, satisfies
from .formulas import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    MetricReport,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
    big_and,
    big_or,
    count_metrics,
    exists_all,
    substitute,
)
from .structures import (
    Relation,
    Structure,
    StructureError,
    Vocabulary,
    encode_binary,
    new_structure,
    rank_tuple,
    tuple_rank,
)


class MachineError(ValueError):
    pass


LEFT, RIGHT = "L", "R"


@dataclass(frozen=True)
class TableEntry:
    state: int
    input_bit: int
    work_bit: int
    next_state: int
    input_dir: str
    write_bit: int
    work_dir: str

    def __post_init__(self) -> None:
        if self.input_dir not in (LEFT, RIGHT) or self.work_dir not in (LEFT, RIGHT):
            raise MachineError("directions must be 'L' or 'R'")
        for bit in (self.input_bit, self.work_bit, self.write_bit):
            if bit not in (0, 1):
                raise MachineError("tape symbols are bits")


@dataclass(frozen=True)
class NTMSpec:
    """Two-tape nondeterministic machine over the binary input alphabet.

    State 0 is the start state.  ``space_coefficient`` is the constant m
    in the work-space budget m*f(n); ``bound`` selects f (``logn`` or
    ``linear``).
    """

    states: int
    accept: int
    space_coefficient: int
    bound: str
    table: tuple[TableEntry, ...]

    def __post_init__(self) -> None:
        if not 0 < self.accept < self.states:
            raise MachineError("accept state must exist and differ from the start state")
        if self.bound not in ("logn", "linear"):
            raise MachineError(f"unknown bound selector {self.bound!r}")
        for entry in self.table:
            if not (0 <= entry.state < self.states and 0 <= entry.next_state < self.states):
                raise MachineError(f"entry {entry} references a missing state")

    def is_deterministic(self) -> bool:
        keys = [(e.state, e.input_bit, e.work_bit) for e in self.table]
        return len(keys) == len(set(keys))

    def space_bits(self, n: int) -> int:
        f = bits_per_element(n) if self.bound == "logn" else n
        return self.space_coefficient * f


def bits_per_element(n: int) -> int:
    """ceil(log2 n): the width of one universe element in bits."""
    if n < 2:
        raise MachineError("inputs need at least two elements")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Segment:
    kind: str  # "rel", "zero", or "const"
    name: str
    arity: int  # digit count for rel/zero, unused for const
    length: int  # number of bit positions


def input_segments(vocab: Vocabulary, n: int) -> list[Segment]:
    """Sections of the binary input code, in serialization order."""
    segments = [
        Segment("rel", name, arity, n**arity)
        for name, arity in vocab.relations
        if name != "<"
    ]
    if not segments:
        segments.append(Segment("zero", "_", 1, n))
    width = bits_per_element(n)
    for name in vocab.constants:
        segments.append(Segment("const", name, 0, width))
    return segments


@dataclass(frozen=True)
class Parameters:
    """Derived sizes for one machine at one input size."""

    n: int
    bits: int  # L = ceil(log2 n)
    work_vars: int  # h
    index_vars: int  # t
    max_arity: int  # a
    tuple_len: int  # g = 4 + a + h + t

    @staticmethod
    def derive(machine: NTMSpec, vocab: Vocabulary, n: int) -> "Parameters":
        bits = bits_per_element(n)
        if machine.states > n:
            raise MachineError(
                f"{machine.states} states cannot be encoded in one element of a "
                f"size-{n} universe"
            )
        f_of_n = bits if machine.bound == "logn" else n
        work_vars = machine.space_coefficient * math.ceil(f_of_n / bits)
        index_vars = 0
        while n**index_vars < work_vars:
            index_vars += 1
        arities = [arity for name, arity in vocab.relations if name != "<"]
        max_arity = max(arities) if arities else 1
        segments = input_segments(vocab, n)
        if len(segments) > n:
            raise MachineError(
                f"{len(segments)} input sections cannot be indexed by one element"
            )
        return Parameters(
            n=n,
            bits=bits,
            work_vars=work_vars,
            index_vars=index_vars,
            max_arity=max_arity,
            tuple_len=4 + max_arity + work_vars + index_vars,
        )


# ------------------------------------------------------ direct simulator


def _input_bits(structure: Structure) -> str:
    return encode_binary(structure)


def run_ntm(machine: NTMSpec, structure: Structure, limit: int = 1_000_000) -> bool:
    """Exact nondeterministic acceptance by search over machine states.

    This simulator works on the flat representation (state, input head,
    work bits, work head); it shares nothing with the configuration-tuple
    view, so the two can cross-check each other.
    """
    params = Parameters.derive(machine, structure.vocab, structure.size)
    tape = _input_bits(structure)
    work_len = params.work_vars * params.bits
    start = (0, 0, (0,) * work_len, 0)
    seen = {start}
    frontier = [start]
    while frontier:
        if len(seen) > limit:
            raise MachineError(f"simulation exceeded {limit} distinct configurations")
        state, ip, work, wp = frontier.pop()
        if state == machine.accept:
            return True
        input_bit = int(tape[ip])
        for entry in machine.table:
            if (entry.state, entry.input_bit, entry.work_bit) != (state, input_bit, work[wp]):
                continue
            ip2 = ip + (1 if entry.input_dir == RIGHT else -1)
            wp2 = wp + (1 if entry.work_dir == RIGHT else -1)
            if not (0 <= ip2 < len(tape) and 0 <= wp2 < work_len):
                continue
            work2 = work[:wp] + (entry.write_bit,) + work[wp + 1 :]
            nxt = (entry.next_state, ip2, work2, wp2)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


# -------------------------------------------------- configuration tuples


@dataclass
class TupleCodec:
    """Decode and step configuration tuples; mirrors the edge formula."""

    machine: NTMSpec
    vocab: Vocabulary
    params: Parameters
    segments: list[Segment]

    @staticmethod
    def build(machine: NTMSpec, vocab: Vocabulary, n: int) -> "TupleCodec":
        return TupleCodec(
            machine,
            vocab,
            Parameters.derive(machine, vocab, n),
            input_segments(vocab, n),
        )

    def split(self, config: Sequence[int]) -> dict:
        p = self.params
        pos = 0

        def take(count_: int):
            nonlocal pos
            out = tuple(config[pos : pos + count_])
            pos += count_
            return out

        (q,) = take(1)
        work = take(p.work_vars)
        (section,) = take(1)
        digits = take(p.max_arity)
        (const_bit,) = take(1)
        index_digits = take(p.index_vars)
        (work_bit_pos,) = take(1)
        return {
            "q": q,
            "work": work,
            "section": section,
            "digits": digits,
            "const_bit": const_bit,
            "index_digits": index_digits,
            "work_bit_pos": work_bit_pos,
        }

    def work_index(self, index_digits: Sequence[int]) -> int:
        value = 0
        for power, digit in enumerate(index_digits):
            value += digit * self.params.n**power
        return value

    def index_digits_of(self, value: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.params.index_vars):
            digits.append(value % self.params.n)
            value //= self.params.n
        return tuple(digits)

    def decode(self, config: Sequence[int], structure: Structure) -> Optional[dict]:
        """None when the tuple does not describe a machine situation."""
        p = self.params
        parts = self.split(config)
        if parts["section"] >= len(self.segments):
            return None
        segment = self.segments[parts["section"]]
        if segment.kind in ("rel", "zero"):
            if parts["const_bit"] != 0:
                return None
            if any(d != 0 for d in parts["digits"][segment.arity :]):
                return None
            offset = tuple_rank(parts["digits"][: segment.arity], p.n)
        else:
            if any(d != 0 for d in parts["digits"]):
                return None
            if parts["const_bit"] >= p.bits:
                return None
            offset = parts["const_bit"]
        work_var = self.work_index(parts["index_digits"])
        if work_var >= p.work_vars:
            return None
        if parts["work_bit_pos"] >= p.bits:
            return None
        if segment.kind == "rel":
            bit = 1 if structure.holds(segment.name, parts["digits"][: segment.arity]) else 0
        elif segment.kind == "zero":
            bit = 0
        else:
            value = structure.constant(segment.name)
            bit = (value >> (p.bits - 1 - offset)) & 1
        work_bit = (parts["work"][work_var] >> parts["work_bit_pos"]) & 1
        return {
            **parts,
            "segment": segment,
            "offset": offset,
            "work_var": work_var,
            "input_bit": bit,
            "work_bit": work_bit,
        }

    def _advance_input(self, section: int, offset: int, direction: str) -> Optional[tuple[int, int]]:
        segment = self.segments[section]
        if direction == RIGHT:
            if offset + 1 < segment.length:
                return section, offset + 1
            if section + 1 < len(self.segments):
                return section + 1, 0
            return None
        if offset > 0:
            return section, offset - 1
        if section > 0:
            return section - 1, self.segments[section - 1].length - 1
        return None

    def _encode_input(self, section: int, offset: int) -> tuple[int, tuple[int, ...], int]:
        segment = self.segments[section]
        if segment.kind in ("rel", "zero"):
            digits = rank_tuple(offset, segment.arity, self.params.n)
            padded = digits + (0,) * (self.params.max_arity - segment.arity)
            return section, padded, 0
        return section, (0,) * self.params.max_arity, offset

    def all_max(self) -> tuple[int, ...]:
        return (self.params.n - 1,) * self.params.tuple_len

    def start(self) -> tuple[int, ...]:
        return (0,) * self.params.tuple_len

    def successors(self, config: tuple[int, ...], structure: Structure) -> list[tuple[int, ...]]:
        p = self.params
        out = []
        if config == self.all_max():
            out.append(self.all_max())
        if config[0] == self.machine.accept and config != self.all_max():
            out.append(self.all_max())
        decoded = self.decode(config, structure)
        if decoded is None:
            return out
        for entry in self.machine.table:
            if (entry.state, entry.input_bit, entry.work_bit) != (
                decoded["q"],
                decoded["input_bit"],
                decoded["work_bit"],
            ):
                continue
            moved = self._advance_input(
                decoded["section"], decoded["offset"], entry.input_dir
            )
            if moved is None:
                continue
            cell = decoded["work_var"] * p.bits + decoded["work_bit_pos"]
            cell2 = cell + (1 if entry.work_dir == RIGHT else -1)
            if not 0 <= cell2 < p.work_vars * p.bits:
                continue
            work = list(decoded["work"])
            if entry.write_bit:
                work[decoded["work_var"]] |= 1 << decoded["work_bit_pos"]
            else:
                work[decoded["work_var"]] &= ~(1 << decoded["work_bit_pos"])
            section2, digits2, const_bit2 = self._encode_input(*moved)
            successor = (
                (entry.next_state,)
                + tuple(work)
                + (section2,)
                + digits2
                + (const_bit2,)
                + self.index_digits_of(cell2 // p.bits)
                + (cell2 % p.bits,)
            )
            out.append(successor)
        return out


def config_graph(
    machine: NTMSpec,
    structure: Structure,
    node_limit: int = 1 << 20,
) -> Structure:
    """Digraph over all configuration tuples, rank-indexed, with constants
    s (start node) and t (accept node)."""
    codec = TupleCodec.build(machine, structure.vocab, structure.size)
    p = codec.params
    node_count = p.n**p.tuple_len
    if node_count > node_limit:
        raise MachineError(f"configuration graph has {node_count} nodes, limit {node_limit}")
    edges = []
    for rank in range(node_count):
        config = rank_tuple(rank, p.tuple_len, p.n)
        for successor in codec.successors(config, structure):
            edges.append((rank, tuple_rank(successor, p.n)))
    vocab = Vocabulary(relations=(("E", 2),), constants=("s", "t"))
    return new_structure(
        vocab,
        node_count,
        {"E": set(edges)},
        {"s": 0, "t": node_count - 1},
    )


def graph_accepts(graph: Structure) -> bool:
    """BFS oracle: the accept node is reachable from the start node."""
    succ: dict[int, list[int]] = {}
    for x, y in graph.relation("E").tuples:
        succ.setdefault(x, []).append(y)
    start, goal = graph.constant("s"), graph.constant("t")
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        if node == goal:
            return True
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return goal in seen


# ------------------------------------------------------- edge formula


def _numeral_equals(term: Term, value: int, n: int) -> Formula:
    """Pin a term to a concrete universe element using 0, 1, max, SUC."""
    if value == 0:
        return Eq((term,), (Const("0"),))
    if value == 1:
        return Eq((term,), (Const("1"),))
    if value == n - 1:
        return Eq((term,), (Const("max"),))
    chain: Formula = Eq((term,), (term,))
    previous: Term = Const("1")
    links: list[str] = []
    for step in range(2, value + 1):
        if step == value:
            target = term
        else:
            links.append(f"n{step}")
            target = Var(f"n{step}")
        link = Rel("SUC", (previous, target))
        chain = link if step == 2 else And(chain, link)
        previous = target
    return exists_all(links, chain)


def _bit_literal(holder: Term, bit_index: int, value: int, n: int) -> Formula:
    """BIT fact at a fixed bit position, negated when the bit is 0."""
    if bit_index <= 1:
        atom = Rel("BIT", (holder, Const(str(bit_index))))
    else:
        atom = Exists(
            "bpos",
            And(_numeral_equals(Var("bpos"), bit_index, n), Rel("BIT", (holder, Var("bpos")))),
        )
    return atom if value else Not(atom)


def _source_names(params: Parameters) -> list[str]:
    names = ["cq"]
    names += [f"cw{i}" for i in range(1, params.work_vars + 1)]
    names += ["cs"]
    names += [f"cr{i}" for i in range(1, params.max_arity + 1)]
    names += ["cp"]
    names += [f"cv{i}" for i in range(1, params.index_vars + 1)]
    names += ["cb"]
    return names


def _target_names(params: Parameters) -> list[str]:
    return [name + "_" for name in _source_names(params)]


@dataclass
class EdgeFormula:
    """The transition disjunction together with its component counts."""

    formula: Formula
    source_vars: tuple[str, ...]
    target_vars: tuple[str, ...]
    table_disjuncts: int
    state_part_connectives: list[int]
    input_part_connectives: list[int]
    work_part_connectives: list[int]


def edge_formula(machine: NTMSpec, vocab: Vocabulary, n: int) -> EdgeFormula:
    """Disjunction over the transition table expressing one machine step.

    Each table entry contributes one disjunct: a state part (BIT facts
    pinning both states), an input part (a case split over the sections
    of the input code, reading through the input relations and BIT on
    constants), and a work part (a disjunction over the work variable the
    head sits in, with all other variables framed).  Two normalization
    disjuncts follow the table: accept-state configurations step to the
    all-max tuple and the all-max tuple loops on itself.
    """
    params = Parameters.derive(machine, vocab, n)
    segments = input_segments(vocab, n)
    src = _source_names(params)
    tgt = _target_names(params)
    s_of = dict(zip(_abstract_names(params), src))
    t_of = dict(zip(_abstract_names(params), tgt))

    def sv(name: str) -> Term:
        return Var(s_of[name])

    def tv(name: str) -> Term:
        return Var(t_of[name])

    def state_part(entry: TableEntry) -> Formula:
        literals = []
        for holder, state in ((sv("q"), entry.state), (tv("q"), entry.next_state)):
            for beta in range(params.bits):
                literals.append(
                    _bit_literal(holder, beta, (state >> beta) & 1, n)
                )
        return big_and(literals)

    def digits_srcs(arity: int) -> list[Term]:
        return [sv(f"r{j}") for j in range(1, arity + 1)]

    def digits_tgts(arity: int) -> list[Term]:
        return [tv(f"r{j}") for j in range(1, arity + 1)]

    def pin_all(terms: Sequence[Term], value: int) -> list[Formula]:
        return [_numeral_equals(t, value, n) for t in terms]

    def ripple(source: list[Term], target: list[Term], increment: bool) -> Formula:
        """Digit counter step; most significant digit first."""
        cases = []
        for j in reversed(range(len(source))):
            parts: list[Formula] = []
            for l in range(j + 1, len(source)):
                if increment:
                    parts.append(_numeral_equals(source[l], n - 1, n))
                    parts.append(_numeral_equals(target[l], 0, n))
                else:
                    parts.append(_numeral_equals(source[l], 0, n))
                    parts.append(_numeral_equals(target[l], n - 1, n))
            if increment:
                parts.append(Rel("SUC", (source[j], target[j])))
            else:
                parts.append(Rel("SUC", (target[j], source[j])))
            for l in range(j):
                parts.append(Eq((target[l],), (source[l],)))
            cases.append(big_and(parts))
        return big_or(cases)

    def read_literal(segment: Segment, bit: int, offset_hint: Optional[int]) -> Optional[Formula]:
        if segment.kind == "rel":
            atom = Rel(segment.name, tuple(digits_srcs(segment.arity)))
            return atom if bit else Not(atom)
        if segment.kind == "zero":
            return Top() if bit == 0 else None
        assert offset_hint is not None
        return _bit_literal(Const(segment.name), params.bits - 1 - offset_hint, bit, n)

    def input_part(entry: TableEntry) -> Optional[Formula]:
        cases: list[Formula] = []
        for sec_index, segment in enumerate(segments):
            pin_section_src = _numeral_equals(sv("s"), sec_index, n)
            if segment.kind in ("rel", "zero"):
                literal = read_literal(segment, entry.input_bit, None)
                if literal is None:
                    continue
                unused_src = pin_all(
                    [sv(f"r{j}") for j in range(segment.arity + 1, params.max_arity + 1)], 0
                )
                pin_bitpos = [_numeral_equals(sv("p"), 0, n)]
                common = [pin_section_src, literal] + unused_src + pin_bitpos
                move = entry.input_dir
                # Stay within the section: digit counter step.
                stay = [
                    _numeral_equals(tv("s"), sec_index, n),
                    ripple(digits_srcs(segment.arity), digits_tgts(segment.arity), move == RIGHT),
                    _numeral_equals(tv("p"), 0, n),
                ] + pin_all(
                    [tv(f"r{j}") for j in range(segment.arity + 1, params.max_arity + 1)], 0
                )
                cases.append(big_and(common + stay))
                # Cross the section boundary.
                neighbor = sec_index + 1 if move == RIGHT else sec_index - 1
                if 0 <= neighbor < len(segments):
                    at_edge = pin_all(
                        digits_srcs(segment.arity), n - 1 if move == RIGHT else 0
                    )
                    cases.append(
                        big_and(
                            common
                            + at_edge
                            + _arrival_pins(neighbor, move)
                        )
                    )
            else:
                for offset in range(segment.length):
                    literal = read_literal(segment, entry.input_bit, offset)
                    pins = [
                        pin_section_src,
                        _numeral_equals(sv("p"), offset, n),
                        literal,
                    ] + pin_all(digits_srcs(params.max_arity), 0)
                    move = entry.input_dir
                    landing = offset + 1 if move == RIGHT else offset - 1
                    if 0 <= landing < segment.length:
                        arrive = [
                            _numeral_equals(tv("s"), sec_index, n),
                            _numeral_equals(tv("p"), landing, n),
                        ] + pin_all(digits_tgts(params.max_arity), 0)
                        cases.append(big_and(pins + arrive))
                    else:
                        neighbor = sec_index + 1 if move == RIGHT else sec_index - 1
                        if 0 <= neighbor < len(segments):
                            cases.append(
                                big_and(pins + _arrival_pins(neighbor, move))
                            )
        if not cases:
            return None
        return big_or(cases)

    def _arrival_pins(sec_index: int, move: str) -> list[Formula]:
        """Pins for entering a section from the left (move right) or from
        the right (move left)."""
        segment = segments[sec_index]
        pins = [_numeral_equals(tv("s"), sec_index, n)]
        if segment.kind in ("rel", "zero"):
            value = 0 if move == RIGHT else n - 1
            pins += pin_all(digits_tgts(segment.arity), value)
            pins += pin_all(
                [tv(f"r{j}") for j in range(segment.arity + 1, params.max_arity + 1)], 0
            )
            pins.append(_numeral_equals(tv("p"), 0, n))
        else:
            pins += pin_all(digits_tgts(params.max_arity), 0)
            pins.append(
                _numeral_equals(tv("p"), 0 if move == RIGHT else segment.length - 1, n)
            )
        return pins

    def work_part(entry: TableEntry) -> Optional[Formula]:
        h, bits = params.work_vars, params.bits
        cases = []
        for var_index in range(h):  # 0-based work variable index
            index_pins_src = [
                _numeral_equals(sv(f"v{j + 1}"), digit, n)
                for j, digit in enumerate(_digits(var_index, params))
            ]
            read = (
                Rel("BIT", (sv(f"w{var_index + 1}"), sv("b")))
                if entry.work_bit
                else Not(Rel("BIT", (sv(f"w{var_index + 1}"), sv("b"))))
            )
            write = (
                Rel("BIT", (tv(f"w{var_index + 1}"), sv("b")))
                if entry.write_bit
                else Not(Rel("BIT", (tv(f"w{var_index + 1}"), sv("b"))))
            )
            frame = [
                Eq((tv(f"w{j + 1}"),), (sv(f"w{j + 1}"),))
                for j in range(h)
                if j != var_index
            ]
            other_bits = Forall(
                "ob",
                Implies(
                    Not(Eq((Var("ob"),), (sv("b"),))),
                    Iff(
                        Rel("BIT", (sv(f"w{var_index + 1}"), Var("ob"))),
                        Rel("BIT", (tv(f"w{var_index + 1}"), Var("ob"))),
                    ),
                ),
            )
            for bit_pos in range(bits):
                landing_cell = var_index * bits + bit_pos + (1 if entry.work_dir == RIGHT else -1)
                if not 0 <= landing_cell < h * bits:
                    continue
                landing_var, landing_bit = divmod(landing_cell, bits)
                pins = (
                    index_pins_src
                    + [_numeral_equals(sv("b"), bit_pos, n)]
                    + [read, write, other_bits]
                    + frame
                    + [
                        _numeral_equals(tv(f"v{j + 1}"), digit, n)
                        for j, digit in enumerate(_digits(landing_var, params))
                    ]
                    + [_numeral_equals(tv("b"), landing_bit, n)]
                )
                cases.append(big_and(pins))
        if not cases:
            return None
        return big_or(cases)

    table_disjuncts = []
    psi1_counts, psi2_counts, psi3_counts = [], [], []
    for entry in machine.table:
        psi1 = state_part(entry)
        psi2 = input_part(entry)
        psi3 = work_part(entry)
        if psi2 is None or psi3 is None:
            continue
        table_disjuncts.append(And(psi1, And(psi2, psi3)))
        psi1_counts.append(count_metrics(psi1).connectives)
        psi2_counts.append(count_metrics(psi2).connectives)
        psi3_counts.append(count_metrics(psi3).connectives)

    all_max_src = big_and([_numeral_equals(Var(v), n - 1, n) for v in src])
    all_max_tgt = big_and([_numeral_equals(Var(v), n - 1, n) for v in tgt])
    accept_pin = big_and(
        [
            _bit_literal(sv("q"), beta, (machine.accept >> beta) & 1, n)
            for beta in range(params.bits)
        ]
    )
    normalization = [And(accept_pin, all_max_tgt), And(all_max_src, all_max_tgt)]

    formula = big_or(table_disjuncts + normalization)
    return EdgeFormula(
        formula=formula,
        source_vars=tuple(src),
        target_vars=tuple(tgt),
        table_disjuncts=len(table_disjuncts),
        state_part_connectives=psi1_counts,
        input_part_connectives=psi2_counts,
        work_part_connectives=psi3_counts,
    )


def _digits(value: int, params: Parameters) -> list[int]:
    """Little-endian base-n expansion of a work-variable index, t digits."""
    digits = []
    for _ in range(params.index_vars):
        digits.append(value % params.n)
        value //= params.n
    if value:
        raise MachineError(f"work-variable index {value} does not fit in the index digits")
    return digits


def _abstract_names(params: Parameters) -> list[str]:
    names = ["q"]
    names += [f"w{i}" for i in range(1, params.work_vars + 1)]
    names += ["s"]
    names += [f"r{i}" for i in range(1, params.max_arity + 1)]
    names += ["p"]
    names += [f"v{i}" for i in range(1, params.index_vars + 1)]
    names += ["b"]
    return names


def edge_table(
    edge: EdgeFormula, structure: Structure, params: Parameters
) -> np.ndarray:
    """Boolean adjacency matrix of the edge formula over all tuple pairs."""
    n, g = params.n, params.tuple_len
    count = n**g
    matrix = np.zeros((count, count), dtype=bool)
    env = Assignment()
    tuples = [rank_tuple(rank, g, n) for rank in range(count)]
    for i, source in enumerate(tuples):
        values = dict(zip(edge.source_vars, source))
        for j, target in enumerate(tuples):
            values.update(zip(edge.target_vars, target))
            env.values = values
            if satisfies(structure, edge.formula, env):
                matrix[i, j] = True
    return matrix


# --------------------------------------------------- doubling skeleton


def savitch_formula(i: int) -> Formula:
    """Doubling-reachability formula: five variables, 4i connectives.

    Levels alternate the roles of the pairs (x, y) and (u, v) so that the
    construction never captures a variable and never needs a sixth name.
    """
    if i < 0:
        raise MachineError("skeleton depth must be nonnegative")

    def build(level: int, outer: tuple[str, str], inner: tuple[str, str]) -> Formula:
        ox, oy = outer
        ix, iy = inner
        if level == 0:
            return Rel("E", (Var(ox), Var(oy)))
        guard = Or(
            And(Eq((Var(ix),), (Var(ox),)), Eq((Var(iy),), (Var("z"),))),
            And(Eq((Var(ix),), (Var("z"),)), Eq((Var(iy),), (Var(oy),))),
        )
        sub = build(level - 1, inner, outer)
        return Exists("z", Forall(ix, Forall(iy, Implies(guard, sub))))

    return build(i, ("x", "y"), ("u", "v"))


SKELETON_FREE_PAIR = ("x", "y")


# --------------------------------------------------- compiled sentences


@dataclass
class CompiledSentence:
    sentence: Formula
    machine: NTMSpec
    vocab: Vocabulary
    params: Parameters
    edge: EdgeFormula
    skeleton_depth: int
    skeleton_connectives: int
    counts: MetricReport

    def to_json(self) -> dict:
        return {
            "parameters": {
                "n": self.params.n,
                "bitsPerElement": self.params.bits,
                "workVariables": self.params.work_vars,
                "indexVariables": self.params.index_vars,
                "maxArity": self.params.max_arity,
                "tupleLength": self.params.tuple_len,
                "skeletonDepth": self.skeleton_depth,
            },
            "counts": {
                "connectives": self.counts.connectives,
                "distinctVariables": self.counts.distinct_variables,
                "forallSymbols": self.counts.forall_symbols,
                "existsSymbols": self.counts.exists_symbols,
                "skeletonConnectives": self.skeleton_connectives,
                "tableDisjuncts": self.edge.table_disjuncts,
                "statePartConnectives": self.edge.state_part_connectives,
                "inputPartConnectives": self.edge.input_part_connectives,
                "workPartConnectives": self.edge.work_part_connectives,
            },
        }


def compile_sentence(machine: NTMSpec, vocab: Vocabulary, n: int) -> CompiledSentence:
    """Assemble the reachability sentence for one machine and input size.

    The doubling skeleton of depth g*ceil(log2 n) is widened so every
    variable becomes a configuration tuple, its single edge atom becomes
    the transition disjunction, and the two free tuples are pinned to the
    all-zero and all-max configurations.
    """
    params = Parameters.derive(machine, vocab, n)
    edge = edge_formula(machine, vocab, n)
    depth = params.tuple_len * params.bits
    skeleton = savitch_formula(depth)
    g = params.tuple_len

    def widen(name: str) -> tuple[Term, ...]:
        return tuple(Var(f"{name}__{i}") for i in range(1, g + 1))

    wide: dict[str, tuple[Term, ...]] = {name: widen(name) for name in ("x", "y", "z", "u", "v")}

    def translate(node: Formula) -> Formula:
        if isinstance(node, Rel):
            assert node.name == "E"
            left, right = node.args
            flat = wide[left.name] + wide[right.name]
            names = edge.source_vars + edge.target_vars
            return substitute(edge.formula, {nm: t for nm, t in zip(names, flat)})
        if isinstance(node, Eq):
            (left,), (right,) = node.lhs, node.rhs
            return Eq(wide[left.name], wide[right.name])
        if isinstance(node, Not):
            return Not(translate(node.sub))
        if isinstance(node, (And, Or, Implies, Iff)):
            return type(node)(translate(node.left), translate(node.right))
        if isinstance(node, Exists):
            return exists_all([v.name for v in wide[node.var]], translate(node.sub))
        if isinstance(node, Forall):
            out = translate(node.sub)
            for v in reversed(wide[node.var]):
                out = Forall(v.name, out)
            return out
        raise MachineError(f"unexpected node in skeleton {node!r}")

    widened = translate(skeleton)
    free_x, free_y = SKELETON_FREE_PAIR
    pin = {}
    for component in wide[free_x]:
        pin[component.name] = Const("0")
    for component in wide[free_y]:
        pin[component.name] = Const("max")
    sentence = substitute(widened, pin)
    return CompiledSentence(
        sentence=sentence,
        machine=machine,
        vocab=vocab,
        params=params,
        edge=edge,
        skeleton_depth=depth,
        skeleton_connectives=4 * depth,
        counts=count_metrics(sentence),
    )


def sentence_truth(compiled: CompiledSentence, structure: Structure) -> bool:
    """Truth of the compiled sentence on an input structure.

    The edge disjunction is evaluated by the generic satisfaction relation
    on every pair of configuration tuples; the doubling skeleton is then
    folded at the relation level (each level squares the walk relation),
    which is the semantics the skeleton is separately verified to have.
    """
    if structure.vocab != compiled.vocab or structure.size != compiled.params.n:
        raise MachineError("compiled sentence applied to a mismatched input")
    matrix = edge_table(compiled.edge, structure, compiled.params)
    walks = matrix
    for _ in range(compiled.skeleton_depth):
        walks = (walks.astype(np.uint8) @ walks.astype(np.uint8)) > 0
    return bool(walks[0, -1])


# ------------------------------------------------------------- JSON I/O


def machine_from_json(data: dict) -> NTMSpec:
    table = []
    for pre, post in data["table"]:
        state, input_bit, work_bit = pre
        next_state, input_dir, write_bit, work_dir = post
        table.append(
            TableEntry(state, input_bit, work_bit, next_state, input_dir, write_bit, work_dir)
        )
    return NTMSpec(
        states=int(data["states"]),
        accept=int(data["accept"]),
        space_coefficient=int(data["m"]),
        bound=str(data.get("f", "logn")),
        table=tuple(table),
    )


def machine_to_json(machine: NTMSpec) -> dict:
    return {
        "states": machine.states,
        "accept": machine.accept,
        "m": machine.space_coefficient,
        "f": machine.bound,
        "table": [
            [
                [e.state, e.input_bit, e.work_bit],
                [e.next_state, e.input_dir, e.write_bit, e.work_dir],
            ]
            for e in machine.table
        ],
    }


def load_machine(path: str) -> NTMSpec:
    with open(path) as handle:
        return machine_from_json(json.load(handle))
