"""Finite relational structures over universes {0..n-1}.

A :class:`Vocabulary` lists relation symbols (with arities) and constant
symbols, and may additionally enable the numeric built-ins
``<, PLUS, TIMES, BIT, SUC`` and constants ``0, 1, max``, whose
interpretations are forced by integer arithmetic on the universe.
A :class:`Structure` interprets every declared symbol; a :class:`Relation`
is a set of tuples with a canonical dense-bit representation indexed by
the row-major tuple rank ``i1*n^(k-1) + ... + ik``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence


BUILTIN_RELATIONS: dict[str, int] = {
    "<": 2,
    "PLUS": 3,
    "TIMES": 3,
    "BIT": 2,
    "SUC": 2,
}
BUILTIN_CONSTANTS: tuple[str, ...] = ("0", "1", "max")


class StructureError(ValueError):
    """Invalid vocabulary, interpretation, or operation argument."""


@dataclass(frozen=True)
class Vocabulary:
    """A finite signature of relation and constant symbols.

    ``relations`` holds the declared (non-built-in) symbols as
    ``(name, arity)`` pairs in declaration order; declaration order fixes
    the serialization order used by :func:`encode_binary`.  When
    ``builtins`` is true the numeric symbols are implicitly present as
    well and structures must have at least two elements.
    """

    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()
    builtins: bool = False

    def __post_init__(self) -> None:
        names = [name for name, _ in self.relations] + list(self.constants)
        if self.builtins:
            names += list(BUILTIN_RELATIONS) + list(BUILTIN_CONSTANTS)
        if len(names) != len(set(names)):
            raise StructureError(f"duplicate symbol names in vocabulary: {names}")
        for name, arity in self.relations:
            if not isinstance(arity, int) or arity < 1:
                raise StructureError(f"relation {name!r} must have arity >= 1, got {arity}")

    def relation_arity(self, name: str) -> Optional[int]:
        for rel, arity in self.relations:
            if rel == name:
                return arity
        if self.builtins and name in BUILTIN_RELATIONS:
            return BUILTIN_RELATIONS[name]
        return None

    def constant_names(self) -> tuple[str, ...]:
        if self.builtins:
            return self.constants + BUILTIN_CONSTANTS
        return self.constants

    def has_symbol(self, name: str) -> bool:
        return self.relation_arity(name) is not None or name in self.constant_names()


def tuple_rank(tup: Sequence[int], n: int) -> int:
    """Row-major rank of a tuple over {0..n-1}: i1*n^(k-1) + ... + ik."""
    rank = 0
    for value in tup:
        rank = rank * n + value
    return rank


def rank_tuple(rank: int, arity: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(rank % n)
        rank //= n
    return tuple(reversed(out))


@dataclass(frozen=True)
class Relation:
    """A k-ary relation on {0..n-1} as an immutable tuple set."""

    arity: int
    size: int
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        for tup in self.tuples:
            if len(tup) != self.arity:
                raise StructureError(f"tuple {tup} does not have arity {self.arity}")
            for entry in tup:
                if not 0 <= entry < self.size:
                    raise StructureError(f"entry {entry} out of range [0, {self.size})")

    @staticmethod
    def empty(arity: int, size: int) -> "Relation":
        return Relation(arity, size, frozenset())

    @staticmethod
    def from_tuples(arity: int, size: int, tuples: Iterable[Sequence[int]]) -> "Relation":
        return Relation(arity, size, frozenset(tuple(t) for t in tuples))

    @staticmethod
    def from_bits(arity: int, size: int, bits: str) -> "Relation":
        if len(bits) != size**arity:
            raise StructureError(f"expected {size ** arity} bits, got {len(bits)}")
        tuples = frozenset(
            rank_tuple(rank, arity, size) for rank, bit in enumerate(bits) if bit == "1"
        )
        return Relation(arity, size, tuples)

    def bits(self) -> str:
        """Dense representation: bit at each tuple rank, rank-ascending."""
        out = ["0"] * self.size**self.arity
        for tup in self.tuples:
            out[tuple_rank(tup, self.size)] = "1"
        return "".join(out)

    def __contains__(self, tup: Sequence[int]) -> bool:
        return tuple(tup) in self.tuples

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)


class Structure:
    """A finite structure: universe {0..size-1} plus interpretations.

    Instances are immutable after construction and safe to share across
    threads.  Built-in numeric relations are answered arithmetically by
    :meth:`holds` rather than materialized.
    """

    __slots__ = ("vocab", "size", "_relations", "_constants")

    def __init__(
        self,
        vocab: Vocabulary,
        size: int,
        relations: dict[str, Relation],
        constants: dict[str, int],
    ):
        self.vocab = vocab
        self.size = size
        self._relations = dict(relations)
        self._constants = dict(constants)

    @property
    def universe(self) -> range:
        return range(self.size)

    def holds(self, name: str, tup: Sequence[int]) -> bool:
        """Membership query for a relation symbol, built-ins included."""
        rel = self._relations.get(name)
        if rel is not None:
            return tuple(tup) in rel.tuples
        if self.vocab.builtins and name in BUILTIN_RELATIONS:
            return self._builtin_holds(name, tuple(tup))
        raise StructureError(f"unknown relation symbol {name!r}")

    def _builtin_holds(self, name: str, tup: tuple[int, ...]) -> bool:
        if name == "<":
            return tup[0] < tup[1]
        if name == "SUC":
            return tup[1] == tup[0] + 1
        if name == "PLUS":
            return tup[0] + tup[1] == tup[2]
        if name == "TIMES":
            return tup[0] * tup[1] == tup[2]
        if name == "BIT":
            return (tup[0] >> tup[1]) & 1 == 1
        raise StructureError(f"unknown built-in {name!r}")

    def relation(self, name: str) -> Relation:
        """The full tuple set for a relation symbol (materializes built-ins)."""
        rel = self._relations.get(name)
        if rel is not None:
            return rel
        arity = self.vocab.relation_arity(name)
        if arity is None:
            raise StructureError(f"unknown relation symbol {name!r}")
        tuples = frozenset(
            tup for tup in product(self.universe, repeat=arity) if self._builtin_holds(name, tup)
        )
        return Relation(arity, self.size, tuples)

    def constant(self, name: str) -> int:
        if name in self._constants:
            return self._constants[name]
        if self.vocab.builtins:
            if name == "0":
                return 0
            if name == "1":
                return 1
            if name == "max":
                return self.size - 1
        raise StructureError(f"unknown constant symbol {name!r}")

    def declared_relations(self) -> dict[str, Relation]:
        return dict(self._relations)

    def is_ordered(self) -> bool:
        """True when < is present and is the natural order on the universe."""
        if self.vocab.builtins:
            return True
        if self.vocab.relation_arity("<") != 2:
            return False
        natural = {(i, j) for i in self.universe for j in self.universe if i < j}
        return self._relations["<"].tuples == frozenset(natural)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.size == other.size
            and self._relations == other._relations
            and self._constants == other._constants
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.vocab,
                self.size,
                frozenset(self._relations.items()),
                frozenset(self._constants.items()),
            )
        )

    def __repr__(self) -> str:
        rels = {name: sorted(rel.tuples) for name, rel in self._relations.items()}
        return f"Structure(size={self.size}, relations={rels}, constants={self._constants})"


def new_structure(
    vocab: Vocabulary,
    size: int,
    rel_interps: Optional[dict[str, Iterable[Sequence[int]]]] = None,
    const_interps: Optional[dict[str, int]] = None,
) -> Structure:
    """Build and validate a structure.

    Every non-built-in symbol needs an interpretation; built-ins are
    answered arithmetically.  Enabling built-ins requires size >= 2 so
    that 0 and 1 are distinct elements.
    """
    rel_interps = rel_interps or {}
    const_interps = const_interps or {}
    if size < 1:
        raise StructureError("structures must have a nonempty universe")
    if vocab.builtins and size < 2:
        raise StructureError("built-in numerics require at least two elements (0 and 1)")
    relations: dict[str, Relation] = {}
    for name, arity in vocab.relations:
        if name not in rel_interps:
            raise StructureError(f"missing interpretation for relation {name!r}")
        relations[name] = Relation.from_tuples(arity, size, rel_interps[name])
    for name in rel_interps:
        if vocab.relation_arity(name) is None or (
            vocab.builtins and name in BUILTIN_RELATIONS
        ):
            raise StructureError(f"interpretation given for undeclared relation {name!r}")
    constants: dict[str, int] = {}
    for name in vocab.constants:
        if name not in const_interps:
            raise StructureError(f"missing interpretation for constant {name!r}")
        value = const_interps[name]
        if not 0 <= value < size:
            raise StructureError(f"constant {name!r} = {value} out of range [0, {size})")
        constants[name] = value
    for name in const_interps:
        if name not in vocab.constants:
            raise StructureError(f"interpretation given for undeclared constant {name!r}")
    return Structure(vocab, size, relations, constants)


def linear_order(n: int, minmax: bool = False) -> Structure:
    """The n-element ordering, optionally with min/max constants."""
    vocab = Vocabulary(
        relations=(("<", 2),),
        constants=("min", "max") if minmax else (),
    )
    less = [(i, j) for i in range(n) for j in range(n) if i < j]
    consts = {"min": 0, "max": n - 1} if minmax else {}
    return new_structure(vocab, n, {"<": less}, consts)


def builtin_order(n: int) -> Structure:
    """The unique structure of size n over the built-ins-only vocabulary."""
    return new_structure(Vocabulary(builtins=True), n)


def path_digraph(n: int, endpoints: bool = False) -> Structure:
    """Directed path 0 -> 1 -> ... -> n-1, optionally with endpoint constants s, t."""
    vocab = Vocabulary(relations=(("E", 2),), constants=("s", "t") if endpoints else ())
    edges = [(i, i + 1) for i in range(n - 1)]
    consts = {"s": 0, "t": n - 1} if endpoints else {}
    return new_structure(vocab, n, {"E": edges}, consts)


def cycle_graph(l: int) -> Structure:
    """Undirected cycle on the l+1 vertices {0..l}.

    Edge set is {(i, i+1)} with its swaps, closed by the wrap-around pair
    (0, l).  The length parameter must be at least 1.
    """
    if l < 1:
        raise StructureError("cycle length parameter must be >= 1")
    edges = set()
    for i in range(l):
        edges.add((i, i + 1))
        edges.add((i + 1, i))
    edges.add((0, l))
    edges.add((l, 0))
    return new_structure(Vocabulary(relations=(("E", 2),)), l + 1, {"E": edges})


def word_structure(text: str, alphabet: Sequence[str] = ("0", "1")) -> Structure:
    """Ordered structure for a word: one position per character.

    For the binary alphabet ('0', '1') a single unary relation R marks
    the positions carrying '1'.  For any other alphabet there is one
    unary relation per symbol, named 'R' + symbol.
    """
    if not text:
        raise StructureError("words must be nonempty")
    alphabet = tuple(alphabet)
    for ch in text:
        if ch not in alphabet:
            raise StructureError(f"character {ch!r} outside alphabet {alphabet}")
    n = len(text)
    less = [(i, j) for i in range(n) for j in range(n) if i < j]
    if alphabet == ("0", "1"):
        rel_names = [("R", "1")]
    else:
        rel_names = [(f"R{sym}", sym) for sym in alphabet]
    vocab = Vocabulary(relations=(("<", 2),) + tuple((name, 1) for name, _ in rel_names))
    interps: dict[str, Iterable[Sequence[int]]] = {"<": less}
    for name, sym in rel_names:
        interps[name] = [(i,) for i, ch in enumerate(text) if ch == sym]
    return new_structure(vocab, n, interps)


def disjoint_union(a: Structure, b: Structure) -> Structure:
    """Disjoint union of two structures over the same relational vocabulary.

    B's elements are shifted up by |A|; relations are the unions of the
    shifted copies.  Constants and built-ins are not supported because
    there is no canonical choice for them in the union.
    """
    if a.vocab != b.vocab:
        raise StructureError("disjoint union requires identical vocabularies")
    if a.vocab.constants or a.vocab.builtins:
        raise StructureError("disjoint union requires a relational vocabulary")
    shift = a.size
    rels = {}
    for name, arity in a.vocab.relations:
        shifted = {tuple(e + shift for e in tup) for tup in b.relation(name).tuples}
        rels[name] = a.relation(name).tuples | shifted
    return new_structure(a.vocab, a.size + b.size, rels)


def encode_binary(a: Structure) -> str:
    """Canonical bit-string encoding of an ordered structure.

    Concatenates one n^arity-bit block per declared relation (declaration
    order, bit at each row-major tuple rank; the order relation < and all
    built-ins are numeric and omitted) followed by one big-endian
    ceil(log2 n)-bit block per declared constant.  When no relation other
    than < is declared, an all-zero n-bit block is prepended so the code
    is never shorter than the structure.
    """
    if not a.is_ordered():
        raise StructureError("binary encoding requires an ordered structure")
    n = a.size
    blocks: list[str] = []
    serialized = [
        (name, arity)
        for name, arity in a.vocab.relations
        if name != "<"
    ]
    for name, _arity in serialized:
        blocks.append(a.relation(name).bits())
    if not serialized:
        blocks.append("0" * n)
    width = max(n - 1, 1).bit_length() if n > 1 else 0
    for name in a.vocab.constants:
        value = a.constant(name)
        blocks.append(format(value, "b").zfill(width) if width else "")
    return "".join(blocks)


def encoding_length(a: Structure) -> int:
    """Predicted length of :func:`encode_binary`: sum of n^a_i plus s*ceil(log2 n)."""
    n = a.size
    arities = [arity for name, arity in a.vocab.relations if name != "<"]
    rel_bits = sum(n**arity for arity in arities) if arities else n
    width = max(n - 1, 1).bit_length() if n > 1 else 0
    return rel_bits + len(a.vocab.constants) * width


def partial_isomorphism_failure(
    a: Structure, b: Structure, pairs: Iterable[tuple[int, int]]
) -> Optional[str]:
    """None when the pair list is a partial isomorphism, else a diagnostic.

    The map must be well-defined and injective, send every constant of A
    to the corresponding constant of B, and preserve and reflect every
    relation symbol (built-ins included) on its domain.
    """
    pairs = list(pairs)
    mapping: dict[int, int] = {}
    inverse: dict[int, int] = {}
    for left, right in pairs:
        if not (0 <= left < a.size and 0 <= right < b.size):
            return f"pair ({left}, {right}) out of range"
        if left in mapping and mapping[left] != right:
            return f"element {left} mapped to both {mapping[left]} and {right}"
        if right in inverse and inverse[right] != left:
            return f"elements {inverse[right]} and {left} both map to {right}"
        mapping[left] = right
        inverse[right] = left
    for name in a.vocab.constant_names():
        ca, cb = a.constant(name), b.constant(name)
        if ca not in mapping or mapping[ca] != cb:
            return f"constant {name} = {ca} is not mapped to {cb}"
    domain = sorted(mapping)
    rel_names = [name for name, _ in a.vocab.relations]
    if a.vocab.builtins:
        rel_names += list(BUILTIN_RELATIONS)
    for name in rel_names:
        arity = a.vocab.relation_arity(name)
        for tup in product(domain, repeat=arity):
            image = tuple(mapping[e] for e in tup)
            if a.holds(name, tup) != b.holds(name, image):
                held = "holds" if a.holds(name, tup) else "fails"
                return f"{name}{tup} {held} in the left structure but not for {image}"
    return None


def is_partial_isomorphism(
    a: Structure, b: Structure, pairs: Iterable[tuple[int, int]]
) -> bool:
    return partial_isomorphism_failure(a, b, pairs) is None


def enumeration_size(vocab: Vocabulary, n: int) -> int:
    """Exact number of structures of size n over the vocabulary."""
    count = 1
    for _name, arity in vocab.relations:
        count *= 2 ** (n**arity)
    count *= n ** len(vocab.constants)
    return count


def enumerate_structures(vocab: Vocabulary, n: int, limit: int = 1 << 24) -> Iterator[Structure]:
    """Yield every structure of size n over the vocabulary, exactly once.

    Built-ins are fixed by arithmetic so only declared symbols vary.  The
    search space (product of 2^(n^arity) over relations times n per
    constant) must not exceed ``limit``.
    """
    space = enumeration_size(vocab, n)
    if space > limit:
        raise StructureError(
            f"enumeration space {space} exceeds limit {limit} for size {n}"
        )
    rel_symbols = list(vocab.relations)
    const_names = list(vocab.constants)

    def all_relations(arity: int) -> Iterator[Relation]:
        ranks = n**arity
        for mask in range(2**ranks):
            tuples = frozenset(
                rank_tuple(r, arity, n) for r in range(ranks) if (mask >> r) & 1
            )
            yield Relation(arity, n, tuples)

    for const_values in product(range(n), repeat=len(const_names)):
        consts = dict(zip(const_names, const_values))
        for rels in product(*(all_relations(arity) for _name, arity in rel_symbols)):
            interp = {name: rel for (name, _), rel in zip(rel_symbols, rels)}
            yield Structure(vocab, n, interp, consts)


def structure_to_json(a: Structure) -> dict:
    return {
        "vocab": {
            "relations": [[name, arity] for name, arity in a.vocab.relations],
            "constants": list(a.vocab.constants),
            "builtins": a.vocab.builtins,
        },
        "size": a.size,
        "relations": {
            name: [list(t) for t in rel.sorted_tuples()]
            for name, rel in a.declared_relations().items()
        },
        "constants": {name: a.constant(name) for name in a.vocab.constants},
    }


def structure_from_json(data: dict) -> Structure:
    vocab = Vocabulary(
        relations=tuple((name, arity) for name, arity in data["vocab"]["relations"]),
        constants=tuple(data["vocab"].get("constants", ())),
        builtins=bool(data["vocab"].get("builtins", False)),
    )
    rels = {name: [tuple(t) for t in tuples] for name, tuples in data.get("relations", {}).items()}
    return new_structure(vocab, data["size"], rels, dict(data.get("constants", {})))


def load_structure(path: str) -> Structure:
    with open(path) as handle:
        return structure_from_json(json.load(handle))


def dump_structure(a: Structure, path: str) -> None:
    with open(path, "w") as handle:
        json.dump(structure_to_json(a), handle, indent=2)
        handle.write("\n")
