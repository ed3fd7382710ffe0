"""Formula-to-formula compilation passes.

Three families live here:

* guarded quantifier blocks: a positive first-order body is rewritten as
  a prefix of guarded quantifiers over a single relation atom, whose
  r-fold iteration computes the r-th stage of the body;
* stage unfolding: first-order formulas defining the r-th stage with a
  fixed variable budget, together with the recurrence counting their
  connectives, and the finite disjunction equivalent to a partial fixed
  point against a known depth bound;
* first-order interpretations: structure transformers given by defining
  formulas, applied directly or dually (rewriting a formula over the
  target vocabulary into one over the source vocabulary).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import count, product
from typing import Callable, Iterable, Optional, Sequence

from .evaluation import Assignment, satisfies
from .formulas import (
    And,
    Bot,
    Const,
    Eq,
    Exists,
    Fixpoint,
    Forall,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    SimFixpoint,
    Term,
    Top,
    Var,
    _variable_names,
    big_and,
    big_or_seeded,
    count_occurrences,
    exists_all,
    forall_all,
    free_vars,
    is_positive_in,
    nnf,
    replace_relation_atoms,
    substitute,
)
from .parser import parse
from .structures import (
    BUILTIN_RELATIONS,
    Relation,
    Structure,
    StructureError,
    Vocabulary,
    tuple_rank,
)


class TransformError(ValueError):
    pass


# ------------------------------------------------- quantifier blocks


@dataclass(frozen=True)
class QBEntry:
    quantifier: str  # "E" or "A"
    var: str
    guard: Formula  # quantifier-free, free of the iterated relation


@dataclass(frozen=True)
class QuantifierBlock:
    """Guarded prefix with a final guarded block rebinding the target tuple.

    Under the reading (E x, M) psi = E x.(M & psi) and
    (A x, M) psi = A x.(M -> psi), the block applied to a relation atom
    is equivalent to the body it was derived from.
    """

    prefix: tuple[QBEntry, ...]
    final_vars: tuple[str, ...]
    final_guard: Formula
    rel: str

    @property
    def arity(self) -> int:
        return len(self.final_vars)

    def formula(self) -> Formula:
        """The block written out over the relation atom."""
        core: Formula = And(self.final_guard, Rel(self.rel, tuple(Var(v) for v in self.final_vars)))
        out = exists_all(self.final_vars, core)
        for entry in reversed(self.prefix):
            if entry.quantifier == "E":
                out = Exists(entry.var, And(entry.guard, out))
            else:
                out = Forall(entry.var, Implies(entry.guard, out))
        return out


def _is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return True
    if isinstance(phi, Not):
        return _is_quantifier_free(phi.sub)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return _is_quantifier_free(phi.left) and _is_quantifier_free(phi.right)
    return False


def _standardize_apart(phi: Formula, taken: set[str], fresh: Iterable[str]) -> Formula:
    """Rename bound variables so every quantifier binds a distinct name."""
    fresh_iter = iter(fresh)

    def walk(node: Formula) -> Formula:
        if isinstance(node, (Top, Bot, Eq, Rel)):
            return node
        if isinstance(node, Not):
            return Not(walk(node.sub))
        if isinstance(node, (And, Or, Implies, Iff)):
            return type(node)(walk(node.left), walk(node.right))
        if isinstance(node, (Exists, Forall)):
            if node.var in taken:
                new = next(fresh_iter)
                taken.add(new)
                body = substitute(node.sub, {node.var: Var(new)})
                return type(node)(new, walk(body))
            taken.add(node.var)
            return type(node)(node.var, walk(node.sub))
        raise TransformError("quantifier blocks are built from first-order bodies")

    return walk(phi)


def to_quantifier_block(body: Formula, rel: str, vars_: Sequence[str]) -> QuantifierBlock:
    """Rewrite a positive first-order body as a guarded quantifier block.

    The construction follows the inductive shape of the body after
    negation normal form: a relation atom turns into two existential
    blocks matching terms through a fresh tuple; a quantifier-free
    relation-free part becomes a universally guarded vacuous block; and
    conjunction/disjunction cases merge two blocks behind a fresh switch
    variable tested against the constants 0 and 1, so evaluating the
    result requires structures interpreting 0 and 1.
    """
    vars_ = tuple(vars_)
    k = len(vars_)
    if not is_positive_in(body, rel):
        raise TransformError(f"body is not positive in {rel}")
    normal = nnf(body)

    names = count(1)
    taken = set(_variable_names(normal)) | set(vars_)

    def fresh_stream(prefix: str):
        while True:
            candidate = f"{prefix}{next(names)}"
            if candidate not in taken:
                taken.add(candidate)
                yield candidate

    normal = _standardize_apart(normal, set(taken), fresh_stream("q"))
    taken |= set(_variable_names(normal))
    zs = fresh_stream("q")

    def fresh(n: int) -> list[str]:
        return [next(zs) for _ in range(n)]

    target_atoms = [Var(v) for v in vars_]

    def build(phi: Formula) -> tuple[list[QBEntry], Formula]:
        """Returns (prefix entries, final guard)."""
        if isinstance(phi, Rel) and phi.name == rel:
            if len(phi.args) != k:
                raise TransformError(f"{rel} applied with arity {len(phi.args)}, expected {k}")
            block_vars = fresh(k)
            match_terms = big_and(
                [Eq((Var(z),), (t,)) for z, t in zip(block_vars, phi.args)]
            )
            entries = [
                QBEntry("E", z, Top() if i + 1 < k else match_terms)
                for i, z in enumerate(block_vars)
            ]
            final_guard = big_and(
                [Eq((Var(x),), (Var(z),)) for x, z in zip(vars_, block_vars)]
            )
            return entries, final_guard
        if _is_quantifier_free(phi) and count_occurrences(phi, rel) == 0:
            guard_var = fresh(1)[0]
            entries = [QBEntry("A", guard_var, Not(phi))]
            final_guard = Not(Eq((target_atoms[0],), (target_atoms[0],)))
            return entries, final_guard
        if isinstance(phi, Exists):
            entries, final_guard = build(phi.sub)
            head = QBEntry("E", phi.var, Eq((Var(phi.var),), (Var(phi.var),)))
            return [head] + entries, final_guard
        if isinstance(phi, Forall):
            entries, final_guard = build(phi.sub)
            head = QBEntry("A", phi.var, Eq((Var(phi.var),), (Var(phi.var),)))
            return [head] + entries, final_guard
        if isinstance(phi, (And, Or)):
            left_entries, left_final = build(phi.left)
            right_entries, right_final = build(phi.right)
            switch = fresh(1)[0]
            zero, one = Const("0"), Const("1")
            switch_is_zero = Eq((Var(switch),), (zero,))
            switch_is_one = Eq((Var(switch),), (one,))
            left_entries = [
                QBEntry(e.quantifier, e.var, Or(e.guard, switch_is_zero))
                for e in left_entries
            ]
            right_entries = [
                QBEntry(e.quantifier, e.var, Or(e.guard, switch_is_one))
                for e in right_entries
            ]
            mids = fresh(k)
            mid_subst = {x: Var(u) for x, u in zip(vars_, mids)}
            theta = Or(
                And(switch_is_one, substitute(left_final, mid_subst)),
                And(switch_is_zero, substitute(right_final, mid_subst)),
            )
            mid_entries = [
                QBEntry("E", u, Top() if i + 1 < k else theta)
                for i, u in enumerate(mids)
            ]
            rho = big_and([Eq((Var(u),), (Var(x),)) for u, x in zip(mids, vars_)])
            switch_guard = Or(switch_is_zero, switch_is_one)
            head = QBEntry("A" if isinstance(phi, And) else "E", switch, switch_guard)
            return (
                [head] + left_entries + right_entries + mid_entries,
                rho,
            )
        raise TransformError(f"unsupported shape in quantifier-block construction: {phi!r}")

    entries, final_guard = build(normal)
    return QuantifierBlock(tuple(entries), vars_, final_guard, rel)


def iterate_qb(
    structure: Structure,
    qb: QuantifierBlock,
    r: int,
    seed: Optional[Relation] = None,
) -> Relation:
    """Apply the guarded prefix r times over the seed relation.

    The repeated formula is never materialized; each round evaluates the
    single block against the previous round's relation, which is exactly
    what iterating the written-out block would compute.
    """
    arity = qb.arity
    current = seed if seed is not None else Relation.empty(arity, structure.size)
    if current.arity != arity:
        raise TransformError(f"seed arity {current.arity} does not match block arity {arity}")
    phi = qb.formula()
    for _ in range(r):
        env = Assignment(relations={qb.rel: current})
        tuples = []
        for tup in product(structure.universe, repeat=arity):
            env.values = dict(zip(qb.final_vars, tup))
            if satisfies(structure, phi, env):
                tuples.append(tup)
        current = Relation.from_tuples(arity, structure.size, tuples)
    return current


# ------------------------------------------------------ stage unfolding


def unfold_stage_formula(
    body: Formula, rel: str, vars_: Sequence[str], n: int
) -> Formula:
    """First-order formula defining the n-th stage of the body.

    Each atom ``rel(t)`` is replaced by a double rebinding through a
    fresh tuple, so the result reuses the body's variables plus one fresh
    tuple: the variable budget stays fixed no matter how large n grows.
    Stage formulas are shared, so the returned tree is a DAG.
    """
    vars_ = tuple(vars_)
    s = len(vars_)
    if isinstance(body, (Fixpoint, SimFixpoint)) or _contains_fixpoint(body):
        raise TransformError("stage unfolding needs a first-order body")
    taken = set(_variable_names(body)) | set(vars_)
    ys = []
    index = 1
    while len(ys) < s:
        candidate = f"y{index}"
        if candidate not in taken:
            ys.append(candidate)
            taken.add(candidate)
        index += 1

    current: Formula = Not(Eq((Var(vars_[0]),), (Var(vars_[0]),)))
    for _ in range(n):
        previous = current

        def wrap(args: tuple[Term, ...], prev=previous) -> Formula:
            if len(args) != s:
                raise TransformError(
                    f"{rel} applied with arity {len(args)}, expected {s}"
                )
            inner = exists_all(
                list(vars_),
                And(Eq(tuple(Var(x) for x in vars_), tuple(Var(y) for y in ys)), prev),
            )
            return exists_all(
                ys, And(Eq(tuple(Var(y) for y in ys), tuple(args)), inner)
            )

        current = replace_relation_atoms(body, rel, wrap)
    return current


def _contains_fixpoint(phi: Formula) -> bool:
    if isinstance(phi, (Fixpoint, SimFixpoint)):
        return True
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return False
    if isinstance(phi, Not):
        return _contains_fixpoint(phi.sub)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return _contains_fixpoint(phi.left) or _contains_fixpoint(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return _contains_fixpoint(phi.sub)
    raise TransformError(f"unknown node {phi!r}")


def forall_count_h(l: int, m: int, i: int) -> int:
    """Connective count of the i-th unfolded stage formula.

    For a body with l connectives and m occurrences of the iterated
    relation variable: h(0) = 0 and h(i+1) = l + m*(2 + h(i)); the closed
    form is l + (l+2)*(m + ... + m^(i-1)) + 2*m^i for i >= 1.
    """
    if l < 0 or m < 0 or i < 0:
        raise TransformError("counts must be nonnegative")
    value = 0
    for _ in range(i):
        value = l + m * (2 + value)
    return value


def forall_count_h_closed(l: int, m: int, i: int) -> int:
    if i == 0:
        return 0
    return l + (l + 2) * sum(m**j for j in range(1, i)) + 2 * m**i


def pfp_disjunction_sentence(
    body: Formula,
    rel: str,
    vars_: Sequence[str],
    args: Sequence[Term],
    t: int,
) -> Formula:
    """Finite disjunction equivalent to the partial fixed point applied to
    the given terms, on structures whose stage sequence settles (or is
    known to cycle) within t steps.

    Disjunct i states that stages i and i+1 agree everywhere and that the
    terms lie in stage i.  The disjunction is folded with the empty
    disjunction F as its seed, so each of the t+1 disjuncts contributes
    exactly one or-symbol.
    """
    vars_ = tuple(vars_)
    stages = [unfold_stage_formula(body, rel, vars_, i) for i in range(t + 2)]
    subst = {x: term for x, term in zip(vars_, args)}
    disjuncts = []
    for i in range(t + 1):
        agree = forall_all(vars_, Iff(stages[i], stages[i + 1]))
        here = substitute(stages[i], subst)
        disjuncts.append(And(agree, here))
    return big_or_seeded(disjuncts)


# ------------------------------------------------------- interpretations


@dataclass
class Interpretation:
    """A width-k first-order structure transformer.

    ``universe`` is a formula over v1..vk; a relation formula for an
    a-ary target symbol ranges over v1..v(a*k) (one block of k per
    argument position); a constant formula ranges over v1..vk and must
    pick exactly one universe tuple on every structure it is applied to.
    """

    width: int
    universe: Formula
    relations: dict[str, tuple[int, Formula]]  # name -> (arity, formula)
    constants: dict[str, Formula]
    target_builtins: bool = False

    def target_vocabulary(self) -> Vocabulary:
        return Vocabulary(
            relations=tuple((name, arity) for name, (arity, _) in self.relations.items()),
            constants=tuple(self.constants.keys()),
            builtins=self.target_builtins,
        )


def _block_vars(prefix: str, count_: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(1, count_ + 1)]


def apply_interpretation(interp: Interpretation, structure: Structure) -> Structure:
    """Build the image structure on the definable subset of k-tuples.

    The new universe is the set of width-k tuples satisfying the
    universe formula, re-indexed 0..N-1 in tuple-rank order.
    """
    k = interp.width
    names = _block_vars("v", k)
    tuples = []
    for tup in product(structure.universe, repeat=k):
        if satisfies(structure, interp.universe, Assignment(values=dict(zip(names, tup)))):
            tuples.append(tup)
    tuples.sort(key=lambda tup: tuple_rank(tup, structure.size))
    if not tuples:
        raise TransformError("interpretation defines an empty universe")
    index = {tup: i for i, tup in enumerate(tuples)}

    relations: dict[str, Iterable[Sequence[int]]] = {}
    for name, (arity, phi) in interp.relations.items():
        all_names = _block_vars("v", arity * k)
        rows = []
        for combo in product(tuples, repeat=arity):
            flat = [value for tup in combo for value in tup]
            env = Assignment(values=dict(zip(all_names, flat)))
            if satisfies(structure, phi, env):
                rows.append(tuple(index[tup] for tup in combo))
        relations[name] = rows

    constants: dict[str, int] = {}
    for name, phi in interp.constants.items():
        hits = [
            tup
            for tup in tuples
            if satisfies(structure, phi, Assignment(values=dict(zip(names, tup))))
        ]
        if len(hits) != 1:
            raise TransformError(
                f"constant formula for {name!r} selects {len(hits)} tuples, needs exactly 1"
            )
        constants[name] = index[hits[0]]

    target = interp.target_vocabulary()
    from .structures import new_structure

    return new_structure(target, len(tuples), relations, constants)


def interpretation_from_json(data: dict, parse_vocab: Optional[Vocabulary] = None) -> Interpretation:
    k = int(data["k"])
    universe = parse(data["universe"], parse_vocab)
    relations = {}
    for name, text in data.get("relations", {}).items():
        phi = parse(text, parse_vocab)
        arity = data.get("arities", {}).get(name)
        if arity is None:
            indices = [
                int(v[1:])
                for v in _variable_names(phi)
                if v.startswith("v") and v[1:].isdigit()
            ]
            arity = max(1, -(-max(indices) // k)) if indices else 1
        relations[name] = (int(arity), phi)
    constants = {
        name: parse(text, parse_vocab) for name, text in data.get("constants", {}).items()
    }
    return Interpretation(
        k, universe, relations, constants, bool(data.get("targetBuiltins", False))
    )


def load_interpretation(path: str, parse_vocab: Optional[Vocabulary] = None) -> Interpretation:
    with open(path) as handle:
        return interpretation_from_json(json.load(handle), parse_vocab)


# ------------------------------------------------------------- dual map


def _lex_less(left: Sequence[Term], right: Sequence[Term]) -> Formula:
    """Lexicographic order on equal-width term tuples over the source <."""
    parts = []
    for i in range(len(left)):
        agree = [Eq((left[j],), (right[j],)) for j in range(i)]
        parts.append(big_and(agree + [Rel("<", (left[i], right[i]))]))
    from .formulas import big_or

    return big_or(parts)


def dual_formula(interp: Interpretation, theta: Formula) -> Formula:
    """Rewrite a formula over the target vocabulary into the source one.

    Variables widen to fresh k-tuples, target relation atoms become their
    defining formulas, quantifiers are restricted to the definable
    universe, relation-variable arities multiply by k, and target
    constants become existentially fixed fresh tuples prefixed in front.
    The numeric symbols < and SUC translate to tuple-rank order formulas;
    BIT, PLUS, and TIMES have no uniform translation and are rejected.
    """
    k = interp.width
    target_constants = set(interp.constants)
    numeric_constants = {"0", "1", "max"} if interp.target_builtins else set()

    for name in _variable_names(theta):
        if "__" in name:
            raise TransformError(
                f"variable {name!r} clashes with the dual map's naming scheme"
            )

    def widen_var(name: str) -> list[Var]:
        return [Var(f"{name}__{i}") for i in range(1, k + 1)]

    used_constants: list[str] = []

    def widen_term(term: Term) -> list[Term]:
        if isinstance(term, Var):
            return list(widen_var(term.name))
        name = term.name
        if name in target_constants:
            if name not in used_constants:
                used_constants.append(name)
            return [Var(f"zc_{name}__{i}") for i in range(1, k + 1)]
        if name in numeric_constants or name.isdigit() or name in ("max",):
            if name == "0" or name.isdigit() and int(name) == 0:
                return [Const("0")] * k
            if name == "1":
                return [Const("0")] * (k - 1) + [Const("1")]
            if name == "max":
                return [Const("max")] * k
            raise TransformError(f"numeral {name!r} has no dual translation")
        raise TransformError(f"constant {name!r} unknown to the interpretation")

    def universe_guard(components: Sequence[Term]) -> Formula:
        names = _block_vars("v", k)
        return substitute(interp.universe, {n: t for n, t in zip(names, components)})

    def translate(node: Formula) -> Formula:
        if isinstance(node, (Top, Bot)):
            return node
        if isinstance(node, Eq):
            lhs = [part for term in node.lhs for part in widen_term(term)]
            rhs = [part for term in node.rhs for part in widen_term(term)]
            return Eq(tuple(lhs), tuple(rhs))
        if isinstance(node, Rel):
            flat = [part for term in node.args for part in widen_term(term)]
            if node.name in interp.relations:
                arity, phi = interp.relations[node.name]
                names = _block_vars("v", arity * k)
                return substitute(phi, {n: t for n, t in zip(names, flat)})
            if node.name == "<":
                return _lex_less(flat[:k], flat[k:])
            if node.name == "SUC":
                left, right = flat[:k], flat[k:]
                names = _block_vars("w", k)
                between = And(
                    universe_guard([Var(n) for n in names]),
                    And(
                        _lex_less(left, [Var(n) for n in names]),
                        _lex_less([Var(n) for n in names], right),
                    ),
                )
                return And(
                    _lex_less(left, right),
                    Not(exists_all(names, between)),
                )
            if node.name in BUILTIN_RELATIONS:
                raise TransformError(
                    f"numeric relation {node.name} has no dual translation"
                )
            # Free or fixed-point-bound relation variable: widen the arity.
            return Rel(node.name, tuple(flat))
        if isinstance(node, Not):
            return Not(translate(node.sub))
        if isinstance(node, (And, Or, Implies, Iff)):
            return type(node)(translate(node.left), translate(node.right))
        if isinstance(node, Exists):
            components = widen_var(node.var)
            return exists_all(
                [v.name for v in components],
                And(universe_guard(components), translate(node.sub)),
            )
        if isinstance(node, Forall):
            components = widen_var(node.var)
            return forall_all(
                [v.name for v in components],
                Implies(universe_guard(components), translate(node.sub)),
            )
        if isinstance(node, Fixpoint):
            bound = [v for name in node.vars for v in widen_var(name)]
            guards = [
                universe_guard(widen_var(name)) for name in node.vars
            ]
            body = And(big_and(guards), translate(node.body))
            flat_args = tuple(part for term in node.args for part in widen_term(term))
            return Fixpoint(node.op, node.rel, tuple(v.name for v in bound), body, flat_args)
        if isinstance(node, SimFixpoint):
            defs = []
            for rel, vars_, body in node.defs:
                bound = [v for name in vars_ for v in widen_var(name)]
                guards = [universe_guard(widen_var(name)) for name in vars_]
                defs.append(
                    (rel, tuple(v.name for v in bound), And(big_and(guards), translate(body)))
                )
            flat_args = tuple(part for term in node.args for part in widen_term(term))
            return SimFixpoint(node.op, tuple(defs), node.select, flat_args)
        raise TransformError(f"unknown node {node!r}")

    core = translate(theta)
    for name in reversed(used_constants):
        components = [f"zc_{name}__{i}" for i in range(1, k + 1)]
        guard = And(
            universe_guard([Var(c) for c in components]),
            substitute(
                interp.constants[name],
                {n: Var(c) for n, c in zip(_block_vars("v", k), components)},
            ),
        )
        core = exists_all(components, And(guard, core))
    return core


def identity_interpretation(vocab: Vocabulary) -> Interpretation:
    """Width-1 interpretation copying a structure."""
    relations = {}
    for name, arity in vocab.relations:
        args = tuple(Var(f"v{i}") for i in range(1, arity + 1))
        relations[name] = (arity, Rel(name, args))
    constants = {
        name: Eq((Var("v1"),), (Const(name),)) for name in vocab.constants
    }
    return Interpretation(1, Eq((Var("v1"),), (Var("v1"),)), relations, constants)


def pairing_interpretation(vocab: Vocabulary) -> Interpretation:
    """Width-2 interpretation onto ordered pairs; a binary source symbol E
    induces a target E holding between pairs with matching components."""
    relations = {}
    for name, arity in vocab.relations:
        if arity != 2:
            continue
        relations[name] = (
            2,
            And(Rel(name, (Var("v1"), Var("v3"))), Rel(name, (Var("v2"), Var("v4")))),
        )
    return Interpretation(
        2, Eq((Var("v1"),), (Var("v1"),)), relations, {}
    )
