"""Formula abstract syntax and the syntactic measures taken on it.

The node set covers first-order logic with equality (tuple equality is a
single atom), free relation variables, the three fixed-point operators,
and simultaneous fixed-point systems.  Sugared connectives (and, implies,
iff, forall, T, F) are kept as distinct nodes so that symbol counting can
follow the sugared shape; :func:`to_official_syntax` expands them into
the not/or/exists core.

Formulas are immutable and may share subterms; the counting functions
memoize on object identity so shared nodes cost one traversal but are
counted once per occurrence, exactly as if the tree had been written out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union


class FormulaError(ValueError):
    """Malformed formula construction or unsupported transformation."""


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


@dataclass(frozen=True)
class Const:
    name: str

    def __repr__(self) -> str:
        return f"Const({self.name})"


Term = Union[Var, Const]


def term_vars(terms: Iterable[Term]) -> set[str]:
    return {t.name for t in terms if isinstance(t, Var)}


# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Eq:
    """Componentwise equality of two equal-length term tuples; one atom."""

    lhs: tuple[Term, ...]
    rhs: tuple[Term, ...]

    def __post_init__(self) -> None:
        if len(self.lhs) != len(self.rhs) or not self.lhs:
            raise FormulaError("equality requires equal-length nonempty term tuples")


@dataclass(frozen=True)
class Rel:
    """Application of a relation symbol or relation variable to terms."""

    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class Fixpoint:
    """``[op R(vars): body](args)`` for op in lfp, ifp, pfp.

    An lfp node requires the body to be positive in the bound relation
    variable; this is checked at construction.
    """

    op: str
    rel: str
    vars: tuple[str, ...]
    body: "Formula"
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if self.op not in ("lfp", "ifp", "pfp"):
            raise FormulaError(f"unknown fixed-point operator {self.op!r}")
        if len(self.args) != len(self.vars):
            raise FormulaError(
                f"fixed point binds {len(self.vars)} variables but is applied "
                f"to {len(self.args)} terms"
            )
        if not self.vars:
            raise FormulaError("fixed points must bind at least one variable")
        if self.op == "lfp" and not is_positive_in(self.body, self.rel):
            raise FormulaError(f"lfp body is not positive in {self.rel}")


@dataclass(frozen=True)
class SimFixpoint:
    """Simultaneous system ``[op sim {R(x): b1 ; S(y): b2} select R](args)``."""

    op: str
    defs: tuple[tuple[str, tuple[str, ...], "Formula"], ...]
    select: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if self.op not in ("lfp", "ifp", "pfp"):
            raise FormulaError(f"unknown fixed-point operator {self.op!r}")
        names = [rel for rel, _, _ in self.defs]
        if len(set(names)) != len(names):
            raise FormulaError("simultaneous system components must be distinct")
        if self.select not in names:
            raise FormulaError(f"selected component {self.select!r} not in system")
        for rel, vars_, _body in self.defs:
            if rel == self.select and len(vars_) != len(self.args):
                raise FormulaError("applied terms do not match selected component arity")
        if self.op == "lfp":
            for _rel, _vars, body in self.defs:
                for name in names:
                    if not is_positive_in(body, name):
                        raise FormulaError(
                            f"simultaneous lfp body is not positive in {name}"
                        )


Formula = Union[
    Top, Bot, Eq, Rel, Not, And, Or, Implies, Iff, Exists, Forall, Fixpoint, SimFixpoint
]


# ------------------------------------------------------------ builders


def eq(lhs: Term, rhs: Term) -> Eq:
    return Eq((lhs,), (rhs,))


def neq(lhs: Term, rhs: Term) -> Not:
    return Not(eq(lhs, rhs))


def big_or(parts: Sequence[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is F."""
    if not parts:
        return Bot()
    out = parts[-1]
    for part in reversed(parts[:-1]):
        out = Or(part, out)
    return out


def big_or_seeded(parts: Sequence[Formula]) -> Formula:
    """Right fold ending in the F seed: [a, b] -> Or(a, Or(b, F))."""
    out: Formula = Bot()
    for part in reversed(parts):
        out = Or(part, out)
    return out


def big_and(parts: Sequence[Formula]) -> Formula:
    if not parts:
        return Top()
    out = parts[-1]
    for part in reversed(parts[:-1]):
        out = And(part, out)
    return out


def exists_all(names: Sequence[str], body: Formula) -> Formula:
    for name in reversed(names):
        body = Exists(name, body)
    return body


def forall_all(names: Sequence[str], body: Formula) -> Formula:
    for name in reversed(names):
        body = Forall(name, body)
    return body


# --------------------------------------------------------- free symbols


def free_vars(phi: Formula) -> frozenset[str]:
    """Free individual variables, with the fixed-point binding clause."""
    if isinstance(phi, (Top, Bot)):
        return frozenset()
    if isinstance(phi, Eq):
        return frozenset(term_vars(phi.lhs + phi.rhs))
    if isinstance(phi, Rel):
        return frozenset(term_vars(phi.args))
    if isinstance(phi, Not):
        return free_vars(phi.sub)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.sub) - {phi.var}
    if isinstance(phi, Fixpoint):
        return frozenset(term_vars(phi.args)) | (free_vars(phi.body) - set(phi.vars))
    if isinstance(phi, SimFixpoint):
        out = set(term_vars(phi.args))
        for _rel, vars_, body in phi.defs:
            out |= free_vars(body) - set(vars_)
        return frozenset(out)
    raise FormulaError(f"unknown node {phi!r}")


def free_relation_names(phi: Formula) -> frozenset[str]:
    """Relation names with a free occurrence (fixed points bind their own)."""
    if isinstance(phi, Rel):
        return frozenset({phi.name})
    if isinstance(phi, (Top, Bot, Eq)):
        return frozenset()
    if isinstance(phi, Not):
        return free_relation_names(phi.sub)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return free_relation_names(phi.left) | free_relation_names(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_relation_names(phi.sub)
    if isinstance(phi, Fixpoint):
        return free_relation_names(phi.body) - {phi.rel}
    if isinstance(phi, SimFixpoint):
        bound = {rel for rel, _, _ in phi.defs}
        out: set[str] = set()
        for _rel, _vars, body in phi.defs:
            out |= free_relation_names(body) - bound
        return frozenset(out)
    raise FormulaError(f"unknown node {phi!r}")


def count_occurrences(phi: Formula, rel: str) -> int:
    """Number of free atom occurrences of a relation name."""
    if isinstance(phi, Rel):
        return 1 if phi.name == rel else 0
    if isinstance(phi, (Top, Bot, Eq)):
        return 0
    if isinstance(phi, Not):
        return count_occurrences(phi.sub, rel)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return count_occurrences(phi.left, rel) + count_occurrences(phi.right, rel)
    if isinstance(phi, (Exists, Forall)):
        return count_occurrences(phi.sub, rel)
    if isinstance(phi, Fixpoint):
        return 0 if phi.rel == rel else count_occurrences(phi.body, rel)
    if isinstance(phi, SimFixpoint):
        if rel in {r for r, _, _ in phi.defs}:
            return 0
        return sum(count_occurrences(body, rel) for _r, _v, body in phi.defs)
    raise FormulaError(f"unknown node {phi!r}")


# ------------------------------------------------------------- metrics


@dataclass(frozen=True)
class MetricReport:
    """Syntactic size measures of a formula.

    Connectives are counted on the sugared tree: or/and/implies count 1,
    iff counts 2, negation counts 0, and a tuple equality is a single
    atom.  Shared subformulas are counted once per occurrence.
    """

    quantifier_rank: int
    distinct_variables: int
    connectives: int
    forall_symbols: int
    exists_symbols: int


def _memoized(fn: Callable) -> Callable:
    def wrapper(phi: Formula, cache: Optional[dict] = None):
        if cache is None:
            cache = {}
        key = id(phi)
        if key in cache:
            return cache[key]
        value = fn(phi, cache)
        cache[key] = value
        return value

    return wrapper


@_memoized
def quantifier_rank(phi: Formula, cache: Optional[dict] = None) -> int:
    """Maximum quantifier nesting depth; fixed-point bodies contribute theirs."""
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.sub, cache)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return max(quantifier_rank(phi.left, cache), quantifier_rank(phi.right, cache))
    if isinstance(phi, (Exists, Forall)):
        return quantifier_rank(phi.sub, cache) + 1
    if isinstance(phi, Fixpoint):
        return quantifier_rank(phi.body, cache)
    if isinstance(phi, SimFixpoint):
        return max(quantifier_rank(body, cache) for _r, _v, body in phi.defs)
    raise FormulaError(f"unknown node {phi!r}")


@_memoized
def _connectives(phi: Formula, cache=None) -> int:
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return 0
    if isinstance(phi, Not):
        return _connectives(phi.sub, cache)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + _connectives(phi.left, cache) + _connectives(phi.right, cache)
    if isinstance(phi, Iff):
        return 2 + _connectives(phi.left, cache) + _connectives(phi.right, cache)
    if isinstance(phi, (Exists, Forall)):
        return _connectives(phi.sub, cache)
    if isinstance(phi, Fixpoint):
        return _connectives(phi.body, cache)
    if isinstance(phi, SimFixpoint):
        return sum(_connectives(body, cache) for _r, _v, body in phi.defs)
    raise FormulaError(f"unknown node {phi!r}")


def _quantifier_counter(kind) -> Callable:
    @_memoized
    def count(phi: Formula, cache=None) -> int:
        if isinstance(phi, (Top, Bot, Eq, Rel)):
            return 0
        if isinstance(phi, Not):
            return count(phi.sub, cache)
        if isinstance(phi, (And, Or, Implies, Iff)):
            return count(phi.left, cache) + count(phi.right, cache)
        if isinstance(phi, (Exists, Forall)):
            own = 1 if isinstance(phi, kind) else 0
            return own + count(phi.sub, cache)
        if isinstance(phi, Fixpoint):
            return count(phi.body, cache)
        if isinstance(phi, SimFixpoint):
            return sum(count(body, cache) for _r, _v, body in phi.defs)
        raise FormulaError(f"unknown node {phi!r}")

    return count


_count_forall = _quantifier_counter(Forall)
_count_exists = _quantifier_counter(Exists)


@_memoized
def _variable_names(phi: Formula, cache=None) -> frozenset[str]:
    if isinstance(phi, (Top, Bot)):
        return frozenset()
    if isinstance(phi, Eq):
        return frozenset(term_vars(phi.lhs + phi.rhs))
    if isinstance(phi, Rel):
        return frozenset(term_vars(phi.args))
    if isinstance(phi, Not):
        return _variable_names(phi.sub, cache)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return _variable_names(phi.left, cache) | _variable_names(phi.right, cache)
    if isinstance(phi, (Exists, Forall)):
        return _variable_names(phi.sub, cache) | {phi.var}
    if isinstance(phi, Fixpoint):
        return (
            _variable_names(phi.body, cache)
            | set(phi.vars)
            | frozenset(term_vars(phi.args))
        )
    if isinstance(phi, SimFixpoint):
        out = set(term_vars(phi.args))
        for _rel, vars_, body in phi.defs:
            out |= _variable_names(body, cache) | set(vars_)
        return frozenset(out)
    raise FormulaError(f"unknown node {phi!r}")


def count_metrics(phi: Formula) -> MetricReport:
    return MetricReport(
        quantifier_rank=quantifier_rank(phi),
        distinct_variables=len(_variable_names(phi)),
        connectives=_connectives(phi),
        forall_symbols=_count_forall(phi),
        exists_symbols=_count_exists(phi),
    )


# ----------------------------------------------------------- positivity


def is_positive_in(phi: Formula, rel: str) -> bool:
    """True when every occurrence of ``rel`` sits under an even number of
    negations once the sugar is expanded into not/or/exists form.

    Implication flips the polarity of its antecedent; a biconditional
    places both sides in both polarities, so it is positive only when the
    relation does not occur in it at all.  Fixed-point operators are
    treated as polarity-preserving contexts; a fixed point binding the
    same name shadows it.
    """

    def check(node: Formula, positive: bool) -> bool:
        if isinstance(node, Rel):
            return node.name != rel or positive
        if isinstance(node, (Top, Bot, Eq)):
            return True
        if isinstance(node, Not):
            return check(node.sub, not positive)
        if isinstance(node, (And, Or)):
            return check(node.left, positive) and check(node.right, positive)
        if isinstance(node, Implies):
            return check(node.left, not positive) and check(node.right, positive)
        if isinstance(node, Iff):
            return (
                count_occurrences(node.left, rel) == 0
                and count_occurrences(node.right, rel) == 0
            )
        if isinstance(node, (Exists, Forall)):
            return check(node.sub, positive)
        if isinstance(node, Fixpoint):
            if node.rel == rel:
                return True
            return check(node.body, positive)
        if isinstance(node, SimFixpoint):
            if rel in {r for r, _, _ in node.defs}:
                return True
            return all(check(body, positive) for _r, _v, body in node.defs)
        raise FormulaError(f"unknown node {node!r}")

    return check(phi, True)


# ------------------------------------------------- syntax normalization


def to_official_syntax(phi: Formula) -> Formula:
    """Expand and/implies/iff/forall into the not/or/exists core.

    and(a, b)    -> !( !a | !b )
    implies(a,b) -> !a | b
    iff(a, b)    -> !( !(!a | b) | !(!b | a) )
    forall x. a  -> !E x. !a
    Atoms, T, F, and applied fixed points stay; bodies are expanded.
    """
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return phi
    if isinstance(phi, Not):
        return Not(to_official_syntax(phi.sub))
    if isinstance(phi, Or):
        return Or(to_official_syntax(phi.left), to_official_syntax(phi.right))
    if isinstance(phi, And):
        left, right = to_official_syntax(phi.left), to_official_syntax(phi.right)
        return Not(Or(Not(left), Not(right)))
    if isinstance(phi, Implies):
        return Or(Not(to_official_syntax(phi.left)), to_official_syntax(phi.right))
    if isinstance(phi, Iff):
        return to_official_syntax(And(Implies(phi.left, phi.right), Implies(phi.right, phi.left)))
    if isinstance(phi, Exists):
        return Exists(phi.var, to_official_syntax(phi.sub))
    if isinstance(phi, Forall):
        return Not(Exists(phi.var, Not(to_official_syntax(phi.sub))))
    if isinstance(phi, Fixpoint):
        return Fixpoint(phi.op, phi.rel, phi.vars, to_official_syntax(phi.body), phi.args)
    if isinstance(phi, SimFixpoint):
        defs = tuple(
            (rel, vars_, to_official_syntax(body)) for rel, vars_, body in phi.defs
        )
        return SimFixpoint(phi.op, defs, phi.select, phi.args)
    raise FormulaError(f"unknown node {phi!r}")


def nnf(phi: Formula) -> Formula:
    """Negation normal form of a first-order formula.

    Negations are pushed onto atoms; sugar is expanded along the way.
    Fixed-point nodes are not supported here.
    """
    if isinstance(phi, (Fixpoint, SimFixpoint)):
        raise FormulaError("negation normal form is defined for first-order formulas only")
    if isinstance(phi, (Top, Bot, Eq, Rel)):
        return phi
    if isinstance(phi, And):
        return And(nnf(phi.left), nnf(phi.right))
    if isinstance(phi, Or):
        return Or(nnf(phi.left), nnf(phi.right))
    if isinstance(phi, Implies):
        return Or(nnf(Not(phi.left)), nnf(phi.right))
    if isinstance(phi, Iff):
        return And(
            Or(nnf(Not(phi.left)), nnf(phi.right)),
            Or(nnf(Not(phi.right)), nnf(phi.left)),
        )
    if isinstance(phi, Exists):
        return Exists(phi.var, nnf(phi.sub))
    if isinstance(phi, Forall):
        return Forall(phi.var, nnf(phi.sub))
    if isinstance(phi, Not):
        sub = phi.sub
        if isinstance(sub, (Eq, Rel)):
            return phi
        if isinstance(sub, Top):
            return Bot()
        if isinstance(sub, Bot):
            return Top()
        if isinstance(sub, Not):
            return nnf(sub.sub)
        if isinstance(sub, And):
            return Or(nnf(Not(sub.left)), nnf(Not(sub.right)))
        if isinstance(sub, Or):
            return And(nnf(Not(sub.left)), nnf(Not(sub.right)))
        if isinstance(sub, Implies):
            return And(nnf(sub.left), nnf(Not(sub.right)))
        if isinstance(sub, Iff):
            return nnf(Not(nnf(sub)))
        if isinstance(sub, Exists):
            return Forall(sub.var, nnf(Not(sub.sub)))
        if isinstance(sub, Forall):
            return Exists(sub.var, nnf(Not(sub.sub)))
        raise FormulaError(f"unknown node {sub!r}")
    raise FormulaError(f"unknown node {phi!r}")


# --------------------------------------------------------- substitution


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    k = 1
    while f"{base}_{k}" in avoid:
        k += 1
    return f"{base}_{k}"


def _subst_term(term: Term, subst: dict[str, Term]) -> Term:
    if isinstance(term, Var) and term.name in subst:
        return subst[term.name]
    return term


def substitute(phi: Formula, subst: dict[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free individual variables."""
    if not subst:
        return phi
    if isinstance(phi, (Top, Bot)):
        return phi
    if isinstance(phi, Eq):
        return Eq(
            tuple(_subst_term(t, subst) for t in phi.lhs),
            tuple(_subst_term(t, subst) for t in phi.rhs),
        )
    if isinstance(phi, Rel):
        return Rel(phi.name, tuple(_subst_term(t, subst) for t in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.sub, subst))
    if isinstance(phi, (And, Or, Implies, Iff)):
        return type(phi)(substitute(phi.left, subst), substitute(phi.right, subst))
    if isinstance(phi, (Exists, Forall)):
        inner = {k: v for k, v in subst.items() if k != phi.var}
        if not inner:
            return phi
        incoming = set()
        for term in inner.values():
            if isinstance(term, Var):
                incoming.add(term.name)
        var = phi.var
        body = phi.sub
        if var in incoming:
            renamed = fresh_name(var, incoming | _variable_names(phi) | set(inner))
            body = substitute(body, {var: Var(renamed)})
            var = renamed
        return type(phi)(var, substitute(body, inner))
    if isinstance(phi, Fixpoint):
        args = tuple(_subst_term(t, subst) for t in phi.args)
        inner = {k: v for k, v in subst.items() if k not in phi.vars}
        incoming = {t.name for t in inner.values() if isinstance(t, Var)}
        if incoming & set(phi.vars):
            raise FormulaError("substitution would capture a fixed-point variable")
        return Fixpoint(phi.op, phi.rel, phi.vars, substitute(phi.body, inner), args)
    if isinstance(phi, SimFixpoint):
        args = tuple(_subst_term(t, subst) for t in phi.args)
        defs = []
        for rel, vars_, body in phi.defs:
            inner = {k: v for k, v in subst.items() if k not in vars_}
            incoming = {t.name for t in inner.values() if isinstance(t, Var)}
            if incoming & set(vars_):
                raise FormulaError("substitution would capture a fixed-point variable")
            defs.append((rel, vars_, substitute(body, inner)))
        return SimFixpoint(phi.op, tuple(defs), phi.select, args)
    raise FormulaError(f"unknown node {phi!r}")


def rename_relation(phi: Formula, old: str, new: str) -> Formula:
    """Rename free occurrences of a relation name."""
    if isinstance(phi, Rel):
        return Rel(new, phi.args) if phi.name == old else phi
    if isinstance(phi, (Top, Bot, Eq)):
        return phi
    if isinstance(phi, Not):
        return Not(rename_relation(phi.sub, old, new))
    if isinstance(phi, (And, Or, Implies, Iff)):
        return type(phi)(
            rename_relation(phi.left, old, new), rename_relation(phi.right, old, new)
        )
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(phi.var, rename_relation(phi.sub, old, new))
    if isinstance(phi, Fixpoint):
        if phi.rel == old:
            return phi
        return Fixpoint(phi.op, phi.rel, phi.vars, rename_relation(phi.body, old, new), phi.args)
    if isinstance(phi, SimFixpoint):
        if old in {r for r, _, _ in phi.defs}:
            return phi
        defs = tuple(
            (rel, vars_, rename_relation(body, old, new)) for rel, vars_, body in phi.defs
        )
        return SimFixpoint(phi.op, defs, phi.select, phi.args)
    raise FormulaError(f"unknown node {phi!r}")


def replace_relation_atoms(
    phi: Formula, rel: str, builder: Callable[[tuple[Term, ...]], Formula]
) -> Formula:
    """Replace each free atom ``rel(args)`` by ``builder(args)``."""
    if isinstance(phi, Rel):
        return builder(phi.args) if phi.name == rel else phi
    if isinstance(phi, (Top, Bot, Eq)):
        return phi
    if isinstance(phi, Not):
        return Not(replace_relation_atoms(phi.sub, rel, builder))
    if isinstance(phi, (And, Or, Implies, Iff)):
        return type(phi)(
            replace_relation_atoms(phi.left, rel, builder),
            replace_relation_atoms(phi.right, rel, builder),
        )
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(phi.var, replace_relation_atoms(phi.sub, rel, builder))
    if isinstance(phi, Fixpoint):
        if phi.rel == rel:
            return phi
        return Fixpoint(
            phi.op,
            phi.rel,
            phi.vars,
            replace_relation_atoms(phi.body, rel, builder),
            phi.args,
        )
    if isinstance(phi, SimFixpoint):
        if rel in {r for r, _, _ in phi.defs}:
            return phi
        defs = tuple(
            (r, v, replace_relation_atoms(body, rel, builder)) for r, v, body in phi.defs
        )
        return SimFixpoint(phi.op, defs, phi.select, phi.args)
    raise FormulaError(f"unknown node {phi!r}")


# -------------------------------------------------------------- printing


_PREC_IFF, _PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4, 5


def _term_text(term: Term) -> str:
    return term.name


def to_text(phi: Formula) -> str:
    """Concrete syntax; the parser reads this back to an equal tree."""

    def render(node: Formula, prec: int) -> str:
        if isinstance(node, Top):
            return "T"
        if isinstance(node, Bot):
            return "F"
        if isinstance(node, Eq):
            if len(node.lhs) == 1:
                text = f"{_term_text(node.lhs[0])} = {_term_text(node.rhs[0])}"
            else:
                lhs = ", ".join(_term_text(t) for t in node.lhs)
                rhs = ", ".join(_term_text(t) for t in node.rhs)
                text = f"({lhs}) = ({rhs})"
            return text if prec <= _PREC_AND else f"({text})"
        if isinstance(node, Rel):
            if node.name == "<":
                text = f"{_term_text(node.args[0])} < {_term_text(node.args[1])}"
                return text if prec <= _PREC_AND else f"({text})"
            args = ", ".join(_term_text(t) for t in node.args)
            return f"{node.name}({args})"
        if isinstance(node, Not):
            return f"!{render(node.sub, _PREC_UNARY)}"
        if isinstance(node, And):
            text = f"{render(node.left, _PREC_UNARY)} & {render(node.right, _PREC_AND)}"
            return text if prec <= _PREC_AND else f"({text})"
        if isinstance(node, Or):
            text = f"{render(node.left, _PREC_AND)} | {render(node.right, _PREC_OR)}"
            return text if prec <= _PREC_OR else f"({text})"
        if isinstance(node, Implies):
            text = f"{render(node.left, _PREC_OR)} -> {render(node.right, _PREC_IMPLIES)}"
            return text if prec <= _PREC_IMPLIES else f"({text})"
        if isinstance(node, Iff):
            text = f"{render(node.left, _PREC_IMPLIES)} <-> {render(node.right, _PREC_IFF)}"
            return text if prec <= _PREC_IFF else f"({text})"
        if isinstance(node, Exists):
            text = f"E {node.var}. {render(node.sub, _PREC_IFF)}"
            return text if prec <= _PREC_IFF else f"({text})"
        if isinstance(node, Forall):
            text = f"A {node.var}. {render(node.sub, _PREC_IFF)}"
            return text if prec <= _PREC_IFF else f"({text})"
        if isinstance(node, Fixpoint):
            vars_ = ", ".join(node.vars)
            args = ", ".join(_term_text(t) for t in node.args)
            return f"[{node.op} {node.rel}({vars_}): {render(node.body, _PREC_IFF)}]({args})"
        if isinstance(node, SimFixpoint):
            parts = []
            for rel, vars_, body in node.defs:
                parts.append(f"{rel}({', '.join(vars_)}): {render(body, _PREC_IFF)}")
            args = ", ".join(_term_text(t) for t in node.args)
            return f"[{node.op} sim {{{' ; '.join(parts)}}} select {node.select}]({args})"
        raise FormulaError(f"unknown node {node!r}")

    return render(phi, _PREC_IFF)
