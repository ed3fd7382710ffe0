"""Satisfaction and fixed-point stage computation over finite structures.

The stage sequence of a body formula phi(R, x1..xk) on a structure A is
empty-set, F(empty), F(F(empty)), ... where F maps a k-ary relation S to
the set of tuples satisfying the body with R bound to S.  A trace records
the sequence together with its verdict: either the least index d with
F_{d+1} = F_d (a fixed point at depth d) or the parameters of the cycle
that proves no fixed point exists.  Partial fixed points of cycling
bodies evaluate as the empty relation, which makes the corresponding
atoms false.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Sequence, Union

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
    free_relation_names,
    free_vars,
)
from .structures import Relation, Structure, StructureError, Vocabulary, enumerate_structures


class EvaluationError(ValueError):
    """Unbound symbol, arity mismatch, or unsupported evaluation."""


@dataclass
class Assignment:
    """Bindings for free individual variables and free relation variables."""

    values: dict[str, int] = field(default_factory=dict)
    relations: dict[str, Relation] = field(default_factory=dict)

    def copy(self) -> "Assignment":
        return Assignment(dict(self.values), dict(self.relations))


@dataclass(frozen=True)
class FixedPointAt:
    depth: int


@dataclass(frozen=True)
class NoFixedPoint:
    cycle_start: int
    cycle_length: int


Verdict = Union[FixedPointAt, NoFixedPoint]


@dataclass
class StageTrace:
    """Stages F_0 .. F_d (no repeat stored) plus the termination verdict."""

    stages: list[Relation]
    verdict: Verdict

    @property
    def final(self) -> Relation:
        return self.stages[-1]

    def fixpoint_or_empty(self) -> Relation:
        """The fixed point when it exists, the empty relation otherwise."""
        if isinstance(self.verdict, FixedPointAt):
            return self.stages[self.verdict.depth]
        first = self.stages[0]
        return Relation.empty(first.arity, first.size)

    def to_json(self) -> dict:
        verdict: dict
        if isinstance(self.verdict, FixedPointAt):
            verdict = {"fixedPointAt": self.verdict.depth}
        else:
            verdict = {
                "noFixedPoint": {
                    "cycleStart": self.verdict.cycle_start,
                    "cycleLength": self.verdict.cycle_length,
                }
            }
        return {
            "stages": [[list(t) for t in stage.sorted_tuples()] for stage in self.stages],
            "verdict": verdict,
        }


# ------------------------------------------------------------- satisfies


def _term_value(structure: Structure, term: Term, values: dict[str, int]) -> int:
    if isinstance(term, Var):
        if term.name not in values:
            raise EvaluationError(f"unbound free variable {term.name!r}")
        return values[term.name]
    name = term.name
    try:
        return structure.constant(name)
    except StructureError:
        if name.isdigit():
            value = int(name)
            if value >= structure.size:
                raise EvaluationError(
                    f"numeral {value} outside universe of size {structure.size}"
                )
            return value
        raise EvaluationError(f"unknown constant {name!r}")


def satisfies(
    structure: Structure,
    phi: Formula,
    assignment: Optional[Assignment] = None,
    memo: bool = False,
) -> bool:
    """Decide whether the structure satisfies the formula under the assignment.

    With ``memo=True`` subformula verdicts are cached per identity and
    per restriction of the assignment to the subformula's free variables,
    which makes heavily shared formula DAGs affordable to evaluate.
    """
    assignment = assignment or Assignment()
    values = dict(assignment.values)
    relations = dict(assignment.relations)
    universe = structure.universe

    free_var_map: dict[int, tuple[str, ...]] = {}
    free_rel_map: dict[int, tuple[str, ...]] = {}
    cache: dict = {}

    def node_key(node: Formula):
        nid = id(node)
        if nid not in free_var_map:
            free_var_map[nid] = tuple(sorted(free_vars(node)))
            free_rel_map[nid] = tuple(sorted(free_relation_names(node)))
        try:
            vals = tuple(values[v] for v in free_var_map[nid])
        except KeyError as err:
            raise EvaluationError(f"unbound free variable {err.args[0]!r}")
        rels = tuple(id(relations[r]) for r in free_rel_map[nid] if r in relations)
        return (nid, vals, rels)

    def eval_rel_atom(node: Rel) -> bool:
        tup = tuple(_term_value(structure, t, values) for t in node.args)
        bound = relations.get(node.name)
        if bound is not None:
            if bound.arity != len(tup):
                raise EvaluationError(
                    f"{node.name} applied to {len(tup)} terms, bound arity {bound.arity}"
                )
            return tup in bound.tuples
        arity = structure.vocab.relation_arity(node.name)
        if arity is None:
            raise EvaluationError(f"unbound relation variable {node.name!r}")
        if arity != len(tup):
            raise EvaluationError(
                f"{node.name} applied to {len(tup)} terms, declared arity {arity}"
            )
        return structure.holds(node.name, tup)

    def walk(node: Formula) -> bool:
        if memo:
            key = node_key(node)
            hit = cache.get(key)
            if hit is not None:
                return hit
            result = evaluate(node)
            cache[key] = result
            return result
        return evaluate(node)

    def evaluate(node: Formula) -> bool:
        if isinstance(node, Top):
            return True
        if isinstance(node, Bot):
            return False
        if isinstance(node, Eq):
            lhs = tuple(_term_value(structure, t, values) for t in node.lhs)
            rhs = tuple(_term_value(structure, t, values) for t in node.rhs)
            return lhs == rhs
        if isinstance(node, Rel):
            return eval_rel_atom(node)
        if isinstance(node, Not):
            return not walk(node.sub)
        if isinstance(node, And):
            return walk(node.left) and walk(node.right)
        if isinstance(node, Or):
            return walk(node.left) or walk(node.right)
        if isinstance(node, Implies):
            return (not walk(node.left)) or walk(node.right)
        if isinstance(node, Iff):
            return walk(node.left) == walk(node.right)
        if isinstance(node, (Exists, Forall)):
            witness = isinstance(node, Exists)
            saved = values.get(node.var)
            had = node.var in values
            try:
                for element in universe:
                    values[node.var] = element
                    if walk(node.sub) == witness:
                        return witness
                return not witness
            finally:
                if had:
                    values[node.var] = saved
                else:
                    values.pop(node.var, None)
        if isinstance(node, Fixpoint):
            tup = tuple(_term_value(structure, t, values) for t in node.args)
            value = _fixpoint_value(node)
            return tup in value.tuples
        if isinstance(node, SimFixpoint):
            tup = tuple(_term_value(structure, t, values) for t in node.args)
            value = _sim_value(node)
            return tup in value.tuples
        raise EvaluationError(f"unknown node {node!r}")

    def stage_step(body: Formula, rel: str, vars_: tuple[str, ...], current: Relation) -> Relation:
        saved_rel = relations.get(rel)
        had_rel = rel in relations
        saved_vals = {v: values[v] for v in vars_ if v in values}
        relations[rel] = current
        try:
            tuples = []
            for tup in product(universe, repeat=len(vars_)):
                for var, element in zip(vars_, tup):
                    values[var] = element
                if walk(body):
                    tuples.append(tup)
            return Relation.from_tuples(len(vars_), structure.size, tuples)
        finally:
            if had_rel:
                relations[rel] = saved_rel
            else:
                relations.pop(rel, None)
            for var in vars_:
                if var in saved_vals:
                    values[var] = saved_vals[var]
                else:
                    values.pop(var, None)

    def _fixpoint_value(node: Fixpoint) -> Relation:
        body = node.body
        if node.op == "ifp":
            body = Or(Rel(node.rel, tuple(Var(v) for v in node.vars)), node.body)
        current = Relation.empty(len(node.vars), structure.size)
        seen = {current.tuples: 0}
        while True:
            nxt = stage_step(body, node.rel, node.vars, current)
            if nxt == current:
                return current
            if nxt.tuples in seen:
                # Revisit that is not an immediate repeat: genuine cycle.
                return Relation.empty(len(node.vars), structure.size)
            seen[nxt.tuples] = len(seen)
            current = nxt

    def _sim_value(node: SimFixpoint) -> Relation:
        defs = node.defs
        if node.op == "ifp":
            defs = tuple(
                (rel, vars_, Or(Rel(rel, tuple(Var(v) for v in vars_)), body))
                for rel, vars_, body in defs
            )
        state = tuple(Relation.empty(len(vars_), structure.size) for _r, vars_, _b in defs)
        seen = {tuple(rel.tuples for rel in state): 0}
        while True:
            saved = {}
            for (rel, _vars, _body), value in zip(defs, state):
                saved[rel] = (rel in relations, relations.get(rel))
                relations[rel] = value
            try:
                nxt = tuple(
                    stage_step(body, rel, vars_, value)
                    for (rel, vars_, body), value in zip(defs, state)
                )
            finally:
                for rel, (had, value) in saved.items():
                    if had:
                        relations[rel] = value
                    else:
                        relations.pop(rel, None)
            if nxt == state:
                break
            key = tuple(rel.tuples for rel in nxt)
            if key in seen:
                state = tuple(
                    Relation.empty(len(vars_), structure.size) for _r, vars_, _b in defs
                )
                break
            seen[key] = len(seen)
            state = nxt
        for (rel, _vars, _body), value in zip(defs, state):
            if rel == node.select:
                return value
        raise EvaluationError(f"selected component {node.select!r} missing")

    return walk(phi)


# ---------------------------------------------------------- stage traces


def stages(
    structure: Structure,
    body: Formula,
    rel: str,
    vars_: Sequence[str],
    assignment: Optional[Assignment] = None,
) -> StageTrace:
    """Full stage trace of a body, with cycle detection.

    Every visited stage value is remembered in canonical form, so the
    iteration terminates within 2^(n^k) + 1 body sweeps: either two
    consecutive stages coincide (fixed point) or some earlier stage
    recurs (cycle, hence no fixed point).
    """
    assignment = assignment or Assignment()
    vars_ = tuple(vars_)
    arity = len(vars_)
    base = assignment.copy()

    def apply_once(current: Relation) -> Relation:
        env = base.copy()
        env.relations[rel] = current
        tuples = []
        for tup in product(structure.universe, repeat=arity):
            for var, element in zip(vars_, tup):
                env.values[var] = element
            if satisfies(structure, body, env):
                tuples.append(tup)
        return Relation.from_tuples(arity, structure.size, tuples)

    trace = [Relation.empty(arity, structure.size)]
    seen = {trace[0].tuples: 0}
    while True:
        nxt = apply_once(trace[-1])
        if nxt == trace[-1]:
            return StageTrace(trace, FixedPointAt(len(trace) - 1))
        if nxt.tuples in seen:
            start = seen[nxt.tuples]
            return StageTrace(trace, NoFixedPoint(start, len(trace) - start))
        seen[nxt.tuples] = len(trace)
        trace.append(nxt)


def depth(
    structure: Structure,
    body: Formula,
    rel: str,
    vars_: Sequence[str],
    assignment: Optional[Assignment] = None,
) -> Union[int, float]:
    """Least r with F_{r+1} = F_r, or infinity when no fixed point exists."""
    trace = stages(structure, body, rel, vars_, assignment)
    if isinstance(trace.verdict, FixedPointAt):
        return trace.verdict.depth
    return math.inf


def inflationary_depth(
    structure: Structure,
    body: Formula,
    rel: str,
    vars_: Sequence[str],
    assignment: Optional[Assignment] = None,
) -> int:
    """Depth of (R(vars) or body); inflationary sequences always stabilize."""
    vars_ = tuple(vars_)
    inflated = Or(Rel(rel, tuple(Var(v) for v in vars_)), body)
    value = depth(structure, inflated, rel, vars_, assignment)
    assert value != math.inf
    return int(value)


def depth_over_size(
    body: Formula,
    rel: str,
    vars_: Sequence[str],
    vocab: Vocabulary,
    n: int,
    limit: int = 1 << 24,
) -> Union[int, float]:
    """Maximum depth over every structure of size n for the vocabulary."""
    vars_ = tuple(vars_)
    extra = free_vars(body) - set(vars_)
    if extra:
        raise EvaluationError(
            f"body has free first-order variables {sorted(extra)} outside the bound tuple"
        )
    best: Union[int, float] = 0
    for structure in enumerate_structures(vocab, n, limit):
        value = depth(structure, body, rel, vars_)
        if value == math.inf:
            return math.inf
        best = max(best, value)
    return best


# -------------------------------------------------- simultaneous systems


SystemDef = tuple[str, tuple[str, ...], Formula]


@dataclass
class SimultaneousResult:
    relations: dict[str, Relation]
    iterations: int
    exists: bool
    trace: list[dict[str, Relation]]


def simultaneous_fixpoint(
    structure: Structure,
    system: Sequence[SystemDef],
    assignment: Optional[Assignment] = None,
) -> SimultaneousResult:
    """Joint bottom-up iteration of a system of bodies.

    All bodies are evaluated against the previous tuple of relation
    values; the iteration count is the least n whose state immediately
    repeats.  A revisit of an earlier state means no fixed point exists
    and the flag comes back false (relations then hold the empty values).
    """
    assignment = assignment or Assignment()
    system = [(rel, tuple(vars_), body) for rel, vars_, body in system]
    base = assignment.copy()

    def apply_once(state: tuple[Relation, ...]) -> tuple[Relation, ...]:
        env = base.copy()
        for (rel, _vars, _body), value in zip(system, state):
            env.relations[rel] = value
        out = []
        for (rel, vars_, body), _value in zip(system, state):
            tuples = []
            inner = env.copy()
            for tup in product(structure.universe, repeat=len(vars_)):
                for var, element in zip(vars_, tup):
                    inner.values[var] = element
                if satisfies(structure, body, inner):
                    tuples.append(tup)
            out.append(Relation.from_tuples(len(vars_), structure.size, tuples))
        return tuple(out)

    state = tuple(Relation.empty(len(vars_), structure.size) for _r, vars_, _b in system)
    history = [state]
    seen = {tuple(rel.tuples for rel in state): 0}
    while True:
        nxt = apply_once(state)
        if nxt == state:
            names = [rel for rel, _v, _b in system]
            return SimultaneousResult(
                relations=dict(zip(names, state)),
                iterations=len(history) - 1,
                exists=True,
                trace=[dict(zip(names, snap)) for snap in history],
            )
        key = tuple(rel.tuples for rel in nxt)
        if key in seen:
            names = [rel for rel, _v, _b in system]
            empties = {
                rel: Relation.empty(len(vars_), structure.size)
                for rel, vars_, _b in system
            }
            return SimultaneousResult(
                relations=empties,
                iterations=len(history) - 1,
                exists=False,
                trace=[dict(zip(names, snap)) for snap in history],
            )
        seen[key] = len(history)
        history.append(nxt)
        state = nxt


# ------------------------------------------------------ nested fixpoints


@dataclass
class NestedStep:
    outer_value: Relation
    inner_trace: StageTrace

    @property
    def inner_depth(self) -> Union[int, float]:
        if isinstance(self.inner_trace.verdict, FixedPointAt):
            return self.inner_trace.verdict.depth
        return math.inf


@dataclass
class NestedCostReport:
    """Per-outer-step inner traces for a nested fixed-point computation.

    The convention is pinned in the tag: the inner fixed point restarts
    from the empty relation at every outer evaluation, and the confirming
    evaluation (the one that detects the outer repeat) is included in the
    totals.
    """

    steps: list[NestedStep]
    outer_depth: Optional[int]
    outer_exists: bool
    convention: str = "restart-inner-from-empty; confirming run counted"

    @property
    def inner_depths(self) -> list[Union[int, float]]:
        return [step.inner_depth for step in self.steps]

    @property
    def total_inner_iterations(self) -> Union[int, float]:
        return sum(self.inner_depths)

    def to_json(self) -> dict:
        return {
            "convention": self.convention,
            "outerDepth": self.outer_depth,
            "outerExists": self.outer_exists,
            "innerDepths": [
                (d if d != math.inf else None) for d in self.inner_depths
            ],
            "totalInnerIterations": (
                self.total_inner_iterations
                if self.total_inner_iterations != math.inf
                else None
            ),
            "steps": [
                {
                    "outer": [list(t) for t in step.outer_value.sorted_tuples()],
                    "inner": step.inner_trace.to_json(),
                }
                for step in self.steps
            ],
        }


def nested_fixpoint(
    structure: Structure,
    outer: SystemDef,
    inner: SystemDef,
    assignment: Optional[Assignment] = None,
    inflationary_outer: bool = False,
) -> NestedCostReport:
    """Outer iteration whose body reads the inner fixed point.

    At every outer step the inner stage sequence is recomputed from the
    empty relation with the outer variable frozen at its current value;
    a cycling inner body contributes the empty relation.  The optional
    inflationary mode unions each new outer value with the previous one,
    for probing systems whose plain outer iteration does not stabilize.
    """
    assignment = assignment or Assignment()
    outer_rel, outer_vars, outer_body = outer[0], tuple(outer[1]), outer[2]
    inner_rel, inner_vars, inner_body = inner[0], tuple(inner[1]), inner[2]
    base = assignment.copy()

    current = Relation.empty(len(outer_vars), structure.size)
    steps: list[NestedStep] = []
    seen = {current.tuples: 0}
    while True:
        env = base.copy()
        env.relations[outer_rel] = current
        inner_trace = stages(structure, inner_body, inner_rel, inner_vars, env)
        steps.append(NestedStep(current, inner_trace))
        env.relations[inner_rel] = inner_trace.fixpoint_or_empty()
        tuples = []
        for tup in product(structure.universe, repeat=len(outer_vars)):
            for var, element in zip(outer_vars, tup):
                env.values[var] = element
            if satisfies(structure, outer_body, env):
                tuples.append(tup)
        nxt = Relation.from_tuples(len(outer_vars), structure.size, tuples)
        if inflationary_outer:
            nxt = Relation(
                nxt.arity, nxt.size, nxt.tuples | current.tuples
            )
        if nxt == current:
            return NestedCostReport(steps, outer_depth=len(steps) - 1, outer_exists=True)
        if nxt.tuples in seen:
            return NestedCostReport(steps, outer_depth=None, outer_exists=False)
        seen[nxt.tuples] = len(seen)
        current = nxt
