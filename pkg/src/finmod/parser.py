"""Concrete syntax for formulas.

Grammar (ASCII)::

    formula   := iff
    iff       := implies ['<->' iff]
    implies   := or ['->' implies]
    or        := and ['|' or]
    and       := unary ['&' and]
    unary     := '!' unary | 'E' var '.' formula | 'A' var '.' formula
               | fixpoint | atom
    atom      := 'T' | 'F' | '(' formula ')' | Rel '(' terms ')'
               | '(' terms ')' '=' '(' terms ')'
               | term ('=' | '!=' | '<' | '<=') term
    fixpoint  := '[' op Rel '(' vars ')' ':' formula ']' '(' terms ')'
               | '[' op 'sim' '{' def (';' def)* '}' 'select' Rel ']' '(' terms ')'
    def       := Rel '(' vars ')' ':' formula
    op        := 'lfp' | 'ifp' | 'pfp'

Quantifier bodies extend maximally to the right.  Precedence, tightest
first: ``! & | -> <->``.  Relation names start with an uppercase letter;
the order relation is written infix (``x < y``); ``t != t'`` and
``t <= t'`` abbreviate the obvious formulas.  Lowercase identifiers are
variables unless declared as constants (``0 1 max min`` and numerals are
always constants).
"""

from __future__ import annotations

import re
from typing import Optional, Sequence, Union

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
)
from .structures import Vocabulary

DEFAULT_CONSTANTS = frozenset({"0", "1", "max", "min"})

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<op><->|->|!=|<=|[!&|=<()\[\]{}:;,.])"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<num>[0-9]+)"
)

_QUANT_SPLIT_RE = re.compile(r"^[EA][a-z][a-z0-9_']*$")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append((kind, match.group(), pos))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str, constants: frozenset[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.constants = constants

    # -- token helpers

    def _peek(self, ahead: int = 0) -> Optional[tuple[str, str, int]]:
        index = self.pos + ahead
        return self.tokens[index] if index < len(self.tokens) else None

    def _next(self) -> tuple[str, str, int]:
        token = self._peek()
        if token is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.pos += 1
        return token

    def _expect(self, text: str) -> None:
        token = self._peek()
        if token is None or token[1] != text:
            where = token[2] if token else len(self.text)
            found = repr(token[1]) if token else "end of input"
            raise ParseError(f"expected {text!r}, found {found}", where)
        self.pos += 1

    def _at(self, text: str) -> bool:
        token = self._peek()
        return token is not None and token[1] == text

    # -- grammar

    def parse(self) -> Formula:
        phi = self.formula()
        if self.pos != len(self.tokens):
            token = self._peek()
            raise ParseError(f"trailing input {token[1]!r}", token[2])
        return phi

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.implies()
        if self._at("<->"):
            self._next()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self._at("->"):
            self._next()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        if self._at("|"):
            self._next()
            return Or(left, self.disjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        if self._at("&"):
            self._next()
            return And(left, self.conjunction())
        return left

    def _quantifier(self) -> Optional[tuple[str, str]]:
        """Detect 'E x .' / 'A x .' and the fused 'Ex.' form; return (kind, var)."""
        token = self._peek()
        if token is None or token[0] != "ident":
            return None
        kind, text, _ = token
        if text in ("E", "A"):
            nxt, dot = self._peek(1), self._peek(2)
            if (
                nxt is not None
                and nxt[0] in ("ident", "num")
                and nxt[1][0].islower()
                and dot is not None
                and dot[1] == "."
            ):
                self.pos += 3
                return text, nxt[1]
            return None
        if _QUANT_SPLIT_RE.match(text):
            dot = self._peek(1)
            if dot is not None and dot[1] == ".":
                self.pos += 2
                return text[0], text[1:]
        return None

    def unary(self) -> Formula:
        if self._at("!"):
            self._next()
            return Not(self.unary())
        quant = self._quantifier()
        if quant is not None:
            kind, var = quant
            body = self.formula()
            return Exists(var, body) if kind == "E" else Forall(var, body)
        if self._at("["):
            return self.fixpoint()
        return self.atom()

    def term(self) -> Term:
        token = self._next()
        kind, text, where = token
        if kind == "num":
            return Const(text)
        if kind != "ident":
            raise ParseError(f"expected a term, found {text!r}", where)
        if text[0].isupper():
            raise ParseError(f"relation name {text!r} used as a term", where)
        if text in self.constants:
            return Const(text)
        return Var(text)

    def term_list(self) -> tuple[Term, ...]:
        terms = [self.term()]
        while self._at(","):
            self._next()
            terms.append(self.term())
        return tuple(terms)

    def _comparison(self, lhs: Term) -> Formula:
        token = self._peek()
        if token is None:
            raise ParseError("expected a comparison after term", len(self.text))
        _, text, where = token
        if text == "=":
            self._next()
            return Eq((lhs,), (self.term(),))
        if text == "!=":
            self._next()
            return Not(Eq((lhs,), (self.term(),)))
        if text == "<":
            self._next()
            return Rel("<", (lhs, self.term()))
        if text == "<=":
            self._next()
            rhs = self.term()
            return Or(Rel("<", (lhs, rhs)), Eq((lhs,), (rhs,)))
        raise ParseError(f"expected comparison operator, found {text!r}", where)

    def atom(self) -> Formula:
        token = self._peek()
        if token is None:
            raise ParseError("unexpected end of input", len(self.text))
        kind, text, where = token
        if text == "T":
            self._next()
            return Top()
        if text == "F":
            self._next()
            return Bot()
        if text == "(":
            # '(term,' opens a tuple equality, anything else a subformula.
            first, second = self._peek(1), self._peek(2)
            if (
                first is not None
                and first[0] in ("ident", "num")
                and not first[1][0].isupper()
                and second is not None
                and second[1] == ","
            ):
                self._next()
                lhs = self.term_list()
                self._expect(")")
                self._expect("=")
                self._expect("(")
                rhs = self.term_list()
                self._expect(")")
                if len(lhs) != len(rhs):
                    raise ParseError("tuple equality with unequal lengths", where)
                return Eq(lhs, rhs)
            self._next()
            phi = self.formula()
            self._expect(")")
            return phi
        if kind == "ident" and text[0].isupper():
            self._next()
            self._expect("(")
            args = self.term_list()
            self._expect(")")
            return Rel(text, args)
        lhs = self.term()
        return self._comparison(lhs)

    def _binder(self) -> tuple[str, tuple[str, ...], Formula]:
        token = self._next()
        kind, rel, where = token
        if kind != "ident" or not rel[0].isupper():
            raise ParseError(f"expected a relation variable, found {rel!r}", where)
        self._expect("(")
        vars_ = []
        while True:
            tok = self._next()
            if tok[0] != "ident" or tok[1][0].isupper():
                raise ParseError(f"expected a bound variable, found {tok[1]!r}", tok[2])
            vars_.append(tok[1])
            if self._at(","):
                self._next()
                continue
            break
        self._expect(")")
        self._expect(":")
        body = self.formula()
        return rel, tuple(vars_), body

    def fixpoint(self) -> Formula:
        opener = self._peek()
        self._expect("[")
        op_token = self._next()
        op = op_token[1]
        if op not in ("lfp", "ifp", "pfp"):
            raise ParseError(f"expected lfp, ifp, or pfp, found {op!r}", op_token[2])
        if self._at("sim"):
            self._next()
            self._expect("{")
            defs = [self._binder()]
            while self._at(";"):
                self._next()
                defs.append(self._binder())
            self._expect("}")
            self._expect("select")
            sel_token = self._next()
            self._expect("]")
            self._expect("(")
            args = self.term_list()
            self._expect(")")
            try:
                return SimFixpoint(op, tuple(defs), sel_token[1], args)
            except FormulaError as err:
                raise ParseError(str(err), opener[2]) from err
        rel, vars_, body = self._binder()
        self._expect("]")
        self._expect("(")
        args = self.term_list()
        self._expect(")")
        try:
            return Fixpoint(op, rel, vars_, body, args)
        except FormulaError as err:
            raise ParseError(str(err), opener[2]) from err


def parse(
    text: str,
    vocab: Optional[Vocabulary] = None,
    constants: Optional[Sequence[str]] = None,
) -> Formula:
    """Parse a formula.

    Constant names beyond the defaults (0, 1, max, min, numerals) can be
    supplied directly or through a vocabulary; everything else lowercase
    is a variable.  When a vocabulary is given, declared relation arities
    are checked.
    """
    names = set(DEFAULT_CONSTANTS)
    if constants:
        names.update(constants)
    if vocab is not None:
        names.update(vocab.constant_names())
    phi = _Parser(text, frozenset(names)).parse()
    if vocab is not None:
        check_arities(phi, vocab)
    return phi


def check_arities(phi: Formula, vocab: Vocabulary, bound: Optional[dict[str, int]] = None) -> None:
    """Verify relation applications against declared and bound arities."""
    bound = dict(bound or {})

    def walk(node: Formula, env: dict[str, int]) -> None:
        if isinstance(node, Rel):
            expected = env.get(node.name, vocab.relation_arity(node.name))
            if expected is not None and expected != len(node.args):
                raise FormulaError(
                    f"{node.name} applied to {len(node.args)} terms, expected {expected}"
                )
            return
        if isinstance(node, (Top, Bot, Eq)):
            return
        if isinstance(node, Not):
            walk(node.sub, env)
            return
        if isinstance(node, (And, Or, Implies, Iff)):
            walk(node.left, env)
            walk(node.right, env)
            return
        if isinstance(node, (Exists, Forall)):
            walk(node.sub, env)
            return
        if isinstance(node, Fixpoint):
            walk(node.body, {**env, node.rel: len(node.vars)})
            return
        if isinstance(node, SimFixpoint):
            inner = {**env, **{rel: len(vars_) for rel, vars_, _ in node.defs}}
            for _rel, _vars, body in node.defs:
                walk(body, inner)
            return
        raise FormulaError(f"unknown node {node!r}")

    walk(phi, bound)
