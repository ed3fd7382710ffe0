"""Model-comparison games: round games on elements and pebble games.

Winners are computed by the back-and-forth method rather than explicit
game-tree search: the set of positions from which the responding player
survives j more rounds is refined level by level, and the winner of a
concrete game is read off by membership.  The same level sets drive
strategy extraction (winning moves stay inside the next level down).

Conventions.  A map between structures is checked as a partial
isomorphism with the constant pairs adjoined, so games over vocabularies
with constants behave as if the constants were pebbled from the start.
Pebble positions are padded tuples over the universes extended by None
(a pebble that is off the board).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Optional, Sequence, Union

from .evaluation import Assignment, satisfies, stages
from .formulas import (
    And,
    Bot,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
    big_and,
    big_or,
    exists_all,
    forall_all,
)
from .structures import (
    BUILTIN_RELATIONS,
    Structure,
    Vocabulary,
    builtin_order,
    cycle_graph,
    enumerate_structures,
    is_partial_isomorphism,
    linear_order,
    path_digraph,
)


class GameError(ValueError):
    """Infeasible game instance or malformed position."""


SPOILER = "Spoiler"
DUPLICATOR = "Duplicator"

PaddedTuple = tuple[Optional[int], ...]
PairMap = frozenset[tuple[int, int]]


def _constant_pairs(a: Structure, b: Structure) -> list[tuple[int, int]]:
    return [(a.constant(name), b.constant(name)) for name in a.vocab.constant_names()]


def _map_ok(pairs: Iterable[tuple[int, int]], a: Structure, b: Structure) -> bool:
    """Partial isomorphism check with constants adjoined."""
    return is_partial_isomorphism(a, b, list(pairs) + _constant_pairs(a, b))


# ----------------------------------------------------------- round games


@dataclass
class EFTable:
    """Level sets for a round game: maps alive with j rounds remaining."""

    left: Structure
    right: Structure
    base: PairMap
    rounds: int
    levels: list[set[PairMap]]

    def alive(self, pairs: PairMap, level: int) -> bool:
        return level < len(self.levels) and pairs in self.levels[level]


@dataclass(frozen=True)
class Move:
    side: str  # "left" or "right"
    element: int
    pebble: Optional[int] = None
    losing: bool = False


@dataclass(frozen=True)
class GamePosition:
    """A position in a running game, as the service and hints see it.

    For round games the tuples grow by one entry per round; for pebble
    games they have fixed length s with None marking off-board pebbles.
    ``pending`` carries the opponent pick the side to move must answer.
    """

    kind: str  # "ef" or "pebble"
    left_tuple: PaddedTuple
    right_tuple: PaddedTuple
    moves_remaining: int
    side_to_move: str  # SPOILER or DUPLICATOR
    pending: Optional[Move] = None


@dataclass
class GameResult:
    winner: str
    table: Union["EFTable", "WinSets"]
    start: GamePosition

    def recommend(self, position: GamePosition) -> Move:
        return optimal_move(position, self.table)


def _live_extensions(
    base: PairMap, a: Structure, b: Structure, extra: int
) -> set[PairMap]:
    """All partial isomorphisms extending base by <= extra pairs.

    Extensions of a map that already violates the isomorphism conditions
    violate them too (constants are adjoined before checking), so dead
    maps are pruned as soon as they appear.
    """
    dom = {x for x, _ in base}
    rng = {y for _, y in base}
    if len(dom) != len(base) or len(rng) != len(base) or not _map_ok(base, a, b):
        return set()
    out = {base}
    frontier = {base}
    for _ in range(extra):
        nxt: set[PairMap] = set()
        for pairs in frontier:
            dom = {x for x, _ in pairs}
            rng = {y for _, y in pairs}
            for x in a.universe:
                if x in dom:
                    continue
                for y in b.universe:
                    if y in rng:
                        continue
                    grown = pairs | {(x, y)}
                    if grown not in nxt and _map_ok(grown, a, b):
                        nxt.add(grown)
        out |= nxt
        frontier = nxt
    return out


def ef_extension_count(a_size: int, b_size: int, m: int) -> int:
    total = 0
    for i in range(m + 1):
        total += math.comb(a_size, i) * math.comb(b_size, i) * math.factorial(i)
    return total


def ef_table(
    a: Structure,
    atuple: Sequence[int],
    b: Structure,
    btuple: Sequence[int],
    m: int,
    bound: int = 5_000_000,
) -> EFTable:
    """Back-and-forth level sets for the m-round game from a start map."""
    if len(atuple) != len(btuple):
        raise GameError("start tuples must have equal length")
    if m < 0:
        raise GameError("round count must be nonnegative")
    space = ef_extension_count(a.size, b.size, m)
    if space > bound:
        raise GameError(f"round-game table would hold {space} maps, bound is {bound}")
    base = frozenset(zip(atuple, btuple))
    level0 = _live_extensions(base, a, b, m)
    levels = [level0]
    for j in range(m):
        budget = m - j - 1
        prev = levels[-1]
        survivors: set[PairMap] = set()
        for pairs in prev:
            if len(pairs - base) > budget:
                continue
            if _has_forth_back(pairs, a, b, prev):
                survivors.add(pairs)
        levels.append(survivors)
    return EFTable(a, b, base, m, levels)


def _has_forth_back(pairs: PairMap, a: Structure, b: Structure, target: set[PairMap]) -> bool:
    mapping = dict(pairs)
    inverse = {y: x for x, y in pairs}
    for x in a.universe:
        if x in mapping:
            continue
        if not any(pairs | {(x, y)} in target for y in b.universe if y not in inverse):
            return False
    for y in b.universe:
        if y in inverse:
            continue
        if not any(pairs | {(x, y)} in target for x in a.universe if x not in mapping):
            return False
    return True


def ef_game(
    a: Structure,
    atuple: Sequence[int],
    b: Structure,
    btuple: Sequence[int],
    m: int,
    bound: int = 5_000_000,
) -> GameResult:
    """Decide the m-round element-picking game from the given start tuples."""
    table = ef_table(a, atuple, b, btuple, m, bound)
    winner = DUPLICATOR if table.base in table.levels[m] else SPOILER
    start = GamePosition(
        kind="ef",
        left_tuple=tuple(atuple),
        right_tuple=tuple(btuple),
        moves_remaining=m,
        side_to_move=SPOILER,
    )
    return GameResult(winner, table, start)


# ---------------------------------------------------------- pebble games


def is_s_partial_isomorphism(
    a: Structure, atuple: PaddedTuple, b: Structure, btuple: PaddedTuple
) -> bool:
    """Supports must coincide and the supported sub-map be a partial iso."""
    if len(atuple) != len(btuple):
        return False
    support_a = {i for i, value in enumerate(atuple) if value is not None}
    support_b = {i for i, value in enumerate(btuple) if value is not None}
    if support_a != support_b:
        return False
    pairs = [(atuple[i], btuple[i]) for i in sorted(support_a)]
    return _map_ok(pairs, a, b)


@dataclass
class WinSets:
    """Descending chain of surviving pebble positions.

    ``levels[j]`` holds the s-partial isomorphisms from which the
    responding player survives j more moves; when refined to
    stabilization the last level is the limit set and ``stabilized_at``
    is the least index where the chain stops shrinking.
    """

    left: Structure
    right: Structure
    pebbles: int
    levels: list[set[tuple[PaddedTuple, PaddedTuple]]]
    stabilized_at: Optional[int] = None

    def level(self, j: int) -> set[tuple[PaddedTuple, PaddedTuple]]:
        if j < len(self.levels):
            return self.levels[j]
        return self.levels[-1]

    def limit(self) -> set[tuple[PaddedTuple, PaddedTuple]]:
        if self.stabilized_at is None:
            raise GameError("limit requested from a finitely refined chain")
        return self.levels[-1]

    def to_json(self) -> list[list[list[list[Optional[int]]]]]:
        def key(pair):
            left, right = pair
            return tuple((value is None, value) for value in left + right)

        return [
            [[list(left), list(right)] for left, right in sorted(level, key=key)]
            for level in self.levels
        ]


def pebble_win_sets(
    a: Structure,
    b: Structure,
    s: int,
    m: Optional[int] = None,
    bound: int = 2_000_000,
) -> WinSets:
    """Refine the pebble-position sets m times, or to stabilization when
    m is None."""
    if s < 1:
        raise GameError("pebble games need at least one pebble")
    space = (a.size + 1) ** s * (b.size + 1) ** s
    if space > bound:
        raise GameError(f"pebble position space {space} exceeds bound {bound}")
    padded_a = list(product(list(a.universe) + [None], repeat=s))
    padded_b = list(product(list(b.universe) + [None], repeat=s))
    level0 = {
        (atuple, btuple)
        for atuple in padded_a
        for btuple in padded_b
        if is_s_partial_isomorphism(a, atuple, b, btuple)
    }
    levels = [level0]
    stabilized = None
    step = 0
    while True:
        if m is not None and step >= m:
            break
        prev = levels[-1]
        survivors = {
            position
            for position in prev
            if _pebble_forth_back(position, a, b, s, prev)
        }
        if survivors == prev:
            stabilized = step
            break
        levels.append(survivors)
        step += 1
    return WinSets(a, b, s, levels, stabilized)


def _pebble_forth_back(
    position: tuple[PaddedTuple, PaddedTuple],
    a: Structure,
    b: Structure,
    s: int,
    target: set[tuple[PaddedTuple, PaddedTuple]],
) -> bool:
    atuple, btuple = position
    for i in range(s):
        for x in a.universe:
            grown_a = atuple[:i] + (x,) + atuple[i + 1 :]
            if not any(
                (grown_a, btuple[:i] + (y,) + btuple[i + 1 :]) in target
                for y in b.universe
            ):
                return False
        for y in b.universe:
            grown_b = btuple[:i] + (y,) + btuple[i + 1 :]
            if not any(
                (atuple[:i] + (x,) + atuple[i + 1 :], grown_b) in target
                for x in a.universe
            ):
                return False
    return True


def pebble_game(
    a: Structure,
    atuple: Sequence[Optional[int]],
    b: Structure,
    btuple: Sequence[Optional[int]],
    s: int,
    m: Optional[int] = None,
    bound: int = 2_000_000,
) -> GameResult:
    """Decide the s-pebble game with m moves (m=None plays forever)."""
    atuple = tuple(atuple)
    btuple = tuple(btuple)
    if len(atuple) != s or len(btuple) != s:
        raise GameError(f"start tuples must have length {s}")
    win = pebble_win_sets(a, b, s, m, bound)
    position = (atuple, btuple)
    if m is None:
        duplicator_wins = position in win.limit()
        remaining = -1
    else:
        duplicator_wins = position in win.level(m)
        remaining = m
    start = GamePosition(
        kind="pebble",
        left_tuple=atuple,
        right_tuple=btuple,
        moves_remaining=remaining,
        side_to_move=SPOILER,
    )
    return GameResult(DUPLICATOR if duplicator_wins else SPOILER, win, start)


def duplicator_wins_infinite(a: Structure, b: Structure, s: int, bound: int = 2_000_000) -> bool:
    """Duplicator survives forever from the all-off-board position."""
    win = pebble_win_sets(a, b, s, None, bound)
    start = ((None,) * s, (None,) * s)
    return start in win.limit()


def s_rank(a: Structure, s: int, bound: int = 2_000_000) -> int:
    """Stabilization index of the pebble-position chain of a with itself."""
    win = pebble_win_sets(a, a, s, None, bound)
    assert win.stabilized_at is not None
    return win.stabilized_at


# ------------------------------------------------------ strategy advice


def _ef_replies(
    table: EFTable, pairs: PairMap, pick: Move
) -> list[tuple[int, PairMap]]:
    """Legal replies (element, resulting map) to an opponent pick."""
    mapping = dict(pairs)
    inverse = {y: x for x, y in pairs}
    out = []
    if pick.side == "left":
        x = pick.element
        if x in mapping:
            out.append((mapping[x], pairs))
        else:
            for y in table.right.universe:
                if y not in inverse:
                    out.append((y, pairs | {(x, y)}))
    else:
        y = pick.element
        if y in inverse:
            out.append((inverse[y], pairs))
        else:
            for x in table.left.universe:
                if x not in mapping:
                    out.append((x, pairs | {(x, y)}))
    return out


def _position_pairs(position: GamePosition) -> PairMap:
    pairs = [
        (x, y)
        for x, y in zip(position.left_tuple, position.right_tuple)
        if x is not None and y is not None
    ]
    return frozenset(pairs)


def _ef_spoiler_move(table: EFTable, position: GamePosition) -> Move:
    pairs = _position_pairs(position)
    j = position.moves_remaining
    fallback = None
    for side, structure in (("left", table.left), ("right", table.right)):
        for element in structure.universe:
            pick = Move(side, element)
            if fallback is None:
                fallback = pick
            replies = _ef_replies(table, pairs, pick)
            if all(not table.alive(result, j - 1) for _reply, result in replies):
                return pick
    assert fallback is not None
    return Move(fallback.side, fallback.element, losing=True)


def _ef_duplicator_move(table: EFTable, position: GamePosition) -> Move:
    if position.pending is None:
        raise GameError("responder move requested without an opponent pick")
    pairs = _position_pairs(position)
    j = position.moves_remaining
    reply_side = "right" if position.pending.side == "left" else "left"
    replies = _ef_replies(table, pairs, position.pending)
    for reply, result in sorted(replies):
        if table.alive(result, j - 1):
            return Move(reply_side, reply)
    if not replies:
        raise GameError("no legal reply available")
    return Move(reply_side, sorted(replies)[0][0], losing=True)


def _substituted(tup: PaddedTuple, i: int, value: Optional[int]) -> PaddedTuple:
    return tup[:i] + (value,) + tup[i + 1 :]


def _pebble_level(win: WinSets, j: int) -> set:
    if j < 0:
        j = 0
    if win.stabilized_at is not None and j >= len(win.levels):
        return win.levels[-1]
    return win.level(j)


def _pebble_spoiler_move(win: WinSets, position: GamePosition) -> Move:
    atuple, btuple = position.left_tuple, position.right_tuple
    j = position.moves_remaining
    target = _pebble_level(win, j - 1) if j >= 0 else win.levels[-1]
    fallback = None
    for side, structure in (("left", win.left), ("right", win.right)):
        for pebble in range(win.pebbles):
            for element in structure.universe:
                pick = Move(side, element, pebble)
                if fallback is None:
                    fallback = pick
                if side == "left":
                    grown = _substituted(atuple, pebble, element)
                    dead = all(
                        (grown, _substituted(btuple, pebble, reply)) not in target
                        for reply in win.right.universe
                    )
                else:
                    grown = _substituted(btuple, pebble, element)
                    dead = all(
                        (_substituted(atuple, pebble, reply), grown) not in target
                        for reply in win.left.universe
                    )
                if dead:
                    return pick
    assert fallback is not None
    return Move(fallback.side, fallback.element, fallback.pebble, losing=True)


def _pebble_duplicator_move(win: WinSets, position: GamePosition) -> Move:
    if position.pending is None or position.pending.pebble is None:
        raise GameError("responder move requested without an opponent pick")
    atuple, btuple = position.left_tuple, position.right_tuple
    j = position.moves_remaining
    target = _pebble_level(win, j - 1) if j >= 0 else win.levels[-1]
    pick = position.pending
    reply_side = "right" if pick.side == "left" else "left"
    if pick.side == "left":
        grown = _substituted(atuple, pick.pebble, pick.element)
        candidates = [
            (reply, (grown, _substituted(btuple, pick.pebble, reply)))
            for reply in win.right.universe
        ]
    else:
        grown = _substituted(btuple, pick.pebble, pick.element)
        candidates = [
            (reply, (_substituted(atuple, pick.pebble, reply), grown))
            for reply in win.left.universe
        ]
    for reply, result in candidates:
        if result in target:
            return Move(reply_side, reply, pick.pebble)
    return Move(reply_side, candidates[0][0], pick.pebble, losing=True)


def optimal_move(position: GamePosition, win: Union[EFTable, WinSets]) -> Move:
    """A move preserving the mover's winning status, or a tagged losing one.

    Ties break deterministically: left structure before right, lowest
    pebble index, lowest element.
    """
    if position.kind == "ef":
        assert isinstance(win, EFTable)
        if position.side_to_move == SPOILER:
            return _ef_spoiler_move(win, position)
        return _ef_duplicator_move(win, position)
    assert isinstance(win, WinSets)
    if position.side_to_move == SPOILER:
        return _pebble_spoiler_move(win, position)
    return _pebble_duplicator_move(win, position)


# ------------------------------------------- formulas from the game view


def _atomic_shapes(vocab: Vocabulary, var_names: Sequence[str]) -> list[Formula]:
    """All atomic formulas over the given variables and the constants,
    containing at least one variable; deterministic order."""
    variables: list[Term] = [Var(name) for name in var_names]
    constants: list[Term] = [Const(name) for name in vocab.constant_names()]
    terms = variables + constants
    shapes: list[Formula] = []
    for i, left in enumerate(variables):
        for right in variables[i + 1 :]:
            shapes.append(Eq((left,), (right,)))
        for right in constants:
            shapes.append(Eq((left,), (right,)))
    rel_names = [(name, arity) for name, arity in vocab.relations]
    if vocab.builtins:
        rel_names += sorted(BUILTIN_RELATIONS.items())
    for name, arity in rel_names:
        for combo in product(terms, repeat=arity):
            if any(isinstance(t, Var) for t in combo):
                shapes.append(Rel(name, combo))
    return shapes


def _pebble_vars(s: int) -> list[str]:
    return [f"v{i}" for i in range(1, s + 1)]


def iso_type_formula(
    a: Structure,
    atuple: PaddedTuple,
    s: int,
    m: int,
    budget: int = 200_000,
) -> Formula:
    """The rank-m type of a padded tuple in s variables.

    Built with structural sharing: types of the same tuple at the same
    rank are one object, so the result is a DAG whose written-out size
    may be astronomically larger than its node count.  The budget bounds
    the number of distinct (tuple, rank) entries.
    """
    if len(atuple) != s:
        raise GameError(f"tuple must have length {s}")
    names = _pebble_vars(s)
    memo: dict[tuple[PaddedTuple, int], Formula] = {}

    def atoms_of(tup: PaddedTuple) -> Formula:
        support = [i for i, value in enumerate(tup) if value is not None]
        shapes = _atomic_shapes(a.vocab, [names[i] for i in support])
        assignment = Assignment(values={names[i]: tup[i] for i in support})
        parts = []
        for shape in shapes:
            if satisfies(a, shape, assignment):
                parts.append(shape)
            else:
                parts.append(Not(shape))
        return big_and(parts)

    def build(tup: PaddedTuple, rank: int) -> Formula:
        key = (tup, rank)
        if key in memo:
            return memo[key]
        if len(memo) >= budget:
            raise GameError(f"type-formula budget of {budget} entries exceeded")
        if rank == 0:
            result = atoms_of(tup)
        else:
            base = build(tup, 0)
            rounds = []
            for i in range(s):
                exists_parts = [
                    Exists(names[i], build(_substituted(tup, i, value), rank - 1))
                    for value in a.universe
                ]
                forall_part = Forall(
                    names[i],
                    big_or([build(_substituted(tup, i, value), rank - 1) for value in a.universe]),
                )
                rounds.append(big_and(exists_parts + [forall_part]))
            result = And(base, big_and(rounds))
        memo[key] = result
        return result

    return build(tuple(atuple), m)


def scott_formula(
    a: Structure,
    atuple: PaddedTuple,
    s: int,
    budget: int = 200_000,
) -> Formula:
    """One formula capturing the full s-variable equivalence class of the
    tuple: its type at the stabilization rank plus the statement that
    rank-r types already decide rank r+1."""
    r = s_rank(a, s)
    names = _pebble_vars(s)
    own = iso_type_formula(a, tuple(atuple), s, r, budget)
    closure_parts = []
    for btuple in product(list(a.universe) + [None], repeat=s):
        lower = iso_type_formula(a, btuple, s, r, budget)
        upper = iso_type_formula(a, btuple, s, r + 1, budget)
        closure_parts.append(forall_all(names, Implies(lower, upper)))
    return And(own, big_and(closure_parts))


def phi_s_infinity(vocab: Vocabulary, s: int) -> Formula:
    """Body whose least-fixed-point stages enumerate the distinguishable
    pairs of s-tuples; positive in the 2s-ary relation variable Z."""
    xs = [f"x{i}" for i in range(1, s + 1)]
    ys = [f"y{i}" for i in range(1, s + 1)]
    shapes = _atomic_shapes(vocab, _pebble_vars(s))
    names = _pebble_vars(s)
    parts: list[Formula] = []
    for shape in shapes:
        on_x = _rename_vars(shape, dict(zip(names, xs)))
        on_y = _rename_vars(shape, dict(zip(names, ys)))
        parts.append(Iff(on_x, Not(on_y)))
    z_atom = Rel("Z", tuple(Var(v) for v in xs + ys))
    for i in range(s):
        parts.append(Exists(xs[i], Forall(ys[i], z_atom)))
        parts.append(Exists(ys[i], Forall(xs[i], z_atom)))
    return big_or(parts)


def _rename_vars(phi: Formula, mapping: dict[str, str]) -> Formula:
    from .formulas import substitute

    return substitute(phi, {old: Var(new) for old, new in mapping.items()})


# ---------------------------------------------------------- rank surveys


def survey_presets() -> list[str]:
    return ["orders", "orders-minmax", "paths", "cycles", "builtin-orders"]


def survey_ranks(
    preset: str,
    s: int,
    sizes: Sequence[int],
    vocab: Optional[Vocabulary] = None,
    bound: int = 2_000_000,
    enumeration_limit: int = 1 << 16,
) -> list[tuple[int, int]]:
    """Rows (n, max rank over the class at size n) for boundedness plots."""
    rows = []
    for n in sizes:
        if preset == "orders":
            ranks = [s_rank(linear_order(n), s, bound)]
        elif preset == "orders-minmax":
            ranks = [s_rank(linear_order(n, minmax=True), s, bound)]
        elif preset == "paths":
            ranks = [s_rank(path_digraph(n), s, bound)]
        elif preset == "cycles":
            if n < 2:
                continue
            ranks = [s_rank(cycle_graph(n - 1), s, bound)]
        elif preset == "builtin-orders":
            ranks = [s_rank(builtin_order(n), s, bound)]
        elif preset == "all":
            if vocab is None:
                raise GameError("preset 'all' needs a vocabulary")
            ranks = [
                s_rank(structure, s, bound)
                for structure in enumerate_structures(vocab, n, enumeration_limit)
            ]
        else:
            raise GameError(f"unknown preset {preset!r}")
        rows.append((n, max(ranks)))
    return rows
