"""Boundary positions and rankers on words.

Words here are raw strings with 1-indexed positions, matching the usual
convention for position arithmetic on words; the ordered-structure view
of a word (see :func:`finmod.structures.word_structure`) is 0-indexed,
so bridging the two shifts positions by one.

A boundary position ``>a`` jumps to the first occurrence of the letter a
(or the first occurrence strictly after a reference position); ``<a``
jumps to the last occurrence (strictly before the reference position).
A ranker is a nonempty sequence of boundary positions evaluated left to
right; once any step is undefined the whole ranker is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


class RankerError(ValueError):
    pass


FORWARD = ">"
BACKWARD = "<"


@dataclass(frozen=True)
class BoundaryPosition:
    direction: str  # ">" (first occurrence) or "<" (last occurrence)
    letter: str

    def __post_init__(self) -> None:
        if self.direction not in (FORWARD, BACKWARD):
            raise RankerError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
        if len(self.letter) != 1:
            raise RankerError("letters are single characters")

    def __str__(self) -> str:
        return f"{self.direction}{self.letter}"


@dataclass(frozen=True)
class Ranker:
    steps: tuple[BoundaryPosition, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise RankerError("rankers are nonempty sequences of boundary positions")

    def __str__(self) -> str:
        return "".join(str(step) for step in self.steps)


def parse_ranker(text: str, alphabet: Optional[Sequence[str]] = None) -> Ranker:
    """Parse concatenated boundary positions, e.g. '>1>1<0'."""
    steps = []
    index = 0
    while index < len(text):
        direction = text[index]
        if direction not in (FORWARD, BACKWARD) or index + 1 >= len(text):
            raise RankerError(f"malformed ranker text {text!r} at offset {index}")
        letter = text[index + 1]
        if alphabet is not None and letter not in alphabet:
            raise RankerError(f"letter {letter!r} outside alphabet {tuple(alphabet)}")
        steps.append(BoundaryPosition(direction, letter))
        index += 2
    return Ranker(tuple(steps))


def boundary(
    word: str,
    direction: str,
    letter: str,
    q: Optional[int] = None,
    alphabet: Optional[Sequence[str]] = None,
) -> Optional[int]:
    """First/last occurrence of a letter, absolute or relative to q.

    Positions are 1-indexed.  Relative to q, the forward window is
    [q+1, |w|] and the backward window is [1, q-1]; an empty window or a
    missing letter gives None (undefined).  In particular the backward
    form at q = 1 is always undefined.
    """
    if alphabet is not None and letter not in alphabet:
        raise RankerError(f"letter {letter!r} outside alphabet {tuple(alphabet)}")
    if q is not None and not 1 <= q <= len(word):
        raise RankerError(f"reference position {q} outside [1, {len(word)}]")
    if direction == FORWARD:
        lo = q + 1 if q is not None else 1
        positions = [i for i in range(lo, len(word) + 1) if word[i - 1] == letter]
        return min(positions) if positions else None
    if direction == BACKWARD:
        hi = q - 1 if q is not None else len(word)
        positions = [i for i in range(1, hi + 1) if word[i - 1] == letter]
        return max(positions) if positions else None
    raise RankerError(f"direction must be {FORWARD!r} or {BACKWARD!r}")


def ranker_eval(
    ranker: Ranker, word: str, alphabet: Optional[Sequence[str]] = None
) -> Optional[int]:
    """Left fold of the boundary steps, propagating undefined."""
    position: Optional[int] = None
    for index, step in enumerate(ranker.steps):
        q = None if index == 0 else position
        position = boundary(word, step.direction, step.letter, q, alphabet)
        if position is None:
            return None
    return position


def forward_ranker(letter: str, count: int) -> Ranker:
    return Ranker(tuple(BoundaryPosition(FORWARD, letter) for _ in range(count)))
