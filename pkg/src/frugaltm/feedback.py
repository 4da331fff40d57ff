"""Type I / Type II reinforcement probability tables.

Each cell gives ``(P(reward), P(inaction), P(penalty))`` for one automaton,
keyed by feedback type, the automaton's action, the clause output and the
literal value.  The cell ``(include, clause=1, literal=0)`` is unreachable: an
included 0-literal forces the clause to 0.  Querying it raises
:class:`UnreachableCell`.

All cell functions accept ``s`` as ``float`` or :class:`fractions.Fraction`
and return the same type, so the game analyzer can stay exact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .automata import Action, Event
from .rng import RngStream, threshold

Number = Union[float, Fraction]


class FeedbackType(enum.IntEnum):
    TYPE_I = 1
    TYPE_II = 2


class UnreachableCell(ValueError):
    """An included 0-literal inside a firing clause was queried."""


def cell(t: FeedbackType, action: Action, clause: int, literal: int, s: Number) -> tuple[Number, Number, Number]:
    if not s > 1:
        raise ValueError(f"s must be > 1, got {s}")
    include = action == Action.INCLUDE
    if include and clause == 1 and literal == 0:
        raise UnreachableCell(f"{t.name}/include/clause=1/literal=0 is not a reachable cell")
    one = s / s
    zero = one - one
    hi = (s - 1) / s
    lo = one / s
    if t == FeedbackType.TYPE_I:
        if include:
            if clause == 1:
                return hi, lo, zero
            return zero, hi, lo
        if clause == 1 and literal == 1:
            return zero, lo, hi
        return lo, hi, zero
    if not include and clause == 1 and literal == 0:
        return zero, zero, one
    return zero, one, zero


@dataclass(frozen=True)
class FeedbackTables:
    """All reachable cells for one value of ``s``."""

    s: Number

    def __post_init__(self) -> None:
        if not self.s > 1:
            raise ValueError(f"s must be > 1, got {self.s}")

    def cell(self, t: FeedbackType, action: Action, clause: int, literal: int):
        return cell(t, action, clause, literal, self.s)

    def cells(self):
        """Yield ``((type, action, clause, literal), probs)`` for every reachable cell."""
        for t in FeedbackType:
            for a in Action:
                for c in (0, 1):
                    for lit in (0, 1):
                        if a == Action.INCLUDE and c == 1 and lit == 0:
                            continue
                        yield (t, a, c, lit), cell(t, a, c, lit, self.s)


def _second_stage(p_reward: float, p_penalty: float) -> float:
    if p_penalty <= 0:
        return 0.0
    return min(1.0, p_penalty / (1.0 - p_reward))


def sample_event(t: FeedbackType, action: Action, clause: int, literal: int, s: float, rng: RngStream) -> Event:
    """Draw one event from a cell with two Bernoulli draws.

    The first draw is against ``P(reward)``, the second against
    ``P(penalty) / (1 - P(reward))``.  Both draws are always taken so every
    update clocks the stream twice.
    """
    p_r, _, p_p = cell(t, action, clause, literal, s)
    p_r, p_p = float(p_r), float(p_p)
    rewarded = rng.bernoulli(p_r)
    penalized = rng.bernoulli(_second_stage(p_r, p_p))
    if rewarded:
        return Event.REWARD
    return Event.PENALTY if penalized else Event.INACTION


def cell_index(t: FeedbackType, action: Action, clause: int, literal: int) -> int:
    """Flat index used by the compiled training kernels."""
    return (int(t) - 1) * 8 + int(action) * 4 + clause * 2 + literal


def threshold_table(s: float, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell integer thresholds for the two Bernoulli stages.

    Unreachable cells carry ``-1`` in both slots.
    """
    first = np.full(16, -1, dtype=np.int64)
    second = np.full(16, -1, dtype=np.int64)
    for (t, a, c, lit), (p_r, _, p_p) in FeedbackTables(s).cells():
        i = cell_index(t, a, c, lit)
        first[i] = threshold(float(p_r), width)
        second[i] = threshold(_second_stage(float(p_r), float(p_p)), width)
    return first, second
