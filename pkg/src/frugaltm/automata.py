"""Two-action Tsetlin automaton with ``2n`` states and stuck-at faults.

States are numbered ``1 .. 2n`` and held in a plain binary register
(``s3 == 0b011``), so a fault's bit position addresses that register
directly.  States ``1..n`` select *exclude*, ``n+1..2n`` select *include*.

Every register write (initialization included) goes through
:func:`settle`: the stuck-at mask is asserted, and a value that falls outside
``1..2n`` wraps as ``((v - 1) mod 2n) + 1``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .rng import RngStream


class Action(enum.IntEnum):
    EXCLUDE = 0
    INCLUDE = 1


class Event(enum.IntEnum):
    INACTION = 0
    REWARD = 1
    PENALTY = 2


@dataclass(frozen=True)
class FaultSpec:
    """A single stuck-at line on bit ``bit`` of the state register."""

    bit: int
    stuck_value: int

    def __post_init__(self) -> None:
        if self.bit < 0:
            raise ValueError("fault bit must be >= 0")
        if self.stuck_value not in (0, 1):
            raise ValueError("stuck_value must be 0 or 1")

    def masks(self) -> tuple[int, int]:
        """``(or_mask, and_mask)`` such that ``(v | or) & and`` asserts the fault."""
        if self.stuck_value:
            return 1 << self.bit, -1
        return 0, ~(1 << self.bit)

    def apply(self, value: int) -> int:
        or_mask, and_mask = self.masks()
        return (value | or_mask) & and_mask


def register_bits(n: int) -> int:
    """Bits needed to hold states ``1..2n``."""
    return (2 * n).bit_length()


def check_fault(n: int, fault: FaultSpec | None) -> None:
    if fault is not None and fault.bit >= register_bits(n):
        raise ValueError(
            f"fault bit {fault.bit} outside the {register_bits(n)}-bit register of a {2 * n}-state automaton"
        )


def wrap(value: int, n: int) -> int:
    if 1 <= value <= 2 * n:
        return value
    return (value - 1) % (2 * n) + 1


def settle(raw: int, n: int, fault: FaultSpec | None) -> tuple[int, bool, bool]:
    """Register value after a write of ``raw``.

    Returns ``(state, masked, wrapped)``; the flags say whether the stuck-at
    line altered the value and whether the range guard had to wrap it.
    """
    if fault is None:
        return raw, False, False
    value = fault.apply(raw)
    masked = value != raw
    out = wrap(value, n)
    wrapped = out != value
    if wrapped:
        # the stuck line stays asserted after the wrap when that remains legal
        again = fault.apply(out)
        if 1 <= again <= 2 * n:
            out = again
    return out, masked, wrapped


def step(state: int, n: int, event: Event) -> int:
    """Unfaulted single-step transition."""
    if event == Event.INACTION:
        return state
    include = state > n
    if event == Event.REWARD:
        return min(state + 1, 2 * n) if include else max(state - 1, 1)
    return state - 1 if include else state + 1


@dataclass(frozen=True)
class TsetlinAutomaton:
    n: int
    state: int
    fault: FaultSpec | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 1 <= self.state <= 2 * self.n:
            raise ValueError(f"state {self.state} outside 1..{2 * self.n}")
        check_fault(self.n, self.fault)

    @classmethod
    def init(cls, n: int, rng: RngStream, fault: FaultSpec | None = None) -> "TsetlinAutomaton":
        """Start at ``s_n`` or ``s_{n+1}`` with probability 1/2 each.

        A low draw (``bernoulli(0.5)`` true) picks ``s_n``.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        check_fault(n, fault)
        raw = n if rng.bernoulli(0.5) else n + 1
        return cls(n, settle(raw, n, fault)[0], fault)

    @property
    def action(self) -> Action:
        return Action.INCLUDE if self.state > self.n else Action.EXCLUDE

    def reinforce(self, event: Event) -> "TsetlinAutomaton":
        if event == Event.INACTION:
            return self
        return replace(self, state=settle(step(self.state, self.n, event), self.n, self.fault)[0])


def action(a: TsetlinAutomaton) -> Action:
    return a.action


def reinforce(a: TsetlinAutomaton, event: Event) -> TsetlinAutomaton:
    return a.reinforce(event)


def min_steps_to_saturation(n: int) -> int:
    """States on the path from the boundary to saturation in one action half.

    ``s_{n+1} .. s_2n`` (and ``s_n .. s_1``) is ``n`` states long; trace
    analysis uses it as the per-action settling depth.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return n
