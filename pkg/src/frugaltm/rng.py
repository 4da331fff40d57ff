"""Pseudorandom sources for per-automaton Bernoulli sampling.

Two generator families share one contract (``next_raw`` / ``bernoulli``):

* ``pcg64``: PCG-XSH-RR, a 64-bit LCG state with a 32-bit permuted output.
* ``lfsr:<w>``: a Fibonacci (external XOR) linear feedback shift register of
  width ``w`` (4..32) using the maximal-length tap sets in :data:`LFSR_TAPS`.

LFSR convention
---------------
Taps are the exponents of the feedback polynomial.  Tap ``t`` reads register
bit ``w - t`` (bit 0 is the LSB).  One step XORs the tapped bits, shifts the
register right by one and inserts the XOR result at the MSB::

    fb    = XOR_t bit(state, w - t)
    state = (state >> 1) | (fb << (w - 1))

For ``w=4``, taps ``(4, 3)``: ``0b0001 -> 0b1000 -> 0b0100 -> ...``.  The
output word of a step is the whole register after the shift, so raw values
lie in ``1 .. 2**w - 1`` and never hit zero.

Bernoulli sampling draws exactly one raw word and returns
``raw < floor(p * 2**w)`` (``w = 32`` for PCG).  ``p = 1`` is clamped to a
threshold of ``2**w``.

Seed derivation
---------------
Each automaton gets its own stream.  Stream seeds come from
:func:`derive_seed`, a SplitMix64 step: the base seed plus
``(index + 1) * 0x9E3779B97F4A7C15`` pushed through the SplitMix64 finalizer.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1

PCG_MULTIPLIER = 6364136223846793005
PCG_INCREMENT_SALT = 0xDA3E39CB94B95BDB
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Maximal-length Fibonacci taps, one per width (polynomial exponents).
LFSR_TAPS: dict[int, tuple[int, ...]] = {
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 6, 2, 1),
    20: (20, 17),
    21: (21, 19),
    22: (22, 21),
    23: (23, 18),
    24: (24, 23, 22, 17),
    25: (25, 22),
    26: (26, 6, 2, 1),
    27: (27, 5, 2, 1),
    28: (28, 25),
    29: (29, 27),
    30: (30, 6, 4, 1),
    31: (31, 28),
    32: (32, 22, 2, 1),
}

MIN_LFSR_WIDTH = 4
MAX_LFSR_WIDTH = 32


class RngKind(enum.IntEnum):
    PCG64 = 0
    LFSR = 1


@dataclass(frozen=True)
class RngSpec:
    """Which generator to build and how to seed it."""

    kind: RngKind = RngKind.PCG64
    width: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.kind == RngKind.LFSR:
            if not MIN_LFSR_WIDTH <= self.width <= MAX_LFSR_WIDTH:
                raise ValueError(f"LFSR width must be in [4, 32], got {self.width}")
            if self.seed % (1 << self.width) == 0:
                raise ValueError("LFSR seed reduces to the all-zero state")
        elif self.width != 32:
            raise ValueError("PCG output width is fixed at 32 bits")

    @property
    def output_bits(self) -> int:
        return self.width

    @classmethod
    def parse(cls, text: str, seed: int = 1) -> "RngSpec":
        """Parse ``"pcg64"`` or ``"lfsr:<width>"``."""
        text = text.strip().lower()
        if text == "pcg64":
            return cls(RngKind.PCG64, 32, seed)
        if text.startswith("lfsr:"):
            try:
                width = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad LFSR width in {text!r}") from None
            if seed % (1 << width) == 0:
                seed |= 1
            return cls(RngKind.LFSR, width, seed)
        raise ValueError(f"unknown rng {text!r}; expected 'pcg64' or 'lfsr:<width>'")

    def label(self) -> str:
        return "pcg64" if self.kind == RngKind.PCG64 else f"lfsr:{self.width}"

    def with_seed(self, seed: int) -> "RngSpec":
        seed &= MASK64
        if self.kind == RngKind.LFSR and seed % (1 << self.width) == 0:
            seed |= 1
        return RngSpec(self.kind, self.width, seed)


def mix64(z: int) -> int:
    """SplitMix64 finalizer (64-bit avalanche)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, index: int) -> int:
    """Seed of stream ``index`` under ``base``; distinct indices decorrelate."""
    return mix64(base + (index + 1) * GOLDEN_GAMMA)


def derive_seeds(base: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized :func:`derive_seed` over an integer array; returns uint64."""
    z = np.asarray(indices, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        z = np.uint64(base & MASK64) + z * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def tap_mask(width: int) -> int:
    mask = 0
    for t in LFSR_TAPS[width]:
        mask |= 1 << (width - t)
    return mask


def lfsr_step(state: int, width: int, mask: int) -> int:
    fb = (state & mask).bit_count() & 1
    return (state >> 1) | (fb << (width - 1))


def pcg_seed(seed: int, initseq: int | None = None) -> tuple[int, int]:
    """Initial ``(state, increment)`` pair for a PCG stream.

    The stream selector defaults to a hash of ``seed``; pass ``initseq`` to
    pick it explicitly (as in the reference ``pcg32_srandom``).
    """
    if initseq is None:
        initseq = mix64(seed ^ PCG_INCREMENT_SALT)
    inc = ((initseq << 1) | 1) & MASK64
    state = (0 * PCG_MULTIPLIER + inc) & MASK64
    state = (state + seed) & MASK64
    state = (state * PCG_MULTIPLIER + inc) & MASK64
    return state, inc


def pcg_output(old: int) -> int:
    xorshifted = (((old >> 18) ^ old) >> 27) & MASK32
    rot = old >> 59
    return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & MASK32


def threshold(p: float, width: int) -> int:
    """Integer comparison bound for a Bernoulli(p) draw on a ``width``-bit word."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p >= 1.0:
        return 1 << width
    return int(math.floor(p * (1 << width)))


class RngStream:
    """A single-owner pseudorandom stream."""

    __slots__ = ("spec", "state", "inc", "_mask")

    def __init__(self, spec: RngSpec):
        self.spec = spec
        if spec.kind == RngKind.PCG64:
            self.state, self.inc = pcg_seed(spec.seed)
            self._mask = 0
        else:
            self.state = spec.seed % (1 << spec.width)
            self.inc = 0
            self._mask = tap_mask(spec.width)

    @classmethod
    def pcg64(cls, seed: int) -> "RngStream":
        return cls(RngSpec(RngKind.PCG64, 32, seed))

    @classmethod
    def lfsr(cls, width: int, seed: int = 1) -> "RngStream":
        return cls(RngSpec(RngKind.LFSR, width, seed))

    @property
    def width(self) -> int:
        return self.spec.width

    def next_raw(self) -> int:
        if self.spec.kind == RngKind.PCG64:
            old = self.state
            self.state = (old * PCG_MULTIPLIER + self.inc) & MASK64
            return pcg_output(old)
        self.state = lfsr_step(self.state, self.spec.width, self._mask)
        return self.state

    def bernoulli(self, p: float) -> bool:
        thr = threshold(p, self.spec.width)
        return self.next_raw() < thr

    def below(self, bound: int) -> int:
        """Integer in ``[0, bound)`` by multiply-shift of one raw word."""
        return (self.next_raw() * bound) >> self.spec.width

    def shuffle(self, items: list) -> list:
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def next_raw(stream: RngStream) -> int:
    return stream.next_raw()


def bernoulli(stream: RngStream, p: float) -> bool:
    return stream.bernoulli(p)


@dataclass
class StreamBank:
    """Many independent streams of one kind, stored as flat uint64 arrays.

    Stream ``i`` is seeded with ``derive_seed(base_seed, first_index + i)`` and
    produces exactly the sequence of ``RngStream(spec.with_seed(that seed))``.
    """

    kind: int
    width: int
    mask: int
    state: np.ndarray
    inc: np.ndarray

    @classmethod
    def create(cls, spec: RngSpec, base_seed: int, count: int, first_index: int = 0) -> "StreamBank":
        seeds = derive_seeds(base_seed, np.arange(first_index, first_index + count, dtype=np.uint64))
        if spec.kind == RngKind.PCG64:
            with np.errstate(over="ignore"):
                salted = seeds ^ np.uint64(PCG_INCREMENT_SALT)
                z = salted
                z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
                z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
                z = z ^ (z >> np.uint64(31))
                inc = (z << np.uint64(1)) | np.uint64(1)
                state = inc + seeds
                state = state * np.uint64(PCG_MULTIPLIER) + inc
            return cls(int(RngKind.PCG64), 32, 0, state, inc)
        width = spec.width
        low = seeds & np.uint64((1 << width) - 1)
        low[low == 0] = 1
        return cls(int(RngKind.LFSR), width, tap_mask(width), low.copy(), np.zeros(count, dtype=np.uint64))

    def stream(self, i: int) -> RngStream:
        """A scalar copy of stream ``i`` at its current position."""
        if self.kind == RngKind.PCG64:
            s = RngStream.__new__(RngStream)
            s.spec = RngSpec(RngKind.PCG64, 32, 0)
            s.state, s.inc, s._mask = int(self.state[i]), int(self.inc[i]), 0
            return s
        return RngStream(RngSpec(RngKind.LFSR, self.width, int(self.state[i])))
