"""Exact payoff analysis of the single-clause automaton game.

One clause over ``k`` inputs has ``2k`` automata, ordered as
``x1, ~x1, x2, ~x2, ...`` (automaton ``2i`` watches ``x_{i+1}``, automaton
``2i + 1`` its complement).  A configuration assigns an action to every
automaton; configurations are numbered in row order where automaton 0 is the
most significant bit (row 1 = all exclude, row ``4**k`` = all include).

For each input (all ``2**k`` equally likely) the clause gets Type I feedback
when the target is 1 and Type II when it is 0.  A reward scores ``+1``, a
penalty ``-1``, inaction ``0``; the expected payoff of an automaton is the
input-average of ``P(reward) - P(penalty)`` from its feedback cell.
Everything is computed in :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .automata import Action
from .feedback import FeedbackType, cell


@dataclass(frozen=True)
class BooleanTarget:
    k: int
    truth_table: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if not 1 <= self.k <= 8:
            raise ValueError("k must be in 1..8")
        if len(self.truth_table) != 2**self.k:
            raise ValueError(f"truth table needs {2**self.k} entries")
        if any(v not in (0, 1) for v in self.truth_table):
            raise ValueError("truth table entries must be 0/1")

    @classmethod
    def from_function(cls, k: int, fn: Callable[..., int], name: str = "") -> "BooleanTarget":
        return cls(k, tuple(int(bool(fn(*inputs(x, k)))) for x in range(2**k)), name)

    def __call__(self, x: int) -> int:
        return self.truth_table[x]


def inputs(x: int, k: int) -> tuple[int, ...]:
    """Bits of input number ``x``; ``x1`` is the most significant."""
    return tuple((x >> (k - 1 - i)) & 1 for i in range(k))


def literals(x: int, k: int) -> tuple[int, ...]:
    out = []
    for b in inputs(x, k):
        out += [b, 1 - b]
    return tuple(out)


XOR = BooleanTarget.from_function(2, lambda a, b: a ^ b, "xor")
AND = BooleanTarget.from_function(2, lambda a, b: a & b, "and")
OR = BooleanTarget.from_function(2, lambda a, b: a | b, "or")
TARGETS = {"xor": XOR, "and": AND, "or": OR}


def config_from_row(row: int, k: int) -> tuple[Action, ...]:
    """Action vector of 1-based ``row``."""
    bits = row - 1
    m = 2 * k
    return tuple(Action((bits >> (m - 1 - i)) & 1) for i in range(m))


def row_from_config(config: Sequence[Action]) -> int:
    bits = 0
    for a in config:
        bits = (bits << 1) | int(a)
    return bits + 1


def clause_value(config: Sequence[Action], lits: Sequence[int]) -> int:
    return int(all(lit for a, lit in zip(config, lits) if a == Action.INCLUDE))


def clause_expr(config: Sequence[Action]) -> str:
    names = []
    for i, a in enumerate(config):
        if a == Action.INCLUDE:
            var = f"x{i // 2 + 1}"
            names.append(var if i % 2 == 0 else "¬" + var)
    return " ∧ ".join(names) if names else "1"


def _as_fraction(s) -> Fraction:
    s = Fraction(s) if not isinstance(s, Fraction) else s
    if s <= 1:
        raise ValueError("s must be > 1")
    return s


def expected_payoff(config: Sequence[Action], ta: int, f: BooleanTarget, s) -> Fraction:
    s = _as_fraction(s)
    if len(config) != 2 * f.k:
        raise ValueError("configuration length must be 2k")
    total = Fraction(0)
    for x in range(2**f.k):
        lits = literals(x, f.k)
        c = clause_value(config, lits)
        t = FeedbackType.TYPE_I if f(x) else FeedbackType.TYPE_II
        p_r, _, p_p = cell(t, config[ta], c, lits[ta], s)
        total += p_r - p_p
    return total / 2**f.k


@dataclass
class PayoffMatrix:
    target: BooleanTarget
    s: Fraction
    configs: list[tuple[Action, ...]] = field(default_factory=list)
    payoff: list[tuple[Fraction, ...]] = field(default_factory=list)
    clause_expr: list[str] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return len(self.configs)

    def row(self, r: int) -> tuple[Fraction, ...]:
        return self.payoff[r - 1]


def payoff_matrix(f: BooleanTarget, s) -> PayoffMatrix:
    s = _as_fraction(s)
    m = PayoffMatrix(f, s)
    for r in range(1, 4**f.k + 1):
        config = config_from_row(r, f.k)
        m.configs.append(config)
        m.payoff.append(tuple(expected_payoff(config, i, f, s) for i in range(2 * f.k)))
        m.clause_expr.append(clause_expr(config))
    return m


def nash_equilibria(m: PayoffMatrix) -> set[int]:
    """Rows where no automaton strictly gains by flipping its own action."""
    out = set()
    width = 2 * m.target.k
    for r in range(1, m.rows + 1):
        bits = r - 1
        stable = True
        for i in range(width):
            flipped = (bits ^ (1 << (width - 1 - i))) + 1
            if m.row(flipped)[i] > m.row(r)[i]:
                stable = False
                break
        if stable:
            out.add(r)
    return out


def accepted_equilibria(m: PayoffMatrix) -> set[int]:
    """Nash rows whose every payoff is strictly positive."""
    return {r for r in nash_equilibria(m) if all(p > 0 for p in m.row(r))}


def compare(m: PayoffMatrix, reference: dict[tuple[int, int], float], tol: float = 1e-12):
    """Split reference cells ``{(row, ta): value}`` into agreeing and divergent.

    Returns ``(agree, diverge)``; ``diverge`` maps each cell to
    ``(reference, computed)``.
    """
    agree, diverge = {}, {}
    for (r, ta), ref in sorted(reference.items()):
        got = m.row(r)[ta]
        if abs(float(got) - ref) <= tol:
            agree[(r, ta)] = got
        else:
            diverge[(r, ta)] = (ref, got)
    return agree, diverge


def render(m: PayoffMatrix, fmt: str = "text") -> str:
    accepted = accepted_equilibria(m)
    nash = nash_equilibria(m)
    width = 2 * m.target.k
    heads = [f"TA{i + 1}({clause_expr(tuple(Action.INCLUDE if j == i else Action.EXCLUDE for j in range(width)))})"
             for i in range(width)]
    if fmt == "csv":
        lines = ["row," + ",".join(f"ta{i + 1}_action,ta{i + 1}_payoff" for i in range(width)) + ",clause,nash,accepted"]
        for r in range(1, m.rows + 1):
            cells = []
            for a, p in zip(m.configs[r - 1], m.row(r)):
                cells += [a.name.lower(), f"{float(p):.6g}"]
            lines.append(f"{r}," + ",".join(cells) + f",{m.clause_expr[r - 1]},{int(r in nash)},{int(r in accepted)}")
        return "\n".join(lines) + "\n"
    cols = []
    for r in range(1, m.rows + 1):
        cols.append([f"{a.name.capitalize()} ({float(p):+.4f})" for a, p in zip(m.configs[r - 1], m.row(r))])
    widths = [max(len(heads[i]), *(len(c[i]) for c in cols)) for i in range(width)]
    lines = ["   #  " + "  ".join(h.ljust(w) for h, w in zip(heads, widths)) + "  clause"]
    for r, c in enumerate(cols, 1):
        mark = "*" if r in accepted else ("n" if r in nash else " ")
        lines.append(f"{mark}{r:3d}. " + "  ".join(v.ljust(w) for v, w in zip(c, widths)) + "  " + m.clause_expr[r - 1])
    lines.append(f"target={m.target.name or 'custom'} s={m.s}  n = Nash equilibrium, * = accepted (all payoffs > 0)")
    lines.append("accepted rows: " + ", ".join(str(r) for r in sorted(accepted)))
    return "\n".join(lines) + "\n"
