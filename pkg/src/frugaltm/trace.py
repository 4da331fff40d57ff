"""Transition traces, replay certificates and convergence detection.

A :class:`Trace` records one row per automaton update.  CSV layout (header
included, column order fixed)::

    epoch,step,class,clause,ta,feedback,event,before,after,flags

``feedback`` is ``I``/``II``, ``event`` is ``reward``/``penalty``/``inaction``,
``flags`` is empty or a ``|``-joined subset of ``fault``/``wrap`` (the stuck-at
line changed the written value / the range guard wrapped it).  ``class`` is the
clause bank; ``step`` is the position of the datapoint within its epoch.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import FLAG_MASKED, FLAG_WRAPPED, TRACE_COLS
from .automata import Event, settle, step
from .feedback import FeedbackType

CSV_HEADER = ("epoch", "step", "class", "clause", "ta", "feedback", "event", "before", "after", "flags")

_FEEDBACK_NAMES = {1: "I", 2: "II"}
_EVENT_NAMES = {0: "inaction", 1: "reward", 2: "penalty"}


@dataclass(frozen=True)
class TraceEvent:
    epoch: int
    step: int
    cls: int
    clause: int
    ta: int
    feedback: FeedbackType
    event: Event
    before: int
    after: int
    flags: int = 0

    @property
    def masked(self) -> bool:
        return bool(self.flags & FLAG_MASKED)

    @property
    def wrapped(self) -> bool:
        return bool(self.flags & FLAG_WRAPPED)

    def row(self) -> tuple:
        return (self.epoch, self.step, self.cls, self.clause, self.ta, int(self.feedback), int(self.event),
                self.before, self.after, self.flags)


def _flags_text(flags: int) -> str:
    parts = []
    if flags & FLAG_MASKED:
        parts.append("fault")
    if flags & FLAG_WRAPPED:
        parts.append("wrap")
    return "|".join(parts)


def _flags_parse(text: str) -> int:
    flags = 0
    for p in filter(None, text.split("|")):
        if p == "fault":
            flags |= FLAG_MASKED
        elif p == "wrap":
            flags |= FLAG_WRAPPED
        else:
            raise ValueError(f"unknown trace flag {p!r}")
    return flags


@dataclass
class Trace:
    """Append-only event log plus the context needed to replay it."""

    include_inaction: bool = False
    n: int = 0
    shape: tuple[int, int, int] = (0, 0, 0)
    initial_states: np.ndarray | None = None
    faults: dict = field(default_factory=dict)
    epoch_accuracy: list[float] = field(default_factory=list)
    epoch_ends: list[int] = field(default_factory=list)
    _chunks: list[np.ndarray] = field(default_factory=list)
    _rows: np.ndarray | None = None

    def begin(self, machine) -> None:
        """Attach to a machine about to train; captures the starting states."""
        self.n = machine.config.n
        self.shape = machine.states.shape
        self.initial_states = machine.states.copy()
        self.faults = {(f.bank, f.clause, f.ta): f.fault for f in machine.config.faults}

    def extend(self, rows: np.ndarray) -> None:
        if len(rows):
            self._chunks.append(np.array(rows, dtype=np.int32).reshape(-1, TRACE_COLS))
            self._rows = None

    def record(self, event: TraceEvent) -> None:
        self.extend(np.array([event.row()], dtype=np.int32))

    def end_epoch(self, epoch: int, accuracy: float) -> None:
        self.epoch_accuracy.append(accuracy)
        self.epoch_ends.append(len(self))

    @property
    def rows(self) -> np.ndarray:
        if self._rows is None:
            self._rows = np.concatenate(self._chunks) if self._chunks else np.zeros((0, TRACE_COLS), np.int32)
            self._chunks = [self._rows] if len(self._rows) else []
        return self._rows

    def __len__(self) -> int:
        return sum(len(c) for c in self._chunks)

    def __iter__(self):
        for r in self.rows:
            yield TraceEvent(int(r[0]), int(r[1]), int(r[2]), int(r[3]), int(r[4]), FeedbackType(int(r[5])),
                             Event(int(r[6])), int(r[7]), int(r[8]), int(r[9]))

    def events_for(self, cls: int, clause: int, ta: int) -> list[TraceEvent]:
        r = self.rows
        sel = (r[:, 2] == cls) & (r[:, 3] == clause) & (r[:, 4] == ta)
        return [ev for ev, keep in zip(self, sel) if keep]


def record(sink: Trace, event: TraceEvent) -> None:
    sink.record(event)


def replay(trace: Trace) -> list[tuple[int, str]]:
    """Check every row against the transition rules.

    Returns ``(row_index, reason)`` for each row whose ``before`` does not
    continue the automaton's history or whose ``after`` differs from
    ``settle(step(before, event))``.  An empty list certifies the trace.
    """
    n = trace.n
    current: dict[tuple[int, int, int], int] = {}
    bad = []
    for idx, ev in enumerate(trace):
        key = (ev.cls, ev.clause, ev.ta)
        if key not in current:
            current[key] = int(trace.initial_states[key]) if trace.initial_states is not None else ev.before
        if ev.before != current[key]:
            bad.append((idx, f"before={ev.before} but automaton was at {current[key]}"))
        if ev.event == Event.INACTION:
            expected, flags = ev.before, 0
        else:
            expected, masked, wrapped = settle(step(ev.before, n, ev.event), n, trace.faults.get(key))
            flags = (FLAG_MASKED if masked else 0) | (FLAG_WRAPPED if wrapped else 0)
        if ev.after != expected:
            bad.append((idx, f"after={ev.after}, rules give {expected}"))
        elif ev.flags != flags:
            bad.append((idx, f"flags={ev.flags}, rules give {flags}"))
        current[key] = ev.after
    return bad


@dataclass
class ReachabilityReport:
    visited: dict[tuple[int, int, int], set[int]]
    converged: bool
    convergence_epoch: int | None
    final_actions: np.ndarray

    def visited_by(self, cls: int, clause: int, ta: int) -> set[int]:
        return self.visited[(cls, clause, ta)]


def convergence_epoch(action_flips, accuracy, window: int) -> int | None:
    """First epoch ``e >= window`` with no action flips in epochs ``e-window+1..e``
    and accuracy at its run maximum."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if not len(accuracy):
        return None
    best = max(accuracy)
    for e in range(window, len(action_flips) + 1):
        if all(f == 0 for f in action_flips[e - window:e]) and accuracy[e - 1] == best:
            return e
    return None


def detect_convergence(trace: Trace, window: int = 5) -> ReachabilityReport:
    if window < 1:
        raise ValueError("window must be >= 1")
    n = trace.n
    states = trace.initial_states.copy()
    visited = {idx: {int(v)} for idx, v in np.ndenumerate(states)}
    rows = trace.rows
    flips = []
    start = 0
    for end in trace.epoch_ends:
        prev = states > n
        for r in rows[start:end]:
            key = (int(r[2]), int(r[3]), int(r[4]))
            states[key] = r[8]
            visited[key].add(int(r[8]))
        flips.append(int(np.count_nonzero((states > n) != prev)))
        start = end
    e = convergence_epoch(flips, trace.epoch_accuracy, window)
    return ReachabilityReport(visited, e is not None, e, states > n)


def export(trace: Trace, path, format: str = "csv") -> None:
    if format != "csv":
        raise ValueError(f"unsupported trace format {format!r}")
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in trace.rows:
            w.writerow([int(r[0]), int(r[1]), int(r[2]), int(r[3]), int(r[4]), _FEEDBACK_NAMES[int(r[5])],
                        _EVENT_NAMES[int(r[6])], int(r[7]), int(r[8]), _flags_text(int(r[9]))])


def read_csv(path, n: int = 0, faults: dict | None = None) -> Trace:
    """Parse a trace CSV back into a :class:`Trace`.

    The CSV holds events only; pass the automaton half-depth ``n`` (and the
    fault map, keyed ``(class, clause, ta)``) to make the result replayable.
    Without initial states, each automaton's first row seeds its history.
    """
    fb = {v: k for k, v in _FEEDBACK_NAMES.items()}
    evs = {v: k for k, v in _EVENT_NAMES.items()}
    rows = []
    with Path(path).open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        for r in reader:
            rows.append([int(r[0]), int(r[1]), int(r[2]), int(r[3]), int(r[4]), fb[r[5]], evs[r[6]],
                         int(r[7]), int(r[8]), _flags_parse(r[9])])
    t = Trace(include_inaction=any(r[6] == 0 for r in rows), n=n, faults=dict(faults or {}))
    t.extend(np.array(rows, dtype=np.int32).reshape(-1, TRACE_COLS))
    return t
