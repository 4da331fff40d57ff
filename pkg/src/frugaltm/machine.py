"""Clause banks, voting and the Type I / Type II training loop.

A machine holds one clause bank per class (``layout="multiclass"``) or a
single bank voting for class 1 against class 0 (``layout="binary"``, the
two-class form with ``U`` clauses in total).  Inside a bank, even clause
indices have positive polarity and odd ones negative.  Each clause owns
``2L`` automata: literal ``k < L`` is input bit ``k``, literal ``L + k`` its
complement.

Training one sample ``(x, y)``:

* target bank ``y``: ``v = clamp(vote, -T, T)``, each clause is selected with
  probability ``(T - v) / 2T``; positive clauses get Type I, negative Type II.
* one other class drawn uniformly (multiclass, ``M > 1``): selection
  ``(T + v) / 2T``; positive clauses get Type II, negative Type I.

In the binary layout ``y = 1`` takes the target route and ``y = 0`` the
other-class route on the single bank.

Randomness: every automaton and every clause has its own stream
(:class:`~frugaltm.rng.StreamBank`); the sample order and the other-class draw
come from a separate PCG control stream seeded from ``init_seed``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels as K
from .automata import Action, FaultSpec, TsetlinAutomaton, check_fault
from .datasets import BooleanizedDataset
from .feedback import threshold_table
from .rng import RngKind, RngSpec, RngStream, StreamBank, mix64

MODEL_MAGIC = "frugaltm-model"
MODEL_VERSION = 1

CLAUSE_STREAM_DOMAIN = 0x636C61757365  # "clause"
CONTROL_STREAM_DOMAIN = 0x636F6E74726C  # "contrl"

INIT_MODES = {"random": 0, "low": 1, "high": 2}


class Mode(enum.Enum):
    TRAIN = "train"
    INFER = "infer"


class Polarity(enum.IntEnum):
    POSITIVE = 1
    NEGATIVE = -1


@dataclass(frozen=True)
class FaultSite:
    """Where a stuck-at fault sits: bank (class), clause, automaton (literal)."""

    clause: int
    ta: int
    fault: FaultSpec
    bank: int = 0

    @classmethod
    def make(cls, clause: int, ta: int, bit: int, stuck: int, bank: int = 0) -> "FaultSite":
        return cls(clause, ta, FaultSpec(bit, stuck), bank)


@dataclass(frozen=True)
class TMConfig:
    L: int
    M: int
    U: int
    n: int
    T: int
    s: float
    rng: RngSpec = field(default_factory=lambda: RngSpec(RngKind.PCG64, 32, 1))
    epochs: int = 100
    init_seed: int = 0
    init: str = "random"
    layout: str = "multiclass"
    faults: tuple[FaultSite, ...] = ()

    def __post_init__(self) -> None:
        if self.L < 1 or self.M < 1 or self.n < 1:
            raise ValueError("L, M and n must be positive")
        if self.U < 2 or self.U % 2:
            raise ValueError(f"U must be even and >= 2, got {self.U}")
        if self.T < 1 or int(self.T) != self.T:
            raise ValueError("T must be a positive integer")
        if not self.s > 1:
            raise ValueError("s must be > 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {sorted(INIT_MODES)}")
        if self.layout not in ("multiclass", "binary"):
            raise ValueError("layout must be 'multiclass' or 'binary'")
        if self.layout == "binary" and self.M != 2:
            raise ValueError("binary layout needs M == 2")
        for site in self.faults:
            if not (0 <= site.bank < self.banks and 0 <= site.clause < self.U and 0 <= site.ta < 2 * self.L):
                raise ValueError(f"fault site {site} outside the machine")
            check_fault(self.n, site.fault)

    @property
    def banks(self) -> int:
        return 1 if self.layout == "binary" else self.M

    @property
    def automata_count(self) -> int:
        return self.banks * self.U * 2 * self.L

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = {"kind": self.rng.label(), "seed": self.rng.seed}
        d["faults"] = [
            {"bank": f.bank, "clause": f.clause, "ta": f.ta, "bit": f.fault.bit, "stuck": f.fault.stuck_value}
            for f in self.faults
        ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TMConfig":
        d = dict(d)
        r = d.pop("rng")
        d["rng"] = RngSpec.parse(r["kind"], r["seed"])
        d["faults"] = tuple(
            FaultSite.make(f["clause"], f["ta"], f["bit"], f["stuck"], f.get("bank", 0)) for f in d.get("faults", ())
        )
        return cls(**d)


@dataclass
class EventCounters:
    reward_I: int = 0
    penalty_I: int = 0
    reward_II: int = 0
    penalty_II: int = 0
    inaction: int = 0

    @classmethod
    def from_array(cls, a) -> "EventCounters":
        return cls(*(int(v) for v in a))

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.reward_I, self.penalty_I, self.reward_II, self.penalty_II, self.inaction)

    @property
    def reinforcements(self) -> int:
        """Rewards plus penalties (inaction excluded)."""
        return self.reward_I + self.penalty_I + self.reward_II + self.penalty_II

    def __add__(self, other: "EventCounters") -> "EventCounters":
        return EventCounters(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))


@dataclass
class Clause:
    polarity: Polarity
    tas: list[TsetlinAutomaton]


def literal_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    return np.concatenate([x, 1 - x], axis=-1).astype(np.uint8)


def check_literals(lits) -> None:
    lits = np.asarray(lits)
    half = lits.shape[-1] // 2
    if lits.shape[-1] % 2 or np.any(lits[..., half:] != 1 - lits[..., :half]):
        raise ValueError("literal vector must be x followed by its complement")


def evaluate_clause(c: Clause, lits, mode: Mode = Mode.INFER) -> int:
    """Conjunction of included literals; an empty clause is 1 in training, 0 at inference."""
    check_literals(lits)
    included = [k for k, ta in enumerate(c.tas) if ta.action == Action.INCLUDE]
    if not included:
        return 1 if mode == Mode.TRAIN else 0
    return int(all(lits[k] for k in included))


@dataclass
class FitResult:
    counters: list[EventCounters] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    test_accuracy: list[float] = field(default_factory=list)
    action_flips: list[int] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.counters)

    def totals(self) -> EventCounters:
        out = EventCounters()
        for c in self.counters:
            out = out + c
        return out


class Machine:
    def __init__(self, config: TMConfig):
        self.config = config
        cfg = config
        self.W = 2 * cfg.L
        size = cfg.automata_count
        self.or_mask = np.zeros(size, dtype=np.int32)
        self.and_mask = np.full(size, -1, dtype=np.int32)
        for site in cfg.faults:
            i = self.flat_index(site.bank, site.clause, site.ta)
            o, a = site.fault.masks()
            self.or_mask[i] |= o
            self.and_mask[i] &= a
        self.ta_streams = StreamBank.create(cfg.rng, cfg.rng.seed, size)
        self.clause_streams = StreamBank.create(cfg.rng, mix64(cfg.rng.seed ^ CLAUSE_STREAM_DOMAIN), cfg.banks * cfg.U)
        self.control = RngStream.pcg64(mix64(cfg.init_seed ^ CONTROL_STREAM_DOMAIN))
        self.flat_states = np.zeros(size, dtype=np.int32)
        ts = self.ta_streams
        K.init_states(self.flat_states, self.or_mask, self.and_mask, ts.state, ts.inc,
                      ts.kind, ts.width, np.uint64(ts.mask), cfg.n, INIT_MODES[cfg.init])
        self._thr1, self._thr2 = threshold_table(cfg.s, cfg.rng.width)
        self.counters = EventCounters()
        self.history: list[EventCounters] = []
        self.epoch = 0

    # -- structure -------------------------------------------------------
    def flat_index(self, bank: int, clause: int, ta: int) -> int:
        return (bank * self.config.U + clause) * self.W + ta

    @property
    def states(self) -> np.ndarray:
        """``(banks, U, 2L)`` view of the automaton states."""
        return self.flat_states.reshape(self.config.banks, self.config.U, self.W)

    def actions(self) -> np.ndarray:
        return self.states > self.config.n

    def fault_at(self, bank: int, clause: int, ta: int) -> FaultSpec | None:
        for site in self.config.faults:
            if (site.bank, site.clause, site.ta) == (bank, clause, ta):
                return site.fault
        return None

    def automaton(self, bank: int, clause: int, ta: int) -> TsetlinAutomaton:
        return TsetlinAutomaton(self.config.n, int(self.states[bank, clause, ta]), self.fault_at(bank, clause, ta))

    def clause(self, bank: int, j: int) -> Clause:
        pol = Polarity.POSITIVE if j % 2 == 0 else Polarity.NEGATIVE
        return Clause(pol, [self.automaton(bank, j, k) for k in range(self.W)])

    # -- inference -------------------------------------------------------
    def bank_sums(self, X, mode: Mode = Mode.INFER) -> np.ndarray:
        lits = literal_vector(np.atleast_2d(X))
        cfg = self.config
        return K.class_sums(self.flat_states, lits, cfg.banks, cfg.U, self.W, cfg.n, mode == Mode.INFER)

    def class_scores(self, X, mode: Mode = Mode.INFER) -> np.ndarray:
        sums = self.bank_sums(X, mode)
        if self.config.layout == "binary":
            return np.concatenate([-sums, sums], axis=1)
        return sums

    def vote_sum(self, cls: int, x, mode: Mode = Mode.INFER) -> int:
        """Positive minus negative clause outputs for class ``cls``.

        In the binary layout class 1 scores ``+v`` and class 0 ``-v``.
        """
        return int(self.class_scores(x, mode)[0, cls])

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.class_scores(X), axis=1)

    def classify(self, x) -> int:
        return int(self.predict(x)[0])

    def accuracy(self, ds: BooleanizedDataset) -> float:
        if len(ds) == 0:
            return float("nan")
        return float(np.mean(self.predict(ds.X) == ds.y))

    # -- training --------------------------------------------------------
    def _other_classes(self, y: np.ndarray) -> np.ndarray:
        M = self.config.M
        negs = np.full(len(y), -1, dtype=np.int64)
        if self.config.layout == "binary" or M < 2:
            return negs
        for t, label in enumerate(y):
            pick = self.control.below(M - 1)
            negs[t] = pick if pick < label else pick + 1
        return negs

    def _run(self, lits, y, order, trace=None) -> EventCounters:
        cfg = self.config
        if len(order) and (y[order].min() < 0 or y[order].max() >= cfg.M):
            raise ValueError("label out of range")
        negs = self._other_classes(y[order])
        counters = np.zeros(5, dtype=np.int64)
        if trace is not None:
            buf = np.zeros((len(order) * 2 * cfg.U * self.W, K.TRACE_COLS), dtype=np.int32)
        else:
            buf = np.zeros((0, K.TRACE_COLS), dtype=np.int32)
        ts, cs = self.ta_streams, self.clause_streams
        rows = K.train_epoch(
            self.flat_states, self.or_mask, self.and_mask, ts.state, ts.inc, cs.state, cs.inc,
            ts.kind, ts.width, np.uint64(ts.mask), lits, y, order, negs,
            cfg.U, self.W, cfg.n, cfg.T, cfg.layout == "binary", self._thr1, self._thr2, counters,
            buf, trace is not None, bool(trace is not None and trace.include_inaction), self.epoch,
        )
        if trace is not None:
            trace.extend(buf[:rows])
        delta = EventCounters.from_array(counters)
        self.counters = self.counters + delta
        return delta

    def train_sample(self, x, y: int, trace=None) -> EventCounters:
        """Apply one training sample; returns the event counts it produced."""
        if not 0 <= y < self.config.M:
            raise ValueError(f"label {y} out of range for M={self.config.M}")
        lits = literal_vector(np.atleast_2d(x))
        return self._run(lits, np.array([y], dtype=np.int64), np.zeros(1, dtype=np.int64), trace)

    def fit(self, train: BooleanizedDataset, epochs: int | None = None,
            test: BooleanizedDataset | None = None, trace=None) -> FitResult:
        """Train for ``epochs`` shuffled passes, recording per-epoch statistics."""
        epochs = self.config.epochs if epochs is None else epochs
        if len(train) == 0:
            raise ValueError("empty training set")
        if train.L != self.config.L:
            raise ValueError(f"dataset has L={train.L}, machine expects {self.config.L}")
        lits = literal_vector(train.X)
        y = train.y
        result = FitResult()
        if trace is not None:
            trace.begin(self)
        prev = self.actions().copy()
        for _ in range(epochs):
            self.epoch += 1
            order = np.array(self.control.shuffle(list(range(len(train)))), dtype=np.int64)
            delta = self._run(lits, y, order, trace)
            self.history.append(delta)
            result.counters.append(delta)
            result.train_accuracy.append(self.accuracy(train))
            if test is not None:
                result.test_accuracy.append(self.accuracy(test))
            now = self.actions()
            result.action_flips.append(int(np.count_nonzero(now != prev)))
            prev = now.copy()
            if trace is not None:
                trace.end_epoch(self.epoch, result.train_accuracy[-1])
        return result

    # -- persistence -----------------------------------------------------
    def save(self, path) -> None:
        path = Path(path)
        with path.open("w") as f:
            f.write(f"{MODEL_MAGIC} v{MODEL_VERSION}\n")
            f.write("config " + json.dumps(self.config.to_dict(), sort_keys=True) + "\n")
            f.write(f"states {self.config.banks} {self.config.U} {self.W}\n")
            for row in self.states.reshape(-1, self.W):
                f.write(" ".join(str(int(v)) for v in row) + "\n")

    @classmethod
    def load(cls, path) -> "Machine":
        lines = Path(path).read_text().splitlines()
        if not lines or not lines[0].startswith(MODEL_MAGIC):
            raise ValueError(f"{path}: not a model file")
        version = int(lines[0].split()[1].lstrip("v"))
        if version != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        cfg = TMConfig.from_dict(json.loads(lines[1].split(" ", 1)[1]))
        _, b, u, w = lines[2].split()
        m = cls(cfg)
        states = np.array([[int(v) for v in ln.split()] for ln in lines[3:3 + int(b) * int(u)]], dtype=np.int32)
        if states.shape != (int(b) * int(u), int(w)):
            raise ValueError(f"{path}: state block has wrong shape")
        m.flat_states[:] = states.reshape(-1)
        return m


def xor_config(U: int = 4, n: int = 3, T: int = 1, s: float = 3.0, seed: int = 1, **kw) -> TMConfig:
    """Two-input XOR machine; ``U`` clauses per class unless ``layout="binary"``."""
    kw.setdefault("layout", "multiclass")
    kw.setdefault("epochs", 50)
    rng = kw.pop("rng", RngSpec(RngKind.PCG64, 32, seed))
    return TMConfig(L=2, M=2, U=U, n=n, T=T, s=s, rng=rng.with_seed(seed), init_seed=seed, **kw)


def with_seed(cfg: TMConfig, seed: int) -> TMConfig:
    return replace(cfg, rng=cfg.rng.with_seed(seed), init_seed=seed)
