"""Reproduction harness: sweeps, fault campaigns, LFSR width study, event cost.

Ensemble member ``e`` of every grid cell uses the same derived seeds
(split, automaton streams, control stream), so cells are compared on paired
data splits and paired random streams.
"""
from __future__ import annotations

import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import datasets as D
from .machine import EventCounters, FaultSite, Machine, TMConfig
from .rng import RngKind, RngSpec, derive_seed
from .trace import convergence_epoch

log = logging.getLogger(__name__)

SPLIT_DOMAIN, STREAM_DOMAIN, CONTROL_DOMAIN = 0, 1 << 20, 2 << 20


@dataclass(frozen=True)
class DatasetRef:
    """A bundled dataset name (``xor``, ``iris``, ``breast_cancer``) or a CSV path."""

    name: str = "xor"
    path: str | None = None
    bits: int | None = None
    train_fraction: float = 0.8

    def bits_per_feature(self) -> int:
        if self.bits is not None:
            return self.bits
        if self.name in D.BUNDLED:
            return D.BUNDLED[self.name][1]
        return 4

    def load(self):
        if self.path is not None:
            return D.load_csv(self.path)
        if self.name == "xor":
            return D.xor_dataset()
        if self.name in D.BUNDLED:
            return D.BUNDLED[self.name][0]()
        raise ValueError(f"unknown dataset {self.name!r}")

    def member_data(self, data, seed: int):
        """``(train, test)`` for one ensemble member."""
        if isinstance(data, D.BooleanizedDataset):
            if self.name == "xor" and self.path is None:
                return data, data
            return D.split(data, D.SplitSpec(self.train_fraction, seed))
        return D.split_booleanize(data, self.bits_per_feature(), D.SplitSpec(self.train_fraction, seed))


def member_seeds(base: int, member: int) -> tuple[int, int, int]:
    """``(split_seed, stream_seed, control_seed)`` of ensemble member ``member``."""
    return (
        derive_seed(base, SPLIT_DOMAIN + member),
        derive_seed(base, STREAM_DOMAIN + member),
        derive_seed(base, CONTROL_DOMAIN + member),
    )


@dataclass
class MemberResult:
    test_accuracy: list[float]
    train_accuracy: list[float]
    counters: list[EventCounters]
    convergence_epoch: int | None

    @property
    def final_test(self) -> float:
        return self.test_accuracy[-1] if self.test_accuracy else float("nan")

    @property
    def max_train(self) -> float:
        return max(self.train_accuracy) if self.train_accuracy else float("nan")

    def first_epoch_at(self, acc: float) -> int | None:
        for e, a in enumerate(self.train_accuracy, 1):
            if a >= acc:
                return e
        return None


@dataclass
class CellResult:
    params: dict
    members: list[MemberResult] = field(default_factory=list)

    @property
    def final_test(self) -> list[float]:
        return [m.final_test for m in self.members]

    @property
    def mean_test(self) -> float:
        return float(np.mean(self.final_test))

    @property
    def std_test(self) -> float:
        return float(np.std(self.final_test))

    @property
    def max_train(self) -> float:
        return max(m.max_train for m in self.members)

    def epochs_to_max(self) -> float | None:
        """Median over members reaching the cell's max train accuracy of the first epoch they do."""
        best = self.max_train
        hits = [m.first_epoch_at(best) for m in self.members]
        hits = [h for h in hits if h is not None]
        return float(statistics.median(hits)) if hits else None

    def events_per_epoch(self) -> float:
        return float(np.mean([np.mean([c.reinforcements for c in m.counters]) for m in self.members if m.counters]))

    def totals(self) -> EventCounters:
        out = EventCounters()
        for m in self.members:
            for c in m.counters:
                out = out + c
        return out

    def mean_curve(self) -> np.ndarray:
        return np.mean([m.test_accuracy for m in self.members], axis=0)

    def convergence_epochs(self) -> list[int | None]:
        return [m.convergence_epoch for m in self.members]


@dataclass
class CampaignResult:
    kind: str
    cells: list[CellResult] = field(default_factory=list)

    def cell(self, **params) -> CellResult:
        for c in self.cells:
            if all(c.params.get(k) == v for k, v in params.items()):
                return c
        raise KeyError(params)

    def rows(self) -> list[dict]:
        out = []
        for c in self.cells:
            conv = [e for e in c.convergence_epochs() if e is not None]
            tot = c.totals()
            out.append({
                **c.params,
                "ensembles": len(c.members),
                "mean_test_acc": round(c.mean_test, 6),
                "std_test_acc": round(c.std_test, 6),
                "max_train_acc": round(c.max_train, 6),
                "epochs_to_max": c.epochs_to_max(),
                "events_per_epoch": round(c.events_per_epoch(), 3),
                "reward_I": tot.reward_I,
                "penalty_I": tot.penalty_I,
                "reward_II": tot.reward_II,
                "penalty_II": tot.penalty_II,
                "inaction": tot.inaction,
                "converged": len(conv),
                "median_convergence_epoch": statistics.median(conv) if conv else None,
            })
        return out

    def to_csv(self, path) -> None:
        import csv

        rows = self.rows()
        if not rows:
            Path(path).write_text("")
            return
        keys = list(rows[0])
        for r in rows[1:]:
            keys += [k for k in r if k not in keys]
        with Path(path).open("w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=keys)
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})

    def summary(self) -> str:
        lines = [f"{self.kind}: {len(self.cells)} cells"]
        for r in self.rows():
            p = ", ".join(f"{k}={v}" for k, v in r.items() if k not in
                          ("reward_I", "penalty_I", "reward_II", "penalty_II", "inaction", "std_test_acc"))
            lines.append("  " + p)
        return "\n".join(lines) + "\n"


def train_member(cfg: TMConfig, dataset: DatasetRef, data, base_seed: int, member: int,
                 epochs: int, window: int = 5) -> MemberResult:
    split_seed, stream_seed, control_seed = member_seeds(base_seed, member)
    train, test = dataset.member_data(data, split_seed)
    cfg = replace(cfg, L=train.L, M=train.class_count, rng=cfg.rng.with_seed(stream_seed), init_seed=control_seed)
    m = Machine(cfg)
    r = m.fit(train, epochs, test=test)
    return MemberResult(r.test_accuracy, r.train_accuracy, r.counters,
                        convergence_epoch(r.action_flips, r.train_accuracy, window))


def _run_task(task):
    return train_member(*task)


def _execute(tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_run_task(t) for t in tasks]


def _grid_run(kind: str, cells: list[tuple[dict, TMConfig]], dataset: DatasetRef, ensembles: int,
              epochs: int, seed: int, jobs: int, window: int) -> CampaignResult:
    data = dataset.load()
    tasks = [(cfg, dataset, data, seed, e, epochs, window) for _, cfg in cells for e in range(ensembles)]
    results = _execute(tasks, jobs)
    out = CampaignResult(kind)
    for i, (params, _) in enumerate(cells):
        out.cells.append(CellResult(params, results[i * ensembles:(i + 1) * ensembles]))
    return out


@dataclass
class SweepSpec:
    dataset: DatasetRef
    U: list[int]
    T: list[int]
    s: list[float]
    rng: RngSpec = field(default_factory=RngSpec)
    ensembles: int = 25
    epochs: int = 100
    n: int = 100
    seed: int = 0
    window: int = 5
    layout: str = "multiclass"

    def __post_init__(self) -> None:
        if not (self.U and self.T and self.s):
            raise ValueError("sweep grids must be nonempty")
        if self.ensembles < 1:
            raise ValueError("ensembles must be >= 1")


def _template(U: int, T: int, s: float, n: int, rng: RngSpec, layout: str = "multiclass",
              faults: tuple = (), M: int = 2) -> TMConfig:
    # L and M are replaced per member once the data is known
    return TMConfig(L=1, M=M, U=U, n=n, T=T, s=s, rng=rng, layout=layout, faults=faults)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> CampaignResult:
    cells = []
    for U in spec.U:
        for T in spec.T:
            for s in spec.s:
                cells.append(({"U": U, "T": T, "s": s, "rng": spec.rng.label()},
                              _template(U, T, s, spec.n, spec.rng, spec.layout)))
    return _grid_run("sweep", cells, spec.dataset, spec.ensembles, spec.epochs, spec.seed, jobs, spec.window)


def run_fault_campaign(base: TMConfig, faults: list[FaultSite | None], clause_grid: list[int],
                       state_grid: list[int], ensembles: int = 100, epochs: int = 50, seed: int = 0,
                       jobs: int = 1, dataset: DatasetRef | None = None) -> CampaignResult:
    """Max train accuracy per ``(fault, U)`` at the base ``2n`` and per ``(fault, 2n)`` at the base ``U``.

    ``None`` in ``faults`` runs the fault-free baseline.
    """
    dataset = dataset or DatasetRef("xor")
    cells = []

    def label(f):
        if f is None:
            return "none"
        return f"b{f.bank}c{f.clause}ta{f.ta}:bit{f.fault.bit}=sa{f.fault.stuck_value}"

    for f in faults:
        site = () if f is None else (f,)
        for U in clause_grid:
            cfg = replace(base, U=U, faults=site)
            cells.append(({"axis": "clauses", "fault": label(f), "U": U, "states": 2 * base.n}, cfg))
        for two_n in state_grid:
            if two_n % 2:
                raise ValueError(f"state count must be even, got {two_n}")
            cfg = replace(base, n=two_n // 2, faults=site)
            cells.append(({"axis": "states", "fault": label(f), "U": base.U, "states": two_n}, cfg))
    return _grid_run("faults", cells, dataset, ensembles, epochs, seed, jobs, 5)


def run_lfsr_study(dataset: DatasetRef, U: int = 140, T: int = 11, s: float = 10.0,
                   widths: list[int] = tuple(range(4, 33)), ensembles: int = 50, epochs: int = 50,
                   n: int = 100, regain_width: int | None = 7, regain_s: list[float] = (), seed: int = 0,
                   jobs: int = 1) -> CampaignResult:
    """Accuracy per LFSR width against a PCG baseline, plus an ``s`` sweep at ``regain_width``."""
    cells = [({"rng": "pcg64", "width": 32, "s": s}, _template(U, T, s, n, RngSpec(RngKind.PCG64, 32, 1)))]
    for w in widths:
        cells.append(({"rng": f"lfsr:{w}", "width": w, "s": s}, _template(U, T, s, n, RngSpec(RngKind.LFSR, w, 1))))
    if regain_width is not None:
        for s2 in regain_s:
            cells.append(({"rng": f"lfsr:{regain_width}", "width": regain_width, "s": s2},
                          _template(U, T, s2, n, RngSpec(RngKind.LFSR, regain_width, 1))))
    return _grid_run("lfsr-study", cells, dataset, ensembles, epochs, seed, jobs, 5)


@dataclass(frozen=True)
class EventCosts:
    """Per-event cost weights (arbitrary units)."""

    reward_I: float = 1.0
    penalty_I: float = 1.0
    reward_II: float = 1.0
    penalty_II: float = 1.0
    inaction: float = 0.0

    def __post_init__(self) -> None:
        if min(self.reward_I, self.penalty_I, self.reward_II, self.penalty_II, self.inaction) < 0:
            raise ValueError("cost weights must be nonnegative")


def energy_proxy(counters: EventCounters, costs: EventCosts = EventCosts()) -> float:
    w = (costs.reward_I, costs.penalty_I, costs.reward_II, costs.penalty_II, costs.inaction)
    return float(sum(c * x for c, x in zip(counters.as_tuple(), w)))
