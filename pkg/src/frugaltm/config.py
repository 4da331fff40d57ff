"""TOML run configuration.

One file describes the dataset, the machine and, optionally, the grids of a
sweep, fault campaign or LFSR study::

    [dataset]
    name = "iris"            # xor | iris | breast_cancer
    # path = "data.csv"      # or any label-last CSV
    bits = 4                 # booleanization bits per feature
    train_fraction = 0.8

    [machine]
    U = 90
    n = 100                  # 2n states per automaton
    T = 4
    s = 1.2
    epochs = 100
    rng = "pcg64"            # or "lfsr:<width>"
    seed = 1
    init = "random"          # random | low | high
    layout = "multiclass"    # multiclass | binary
    fault = { clause = 0, ta = 1, bit = 0, stuck = 1 }   # or a list of such tables

    [sweep]
    U = [10, 90]
    T = [4, 20]
    s = [1.2, 18.0]
    ensembles = 25
    seed = 0

    [faults]
    clauses = [4, 8, 12]
    states = [6, 8, 10, 12]
    sites = [{ clause = 0, ta = 1, bit = 0, stuck = 1 }]
    baseline = true          # also run the fault-free machine
    ensembles = 100

    [lfsr_study]             # U, T, s, n here override [machine]
    widths = [4, 6, 8, 16]
    ensembles = 50
    regain_width = 7
    regain_s = [3.0, 5.0]

``rng``, ``seed`` and ``fault`` may also sit at the top level of the file.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiments import DatasetRef, SweepSpec
from .machine import FaultSite, TMConfig
from .rng import RngSpec


class ConfigError(ValueError):
    """Missing, unreadable or invalid configuration."""


_MACHINE_KEYS = {"U", "n", "T", "s", "epochs", "rng", "seed", "init", "layout", "fault", "init_seed"}
_TOP_LEVEL = {"rng", "seed", "fault"}
_TABLE_KEYS = {
    "dataset": {"name", "path", "bits", "train_fraction"},
    "sweep": {"U", "T", "s", "ensembles", "epochs", "seed"},
    "faults": {"clauses", "states", "sites", "baseline", "ensembles", "epochs", "seed"},
    "lfsr_study": {"U", "T", "s", "n", "widths", "ensembles", "epochs", "regain_width", "regain_s", "seed"},
}


@dataclass
class RunConfig:
    dataset: DatasetRef
    machine: dict
    sweep: dict = field(default_factory=dict)
    faults: dict = field(default_factory=dict)
    lfsr_study: dict = field(default_factory=dict)
    digest: str = ""

    @property
    def seed(self) -> int:
        return int(self.machine.get("seed", 1))

    def override(self, seed: int | None = None, rng: str | None = None) -> "RunConfig":
        m = dict(self.machine)
        if seed is not None:
            m["seed"] = seed
        if rng is not None:
            m["rng"] = rng
        out = replace(self, machine=m)
        _check_machine(m)
        return out

    def rng_spec(self) -> RngSpec:
        return RngSpec.parse(str(self.machine.get("rng", "pcg64")), self.seed).with_seed(self.seed)

    def fault_sites(self) -> tuple[FaultSite, ...]:
        return parse_faults(self.machine.get("fault", ()))

    def tm_config(self, L: int, M: int) -> TMConfig:
        m = self.machine
        try:
            return TMConfig(
                L=L, M=M, U=int(m.get("U", 4)), n=int(m.get("n", 3)), T=int(m.get("T", 1)), s=float(m.get("s", 3.0)),
                rng=self.rng_spec(), epochs=int(m.get("epochs", 50)), init_seed=int(m.get("init_seed", self.seed)),
                init=str(m.get("init", "random")), layout=str(m.get("layout", "multiclass")),
                faults=self.fault_sites(),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid machine: {e}") from None

    def sweep_spec(self) -> SweepSpec:
        sw = self.sweep
        if not sw:
            raise ConfigError("no [sweep] table")
        try:
            return SweepSpec(
                dataset=self.dataset, U=[int(v) for v in sw["U"]], T=[int(v) for v in sw["T"]],
                s=[float(v) for v in sw["s"]], rng=self.rng_spec(), ensembles=int(sw.get("ensembles", 25)),
                epochs=int(sw.get("epochs", self.machine.get("epochs", 100))), n=int(self.machine.get("n", 100)),
                seed=int(sw.get("seed", self.seed)), layout=str(self.machine.get("layout", "multiclass")),
            )
        except KeyError as e:
            raise ConfigError(f"[sweep] needs {e.args[0]}") from None
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid [sweep]: {e}") from None


def parse_faults(raw) -> tuple[FaultSite, ...]:
    if isinstance(raw, dict):
        raw = [raw]
    sites = []
    for f in raw:
        try:
            sites.append(FaultSite.make(int(f["clause"]), int(f["ta"]), int(f["bit"]), int(f["stuck"]),
                                        int(f.get("bank", 0))))
        except KeyError as e:
            raise ConfigError(f"fault needs {e.args[0]}") from None
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid fault {f}: {e}") from None
    return tuple(sites)


def _check_machine(m: dict) -> None:
    unknown = set(m) - _MACHINE_KEYS
    if unknown:
        raise ConfigError(f"unknown [machine] keys: {sorted(unknown)}")
    try:
        RngSpec.parse(str(m.get("rng", "pcg64")), int(m.get("seed", 1)) or 1)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid rng: {e}") from None
    parse_faults(m.get("fault", ()))


def parse(doc: dict, digest: str = "") -> RunConfig:
    known = {"dataset", "machine", "sweep", "faults", "lfsr_study"} | _TOP_LEVEL
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    for name, keys in _TABLE_KEYS.items():
        table = doc.get(name, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
        if set(table) - keys:
            raise ConfigError(f"unknown [{name}] keys: {sorted(set(table) - keys)}")
    ds = doc.get("dataset", {})
    try:
        dataset = DatasetRef(
            name=str(ds.get("name", "xor")), path=ds.get("path"),
            bits=None if ds.get("bits") is None else int(ds["bits"]),
            train_fraction=float(ds.get("train_fraction", 0.8)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid [dataset]: {e}") from None
    if dataset.path is None and dataset.name not in ("xor", "iris", "breast_cancer"):
        raise ConfigError(f"unknown dataset {dataset.name!r}")
    machine = {k: doc[k] for k in _TOP_LEVEL if k in doc}
    machine.update(doc.get("machine", {}))
    _check_machine(machine)
    return RunConfig(dataset, machine, dict(doc.get("sweep", {})), dict(doc.get("faults", {})),
                     dict(doc.get("lfsr_study", {})), digest)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        doc = tomllib.loads(data.decode())
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse(doc, hashlib.sha256(data).hexdigest())


def digest_of(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
