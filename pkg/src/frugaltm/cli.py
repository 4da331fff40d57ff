"""Command-line front end.

Subcommands: ``train``, ``infer``, ``sweep``, ``faults``, ``lfsr-study``,
``game``, ``trace-export``.  Exit codes: 0 ok, 2 config error, 3 data error,
4 internal error.  Every run that writes files also writes ``manifest.json``
(config hash, seeds, tool version) next to them.  Files are staged in a
temporary directory and moved into ``--out`` only once the run succeeds.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import shutil
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import config as C
from . import experiments as E
from . import game as G
from . import trace as TR
from .datasets import Booleanizer, BooleanizedDataset, SplitSpec, split
from .machine import Machine

log = logging.getLogger("frugaltm")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class DataError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


class Outputs:
    """Stage result files and publish them atomically into ``out``."""

    def __init__(self, out, args, cfg: C.RunConfig | None = None, seeds: dict | None = None):
        self.out = Path(out)
        self.args = args
        self.cfg = cfg
        self.seeds = seeds or {}
        self.files: dict[str, bytes] = {}

    def text(self, name: str, content: str) -> None:
        self.files[name] = content.encode()

    def path(self, name: str) -> Path:
        # for writers that need a real file; contents are read back on publish
        if not hasattr(self, "_tmp"):
            self._tmp = Path(tempfile.mkdtemp(prefix="frugaltm-"))
        self.files[name] = None
        return self._tmp / name

    def publish(self) -> None:
        manifest = {
            "tool": "frugaltm",
            "version": __version__,
            "command": self.args.command,
            "argv": sys.argv[1:],
            "config": None if getattr(self.args, "config", None) is None else str(self.args.config),
            "config_sha256": self.cfg.digest if self.cfg else None,
            "seeds": self.seeds,
            "outputs": sorted(self.files),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        self.out.mkdir(parents=True, exist_ok=True)
        for name, data in self.files.items():
            if data is None:
                shutil.move(str(self._tmp / name), self.out / name)
            else:
                (self.out / name).write_bytes(data)
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        if hasattr(self, "_tmp"):
            shutil.rmtree(self._tmp, ignore_errors=True)

    def discard(self) -> None:
        if hasattr(self, "_tmp"):
            shutil.rmtree(self._tmp, ignore_errors=True)


def _load_config(args) -> C.RunConfig:
    if args.config is None:
        raise C.ConfigError("--config is required")
    cfg = C.load(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.override(seed=args.seed)
        for table in (cfg.sweep, cfg.faults, cfg.lfsr_study):
            if table:
                table["seed"] = args.seed
    if getattr(args, "rng", None) is not None:
        cfg = cfg.override(rng=args.rng)
    return cfg


def _load_data(ref: E.DatasetRef):
    try:
        return ref.load()
    except (OSError, ValueError) as e:
        raise DataError(str(e)) from None


def _train_test(cfg: C.RunConfig, data):
    """Train/test datasets plus the fitted booleanizer (None for boolean data)."""
    ref = cfg.dataset
    if isinstance(data, BooleanizedDataset):
        if ref.name == "xor" and ref.path is None:
            return data, data, None
        tr, te = split(data, SplitSpec(ref.train_fraction, cfg.seed))
        return tr, te, None
    tr, te = split(data, SplitSpec(ref.train_fraction, cfg.seed))
    enc = Booleanizer(ref.bits_per_feature()).fit(tr.features)
    enc_ds = lambda r: BooleanizedDataset(enc.transform(r.features), r.labels, data.class_count)  # noqa: E731
    return enc_ds(tr), enc_ds(te), enc


def _epochs_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "train_acc", "test_acc", "reward_I", "penalty_I", "reward_II", "penalty_II",
                "inaction", "action_flips"])
    for e, c in enumerate(result.counters):
        test = result.test_accuracy[e] if result.test_accuracy else ""
        w.writerow([e + 1, f"{result.train_accuracy[e]:.6f}", test if test == "" else f"{test:.6f}",
                    *c.as_tuple(), result.action_flips[e]])
    return buf.getvalue()


def _train(cfg: C.RunConfig, want_trace: bool, inaction: bool = False):
    data = _load_data(cfg.dataset)
    train, test, enc = _train_test(cfg, data)
    tm = cfg.tm_config(train.L, train.class_count)
    machine = Machine(tm)
    trace = TR.Trace(include_inaction=inaction) if want_trace else None
    result = machine.fit(train, tm.epochs, test=test, trace=trace)
    return machine, result, trace, enc


def _seeds(cfg: C.RunConfig) -> dict:
    return {"seed": cfg.seed, "rng": cfg.rng_spec().label()}


def cmd_train(args) -> int:
    cfg = _load_config(args)
    trace_dir = None
    if args.trace not in (None, True):
        trace_dir = Path(args.trace)
    machine, result, trace, enc = _train(cfg, args.trace is not None)
    out = Outputs(args.out or trace_dir or "out", args, cfg, _seeds(cfg))
    model = out.path("model.txt")
    machine.save(model)
    out.text("epochs.csv", _epochs_csv(result))
    if enc is not None:
        out.text("booleanizer.json", json.dumps({"bits": enc.bits, "thresholds": enc.thresholds.tolist()}) + "\n")
    window = args.window
    report = {
        "epochs": result.epochs,
        "window": window,
        "final_train_accuracy": result.train_accuracy[-1] if result.epochs else None,
        "final_test_accuracy": result.test_accuracy[-1] if result.test_accuracy else None,
        "max_train_accuracy": max(result.train_accuracy) if result.epochs else None,
        "events": dict(zip(("reward_I", "penalty_I", "reward_II", "penalty_II", "inaction"),
                           result.totals().as_tuple())),
    }
    if trace is not None:
        rep = TR.detect_convergence(trace, window)
        report["converged"] = rep.converged
        report["convergence_epoch"] = rep.convergence_epoch
        report["replay_mismatches"] = len(TR.replay(trace))
        report["faulted_visited_states"] = {
            f"{f.bank}/{f.clause}/{f.ta}": sorted(rep.visited_by(f.bank, f.clause, f.ta))
            for f in machine.config.faults
        }
        trace_out = out if trace_dir is None or args.out is None else Outputs(trace_dir, args, cfg, _seeds(cfg))
        TR.export(trace, trace_out.path("trace.csv"))
        if trace_out is not out:
            trace_out.publish()
    else:
        e = TR.convergence_epoch(result.action_flips, result.train_accuracy, window)
        report["converged"] = e is not None
        report["convergence_epoch"] = e
    out.text("convergence.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    out.publish()
    _emit(args, f"trained {result.epochs} epochs; train acc {report['final_train_accuracy']:.4f}"
                + ("" if report["final_test_accuracy"] is None else f", test acc {report['final_test_accuracy']:.4f}")
                + f"; converged at epoch {report['convergence_epoch']}\n")
    return EXIT_OK


def cmd_infer(args) -> int:
    cfg = _load_config(args)
    try:
        machine = Machine.load(args.model)
    except OSError as e:
        raise DataError(f"cannot read model: {e.strerror}") from None
    except (ValueError, KeyError, IndexError) as e:
        raise DataError(f"bad model file: {e}") from None
    data = _load_data(cfg.dataset)
    _, test, enc = _train_test(cfg, data)
    if args.data is not None:
        raw = _load_data(E.DatasetRef(path=args.data))
        if enc is None:
            raise C.ConfigError("--data needs a numeric dataset in the config to fit thresholds")
        if raw.features.shape[1] != len(enc.thresholds):
            raise DataError(f"{args.data}: expected {len(enc.thresholds)} features")
        test = BooleanizedDataset(enc.transform(raw.features), raw.labels, max(raw.class_count, machine.config.M))
    if test.L != machine.config.L:
        raise DataError(f"data has L={test.L}, model expects {machine.config.L}")
    pred = machine.predict(test.X)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "label", "prediction"])
    for i, (y, p) in enumerate(zip(test.y, pred)):
        w.writerow([i, int(y), int(p)])
    acc = float(np.mean(pred == test.y)) if len(test) else float("nan")
    out = Outputs(args.out or "out", args, cfg, _seeds(cfg))
    out.text("predictions.csv", buf.getvalue())
    out.text("infer_summary.txt", f"points {len(test)}\naccuracy {acc:.6f}\n")
    out.publish()
    _emit(args, f"accuracy {acc:.4f} on {len(test)} points\n")
    return EXIT_OK


def _campaign_outputs(args, cfg, res: E.CampaignResult, name: str, seed: int) -> int:
    out = Outputs(args.out or "out", args, cfg, {**_seeds(cfg), "campaign_seed": seed})
    res.to_csv(out.path(f"{name}.csv"))
    out.text(f"{name}_summary.txt", res.summary())
    out.publish()
    _emit(args, res.summary())
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    spec = cfg.sweep_spec()
    _load_data(spec.dataset)
    try:
        res = E.run_sweep(spec, jobs=args.jobs)
    except ValueError as e:
        raise DataError(str(e)) from None
    return _campaign_outputs(args, cfg, res, "sweep", spec.seed)


def cmd_faults(args) -> int:
    cfg = _load_config(args)
    fc = cfg.faults
    data = _load_data(cfg.dataset)
    train = data if isinstance(data, BooleanizedDataset) else None
    if train is None:
        raise DataError("fault campaigns need a boolean dataset (e.g. xor)")
    base = cfg.tm_config(train.L, train.class_count)
    sites = list(C.parse_faults(fc.get("sites", ()))) or list(base.faults)
    faults: list = ([None] if fc.get("baseline", False) else []) + sites
    if not faults:
        raise C.ConfigError("no fault sites: set [faults].sites or machine.fault")
    base = replace(base, faults=())
    try:
        res = E.run_fault_campaign(
            base, faults, [int(u) for u in fc.get("clauses", [base.U])],
            [int(v) for v in fc.get("states", [2 * base.n])], ensembles=int(fc.get("ensembles", 100)),
            epochs=int(fc.get("epochs", base.epochs)), seed=int(fc.get("seed", cfg.seed)), jobs=args.jobs,
            dataset=cfg.dataset,
        )
    except ValueError as e:
        raise C.ConfigError(str(e)) from None
    return _campaign_outputs(args, cfg, res, "faults", int(fc.get("seed", cfg.seed)))


def cmd_lfsr_study(args) -> int:
    cfg = _load_config(args)
    ls, m = cfg.lfsr_study, cfg.machine
    _load_data(cfg.dataset)
    try:
        widths = [int(w) for w in ls.get("widths", range(4, 33))]
        bad = [w for w in widths if not 4 <= w <= 32]
        if bad:
            raise C.ConfigError(f"LFSR widths must lie in 4..32, got {bad}")
        res = E.run_lfsr_study(
            cfg.dataset, U=int(ls.get("U", m.get("U", 140))), T=int(ls.get("T", m.get("T", 11))),
            s=float(ls.get("s", m.get("s", 10.0))),
            widths=widths, ensembles=int(ls.get("ensembles", 50)), epochs=int(ls.get("epochs", m.get("epochs", 50))),
            n=int(ls.get("n", m.get("n", 100))), regain_width=ls.get("regain_width", 7),
            regain_s=[float(v) for v in ls.get("regain_s", ())], seed=int(ls.get("seed", cfg.seed)), jobs=args.jobs,
        )
    except (TypeError, ValueError) as e:
        raise C.ConfigError(str(e)) from None
    return _campaign_outputs(args, cfg, res, "lfsr_study", int(ls.get("seed", cfg.seed)))


def cmd_game(args) -> int:
    if args.target not in G.TARGETS:
        raise C.ConfigError(f"unknown target {args.target!r}; choose from {sorted(G.TARGETS)}")
    from fractions import Fraction

    try:
        s = Fraction(args.s).limit_denominator(10**6)
        m = G.payoff_matrix(G.TARGETS[args.target], s)
    except ValueError as e:
        raise C.ConfigError(str(e)) from None
    text = G.render(m, args.format)
    if args.out:
        out = Outputs(args.out, args)
        out.text("game." + ("csv" if args.format == "csv" else "txt"), text)
        out.publish()
    sys.stdout.write(text)
    return EXIT_OK


def cmd_trace_export(args) -> int:
    cfg = _load_config(args)
    _, result, trace, _ = _train(cfg, True, inaction=args.inaction)
    out = Outputs(args.out or "out", args, cfg, _seeds(cfg))
    TR.export(trace, out.path("trace.csv"))
    out.publish()
    _emit(args, f"{len(trace)} trace rows over {result.epochs} epochs\n")
    return EXIT_OK


def _emit(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="frugaltm", description="Tsetlin machine training, fault and RNG studies.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", type=Path, help="TOML run configuration")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="override the base seed")
        sp.add_argument("--rng", help="override the generator: pcg64 or lfsr:<width>")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for campaigns")
        sp.add_argument("--format", choices=("csv", "text"), default="text")
        sp.add_argument("-q", "--quiet", action="store_true")
        sp.add_argument("-v", "--verbose", action="count", default=0)

    sp = sub.add_parser("train", help="train one machine")
    common(sp)
    sp.add_argument("--trace", nargs="?", const=True, default=None, metavar="DIR",
                    help="record a transition trace (into DIR, or --out)")
    sp.add_argument("--window", type=int, default=5, help="convergence window in epochs")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("infer", help="classify with a saved model")
    common(sp)
    sp.add_argument("--model", type=Path, required=True)
    sp.add_argument("--data", type=Path, help="label-last CSV to classify (default: the test split)")
    sp.set_defaults(func=cmd_infer)

    for name, func, helptext in (("sweep", cmd_sweep, "hyperparameter grid sweep"),
                                 ("faults", cmd_faults, "stuck-at fault campaign"),
                                 ("lfsr-study", cmd_lfsr_study, "LFSR width study")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("game", help="payoff table of the two-input automata game")
    common(sp, config=False)
    sp.add_argument("--target", default="xor")
    sp.add_argument("--s", type=float, default=4.0)
    sp.set_defaults(func=cmd_game, config=None)

    sp = sub.add_parser("trace-export", help="train and export the transition trace as CSV")
    common(sp)
    sp.add_argument("--inaction", action="store_true", help="also record inaction events")
    sp.set_defaults(func=cmd_trace_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        sys.stderr.write("error: --jobs must be >= 1\n")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except C.ConfigError as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    except DataError as e:
        sys.stderr.write(f"data error: {e}\n")
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        sys.stderr.write(f"internal error: {type(e).__name__}: {e}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
