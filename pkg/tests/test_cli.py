import json

import pytest

from frugaltm import config as C
from frugaltm.cli import main
from frugaltm.machine import Machine
from frugaltm.trace import read_csv, replay

XOR_TOML = """
[dataset]
name = "xor"

[machine]
U = 4
n = 3
T = 1
s = 3.0
epochs = 30
seed = 5
"""

IRIS_TOML = """
rng = "lfsr:8"
seed = 2

[dataset]
name = "iris"
bits = 4

[machine]
U = 10
n = 50
T = 4
s = 3.0
epochs = 2

[sweep]
U = [10]
T = [4]
s = [3.0, 5.0]
ensembles = 2
epochs = 2

[lfsr_study]
widths = [4, 8]
ensembles = 1
epochs = 1
"""

FAULT_TOML = XOR_TOML + """
fault = { clause = 0, ta = 1, bit = 0, stuck = 1 }

[faults]
clauses = [4, 8]
states = [6]
ensembles = 3
epochs = 10
baseline = true
"""


@pytest.fixture
def cfgdir(tmp_path):
    (tmp_path / "xor.toml").write_text(XOR_TOML)
    (tmp_path / "iris.toml").write_text(IRIS_TOML)
    (tmp_path / "fault.toml").write_text(FAULT_TOML)
    return tmp_path


def test_config_parse(cfgdir):
    cfg = C.load(cfgdir / "iris.toml")
    assert cfg.rng_spec().label() == "lfsr:8"
    assert cfg.dataset.bits_per_feature() == 4
    tm = cfg.tm_config(16, 3)
    assert (tm.U, tm.T, tm.s, tm.epochs) == (10, 4, 3.0, 2)
    assert len(cfg.digest) == 64
    sw = cfg.sweep_spec()
    assert sw.s == [3.0, 5.0] and sw.ensembles == 2


def test_config_faults_inline_and_list():
    one = C.parse({"machine": {"fault": {"clause": 0, "ta": 1, "bit": 0, "stuck": 1}}})
    assert len(one.fault_sites()) == 1
    two = C.parse({"fault": [{"clause": 0, "ta": 1, "bit": 0, "stuck": 1}, {"clause": 1, "ta": 0, "bit": 1,
                                                                             "stuck": 0}]})
    assert [f.clause for f in two.fault_sites()] == [0, 1]


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"machine": {"rng": "mt"}},
    {"machine": {"colour": 3}},
    {"dataset": {"name": "mnist"}},
    {"fault": {"clause": 0}},
    {"sweep": {"grid": [1]}},
    {"dataset": {"name": "iris", "bit": 4}},
    {"faults": "none"},
])
def test_config_errors(doc):
    with pytest.raises(C.ConfigError):
        C.parse(doc)


def test_train_with_trace(cfgdir, capsys):
    out = cfgdir / "out"
    assert main(["train", "--config", str(cfgdir / "xor.toml"), "--trace", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"model.txt", "trace.csv", "convergence.json", "epochs.csv", "manifest.json"} <= names
    report = json.loads((out / "convergence.json").read_text())
    assert report["replay_mismatches"] == 0 and report["epochs"] == 30
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"]["seed"] == 5 and manifest["version"] and len(manifest["config_sha256"]) == 64
    Machine.load(out / "model.txt")
    tr = read_csv(out / "trace.csv")
    assert len(tr) > 0


def test_train_trace_and_out_split(cfgdir):
    assert main(["train", "--config", str(cfgdir / "xor.toml"), "--trace", str(cfgdir / "tr"),
                 "--out", str(cfgdir / "res"), "-q"]) == 0
    assert (cfgdir / "tr" / "trace.csv").exists() and (cfgdir / "res" / "model.txt").exists()


def test_train_then_infer(cfgdir):
    assert main(["train", "--config", str(cfgdir / "iris.toml"), "--out", str(cfgdir / "m"), "-q"]) == 0
    assert main(["infer", "--config", str(cfgdir / "iris.toml"), "--model", str(cfgdir / "m" / "model.txt"),
                 "--out", str(cfgdir / "p"), "-q"]) == 0
    lines = (cfgdir / "p" / "predictions.csv").read_text().splitlines()
    assert lines[0] == "index,label,prediction" and len(lines) == 31


def test_game_output(capsys):
    assert main(["game", "--target", "xor", "--s", "4"]) == 0
    text = capsys.readouterr().out
    rows = [ln for ln in text.splitlines() if ln[1:4].strip().isdigit()]
    assert len(rows) == 16
    assert [int(ln[1:4]) for ln in rows if ln.startswith("*")] == [7, 10]
    assert main(["game", "--target", "xor", "--s", "4", "--format", "csv"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 17
    assert main(["game", "--target", "nand"]) == 2


def test_missing_config_leaves_nothing(tmp_path):
    out = tmp_path / "never"
    assert main(["train", "--config", str(tmp_path / "missing.toml"), "--out", str(out)]) == 2
    assert not out.exists()
    assert main(["sweep", "--out", str(out)]) == 2
    assert not out.exists()


def test_bad_flags_and_data(cfgdir, tmp_path):
    assert main(["train", "--nope"]) == 2
    assert main(["frobnicate"]) == 2
    (tmp_path / "bad.toml").write_text('[dataset]\npath = "/does/not/exist.csv"\n')
    assert main(["train", "--config", str(tmp_path / "bad.toml"), "--out", str(tmp_path / "o")]) == 3
    assert not (tmp_path / "o").exists()
    (tmp_path / "broken.toml").write_text("[machine\n")
    assert main(["train", "--config", str(tmp_path / "broken.toml")]) == 2
    assert main(["train", "--config", str(cfgdir / "xor.toml"), "--rng", "lfsr:99"]) == 2


def test_sweep_byte_identical(cfgdir):
    for d in ("a", "b"):
        assert main(["sweep", "--config", str(cfgdir / "iris.toml"), "--out", str(cfgdir / d), "-q"]) == 0
    assert (cfgdir / "a" / "sweep.csv").read_bytes() == (cfgdir / "b" / "sweep.csv").read_bytes()
    assert len((cfgdir / "a" / "sweep.csv").read_text().splitlines()) == 3


def test_seed_override_changes_results(cfgdir):
    main(["train", "--config", str(cfgdir / "xor.toml"), "--out", str(cfgdir / "s1"), "-q", "--seed", "1"])
    main(["train", "--config", str(cfgdir / "xor.toml"), "--out", str(cfgdir / "s2"), "-q", "--seed", "2"])
    m1 = json.loads((cfgdir / "s1" / "manifest.json").read_text())
    assert m1["seeds"]["seed"] == 1
    assert (cfgdir / "s1" / "epochs.csv").read_text() != (cfgdir / "s2" / "epochs.csv").read_text()


def test_faults_and_lfsr_study(cfgdir):
    assert main(["faults", "--config", str(cfgdir / "fault.toml"), "--out", str(cfgdir / "f"), "-q"]) == 0
    rows = (cfgdir / "f" / "faults.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 3
    assert main(["lfsr-study", "--config", str(cfgdir / "iris.toml"), "--out", str(cfgdir / "l"), "-q"]) == 0
    assert len((cfgdir / "l" / "lfsr_study.csv").read_text().splitlines()) == 1 + 3


def test_trace_export(cfgdir):
    assert main(["trace-export", "--config", str(cfgdir / "xor.toml"), "--out", str(cfgdir / "t"), "-q",
                 "--inaction"]) == 0
    tr = read_csv(cfgdir / "t" / "trace.csv", n=3)
    assert tr.include_inaction and len(tr) > 0
    assert replay(tr) == []
