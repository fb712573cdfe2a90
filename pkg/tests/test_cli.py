import json
from pathlib import Path

import pytest

import substation_sci.bench as bench
from substation_sci.cli import main
from substation_sci.nn import load_model
from substation_sci.stream import read_stream
from substation_sci.topology import FunctionalArrangement

SPECS = Path(__file__).resolve().parent.parent / "specs"
FAST = ["--warmup", "10", "--timed-frames", "50"]


@pytest.fixture(scope="module")
def rba_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("m") / "rba.json"
    assert main(["train", "--spec", str(SPECS / "rba_5.yaml"), "--out", str(path)]) == 0
    return path


def test_train_writes_model(rba_model):
    doc = json.loads(rba_model.read_text())
    assert doc["role"] == "rba_pair" and doc["hidden_width"] == 4
    assert load_model(rba_model).input_width == 3


def test_train_warns_on_extrapolation_mismatch(tmp_path, capsys):
    path = tmp_path / "sba.json"
    assert main(["train", "--spec", str(SPECS / "sba_6.yaml"), "--seed", "2", "--out", str(path)]) == 0
    assert "(1, 0)" in capsys.readouterr().err
    assert main(["train", "--spec", str(SPECS / "sba_6.yaml"), "--seed", "2", "--completed-table",
                 "--out", str(path)]) == 0
    assert "disagrees" not in capsys.readouterr().err


def test_verify(capsys):
    assert main(["verify", "--spec", str(SPECS / "rba_5.yaml")]) == 0
    out = capsys.readouterr().out
    assert "CAs=16 FAs=12" in out and "formula" in out


def test_synth_scenario_and_run(tmp_path, rba_model, capsys):
    stream = tmp_path / "split.csv"
    assert main(["synth", "--spec", str(SPECS / "rba_5.yaml"), "--scenario", str(SPECS / "rba_split.yaml"),
                 "--out", str(stream)]) == 0
    assert len(read_stream(stream)) == 60
    report = tmp_path / "r.csv"
    assert main(["run", "--spec", str(SPECS / "rba_5.yaml"), "--stream", str(stream), "--model", str(rba_model),
                 "--out", str(report), *FAST]) == 0
    out = capsys.readouterr().out
    assert "100.00%" in out and "time ratio index" in out
    assert report.read_text().startswith("kind,")


def test_synth_every_ca(tmp_path):
    out = tmp_path / "all"
    assert main(["synth", "--spec", str(SPECS / "mtba_5l.yaml"), "--out", str(out), "--duration", "0.2"]) == 0
    assert len(list(out.glob("*.csv"))) == 8


def test_exhaustive_run_ldm_only(capsys):
    assert main(["run", "--spec", str(SPECS / "sba_6.yaml"), "--backend", "ldm", *FAST]) == 0


def test_nn_without_model_is_invalid(capsys):
    assert main(["run", "--spec", str(SPECS / "rba_5.yaml"), "--backend", "nn"]) == 1
    assert "--model" in capsys.readouterr().err


def test_model_of_wrong_role_is_invalid(rba_model):
    assert main(["run", "--spec", str(SPECS / "sba_6.yaml"), "--model", str(rba_model), *FAST]) == 1


def test_channel_mismatch_is_invalid(tmp_path, capsys):
    stream = tmp_path / "s.csv"
    assert main(["synth", "--spec", str(SPECS / "rba_5.yaml"), "--scenario", str(SPECS / "rba_split.yaml"),
                 "--out", str(stream)]) == 0
    lines = stream.read_text().splitlines()
    stream.write_text("\n".join([lines[0]] + [ln.replace(",V4,", ",V9,") for ln in lines[1:]]) + "\n")
    assert main(["run", "--spec", str(SPECS / "rba_5.yaml"), "--stream", str(stream), "--backend", "ldm",
                 *FAST]) == 1
    assert "V9" in capsys.readouterr().err


def test_invalid_spec_file(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text((SPECS / "rba_5.yaml").read_text().replace("b: '2'", "b: '9'", 1))
    assert main(["verify", "--spec", str(bad)]) == 1


def test_exit_code_on_accuracy_loss(monkeypatch):
    real = bench.ldm_identify

    def always_tied(spec, frame, th=None):
        fa = real(spec, frame)
        merged = [tuple(n for g in fa.node_partition for n in g)]
        return FunctionalArrangement.build(spec, merged, fa.connected, fa.energized_nodes)

    monkeypatch.setattr(bench, "ldm_identify", always_tied)
    assert main(["run", "--spec", str(SPECS / "mtba_5l.yaml"), "--backend", "ldm", *FAST]) == 2
