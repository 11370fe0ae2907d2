import json
import subprocess
import sys

import pytest

from cyclic_puf.cli import main
from cyclic_puf.rtlgen import RtlConfig, emit_verilog
from cyclic_puf.cyclic import FeedbackConfig


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_without_feedback_repeats(capsys):
    code, out, _ = run(capsys, "simulate", "--challenge", "1010", "--cycles", "8")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 8 and len(set(lines)) == 1


def test_simulate_json(capsys):
    code, out, _ = run(capsys, "simulate", "--challenge", "1010", "--n", "4", "--num-taps", "4", "--cycles", "6",
                       "--json")
    rec = json.loads(out)
    assert code == 0 and rec["cycles"] == 6 and len(rec["responses"]) == 6 and "tag" in rec["mode"]


def test_gen_then_simulate_from_file(capsys, tmp_path):
    inst = tmp_path / "i.json"
    assert run(capsys, "gen", "--category", "bpuf", "--nc", "8", "--n", "2", "-o", str(inst))[0] == 0
    code, out, _ = run(capsys, "simulate", "--instance", str(inst), "--challenge", "10100101", "--taps", "0:1:2",
                       "--cycles", "5")
    assert code == 0 and len(out.splitlines()) == 5


def test_collect_then_attack(capsys, tmp_path):
    data = tmp_path / "d.csv"
    code, out, err = run(capsys, "collect", "--nc", "16", "--num-taps", "2", "--num-challenges", "400",
                         "--cycles", "4", "--dataset", str(data), "--split-seed", "1")
    assert code == 0 and len(out.splitlines()) == 400
    assert "binary" in err
    code, out, _ = run(capsys, "attack", "--dataset", str(data), "--map", "parity", "--model", "lr", "--seed", "3",
                       "--epochs", "3", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["report"]["train_rows"] == 320 * 4
    assert rep["args"]["seed"] == 3


def test_inject_writes_spec_and_dataset(capsys, tmp_path):
    spec, data = tmp_path / "f.json", tmp_path / "f.jsonl.gz"
    code, _, _ = run(capsys, "inject", "--nc", "16", "--num-taps", "3", "--count", "2", "--fault-seed", "4",
                     "--dataset", str(data), "--num-challenges", "50", "-o", str(spec))
    doc = json.loads(spec.read_text())
    assert code == 0 and len(doc["faults"]) == 2 and data.exists()
    code, out, _ = run(capsys, "simulate", "--nc", "16", "--num-taps", "3", "--faults", str(spec),
                       "--challenge", "0" * 16, "--cycles", "3")
    assert code == 0 and len(out.splitlines()) == 3


def test_metrics_table(capsys):
    code, out, _ = run(capsys, "metrics", "--category", "apuf", "--nc", "4", "--n", "4", "--k", "3", "--m", "16",
                       "--s", "2", "--num-taps", "2", "--cycles", "8")
    assert code == 0 and out.splitlines()[2].startswith("CycAPUF")


def test_emit_verilog(capsys, tmp_path):
    out = tmp_path / "a.v"
    tb = tmp_path / "tb.v"
    code, _, _ = run(capsys, "emit-verilog", "--category", "apuf", "--nc", "64", "--n", "1", "--taps", "0:3:10",
                     "-o", str(out), "--testbench", str(tb), "--tb-challenge", "1" * 64)
    assert code == 0
    assert out.read_text() == emit_verilog(RtlConfig("apuf", 64, 1, FeedbackConfig.parse("0:3:10")))
    assert "module tb_cyc_apuf_64x1" in tb.read_text()


def test_table1_is_deterministic_with_embedded_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"challenge_width": 64, "num_challenges": 200, "train": {"epochs": 1}}))
    outs = []
    for name in ("a", "b"):
        code, out, _ = run(capsys, "table1", "--config", str(cfg), "--out-dir", str(tmp_path / name))
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    a, b = (tmp_path / "a" / "table1.json").read_bytes(), (tmp_path / "b" / "table1.json").read_bytes()
    assert a == b
    body = [l for l in outs[0].splitlines() if l.endswith("%")]
    assert len(body) == 9
    assert json.loads(a)["config"]["designs"][1] == {"category": "ropuf", "taps": 16, "faults": 11,
                                                     "feature_map": "raw"}


def test_schema(capsys):
    code, out, _ = run(capsys, "schema", "table2")
    assert code == 0 and json.loads(out)["properties"]["k"]["minimum"] == 2


@pytest.mark.parametrize("argv,code", [
    (["simulate", "--challenge", "10x1"], 2),
    (["gen"], 2),
    (["nope"], 2),
    (["gen", "--nc", "0"], 3),
    (["simulate", "--challenge", "1010", "--taps", "0:0:9"], 3),
    (["attack", "--dataset", "/nonexistent/d.csv"], 4),
])
def test_exit_codes(capsys, argv, code):
    try:
        got = main(argv)
    except SystemExit as exc:  # argparse rejects the command line itself
        got = exc.code
    assert got == code
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error[")


def test_bad_config_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"seed": "x"}')
    code, _, err = run(capsys, "table2", "--config", str(p))
    assert code == 3 and err.startswith("error[config]")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyclic_puf", "simulate", "--challenge", "01", "--cycles", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 2

