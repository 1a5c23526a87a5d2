import json
from pathlib import Path

from lamhat.cli import main

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_trace(capsys):
    code, out, _ = run(capsys, "eval", "--trace", str(FIX / "t0.lamhat"))
    assert code == 0
    lines = out.strip().splitlines()
    assert len([l for l in lines if " --> " in l]) == 6
    assert "steps=(1,1,0,4)" in out and lines[-1] == "normal: C0"


def test_eval_clash_and_fuel(capsys):
    code, out, _ = run(capsys, "eval", "-e", r"((\x.Pair(I,I)) I) I")
    assert code == 2
    code, _, _ = run(capsys, "eval", "--fuel", "20", "-e", r"(\x.x x) (\x.x x)")
    assert code == 3


def test_eval_open_needs_flag(capsys):
    assert run(capsys, "eval", "-e", "x y")[0] == 1
    assert run(capsys, "eval", "--open", "-e", "x y")[0] == 0


def test_parse_error_exit(capsys):
    code, _, err = run(capsys, "eval", "-e", "case t of {}")
    assert code == 1 and err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "-e", "Pair(I I, I) I")
    assert code == 0
    assert out.strip() == "neutral, clash: yes@root, clash-free-nf: no"


def test_check(capsys, tmp_path):
    code, out, _ = run(capsys, "check", str(FIX / "sigma.json"))
    assert code == 0 and out.strip() == "ok size=11"
    obj = json.loads((FIX / "sigma.json").read_text())
    obj["conclusion"]["type"] = "C1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    assert run(capsys, "check", str(bad))[0] == 2


def test_synth(capsys, tmp_path):
    emit = tmp_path / "d.json"
    code, out, _ = run(capsys, "synth", "--emit", str(emit), str(FIX / "t0.lamhat"))
    assert code == 0 and out.startswith("typable: steps=6")
    assert run(capsys, "check", str(emit))[0] == 0
    assert run(capsys, "synth", "-e", r"((\x.Pair(I,I)) I) I")[0] == 2


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--from", "cbv", "-e", r"(\x.x) (\y.y)")
    assert code == 0 and "m e m e dB e" in out.replace(",", " ")


def test_encode(capsys):
    code, out, _ = run(capsys, "encode", "--from", "bang", "-e", r"(\x.x) !y")
    assert code == 0 and "B(" in out


def test_examples(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0 and "t0" in out


def test_usage_error(capsys):
    assert run(capsys, "nosuchcommand")[0] == 1
