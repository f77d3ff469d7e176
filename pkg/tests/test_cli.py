import json
import subprocess
import sys

import pytest

from fairck.cli import main

from .conftest import CORPUS

F = str(CORPUS)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_prints_normal_form(capsys):
    code, out, _ = run(capsys, "parse", F)
    assert code == 0 and out.startswith("alphabet {")
    assert "type T1 = " in out


@pytest.mark.parametrize("argv, code", [
    (["term", F, "-t", "T1"], 0),
    (["term", F, "-t", "R"], 1),
    (["comp", F, "-c", "R2", "-s", "T2", "--mode", "fair"], 0),
    (["comp", F, "-c", "R2", "-s", "S2", "--mode", "fair"], 1),
    (["comp", F, "-c", "R2", "-s", "S2", "--mode", "safety"], 0),
    (["sub", F, "-t", "T1", "-s", "S1", "--mode", "fair"], 0),
    (["sub", F, "-t", "T2", "-s", "S2", "--mode", "fair"], 1),
    (["sub", F, "-t", "T2", "-s", "S2", "--mode", "safety"], 0),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


@pytest.mark.parametrize("argv", [
    ["term", F],
    ["comp", F, "-c", "R2", "-s", "T2"],
    ["sub", F, "-t", "T2", "-s", "S2", "--mode", "safety", "--synth-client"],
    ["term", F, "-t", "Nope"],
    ["term", "/nonexistent.st", "-t", "T"],
    ["bogus"],
])
def test_usage_and_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_syntax_error_location(tmp_path, capsys):
    p = tmp_path / "bad.st"
    p.write_text("alphabet {a}\ntype X = !a.\n")
    code, _, err = run(capsys, "parse", str(p))
    assert code == 2 and "bad.st:3:1: expected a session type" in err


def test_json_report_shape(capsys):
    code, out, _ = run(capsys, "sub", F, "-t", "T2", "-s", "S2", "--mode", "fair", "--explain", "--json")
    rep = json.loads(out)
    assert code == 1
    assert list(rep) == ["version", "command", "judgment", "mode", "holds", "witness", "elapsed_ms"]
    assert rep["holds"] is False and rep["mode"] == "fair" and rep["elapsed_ms"] == 0
    assert rep["witness"]["kind"] == "divergence"


def test_synth_client_in_json(capsys):
    code, out, _ = run(capsys, "sub", F, "-t", "T2", "-s", "S2", "--mode", "fair", "--synth-client", "--json")
    w = json.loads(out)["witness"]
    assert code == 1 and w["kind"] == "client"
    assert "?z.Win" in w["source"]


def test_explain_text_output(capsys):
    code, out, _ = run(capsys, "comp", F, "-c", "R2", "-s", "T2", "--mode", "fair", "--explain")
    assert code == 0
    assert "complies(R2, T2): holds" in out
    assert "c-sync(!true)" in out


def test_timing_is_opt_in(capsys):
    _, out, _ = run(capsys, "term", F, "-t", "T1", "--json", "--timing")
    assert isinstance(json.loads(out)["elapsed_ms"], float)


def test_color_env(capsys, monkeypatch):
    monkeypatch.setenv("FAIRCK_COLOR", "always")
    _, out, _ = run(capsys, "term", F, "-t", "T1")
    assert "\x1b[32m" in out
    monkeypatch.setenv("FAIRCK_COLOR", "never")
    _, out, _ = run(capsys, "term", F, "-t", "T1")
    assert "\x1b[" not in out


def test_selftest_small(capsys):
    code, out, _ = run(capsys, "selftest", "--max-states", "2", "--random", "5", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["discrepancy_count"] == 0


def test_selftest_injected_fault_is_caught(capsys):
    code, _, err = run(capsys, "selftest", "--max-states", "2", "--random", "0", "--inject-fault")
    assert code == 1 and "fair_termination" in err


def test_selftest_zero_states_skips_everything(capsys):
    code, out, _ = run(capsys, "selftest", "--max-states", "0", "--json")
    assert code == 0 and json.loads(out)["systems"] == {}


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "fairck", *argv], capture_output=True)


@pytest.mark.parametrize("argv", [
    ["sub", F, "-t", "T2", "-s", "S2", "--mode", "fair", "--explain", "--json"],
    ["comp", F, "-c", "R1", "-s", "T1", "--mode", "fair", "--explain", "--json"],
    ["term", F, "-t", "Rp", "--explain", "--json"],
])
def test_json_is_byte_identical_across_processes(argv):
    a, b = _cli(*argv), _cli(*argv)
    assert a.stdout == b.stdout and a.stdout
