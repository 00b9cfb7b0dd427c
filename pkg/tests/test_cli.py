import io
import json
import subprocess
import sys

import pytest

from cmucalc.cli import FAIL, OK, USAGE, run
from cmucalc.kripke import save_model


@pytest.fixture
def m1_path(tmp_path, m1):
    path = tmp_path / "m.json"
    save_model(m1, path)
    return str(path)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_check_double_negation(m1_path):
    assert call("check", "--model", m1_path, "--world", "w0", "--formula", "~~P") == (OK, "true\n", "")
    code, out, _ = call("check", "--model", m1_path, "--world", "w0", "--formula", "P", "--json")
    assert code == OK and json.loads(out) == {"world": "w0", "formula": "P", "holds": False}


def test_formula_file(m1_path, tmp_path):
    f = tmp_path / "phi.txt"
    f.write_text("P \\/ ~P\n")
    assert call("check", "--model", m1_path, "--world", "w0", "--formula-file", str(f))[:2] == (OK, "false\n")


def test_collapse_output():
    assert call("collapse", "--formula", "mu X. P \\/ <> X") == (OK, "P \\/ <> (P \\/ <> bot)\n", "")
    code, out, _ = call("collapse", "--formula", "mu X. P \\/ <> X", "--trace")
    assert out.splitlines()[-1] == "output: P \\/ <> (P \\/ <> bot)"
    code, out, _ = call("collapse", "--formula", "nu X. P", "--json")
    assert json.loads(out)["output"] == "P"


def test_xcheck_table(m1_path):
    code, out, _ = call("xcheck", "--model", m1_path, "--formula", "nu X. [] X")
    assert code == OK
    lines = out.splitlines()
    assert lines[1] == "world\tkripke\twinner\tagree"
    assert lines[2:4] == ["w0\ttrue\tI\tyes", "w1\ttrue\tI\tyes"]
    code, out, _ = call("xcheck", "--model", m1_path, "--formula", "~P", "--world", "w0", "--json")
    assert json.loads(out)["rows"] == [{"world": "w0", "kripke": False, "winner": "II", "agree": True}]


def test_game_and_strategy_out(m1_path, tmp_path):
    target = tmp_path / "s.json"
    code, out, _ = call("game", "--model", m1_path, "--world", "w0", "--formula", "~P", "--strategy-out", str(target))
    assert code == OK and "winner: II" in out
    assert json.loads(target.read_text())["strategy"] == {"⟨w0, ~P, V⟩": "⟨w1, P, R⟩"}


def test_arena_dot(m1_path, tmp_path):
    code, out, _ = call("arena-dot", "--model", m1_path, "--world", "w0", "--formula", "~P")
    assert code == OK and out.startswith("digraph arena {")
    target = tmp_path / "a.dot"
    code, out, _ = call("arena-dot", "--model", m1_path, "--world", "w0", "--formula", "~P", "--out", str(target), "--json")
    assert json.loads(out)["positions"] == 3 and target.read_text().startswith("digraph")


def test_validate_model(tmp_path, m1_path):
    assert call("validate-model", "--model", m1_path) == (OK, "valid\n", "")
    code, out, _ = call("validate-model", "--model", m1_path, "--is5")
    assert code == FAIL and "modal not reflexive at w0" in out
    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps({"worlds": ["a", "b"], "fallible": [], "pre": [["a", "b"]], "modal": [], "valuation": {"P": ["a"]}}))
    assert call("validate-model", "--model", str(raw))[0] == FAIL
    code, out, _ = call("validate-model", "--model", str(raw), "--repair", "--json")
    data = json.loads(out)
    assert code == OK and data["valid"] and data["model"]["valuation"] == {"P": ["a", "b"]}


def test_gen(tmp_path):
    code, out, _ = call("gen", "--is5", "--seed", "3", "--max-worlds", "4")
    assert code == OK and json.loads(out)["fallible"] == []
    target = tmp_path / "g.json"
    assert call("gen", "--ck", "--seed", "3", "--out", str(target))[0] == OK
    assert call("validate-model", "--model", str(target))[0] == OK


def test_axioms(tmp_path):
    target = tmp_path / "g.json"
    call("gen", "--is5", "--seed", "1", "--props", "2", "--out", str(target))
    code, out, _ = call("axioms", "--model", str(target), "--is5-only", "--json")
    rows = json.loads(out)
    assert code == OK and {r["check"] for r in rows} == {"FS", "DP", "N", "T", "4", "5"}
    assert all(set(r) >= {"check", "model-id", "formula", "status"} for r in rows)


def test_corpus_small_run():
    code, out, _ = call("corpus", "--suite", "separations", "--max-worlds", "2", "--json")
    assert code == OK and json.loads(out)["status"] == "pass"


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--model", "missing.json", "--world", "w0", "--formula", "P"],
        ["collapse", "--formula", "mu X. ~X"],
        ["collapse", "--formula", "P /\\"],
        ["collapse"],
        ["nonsense"],
        ["gen", "--ck", "--max-worlds", "0"],
        ["corpus", "--suite", "nope"],
    ],
)
def test_usage_errors(argv):
    code, out, err = call(*argv)
    assert code == USAGE


def test_unknown_world(m1_path):
    code, _, err = call("check", "--model", m1_path, "--world", "nowhere", "--formula", "P")
    assert code == USAGE and "unknown world" in err


def test_free_variable_rejected(m1_path):
    assert call("check", "--model", m1_path, "--world", "w0", "--formula-file", m1_path, "--formula", "P")[0] == USAGE
    code, _, err = call("xcheck", "--model", m1_path, "--formula", "(mu X. <> X) \\/ nu X. [] X")
    assert code == USAGE and "well-named" in err


def test_every_subcommand_has_json():
    from cmucalc.cli import build_parser

    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        assert any("--json" in a.option_strings for a in sp._actions), name


def test_output_is_byte_identical(m1_path):
    argv = [sys.executable, "-m", "cmucalc.cli", "game", "--model", m1_path, "--world", "w0", "--formula", "nu X. [] X /\\ ~P", "--json"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first
