import json
import os

import pytest

from graphprog.cli import main
from graphprog.econd import alpha_equal
from graphprog.syntax import parse_condition, parse_graph


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def s(samples):
    return lambda name: os.path.join(samples, name)


def test_wpost_of_init(capsys):
    code, out, _ = run(capsys, "wpost", "--rules", "init", "--cond", "true")
    assert code == 0
    assert alpha_equal(parse_condition(out), parse_condition("ex int x . ex { node 1 x:0; }"))


def test_app_of_rule_file(capsys, s):
    code, out, _ = run(capsys, "app", "--rules", s("colouring.grs"), "--rules", "colour")
    assert code == 0
    assert alpha_equal(parse_condition(out),
                       parse_condition("ex int x, i, y . ex { node 1 x:i; node 2 y; edge 1 -- 2; }"))


def test_check_failure_proof(capsys, s):
    code, out, _ = run(capsys, "check", "--proof", s("failure.proof"))
    assert code == 0 and "Valid" in out


def test_check_rejected_proof(capsys, tmp_path, s):
    bad = tmp_path / "bad.proof"
    bad.write_text(f'use "{s("colouring.cond")}";\n'
                   "proof oops =\n(rule RuleSetFail\n  conclusion: [true] init [er: true])\n")
    code, out, _ = run(capsys, "check", "--proof", str(bad))
    assert code == 1 and "Rejected at RuleSetFail at 3:1" in out


def test_validate_refuted_triple_writes_witness(capsys, tmp_path):
    witness = tmp_path / "w.host"
    code, out, _ = run(capsys, "validate", "--triple",
                       "[true] init [ok: not (ex int x . ex { node 1 x:0; })]",
                       "--max-nodes", "2", "--labels", "5,5:0", "--witness", str(witness))
    assert code == 1 and "Counterexample" in out
    H = parse_graph(witness.read_text())
    assert all(lab != (5, 0) for lab in H.nodes.values())


def test_validate_valid_triple(capsys):
    code, out, _ = run(capsys, "validate", "--triple",
                       "[not app(init)] init; colour! [er: not app(init)]",
                       "--max-nodes", "2", "--labels", "0,0:0")
    assert code == 0 and "NoCounterexample" in out


def test_outcomes_of_divergent_loop(capsys, s):
    code, out, _ = run(capsys, "outcomes", "--program", "nop!", "--graph", s("triangle.host"),
                       "--format", "machine")
    rec = json.loads(out)
    assert code == 0 and rec["ok"] == [] and rec["er"] == [] and rec["truncated"] is False


def test_outcomes_truncated_is_inconclusive(capsys, s):
    code, out, _ = run(capsys, "outcomes", "--program", "add!", "--max-steps", "50",
                       "--graph", s("single.host"))
    assert code == 3 and "truncated: true" in out
    assert run(capsys, "outcomes", "--program", "add!")[0] == 2


def test_run_is_byte_identical(capsys, s):
    args = ("run", "--program", "init; colour!", "--graph", s("triangle.host"), "--seed", "7")
    first = run(capsys, *args)
    assert first == run(capsys, *args)
    assert first[0] == 0 and "step 1: init" in first[1]


def test_run_finite_failure(capsys, s):
    code, out, _ = run(capsys, "run", "--program", "init; colour!", "--graph", s("single.host"))
    assert code == 1 and "exit: er" in out


def test_satisfies(capsys, s):
    assert run(capsys, "satisfies", "--graph", s("single.host"), "--cond", "ex int a . ex { node 1 a; }")[0] == 1
    assert run(capsys, "satisfies", "--graph", s("single.host"), "--cond", "true")[0] == 0


def test_report_file(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, _, _ = run(capsys, "difftest", "app", "--rules", "init", "--max-nodes", "1",
                     "--report", str(report))
    assert code == 0 and json.loads(report.read_text())


def test_usage_errors_report_position(capsys, tmp_path):
    bad = tmp_path / "bad.grs"
    bad.write_text("rule r(x) {\n  lhs { node 1 x; }\n  rhs { node 1 y; }\n}\n")
    code, _, err = run(capsys, "app", "--rules", str(bad))
    assert code == 2 and "bad.grs:" in err
    code, _, err = run(capsys, "run", "--program", "colour!!")
    assert code == 2 and err.startswith("error:")
    assert run(capsys, "satisfies", "--graph", str(tmp_path / "missing.host"), "--cond", "true")[0] == 2
