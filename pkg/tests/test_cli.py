"""Command-line interface: outputs, reports, exit codes, determinism."""

import json
import subprocess
import sys

from fvkit.cli import SCHEMA, dumps, main, run


def lines_of(argv):
    code, report, lines = run(argv)
    return code, report, "\n".join(lines)


def test_decompose_units():
    code, report, out = lines_of(["decompose", "--formula", "E t. x*t = 1", "--products", "F2xF3"])
    assert code == 0
    assert "certificate: PASS (6/6 tuples)" in out
    assert report["schema"] == SCHEMA
    assert report["outputs"]["sequence"]["components"]


def test_decompose_atomic_sequence():
    code, report, _ = lines_of(["decompose", "--formula", "x = 0", "--products", "F2xF3"])
    assert code == 0
    assert report["outputs"]["sequence"] == {"bool": "y1 = 1", "components": ["x = 0"]}


def test_parse_error_exit_code(capsys):
    assert main(["decompose", "--formula", "x = = 0"]) == 2
    err = capsys.readouterr().err
    assert "position 4" in err and "^" in err


def test_tighten_scan():
    code, report, out = lines_of(["tighten", "--formula", "x = 0"])
    assert code == 0
    assert "syntactic scan: PASS" in out
    assert "=" not in report["outputs"]["tight"]["sigma"]


def test_eae_shape():
    code, report, out = lines_of(["eae", "--formula", "E t. x*t = 1"])
    assert code == 0
    assert report["outputs"]["shape"]["eae"] is True
    assert "shape: PASS" in out
    assert all(c["passed"] for c in report["certificates"])


def test_bound_exceeded_exit_code(capsys):
    assert main(["decompose", "--formula", "E t. x*t = 1", "--bound", "0"]) == 3
    assert "components" in capsys.readouterr().err


def test_interp_definition():
    code, report, out = lines_of(["interp", "--formula", "E t. x*t = 1", "--products", "F2xF3"])
    assert code == 0 and "PASS (6/6 tuples)" in out


def test_eval_assignment():
    code, report, out = lines_of(["eval", "--formula", "E t. x*t = 1", "--products", "F2xF3", "--assign", "x=(1,2)"])
    assert code == 0 and "F2xF3: true" in out
    code, _, out = lines_of(["eval", "--formula", "E t. x*t = 1", "--products", "F2xF3", "--assign", "x=(1,0)"])
    assert "F2xF3: false" in out


def test_demo_psi2_anomaly():
    code, report, out = lines_of(["demo", "psi2_anomaly"])
    assert code == 0
    rows = {r["field"]: r["literal"] for r in report["outputs"]["table"]}
    assert rows == {"F2": True, "F4": False, "F8": True}


def test_fuzz_report_bytes_are_reproducible():
    argv = ["fuzz", "--count", "40", "--seed", "9"]
    a, b = dumps(run(argv)[1]), dumps(run(argv)[1])
    assert a == b
    assert json.loads(a)["outputs"]["passed"] == 40


def test_fuzz_injected_bug_is_reported():
    code, report, out = lines_of(["fuzz", "--count", "40", "--inject-bug"])
    assert code == 4
    assert "counterexample" in out
    assert report["outputs"]["failed"]


def test_json_to_file(tmp_path):
    path = tmp_path / "r.json"
    assert main(["parse", "--formula", "E x. A y. E z. x*y = z", "--json", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["outputs"]["shape"]["word"] == "∃∀∃" and data["exit_code"] == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fvkit.cli", "decompose", "--formula", "E t. x*t = 1", "--products", "F2xF3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "certificate: PASS (6/6 tuples)" in proc.stdout
