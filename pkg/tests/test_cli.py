import io
import json
import shutil
import subprocess

import pytest

from fragcheck.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    text = out.getvalue()
    try:
        return code, json.loads(text)
    except json.JSONDecodeError:
        return code, text


def test_typecheck_bundled():
    code, rep = run("typecheck", "purchase")
    assert code == 0 and rep["verdict"] == "pass"
    assert rep["summary"]["composed_edges"] == 9


def test_typecheck_bad_database():
    code, rep = run("typecheck", "purchase", "--db", '{"order": [], "gold": 1}')
    assert code == 1
    assert "/gold: expected Bool, got 1" in rep["errors"]


def test_simulate():
    code, rep = run("simulate", "decrement", "--max-steps", "5")
    assert code == 0
    assert rep["count"] == 1
    assert [d["x"] for d in rep["runs"][0]["databases"]] == [2, 1, 0]


def test_check_verdicts_and_exit_codes():
    code, rep = run("check", "purchase", "-q", "~(E F db.status.final = true)", "--depth", "12")
    assert code == 1 and rep["verdict"] == "fails"
    assert rep["counterexample"]["edges"][-1] == "e9"
    code, rep = run("check", "purchase", "-q", "A G (forall s:Stock . (s in db.stock => s.available >= 0))", "--depth", "12")
    assert code == 0 and rep["verdict"] == "holds"
    code, rep = run("check", "purchase", "--oracle", "-q", "E F db.status.paid = true", "--depth", "6")
    assert code == 0 and rep["engine"] == "enumeration"


def test_check_with_db_file(tmp_path):
    db = tmp_path / "db.json"
    db.write_text('{"x": 1}')
    code, rep = run("check", "decrement", "--db", str(db), "-q", "A F db.x = 0", "--depth", "3")
    assert code == 0


def test_verify_witness():
    code, rep = run("verify", "decrement", "-q", "A G db.x >= 0", "--depth", "1")
    assert code == 1
    assert rep["witness"] == {"c": {"x": -1}}
    assert rep["initial_condition"] == "~(x(c) >= 0)"


def test_verify_emit_tptp(tmp_path):
    code, rep = run("verify", "decrement", "-q", "A G db.x >= 0", "--depth", "1", "--emit-tptp", str(tmp_path))
    assert code == 2 and rep["verdict"] == "unknown"
    assert rep["files"] and all(f.endswith(".p") for f in rep["files"])


def test_emit_axioms(tmp_path):
    code, text = run("emit-axioms", "decrement")
    assert code == 0 and "upd_x_read" in text
    out = tmp_path / "ax.p"
    code, rep = run("emit-axioms", "decrement", "--out", str(out))
    assert code == 0 and out.read_text() == text


def test_pretty_output():
    code, text = run("check", "decrement", "-q", "A G db.x > 0", "--depth", "3", "--pretty")
    assert code == 1
    assert text.startswith("check: fails")
    assert "counterexample: Loop --dec--> Loop" in text


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "purchase"),
        ("check", "purchase", "-q", "A G db.nope = 1"),
        ("check", "purchase", "-q", "A G", "--depth", "2"),
        ("check", "purchase", "-q", "A G true", "--depth", "-1"),
        ("check", "nosuchfile.json", "-q", "A G true"),
        ("frobnicate",),
    ],
)
def test_errors_exit_3(argv):
    code, rep = run(*argv)
    assert code == 3
    assert rep["verdict"] == "error"


def test_spec_error_pointer(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"types": "DB = { x: Integer }", "fragments": [{"name": "M", "nodes": [{"id": "A"}]}]}))
    code, rep = run("typecheck", str(bad))
    assert code == 3 and rep["pointer"] == "/fragments"


@pytest.mark.skipif(shutil.which("fragcheck") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["fragcheck", "check", "decrement", "-q", "A G db.x >= 0", "--depth", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "holds"
