import json
import subprocess
import sys

import pytest

z3 = pytest.importorskip("z3")

from fragcheck import ProverConfig, load_spec, verify  # noqa: E402
from fragcheck.specfile import bundled_path  # noqa: E402
from fragcheck.tff_z3 import TffSyntaxError, main, parse_problem, solve  # noqa: E402

import golden_cases  # noqa: E402

SMALL = """
tff(s_type, type, s: $tType).
tff(a_decl, type, a: s).
tff(b_decl, type, b: s).
tff(f_decl, type, f: s > $int).
tff(s_closed, axiom, ![X:s]: ((X = a) | (X = b))).
tff(ax1, axiom, $greater(f(a), $sum(f(b), 1))).
"""


def test_countersatisfiable_on_finite_problem():
    assert solve(SMALL + "tff(goal, conjecture, $false).\n") == "CounterSatisfiable"


def test_theorem():
    text = SMALL + "tff(goal, conjecture, ?[X:s]: ($greatereq(f(X), $uminus($difference(f(b), 0))) | a != b)).\n"
    assert solve(text) == "Theorem"


def test_enum_closure_gives_unsat():
    text = SMALL + "tff(ax2, axiom, ![X:s]: $less(f(X), 0)).\ntff(ax3, axiom, f(b) = $uminus(1)).\n"
    assert solve(text + "tff(goal, conjecture, $false).\n") == "Theorem"


def test_syntax_errors():
    with pytest.raises(TffSyntaxError):
        parse_problem("tff(x, axiom, undeclared(1)).")
    with pytest.raises(TffSyntaxError):
        parse_problem("tff(x, axiom, @).")


def test_golden_obligations_parse():
    for path in sorted(golden_cases.GOLDEN.rglob("*.p")):
        parse_problem(path.read_text())


def test_closed_decrement_obligations_are_theorems(tmp_path):
    doc = json.loads(bundled_path("decrement").read_text())
    doc["constraints"] = ["db.x >= 0"]
    spec = load_spec(doc)
    cfg = ProverConfig(outdir=str(tmp_path), spec_name="d")
    assert verify(spec, "A G db.x >= 0", 1, cfg).verdict == "holds"
    files = sorted(tmp_path.iterdir())
    assert files
    # in auto mode only obligations without a concrete witness reach the prover
    for p in files:
        out = subprocess.run(
            [sys.executable, "-m", "fragcheck.tff_z3", str(p), "10"], capture_output=True, text=True
        ).stdout
        assert "SZS status Theorem" in out, (p.name, out)


def test_main_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.p"
    bad.write_text("tff(x, axiom, ")
    assert main([str(bad)]) == 1
    assert "SZS status Error" in capsys.readouterr().out
    assert main([]) == 2
