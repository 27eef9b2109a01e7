import sys

import pytest

from fragcheck import ProverConfig, SatQuery, check_sat, tptp_emit
from fragcheck.jsonmodel import parse_type_defs
from fragcheck.logic import derive_signature
from fragcheck.prover import (
    ObligationWriter,
    emit_axioms,
    named_axioms,
    parse_szs,
    run_external,
    search_witness,
)
from fragcheck.syntax import parse_formula


@pytest.mark.parametrize(
    "line, status",
    [
        ("% SZS status Theorem for p", "unsat"),
        ("% SZS status Unsatisfiable for p", "unsat"),
        ("% SZS status ContradictoryAxioms", "unsat"),
        ("% SZS status CounterSatisfiable for p", "sat"),
        ("# SZS status Satisfiable", "sat"),
        ("% SZS status Timeout for p", "unknown"),
        ("% SZS status GaveUp", "unknown"),
        ("segmentation fault", "unknown"),
        ("", "unknown"),
    ],
)
def test_szs_parsing(line, status):
    assert parse_szs(f"some noise\n{line}\nmore")[0] == status


def test_axiom_inventory(purchase):
    names = [n for n, _ in named_axioms(purchase.sig)]
    assert len(names) == len(set(names))
    for slug in ("list_int", "list_stock"):
        for kind in ("update_read", "update_frame", "update_length", "append_length", "append_last",
                     "append_prefix", "length_nonneg", "is_empty", "mem", "nil_length"):
            assert f"{slug}_{kind}" in names
    assert "upd_paid_read" in names
    assert "upd_paid_frame_shipped" in names


def test_option_axioms():
    sig = derive_signature(parse_type_defs("DB = { o: Option[Integer] }"))
    names = {n for n, _ in named_axioms(sig)}
    assert {"option_int_the_some", "option_int_some_not_null", "option_int_cases"} <= names


def test_names_do_not_collide():
    sig = derive_signature(parse_type_defs("DB = { item: Item, db: Integer } Item = { n: Integer }"))
    text = emit_axioms(sig)
    assert "tff(item_type, type, item: $tType)." in text
    assert "item_fn: db > item" in text
    assert "db_fn: db > $int" in text


def test_emission_is_deterministic(purchase):
    a = emit_axioms(purchase.sig, purchase.definitions)
    b = emit_axioms(purchase.sig, purchase.definitions)
    assert a == b
    assert "def_readytoship" in a or "def_readyToShip" in a or "readytoship" in a.lower()


def _decrement_query(decrement, text):
    c = decrement.sig.constant("c", "DB")
    from fragcheck.logic import App, substitute

    f = parse_formula(text, decrement.sig)
    return SatQuery([substitute(f, decrement.sig.db, App(c, ()))], decrement.sig, decrement.definitions)


def test_tptp_obligation_shape(decrement):
    text = tptp_emit(_decrement_query(decrement, "db.x < 0"))
    assert "tff(c_decl, type, c: db)." in text
    assert "tff(obligation_0, axiom, $less(x(c),0))." in text
    assert text.rstrip().endswith("tff(goal, conjecture, $false).")


def test_witness_search(decrement):
    q = _decrement_query(decrement, "db.x < 0 && db.x + 3 > 1")
    assert search_witness(q) == {"c": {"x": -1}}
    assert search_witness(_decrement_query(decrement, "db.x < 0 && db.x > 0")) is None


def test_auto_backend_sat_by_witness(decrement):
    v = check_sat(_decrement_query(decrement, "db.x = 7"), ProverConfig())
    assert v.is_sat and v.witness == {"c": {"x": 7}}


def test_ground_backend_on_ground_query(decrement):
    q = SatQuery([parse_formula("1 + 1 = 2", decrement.sig)], decrement.sig)
    assert check_sat(q, ProverConfig(backend="ground")).is_sat


def _fake_prover(tmp_path, word):
    script = tmp_path / "prover.py"
    script.write_text(f"import sys\nprint('% SZS status {word} for', sys.argv[1])\n")
    return f"{sys.executable} {script} {{file}}"


def test_external_command_and_env_override(tmp_path, decrement, monkeypatch):
    q = _decrement_query(decrement, "db.x < 0 && db.x > 0")
    cfg = ProverConfig(backend="external", command=_fake_prover(tmp_path, "Theorem"), outdir=str(tmp_path / "out"))
    v = check_sat(q, cfg)
    assert v.is_unsat and v.file.endswith(".p")
    monkeypatch.setenv("FRAGCHECK_PROVER", _fake_prover(tmp_path, "CounterSatisfiable"))
    assert check_sat(q, cfg).is_sat


def test_external_failures(tmp_path):
    p = tmp_path / "x.p"
    p.write_text("tff(goal, conjecture, $false).\n")
    assert run_external(p, "exit 3", 5).reason == "prover exited with code 3"
    assert run_external(p, f"{sys.executable} -c 'import time; time.sleep(5)'", 0.5).reason == "timeout"


def test_obligation_writer_names(tmp_path):
    w = ObligationWriter(tmp_path, "my spec")
    a = w.write("x", "4")
    b = w.write("y", "4")
    assert (a.name, b.name) == ("my_spec_4_0.p", "my_spec_4_1.p")
    assert w.files == [str(a), str(b)]


def test_config_validation():
    with pytest.raises(ValueError):
        ProverConfig(backend="magic")
    with pytest.raises(ValueError):
        ProverConfig(timeout=0)
