import json

import pytest

from fragcheck import ProverConfig, check, load_spec, verify
from fragcheck import ctlstar as ct
from fragcheck.checker import prepare_query
from fragcheck.process import Instance, Run, State, validate_run
from fragcheck.semantics import eval_path_on_run
from fragcheck.specfile import bundled_path
from fragcheck.tableau import Context, apply_rule, initial_node, saturate

from conftest import random_instance


def _run(spec, data):
    return Run(tuple(State(n, d) for n, d in zip(data["nodes"], data["databases"])), tuple(data["edges"]))


def test_counterexamples_are_real_violations():
    seen = 0
    for seed in range(200):
        spec, db, query, bound = random_instance(seed)
        q, expanded, _ = prepare_query(spec, query)
        if not isinstance(expanded, ct.A):
            continue
        rep = check(spec, db, query, bound)
        if rep.verdict != "fails":
            continue
        seen += 1
        run = _run(spec, rep.counterexample)
        inst = Instance(spec, db)
        assert validate_run(run, inst) == []
        assert not eval_path_on_run(expanded.arg, run, inst, bound), (seed, query)
    assert seen > 20


def test_decrement_concrete(decrement):
    assert check(decrement, {"x": 3}, "A G db.x >= 0", 10).verdict == "holds"
    assert check(decrement, {"x": 3}, "A F db.x = 0", 3).verdict == "holds"
    # the run is cut by the bound before reaching 0
    rep = check(decrement, {"x": 3}, "A F db.x = 0", 2)
    assert rep.verdict == "fails"
    assert [d["x"] for d in rep.counterexample["databases"]] == [3, 2, 1]
    assert check(decrement, {"x": -1}, "A G db.x >= 0", 0).verdict == "fails"


def test_first_rule_is_expansion(decrement):
    inst = Instance(decrement, {"x": 1})
    _, expanded, _ = prepare_query(decrement, "A G db.x >= 0")
    node = initial_node(inst, ct.Neg(expanded))
    app = apply_rule(Context(inst, 2), node)
    assert app.rule == "U-exp"
    assert len(app.children) == 1


def test_trace_lists_rule_applications(decrement):
    rep = check(decrement, {"x": 1}, "A G db.x >= 0", 2, trace=True)
    assert rep.trace and rep.trace[0].startswith("U-exp")
    assert any("E-X-exp" in line for line in rep.trace)


def test_query_without_quantifier_is_wrapped(decrement):
    rep = check(decrement, {"x": 1}, "G db.x >= 0", 3)
    assert rep.verdict == "holds"
    assert rep.warnings


def test_saturate_counts_nodes(purchase):
    inst = Instance(purchase, purchase.database)
    _, expanded, _ = prepare_query(purchase, "A G db.status.final = false")
    res = saturate(Context(inst, 12), initial_node(inst, ct.Neg(expanded)))
    assert res.status == "open"
    assert res.nodes > 0
    assert res.counterexample.states[-1].db["status"]["final"] is True


# -- unrestricted mode ---------------------------------------------------

def _constrained(text):
    doc = json.loads(bundled_path("decrement").read_text())
    doc["constraints"] = [text]
    return load_spec(doc)


def test_symbolic_open_branch_gives_witness(decrement):
    rep = verify(decrement, "A G db.x >= 0", 1)
    assert rep.verdict == "fails"
    assert rep.initial_condition == "~(x(c) >= 0)"
    assert rep.witness == {"c": {"x": -1}}


@pytest.mark.parametrize("depth", [1, 3])
def test_symbolic_closed_with_constraint(depth):
    cfg = ProverConfig(spec_name="decrement")
    if cfg.resolved_command() is None:
        pytest.skip("no prover available")
    rep = verify(_constrained("db.x >= 0"), "A G db.x >= 0", depth, cfg)
    assert rep.verdict == "holds", rep.reasons


def test_symbolic_eventually(decrement):
    # from x = 1 the loop reaches 0 in one step; from x = 5 it needs more than two
    rep = verify(decrement, "A F db.x <= 0", 2)
    assert rep.verdict == "fails"
    x = rep.witness["c"]["x"]
    assert x > 2
    assert check(decrement, {"x": x}, "A F db.x <= 0", 2).verdict == "fails"


def test_ground_backend_cannot_close(decrement):
    rep = verify(_constrained("db.x >= 0"), "A G db.x >= 0", 1, ProverConfig(backend="ground"))
    assert rep.verdict == "unknown"
    assert rep.reasons


def test_emit_only_writes_obligations(tmp_path, decrement):
    cfg = ProverConfig(backend="emit-only", outdir=str(tmp_path), spec_name="decrement")
    rep = verify(decrement, "A G db.x >= 0", 1, cfg)
    assert rep.verdict == "unknown"
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files and all(f.startswith("decrement_") and f.endswith(".p") for f in files)
    assert rep.obligations == len(files)


def test_purchase_shipping_needs_payment_for_every_database(purchase):
    cfg = ProverConfig(spec_name="purchase")
    if cfg.resolved_command() is None:
        pytest.skip("no prover available")
    query = "A G (db.status.shipped = true => db.status.paid = true || db.gold = true)"
    rep = verify(purchase, query, 2, cfg)
    assert rep.verdict == "holds", rep.reasons


def test_purchase_symbolic_counterexample(purchase):
    rep = verify(purchase, "A G (forall s:Stock . (s in db.stock => s.available >= 0))", 2)
    assert rep.verdict == "fails"
    db = rep.witness["c"]
    assert any(s["available"] < 0 for s in db["stock"])
