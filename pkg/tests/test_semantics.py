from fragcheck import check, load_spec
from fragcheck.process import Instance
from fragcheck.semantics import enumerate_runs, eval_query, simulate
from fragcheck.syntax import parse_path_formula


def _branching():
    return load_spec({
        "types": "DB = { x: Integer }",
        "fragments": [{
            "name": "M",
            "nodes": [{"id": "S", "labels": ["init"]}, {"id": "L"}, {"id": "R"}],
            "edges": [
                {"id": "left", "from": "S", "to": "L", "script": "db.x = db.x - 1"},
                {"id": "right", "from": "S", "to": "R", "script": "db.x = db.x + 1"},
                {"id": "loop", "from": "R", "to": "R", "guard": "db.x < 3", "script": "db.x = db.x + 1"},
            ],
        }],
    })


def q(spec, text):
    return parse_path_formula(text, spec.sig)


def test_maximal_runs_up_to_bound():
    spec = _branching()
    runs = list(enumerate_runs(Instance(spec, {"x": 0}), 5))
    assert [r.render() for r in runs] == [
        "S --left--> L",
        "S --right--> R --loop--> R --loop--> R",
    ]
    # a bound truncates runs
    assert max(len(r) for r in enumerate_runs(Instance(spec, {"x": 0}), 1)) == 2


def test_path_quantifiers():
    spec = _branching()
    inst = Instance(spec, {"x": 0})
    assert eval_query(inst, q(spec, "E F db.x = 3"), 5).holds
    assert not eval_query(inst, q(spec, "A F db.x = 3"), 5).holds
    assert eval_query(inst, q(spec, "A X (db.x = -1 || db.x = 1)"), 5).holds
    assert eval_query(inst, q(spec, "E X (A G db.x > 0)"), 5).holds
    v = eval_query(inst, q(spec, "A G db.x >= 0"), 5)
    assert not v.holds and v.witness.edges == ("left",)


def test_finite_run_next_operators():
    spec = _branching()
    inst = Instance(spec, {"x": 0})
    # L has no successor: strong next fails there, weak next holds
    assert eval_query(inst, q(spec, "E X (WX false)"), 5).holds
    assert not eval_query(inst, q(spec, "A X (X true)"), 5).holds
    # at the bound there are no successors either
    assert eval_query(inst, q(spec, "A WX WX false"), 1).holds


def test_until_release_on_finite_runs():
    spec = _branching()
    inst = Instance(spec, {"x": 0})
    assert eval_query(inst, q(spec, "E (db.x >= 0 U db.x = 2)"), 5).holds
    assert eval_query(inst, q(spec, "E (db.x = 5 R db.x >= 0)"), 5).holds  # rhs holds to the end
    assert not eval_query(inst, q(spec, "A (db.x = 5 R db.x >= 0)"), 5).holds
    assert eval_query(inst, q(spec, "A (db.x >= 0 W db.x < 0)"), 5).holds


def test_simulate_marks_stuck_runs(decrement):
    runs, lines = simulate(Instance(decrement, {"x": 0}), 3)
    assert len(runs) == 1 and "stuck" in lines[0]
    runs, _ = simulate(Instance(decrement, {"x": 5}), 3)
    assert len(runs[0].edges) == 3


def test_purchase_oracle_agrees_with_tableau(purchase):
    queries = [
        "~(E F db.status.final = true)",
        "A G (forall s:Stock . (s in db.stock => s.available >= 0))",
        "A G (db.status.shipped = true => db.status.paid = true || db.gold = true)",
        "E F (db.status.paid = true && db.status.shipped = false)",
        "A F db.status.final = true",
        "E (db.status.paid = false U db.status.shipped = true)",
    ]
    for text in queries:
        for depth in (3, 8):
            tab = check(purchase, purchase.database, text, depth)
            ref = check(purchase, purchase.database, text, depth, oracle=True)
            assert tab.verdict == ref.verdict, (text, depth)
