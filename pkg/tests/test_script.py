import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragcheck.ground import IndexOutOfBounds, NullDereference, eval_term
from fragcheck.jsonmodel import parse_type_defs
from fragcheck.logic import derive_signature
from fragcheck.syntax import ParseError
from fragcheck.script import exec_script, parse_script, to_update_term

ENV = parse_type_defs("""
DB = { n: Integer, xs: List[Integer], items: List[Item], opt: Option[Item], flag: Bool }
Item = { qty: Integer, tags: List[String] }
""")
SIG = derive_signature(ENV)

SCRIPTS = [
    "db.n = db.n + 1",
    "db.flag = true",
    "db.xs.append(db.n)",
    "db.xs = []",
    "db.n = length(db.xs); db.xs.append(3)",
    "db.items[0].qty = db.items[0].qty - db.n",
    "db.items[0].tags.append(\"new\")",
    "db.opt.qty = 7",
    "db.opt = null",
    "db.xs[0] = db.n; db.n = db.xs[0] + 1",
    "db.items.append(db.items[0]); db.items[0].qty = 0",
]

items = st.fixed_dictionaries({"qty": st.integers(-5, 5), "tags": st.lists(st.sampled_from(["a", "b"]), max_size=2)})
dbs = st.fixed_dictionaries({
    "n": st.integers(-5, 5),
    "xs": st.lists(st.integers(-5, 5), max_size=3),
    "items": st.lists(items, max_size=2),
    "opt": st.one_of(st.none(), items),
    "flag": st.booleans(),
})


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(SCRIPTS), dbs)
def test_update_term_agrees_with_execution(text, db):
    script = parse_script(text, SIG)
    term = to_update_term(script, SIG)
    try:
        expected = exec_script(script, db)
    except (IndexOutOfBounds, NullDereference):
        return
    assert eval_term(term, {SIG.db: db}) == expected


def test_statements_are_sequential():
    s = parse_script("db.n = 5; db.n = db.n + db.n", SIG)
    assert exec_script(s, {"n": 0, "xs": [], "items": [], "opt": None, "flag": False})["n"] == 10


def test_empty_script_is_identity():
    s = parse_script("", SIG)
    assert not s
    assert to_update_term(s, SIG) == SIG.db


def test_input_not_mutated():
    db = {"n": 0, "xs": [1], "items": [], "opt": None, "flag": False}
    exec_script(parse_script("db.xs.append(2); db.xs[0] = 9", SIG), db)
    assert db["xs"] == [1]


def test_out_of_bounds_write_fails():
    db = {"n": 0, "xs": [], "items": [], "opt": None, "flag": False}
    with pytest.raises(IndexOutOfBounds):
        exec_script(parse_script("db.xs[0] = 1", SIG), db)


def test_write_through_null_option_fails():
    db = {"n": 0, "xs": [], "items": [], "opt": None, "flag": False}
    with pytest.raises(NullDereference):
        exec_script(parse_script("db.opt.qty = 1", SIG), db)


@pytest.mark.parametrize("text", ["db.n = true", "db.nope = 1", "db.n.append(1)", "db.n + 1", "db.xs.append(1, 2)"])
def test_ill_formed_scripts(text):
    with pytest.raises((ParseError, TypeError, ValueError)):
        parse_script(text, SIG)
