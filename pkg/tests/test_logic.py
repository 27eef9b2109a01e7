import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragcheck.ground import IntegerOverflow, NullDereference, UnboundedQuantifier, eval_formula
from fragcheck.jsonmodel import INT64_MAX, parse_type_defs
from fragcheck.logic import DefinitionError, SortError, check_formula, derive_signature, expand_definitions, free_vars
from fragcheck.syntax import ParseError, parse_definitions, parse_formula, parse_term

TYPES = """
DB = { n: Integer, xs: List[Integer], items: List[Item], best: Option[Item], mode: Mode, flag: Bool }
Item = { name: String, qty: Integer }
Mode = EnumTy["open", "closed"]
"""


@pytest.fixture
def sig():
    return derive_signature(parse_type_defs(TYPES))


DB = {
    "n": 2,
    "xs": [3, 1, 2],
    "items": [{"name": "a", "qty": 0}, {"name": "b", "qty": 5}],
    "best": {"name": "b", "qty": 5},
    "mode": "open",
    "flag": True,
}


def holds(sig, text, db=DB, defs=()):
    return eval_formula(parse_formula(text, sig), {sig.db: db}, defs, sig)


def test_signature_symbols(sig):
    assert {"DB", "Item", "Mode", "List[Int]", "List[Item]", "Option[Item]"} <= set(sig.sorts)
    acc, upd = sig.field_symbols("Item", "qty")
    assert acc.args == ("Item",) and acc.result == "Int"
    assert upd.args == ("Item", "Int") and upd.result == "Item"
    assert sig.list_op("index", "List[Int]").args == ("List[Int]", "Int")
    assert sig.option_op("the", "Option[Item]").result == "Item"


@pytest.mark.parametrize(
    "text, expected",
    [
        ("db.n + 1 = 3", True),
        ("db.xs[0] > db.xs[1]", True),
        ("length(db.xs) = 3 && ~isEmpty(db.xs)", True),
        ("2 in db.xs", True),
        ("7 in db.xs", False),
        ("forall i:Item . (i in db.items => i.qty >= 0)", True),
        ("exists i:Item . (i in db.items && i.qty > 4)", True),
        ("forall k:Integer . ((0 <= k && k < length(db.xs)) => db.xs[k] > 0)", True),
        ("db.best.qty = 5", True),
        ("db.best <> null", True),
        ('db.mode = "open"', True),
        ("forall m:Mode . (m = \"open\" || m = \"closed\")", True),
        ("db.flag = true <=> db.n > 1", True),
        ("-db.n < 0 ∧ db.n ≥ 2", True),
        ('db.items[1].name = "b"', True),
    ],
)
def test_ground_evaluation(sig, text, expected):
    assert holds(sig, text) is expected


def test_definitions_expand_and_evaluate(sig):
    defs = parse_definitions(
        [
            "big: forall i:Item . (big(i) <=> i.qty > 3)",
            "anyBig: forall d:DB . (anyBig(d) <=> exists i:Item . (i in d.items && big(i)))",
        ],
        sig,
    )
    f = parse_formula("anyBig(db)", sig)
    assert eval_formula(f, {sig.db: DB}, defs, sig)
    expanded = expand_definitions(f, defs)
    assert "big" not in str(expanded)
    assert eval_formula(expanded, {sig.db: DB}, (), sig)


def test_recursive_definitions_rejected(sig):
    with pytest.raises(DefinitionError):
        parse_definitions(
            ["p: forall i:Item . (p(i) <=> q(i))", "q: forall i:Item . (q(i) <=> p(i))"], sig
        )


@pytest.mark.parametrize(
    "text",
    ["db.n = true", "db.nope > 0", "db.xs[true] = 1", "db.n in db.items", "foo(db)", "db.n +", "db.n > 9223372036854775808"],
)
def test_rejected_formulas(sig, text):
    with pytest.raises((ParseError, SortError)):
        parse_formula(text, sig)


def test_unbounded_quantifier_not_evaluable(sig):
    with pytest.raises(UnboundedQuantifier):
        holds(sig, "forall k:Integer . k = k")


def test_null_dereference(sig):
    with pytest.raises(NullDereference):
        holds(sig, "db.best.qty = 5", dict(DB, best=None))


def test_overflow_detected(sig):
    with pytest.raises(IntegerOverflow):
        holds(sig, "db.n + 1 > 0", dict(DB, n=INT64_MAX))


def test_formulas_are_sort_correct(sig):
    f = parse_formula("forall i:Item . (i in db.items => i.qty >= db.n)", sig)
    check_formula(f)
    assert {v.name for v in free_vars(f)} == {"db"}
    assert parse_term("db.items[0]", sig).sort == "Item"


@settings(max_examples=200, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_arithmetic_matches_python(a, b):
    sig = derive_signature(parse_type_defs("DB = { a: Integer, b: Integer }"))
    db = {"a": a, "b": b}
    assert holds(sig, "db.a - db.b < db.a + -db.b + 1", db)
    assert holds(sig, "db.a > db.b", db) == (a > b)
    assert holds(sig, "db.a <= db.b", db) == (a <= b)
