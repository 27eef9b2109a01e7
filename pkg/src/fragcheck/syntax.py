"""Concrete syntax for formulas, queries, definitions and update scripts.

Precedence, loosest first::

    <=>   =>   ||   U R W   &&   ~ A E X WX G F   comparisons / in   + -   .f [i]

Quantifier bodies (``forall x:S . body``) extend as far right as possible.
Parsing is two-phase: a raw tree is built first and then elaborated against
a :class:`~fragcheck.logic.Signature`, which resolves field names by sort and
turns ``a.f`` into accessor applications.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any

from . import ctlstar as ct
from . import logic as lg
from .jsonmodel import INT64_MAX
from .logic import BOOL, INT, STRING, App, Const, Signature, SortError, Term, Var


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None, text: str | None = None):
        if pos is not None and text is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)


# --------------------------------------------------------------------------
# tokens

_UNICODE = {
    "∧": "&&", "∨": "||", "¬": "~", "⇒": "=>", "→": "=>", "⇔": "<=>", "↔": "<=>",
    "∀": "forall", "∃": "exists", "≥": ">=", "≤": "<=", "≠": "<>", "≈": "=", "∈": "in",
    "⊤": "true", "⊥": "false", "X̄": "WX",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|\|\||&&|<>|!=|<=|>=|==|[~!=<>+\-.,:;()\[\]{}])
  | (?P<uni>X̄|[∧∨¬⇒→⇔↔∀∃≥≤≠≈∈⊤⊥])
    """,
    re.VERBOSE,
)

KEYWORDS = {"forall", "exists", "true", "false", "null", "in", "A", "E", "X", "WX", "U", "R", "W", "G", "F"}
TEMPORAL_PREFIX = {"A", "E", "X", "WX", "G", "F"}
TEMPORAL_BINARY = {"U", "R", "W"}


@dataclass(frozen=True)
class Tok:
    kind: str  # int | str | id | kw | op | eof
    value: str
    pos: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "uni":
            value = _UNICODE[value]
            kind = "kw" if value in KEYWORDS else "op"
        elif kind == "id" and value in KEYWORDS:
            kind = "kw"
        elif kind == "op":
            value = {"!=": "<>", "==": "=", "!": "~"}.get(value, value)
        if kind != "ws":
            toks.append(Tok(kind, value, m.start()))
        pos = m.end()
    toks.append(Tok("eof", "", len(text)))
    return toks


# --------------------------------------------------------------------------
# raw trees: tuples (tag, pos, ...)


class RawParser:
    def __init__(self, text: str, toks: list[Tok] | None = None):
        self.text = text
        self.toks = toks if toks is not None else tokenize(text)
        self.i = 0

    # helpers
    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *values: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "kw") and t.value in values

    def next(self) -> Tok:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value: str) -> Tok:
        t = self.peek()
        if t.kind not in ("op", "kw") or t.value != value:
            got = t.value or "end of input"
            raise ParseError(f"expected {value!r}, got {got!r}", t.pos, self.text)
        return self.next()

    def error(self, msg: str):
        raise ParseError(msg, self.peek().pos, self.text)

    def ident(self) -> str:
        t = self.peek()
        if t.kind == "id" or (t.kind == "kw" and t.value not in ("forall", "exists", "in")):
            self.i += 1
            return t.value
        self.error(f"expected identifier, got {t.value or 'end of input'!r}")

    def parse_all(self):
        node = self.formula()
        if self.peek().kind != "eof":
            self.error(f"unexpected {self.peek().value!r}")
        return node

    # grammar
    def formula(self):
        return self.iff()

    def iff(self):
        node = self.imp()
        while self.at("<=>"):
            pos = self.next().pos
            node = ("iff", pos, node, self.imp())
        return node

    def imp(self):
        node = self.or_()
        if self.at("=>"):
            pos = self.next().pos
            node = ("imp", pos, node, self.imp())
        return node

    def or_(self):
        node = self.until()
        while self.at("||"):
            pos = self.next().pos
            node = ("or", pos, node, self.until())
        return node

    def until(self):
        node = self.and_()
        if self.at(*TEMPORAL_BINARY):
            t = self.next()
            node = (t.value, t.pos, node, self.until())
        return node

    def and_(self):
        node = self.unary()
        while self.at("&&"):
            pos = self.next().pos
            node = ("and", pos, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if self.at("~"):
            self.next()
            return ("not", t.pos, self.unary())
        if t.kind == "kw" and t.value in TEMPORAL_PREFIX:
            self.next()
            return (t.value, t.pos, self.unary())
        if self.at("forall", "exists"):
            self.next()
            binders = []
            while True:
                name = self.ident()
                self.expect(":")
                sort = self.sort_name()
                binders.append((name, sort))
                if not self.at(","):
                    break
                self.next()
            self.expect(".")
            return ("quant", t.pos, t.value, tuple(binders), self.formula())
        return self.comparison()

    def sort_name(self) -> str:
        name = self.ident()
        if self.at("["):
            self.next()
            inner = self.sort_name()
            self.expect("]")
            name = f"{name}[{inner}]"
        return name

    def comparison(self):
        node = self.sum()
        if self.at("=", "<>", "<", "<=", ">", ">=", "in"):
            t = self.next()
            node = ("cmp", t.pos, t.value, node, self.sum())
        return node

    def sum(self):
        node = self.prefix()
        while self.at("+", "-"):
            t = self.next()
            node = ("arith", t.pos, t.value, node, self.prefix())
        return node

    def prefix(self):
        if self.at("-"):
            pos = self.next().pos
            return ("neg", pos, self.prefix())
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while True:
            if self.at("."):
                pos = self.next().pos
                name = self.ident()
                if self.at("("):
                    node = ("method", pos, node, name, self.args())
                else:
                    node = ("field", pos, node, name)
            elif self.at("["):
                pos = self.next().pos
                idx = self.formula()
                self.expect("]")
                node = ("index", pos, node, idx)
            else:
                return node

    def args(self):
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.formula())
            while self.at(","):
                self.next()
                out.append(self.formula())
        self.expect(")")
        return tuple(out)

    def primary(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return ("int", t.pos, int(t.value))
        if t.kind == "str":
            self.next()
            return ("str", t.pos, json.loads(t.value))
        if self.at("true", "false"):
            self.next()
            return ("bool", t.pos, t.value == "true")
        if self.at("null"):
            self.next()
            return ("null", t.pos)
        if self.at("("):
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        if self.at("["):
            self.next()
            items = []
            if not self.at("]"):
                items.append(self.formula())
                while self.at(","):
                    self.next()
                    items.append(self.formula())
            self.expect("]")
            return ("list", t.pos, tuple(items))
        if t.kind == "id":
            self.next()
            if self.at("("):
                return ("call", t.pos, t.value, self.args())
            return ("name", t.pos, t.value)
        self.error(f"unexpected {t.value or 'end of input'!r}")


def parse_raw(text: str):
    return RawParser(text).parse_all()


def _strip_label(text: str) -> tuple[str | None, str]:
    """Drop an optional leading ``name:`` label (as in ``nongold: ...``)."""
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(?!=)", text)
    if m and m.group(1) not in KEYWORDS:
        rest = text[m.end():]
        # ``x:S`` inside a quantifier never starts a formula, so this is safe
        return m.group(1), rest
    return None, text


# --------------------------------------------------------------------------
# elaboration

_POLY = ("str", "null", "list")


class Elaborator:
    """Turns raw trees into sorted terms and formulas."""

    def __init__(self, sig: Signature, text: str = "", allow_db: bool = True):
        self.sig = sig
        self.text = text
        self.base_scope: dict[str, Var] = {"db": sig.db} if allow_db else {}

    def err(self, msg: str, node) -> ParseError:
        return ParseError(msg, node[1], self.text or None)

    def sort_of_name(self, name: str, node) -> str:
        if name in ("Integer", "Int", "Z"):
            return INT
        if name in self.sig.sorts:
            return name
        if name in self.sig.env.named_types:
            return self.sig.sort_of_type(lg_named(name))
        m = re.fullmatch(r"(List|Option)\[(.+)\]", name)
        if m:
            inner = self.sort_of_name(m.group(2), node)
            full = f"{m.group(1)}[{inner}]"
            if full in self.sig.sorts:
                return full
        raise self.err(f"unknown sort {name}", node)

    # ---- formulas
    def path(self, node, scope: dict[str, Var] | None = None) -> ct.PathFormula:
        scope = dict(self.base_scope if scope is None else scope)
        return ct.collapse(self._path(node, scope))

    def classical(self, node, scope: dict[str, Var] | None = None) -> lg.Formula:
        f = self.path(node, scope)
        if not ct.is_classical(f):
            raise self.err("temporal operators are not allowed here", node)
        return ct.to_fo(f)

    def _path(self, node, scope) -> ct.PathFormula:
        tag = node[0]
        if tag == "iff":
            l, r = self._path(node[2], scope), self._path(node[3], scope)
            if not (ct.is_classical(l) and ct.is_classical(r)):
                return ct.Conj((ct.Imp(l, r), ct.Imp(r, l)))
            return ct.Leaf(lg.Iff(ct.to_fo(l), ct.to_fo(r)))
        if tag == "imp":
            return ct.Imp(self._path(node[2], scope), self._path(node[3], scope))
        if tag == "or":
            return ct.Disj((self._path(node[2], scope), self._path(node[3], scope)))
        if tag == "and":
            return ct.Conj((self._path(node[2], scope), self._path(node[3], scope)))
        if tag == "not":
            return ct.Neg(self._path(node[2], scope))
        if tag in ("U", "R", "W"):
            cls = {"U": ct.U, "R": ct.R, "W": ct.W}[tag]
            return cls(self._path(node[2], scope), self._path(node[3], scope))
        if tag in ("A", "E", "X", "WX", "G", "F"):
            cls = {"A": ct.A, "E": ct.E, "X": ct.X, "WX": ct.WX, "G": ct.G, "F": ct.F}[tag]
            return cls(self._path(node[2], scope))
        if tag == "quant":
            _, _, q, binders, body = node
            inner = dict(scope)
            vars_ = []
            for name, sname in binders:
                v = Var(name, self.sort_of_name(sname, node))
                inner[name] = v
                vars_.append(v)
            b = self._path(body, inner)
            if not ct.is_classical(b):
                raise self.err("quantifier bodies must be classical", node)
            f = ct.to_fo(b)
            for v in reversed(vars_):
                f = lg.Forall(v, f) if q == "forall" else lg.Exists(v, f)
            return ct.Leaf(f)
        return ct.Leaf(self.atom(node, scope))

    def atom(self, node, scope) -> lg.Formula:
        tag = node[0]
        if tag == "bool":
            return lg.TOP if node[2] else lg.BOT
        if tag == "cmp":
            _, _, op, lraw, rraw = node
            if op == "in":
                lst = self.term(rraw, scope)
                info = self.sig.sorts.get(lst.sort)
                if info is None or info.kind != "list":
                    raise self.err(f"'in' needs a list on the right, got {lst.sort}", node)
                elem = self.term(lraw, scope, info.elem)
                return lg.Atom(self.sig.mem(lst.sort), (elem, lst))
            l, r = self.pair(lraw, rraw, scope)
            if op in ("=", "<>"):
                if l.sort != r.sort:
                    raise self.err(f"cannot compare {l.sort} with {r.sort}", node)
                eq = lg.Eq(l, r)
                return eq if op == "=" else lg.Not(eq)
            if l.sort != INT or r.sort != INT:
                raise self.err(f"'{op}' compares integers, got {l.sort} and {r.sort}", node)
            return lg.Atom(lg.ARITH_PREDS[op], (l, r))
        if tag == "call":
            pred = self.sig.predicates.get(node[2])
            if pred is not None and pred.op == "def":
                args = node[3]
                if len(args) != len(pred.args):
                    raise self.err(f"{pred.name} expects {len(pred.args)} arguments", node)
                return lg.Atom(pred, tuple(self.term(a, scope, s) for a, s in zip(args, pred.args)))
            if node[2] == "mem" and len(node[3]) == 2:
                return self.atom(("cmp", node[1], "in", node[3][0], node[3][1]), scope)
        if tag == "name":
            pred = self.sig.predicates.get(node[2])
            if pred is not None and pred.op == "def" and not pred.args and node[2] not in scope:
                return lg.Atom(pred, ())
        # a Bool-valued term used as a formula
        t = self.term(node, scope)
        if t.sort != BOOL:
            raise self.err(f"expected a formula, got a term of sort {t.sort}", node)
        return lg.Eq(t, lg.TRUE_T)

    # ---- terms
    def pair(self, lraw, rraw, scope) -> tuple[Term, Term]:
        if lraw[0] in _POLY and rraw[0] not in _POLY:
            r = self.term(rraw, scope)
            return self.term(lraw, scope, r.sort), r
        l = self.term(lraw, scope)
        return l, self.term(rraw, scope, l.sort)

    def term(self, node, scope, expected: str | None = None) -> Term:
        t = self._term(node, scope, expected)
        if expected is not None and t.sort != expected:
            t = self.coerce(t, expected, node)
        return t

    def coerce(self, t: Term, expected: str, node) -> Term:
        info = self.sig.sorts.get(expected)
        if info is not None and info.kind == "option" and t.sort == info.elem:
            return App(self.sig.option_op("some", expected), (t,))
        if isinstance(t, Const) and t.sort == STRING and info is not None and info.kind == "enum":
            if t.value not in info.values:
                raise self.err(f"{t.value!r} is not a value of {expected}", node)
            return Const(t.value, expected)
        if t.sort != expected:
            raise self.err(f"expected sort {expected}, got {t.sort}", node)
        return t

    def _term(self, node, scope, expected: str | None) -> Term:
        tag = node[0]
        sig = self.sig
        if tag == "int":
            if node[2] > INT64_MAX:
                raise self.err(f"integer literal {node[2]} exceeds the 64-bit range", node)
            return lg.int_const(node[2])
        if tag == "bool":
            return lg.TRUE_T if node[2] else lg.FALSE_T
        if tag == "str":
            info = sig.sorts.get(expected) if expected else None
            if info is not None and info.kind == "enum":
                if node[2] not in info.values:
                    raise self.err(f"{node[2]!r} is not a value of {expected}", node)
                return Const(node[2], expected)
            return Const(node[2], STRING)
        if tag == "null":
            info = sig.sorts.get(expected) if expected else None
            if info is None or info.kind != "option":
                raise self.err("null needs an Option sort from context", node)
            return App(sig.option_op("null", expected), ())
        if tag == "list":
            info = sig.sorts.get(expected) if expected else None
            if info is None or info.kind != "list":
                if not node[2]:
                    raise self.err("cannot infer the sort of an empty list", node)
                first = self.term(node[2][0], scope)
                expected = sig.list_sort(first.sort)
                info = sig.sorts[expected]
            items = [self.term(x, scope, info.elem) for x in node[2]]
            if all(isinstance(x, Const) for x in items):
                return Const([x.value for x in items], expected)
            t: Term = App(sig.list_op("nil", expected), ())
            for x in items:
                t = App(sig.list_op("append", expected), (t, x))
            return t
        if tag == "name":
            name = node[2]
            if name in scope:
                return scope[name]
            decl = sig.functions.get(name)
            if decl is not None and not decl.args:
                return App(decl, ())
            raise self.err(f"unknown name {name!r}", node)
        if tag == "neg":
            inner = self.term(node[2], scope, INT)
            if isinstance(inner, Const):
                return lg.int_const(-inner.value)
            return App(lg.NEG, (inner,))
        if tag == "arith":
            l = self.term(node[3], scope, INT)
            r = self.term(node[4], scope, INT)
            return App(lg.ADD if node[2] == "+" else lg.SUB, (l, r))
        if tag == "field":
            base = self.deref(self.term(node[2], scope), node)
            info = sig.sorts.get(base.sort)
            if info is None or info.kind != "obj":
                raise self.err(f"{base.sort} has no fields (accessing {node[3]!r})", node)
            try:
                return App(sig.accessor(base.sort, node[3]), (base,))
            except SortError as e:
                raise self.err(str(e), node) from None
        if tag == "index":
            base = self.deref(self.term(node[2], scope), node)
            info = sig.sorts.get(base.sort)
            if info is None or info.kind != "list":
                raise self.err(f"cannot index a value of sort {base.sort}", node)
            idx = self.term(node[3], scope, INT)
            return App(sig.list_op("index", base.sort), (base, idx))
        if tag == "method":
            base = self.term(node[2], scope)
            return self.call(node[3], (node[2],) + tuple(node[4]), scope, node, first=base)
        if tag == "call":
            return self.call(node[2], node[3], scope, node)
        if tag in ("cmp", "and", "or", "not", "imp", "iff", "quant") + tuple(ct_tags()):
            raise self.err("expected a term, got a formula", node)
        raise self.err(f"unexpected expression {tag}", node)  # pragma: no cover

    def deref(self, t: Term, node) -> Term:
        info = self.sig.sorts.get(t.sort)
        if info is not None and info.kind == "option":
            return App(self.sig.option_op("the", t.sort), (t,))
        return t

    def call(self, name: str, raw_args, scope, node, first: Term | None = None) -> Term:
        sig = self.sig
        cands = [f for f in sig.functions.values() if f.display == name or f.name == name]
        if not cands:
            # functional syntax for a field accessor/updator whose symbol is qualified
            raise self.err(f"unknown function {name!r}", node)
        if any(len(c.args) != len(raw_args) for c in cands) and all(
            len(c.args) != len(raw_args) for c in cands
        ):
            raise self.err(f"{name} expects {cands[0].args.__len__()} arguments", node)
        cands = [c for c in cands if len(c.args) == len(raw_args)]
        if first is None and raw_args:
            first = self.term(raw_args[0], scope) if raw_args[0][0] not in _POLY else None
        if first is not None:
            first = self.deref(first, node) if all(c.args[0] != first.sort for c in cands) else first
            cands = [c for c in cands if c.args[0] == first.sort] or cands
        for c in cands:
            try:
                args = []
                for i, (a, s) in enumerate(zip(raw_args, c.args)):
                    if i == 0 and first is not None:
                        args.append(self.coerce(first, s, node))
                    else:
                        args.append(self.term(a, scope, s))
                return App(c, tuple(args))
            except (ParseError, SortError):
                if c is cands[-1]:
                    raise
        raise self.err(f"no matching overload of {name}", node)


def lg_named(name: str):
    from .jsonmodel import NamedT

    return NamedT(name)


def ct_tags():
    return ("U", "R", "W", "A", "E", "X", "WX", "G", "F")


# --------------------------------------------------------------------------
# entry points


def parse_formula(text: str, sig: Signature, scope: dict[str, Var] | None = None) -> lg.Formula:
    """Parse a classical (first-order) formula; ``db`` is in scope."""
    el = Elaborator(sig, text)
    sc = dict(el.base_scope)
    if scope:
        sc.update(scope)
    return el.classical(parse_raw(text), sc)


def parse_term(text: str, sig: Signature, expected: str | None = None) -> Term:
    el = Elaborator(sig, text)
    return el.term(parse_raw(text), dict(el.base_scope), expected)


def parse_path_formula(text: str, sig: Signature) -> ct.PathFormula:
    """Parse a CTL*(FO) formula (queries and constraints)."""
    _, body = _strip_label(text)
    el = Elaborator(sig, body)
    return el.path(parse_raw(body))


def parse_definition(text: str, sig: Signature, register: bool = True) -> lg.Definition:
    """Parse ``forall x:S . p(x) <=> body`` and register ``p`` in ``sig``.

    A definition without parameters is written ``p <=> body``.
    """
    _, body_text = _strip_label(text)
    raw = parse_raw(body_text)
    el = Elaborator(sig, body_text, allow_db=False)
    binders: list[tuple[str, str]] = []
    node = raw
    while node[0] == "quant" and node[2] == "forall":
        binders.extend(node[3])
        node = node[4]
    if node[0] != "iff":
        raise ParseError(f"definition must have the form 'forall x:S . p(x) <=> body': {text!r}")
    head, rhs = node[2], node[3]
    if head[0] == "call":
        name, head_args = head[2], head[3]
    elif head[0] == "name":
        name, head_args = head[2], ()
    else:
        raise ParseError(f"definition head must be a predicate application: {text!r}")
    params: list[Var] = []
    binder_sorts = {n: el.sort_of_name(s, raw) for n, s in binders}
    for a in head_args:
        if a[0] != "name" or a[2] not in binder_sorts:
            raise ParseError(f"definition parameters must be the quantified variables: {text!r}")
        params.append(Var(a[2], binder_sorts[a[2]]))
    if len({p.name for p in params}) != len(params) or len(params) != len(binders):
        raise ParseError(f"each quantified variable must occur once in the head: {text!r}")
    existing = sig.predicates.get(name)
    if existing is not None and existing.op == "def":
        if tuple(p.sort for p in params) != existing.args or register:
            raise lg.DefinitionError(f"two definitions for predicate {name}")
        pred = existing
    elif register:
        pred = sig.add_predicate(name, tuple(p.sort for p in params))
    else:
        raise ParseError(f"predicate {name} is not declared")
    scope = {p.name: p for p in params}
    body = el.classical(rhs, scope)
    extra = {v for v in lg.free_vars(body)} - set(params)
    if extra:
        raise ParseError(f"definition body has free variables {sorted(v.name for v in extra)}")
    return lg.Definition(pred, tuple(params), body)


def parse_definitions(texts: list[str], sig: Signature) -> list[lg.Definition]:
    """Parse a block of definitions, allowing forward references."""
    heads = []
    for text in texts:
        _, body_text = _strip_label(text)
        raw = parse_raw(body_text)
        el = Elaborator(sig, body_text, allow_db=False)
        binders: dict[str, str] = {}
        node = raw
        while node[0] == "quant" and node[2] == "forall":
            binders.update({n: el.sort_of_name(s, raw) for n, s in node[3]})
            node = node[4]
        if node[0] != "iff" or node[2][0] not in ("call", "name"):
            raise ParseError(f"definition must have the form 'forall x:S . p(x) <=> body': {text!r}")
        head = node[2]
        args = head[3] if head[0] == "call" else ()
        sorts = []
        for a in args:
            if a[0] != "name" or a[2] not in binders:
                raise ParseError(f"definition parameters must be the quantified variables: {text!r}")
            sorts.append(binders[a[2]])
        heads.append((head[2], tuple(sorts)))
    for name, sorts in heads:
        sig.add_predicate(name, sorts)
    defs = [parse_definition(t, sig, register=False) for t in texts]
    lg.check_definitions(defs)
    return defs


def split_statements(text: str) -> list[tuple[str, int]]:
    """Split script text on top-level ``;`` (returns pieces with offsets)."""
    pieces = []
    depth = 0
    start = 0
    in_str = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == ";" and depth == 0:
            pieces.append((text[start:i], start))
            start = i + 1
        i += 1
    pieces.append((text[start:], start))
    return [(p, off) for p, off in pieces if p.strip()]


Raw = Any
