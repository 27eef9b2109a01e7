"""Database update scripts.

A script is a ``;``-separated list of statements of two forms::

    db.status.paid = true
    db.status.open.append(db.order[0])

Scripts run directly on JSON values (:func:`exec_script`) and compile to
update terms over the free variable ``db`` (:func:`to_update_term`).  Both
views agree on every database where the script does not fail.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Union

from . import logic as lg
from .ground import IndexOutOfBounds, NullDereference, eval_term
from .jsonmodel import TypeEnv
from .logic import App, Signature, Term, Var
from .syntax import Elaborator, ParseError, RawParser, split_statements


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class FieldStep:
    name: str


@dataclass(frozen=True)
class IndexStep:
    index: Term


Step = Union[FieldStep, IndexStep]


@dataclass(frozen=True)
class Assign:
    path: tuple[Step, ...]
    value: Term

    def __str__(self):
        return f"{render_path(self.path)} = {self.value}"


@dataclass(frozen=True)
class Append:
    path: tuple[Step, ...]
    value: Term

    def __str__(self):
        return f"{render_path(self.path)}.append({self.value})"


Statement = Union[Assign, Append]


@dataclass(frozen=True)
class Script:
    statements: tuple[Statement, ...] = ()
    text: str = ""

    def __bool__(self):
        return bool(self.statements)

    def __str__(self):
        return "; ".join(map(str, self.statements))


EMPTY = Script()


def render_path(path) -> str:
    out = "db"
    for st in path:
        out += f".{st.name}" if isinstance(st, FieldStep) else f"[{st.index}]"
    return out


# --------------------------------------------------------------------------
# parsing


def _signature(env_or_sig) -> Signature:
    if isinstance(env_or_sig, Signature):
        return env_or_sig
    if isinstance(env_or_sig, TypeEnv):
        return lg.derive_signature(env_or_sig)
    raise TypeError("expected a TypeEnv or Signature")


def parse_script(text: str, env_or_sig) -> Script:
    sig = _signature(env_or_sig)
    stmts: list[Statement] = []
    for piece, _ in split_statements(text or ""):
        raw = RawParser(piece).parse_all()
        el = Elaborator(sig, piece)
        scope = dict(el.base_scope)
        if raw[0] == "cmp" and raw[2] == "=":
            path, sort = _path(raw[3], el, scope)
            stmts.append(Assign(path, el.term(raw[4], scope, sort)))
        elif raw[0] == "method" and raw[3] == "append":
            if len(raw[4]) != 1:
                raise ParseError("append takes exactly one argument", raw[1], piece)
            path, sort = _path(raw[2], el, scope)
            info = sig.sorts.get(sort)
            if info is None or info.kind != "list":
                raise ParseError(f"append needs a list, got {sort}", raw[1], piece)
            stmts.append(Append(path, el.term(raw[4][0], scope, info.elem)))
        else:
            raise ParseError(f"expected 'path = expr' or 'path.append(expr)': {piece.strip()!r}")
    return Script(tuple(stmts), text or "")


def _path(raw, el: Elaborator, scope) -> tuple[tuple[Step, ...], str]:
    steps: list[Step] = []
    node = raw
    chain = []
    while node[0] in ("field", "index"):
        chain.append(node)
        node = node[2]
    if node[0] != "name" or node[2] != "db":
        raise el.err("assignment target must be a path starting at db", raw)
    sort = el.sig.db.sort
    for n in reversed(chain):
        sort = _deref_sort(el.sig, sort)
        info = el.sig.sorts[sort]
        if n[0] == "field":
            if info.kind != "obj" or n[3] not in info.field_map:
                raise el.err(f"sort {sort} has no field {n[3]!r}", n)
            steps.append(FieldStep(n[3]))
            sort = info.field_map[n[3]]
        else:
            if info.kind != "list":
                raise el.err(f"cannot index a value of sort {sort}", n)
            steps.append(IndexStep(el.term(n[3], scope, lg.INT)))
            sort = info.elem
    return tuple(steps), sort


def _deref_sort(sig: Signature, sort: str) -> str:
    info = sig.sorts[sort]
    return info.elem if info.kind == "option" else sort


# --------------------------------------------------------------------------
# interpretation


def exec_script(script: Script, db, consts=None):
    """Run ``script`` on a JSON database value; returns a new value."""
    current = db
    for st in script.statements:
        current = _exec_statement(st, current, consts)
    return current


class _Env(dict):
    """Binds any variable named ``db`` regardless of its sort."""

    def __init__(self, value):
        super().__init__()
        self.value = value

    def __missing__(self, key):
        if isinstance(key, Var) and key.name == "db":
            return self.value
        raise KeyError(key)

    def __contains__(self, key):
        return isinstance(key, Var) and key.name == "db"

    def __bool__(self):
        return True


def _exec_statement(st: Statement, db, consts):
    env = _Env(db)
    value = eval_term(st.value, env, consts)
    indices = [eval_term(s.index, env, consts) if isinstance(s, IndexStep) else None for s in st.path]

    def rebuild(node, k):
        if k == len(st.path):
            if isinstance(st, Append):
                if node is None:
                    raise NullDereference("append to an unset option")
                return list(node) + [copy.deepcopy(value)]
            return copy.deepcopy(value)
        if node is None:
            raise NullDereference(f"{render_path(st.path[:k])} is null")
        step = st.path[k]
        if isinstance(step, FieldStep):
            out = dict(node)
            out[step.name] = rebuild(node[step.name], k + 1)
            return out
        i = indices[k]
        if not 0 <= i < len(node):
            raise IndexOutOfBounds(f"index {i} out of bounds for list of length {len(node)}")
        out = list(node)
        out[i] = rebuild(node[i], k + 1)
        return out

    return rebuild(db, 0)


# --------------------------------------------------------------------------
# compilation


def to_update_term(script: Script, sig: Signature) -> Term:
    """The update term of ``script``; the empty script compiles to ``db``."""
    term: Term = sig.db
    for st in script.statements:
        step_term = _compile_statement(st, sig)
        term = lg.subst_term(step_term, {sig.db: term})
    return term


def _compile_statement(st: Statement, sig: Signature) -> Term:
    def wrap(base: Term, k: int) -> Term:
        info = sig.sorts[base.sort]
        if info.kind == "option" and k < len(st.path):
            inner = App(sig.option_op("the", base.sort), (base,))
            return App(sig.option_op("some", base.sort), (wrap(inner, k),))
        if k == len(st.path):
            if isinstance(st, Append):
                if info.kind == "option":
                    base = App(sig.option_op("the", base.sort), (base,))
                    lst = App(sig.list_op("append", base.sort), (base, st.value))
                    return App(sig.option_op("some", info.name), (lst,))
                return App(sig.list_op("append", base.sort), (base, st.value))
            return st.value
        step = st.path[k]
        if isinstance(step, FieldStep):
            acc, upd = sig.field_symbols(base.sort, step.name)
            return App(upd, (base, wrap(App(acc, (base,)), k + 1)))
        elem = App(sig.list_op("index", base.sort), (base, step.index))
        return App(sig.list_op("update", base.sort), (base, step.index, wrap(elem, k + 1)))

    return wrap(sig.db, 0)
