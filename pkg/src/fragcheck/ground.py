"""Ground evaluation of terms and formulas over concrete JSON values.

Quantifiers are evaluated only when their range is finite: the bound
variable ranges over ``Bool`` or an enumeration sort, or the body restricts
it with a membership literal ``x in l`` over a list that evaluates to a
concrete value.  Anything else raises :class:`UnboundedQuantifier`.
"""
from __future__ import annotations

from typing import Mapping

from .jsonmodel import INT64_MAX, INT64_MIN
from .logic import (
    And,
    App,
    Atom,
    Bot,
    Const,
    Definition,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Signature,
    Term,
    Top,
    Var,
    term_vars,
)


class EvaluationError(RuntimeError):
    pass


class NotGround(EvaluationError):
    """The term mentions an uninterpreted constant with no value."""


class UnboundedQuantifier(EvaluationError):
    pass


class IndexOutOfBounds(EvaluationError):
    pass


class NullDereference(EvaluationError):
    pass


class IntegerOverflow(EvaluationError):
    pass


def _check_int(n: int) -> int:
    if not INT64_MIN <= n <= INT64_MAX:
        raise IntegerOverflow(f"integer overflow: {n}")
    return n


def eval_term(t: Term, env: Mapping[Var, object] | None = None, consts: Mapping[str, object] | None = None):
    env = env or {}
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        try:
            return env[t]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name}") from None
    if not isinstance(t, App):  # pragma: no cover
        raise TypeError(t)
    op = t.decl.op
    if op == "const":
        if consts and t.decl.name in consts:
            return consts[t.decl.name]
        raise NotGround(f"no value for constant {t.decl.name}")
    if op == "base":
        raise NotGround(f"base object {t.decl.name} has no concrete value")
    if op == "nil":
        return []
    if op == "null":
        return None
    args = [eval_term(a, env, consts) for a in t.args]
    if op == "acc":
        obj = args[0]
        if obj is None:
            raise NullDereference(f"field {t.decl.field} of null")
        return obj[t.decl.field]
    if op == "upd":
        if args[0] is None:
            raise NullDereference(f"update of field {t.decl.field} of null")
        obj = dict(args[0])
        obj[t.decl.field] = args[1]
        return obj
    if op == "index":
        lst, i = args
        if not 0 <= i < len(lst):
            raise IndexOutOfBounds(f"index {i} out of bounds for list of length {len(lst)}")
        return lst[i]
    if op == "update":
        lst, i, v = args
        if not 0 <= i < len(lst):
            # total extension: writing outside the list leaves it unchanged
            # (scripts check bounds themselves and fail instead)
            return lst
        lst = list(lst)
        lst[i] = v
        return lst
    if op == "append":
        return list(args[0]) + [args[1]]
    if op == "length":
        return len(args[0])
    if op == "isEmpty":
        return len(args[0]) == 0
    if op == "some":
        return args[0]
    if op == "the":
        if args[0] is None:
            raise NullDereference("value of an unset option")
        return args[0]
    if op == "add":
        return _check_int(args[0] + args[1])
    if op == "sub":
        return _check_int(args[0] - args[1])
    if op == "neg":
        return _check_int(-args[0])
    raise EvaluationError(f"cannot evaluate {t.decl.display}")  # pragma: no cover


def _conjuncts(f: Formula):
    if isinstance(f, And):
        for a in f.args:
            yield from _conjuncts(a)
    else:
        yield f


def _candidates(body: Formula, universal: bool) -> list[Formula]:
    if universal:
        if isinstance(body, Implies):
            return list(_conjuncts(body.lhs))
        if isinstance(body, Or):
            return [a.arg for a in body.args if isinstance(a, Not)]
        return []
    return list(_conjuncts(body))


def _range_list(var: Var, body: Formula, universal: bool) -> Term | None:
    """The list term restricting ``var`` in a quantifier body, if any."""
    for c in _candidates(body, universal):
        if (
            isinstance(c, Atom)
            and c.pred.op == "mem"
            and c.args[0] == var
            and var not in set(term_vars(c.args[1]))
        ):
            return c.args[1]
    return None


def _int_bounds(var: Var, body: Formula, universal: bool) -> tuple[Term, Term] | None:
    """Terms ``lo``, ``hi`` with ``lo <= var < hi`` required by the body."""
    lo = hi = None
    for c in _candidates(body, universal):
        if not isinstance(c, Atom) or c.pred.op not in ("le", "lt", "ge", "gt"):
            continue
        a, b = c.args
        op = c.pred.op
        if op in ("ge", "gt"):  # flip to le/lt
            a, b = b, a
            op = "le" if op == "ge" else "lt"
        if b == var and var not in set(term_vars(a)):
            lo = ("incl" if op == "le" else "excl", a)
        elif a == var and var not in set(term_vars(b)):
            hi = ("excl" if op == "lt" else "incl", b)
    if lo is None or hi is None:
        return None
    return lo, hi


class Evaluator:
    """Evaluates closed formulas, unfolding defined predicates on demand."""

    def __init__(self, sig: Signature | None = None, definitions=(), consts: Mapping[str, object] | None = None):
        self.sig = sig
        if isinstance(definitions, dict):
            self.defs: dict[str, Definition] = definitions
        else:
            self.defs = {d.pred.name: d for d in definitions}
        self.consts = consts

    def term(self, t: Term, env: Mapping[Var, object] | None = None):
        return eval_term(t, env, self.consts)

    def holds(self, f: Formula, env: Mapping[Var, object] | None = None) -> bool:
        return self._eval(f, dict(env or {}))

    def _eval(self, f: Formula, env: dict) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Eq):
            return self.term(f.lhs, env) == self.term(f.rhs, env)
        if isinstance(f, Atom):
            op = f.pred.op
            if op == "def":
                d = self.defs.get(f.pred.name)
                if d is None:
                    raise EvaluationError(f"no definition for predicate {f.pred.name}")
                vals = [self.term(a, env) for a in f.args]
                return self._eval(d.body, dict(zip(d.params, vals)))
            a = [self.term(x, env) for x in f.args]
            if op == "gt":
                return a[0] > a[1]
            if op == "ge":
                return a[0] >= a[1]
            if op == "lt":
                return a[0] < a[1]
            if op == "le":
                return a[0] <= a[1]
            if op == "mem":
                return a[0] in a[1]
            raise EvaluationError(f"cannot evaluate predicate {f.pred.display}")  # pragma: no cover
        if isinstance(f, Not):
            return not self._eval(f.arg, env)
        if isinstance(f, And):
            return all(self._eval(a, env) for a in f.args)
        if isinstance(f, Or):
            return any(self._eval(a, env) for a in f.args)
        if isinstance(f, Implies):
            return (not self._eval(f.lhs, env)) or self._eval(f.rhs, env)
        if isinstance(f, Iff):
            return self._eval(f.lhs, env) == self._eval(f.rhs, env)
        if isinstance(f, (Forall, Exists)):
            universal = isinstance(f, Forall)
            domain = self._domain(f.var, f.body, universal, env)
            for value in domain:
                inner = dict(env)
                inner[f.var] = value
                if self._eval(f.body, inner) != universal:
                    return not universal
            return universal
        raise TypeError(f)  # pragma: no cover

    def _domain(self, var: Var, body: Formula, universal: bool, env: dict):
        if var.sort == "Bool":
            return [False, True]
        if self.sig is not None:
            info = self.sig.sorts.get(var.sort)
            if info is not None and info.kind == "enum":
                return list(info.values)
        lst = _range_list(var, body, universal)
        if lst is None and var.sort == "Int":
            bounds = _int_bounds(var, body, universal)
            if bounds is not None:
                (lk, lo), (hk, hi) = bounds
                start = self.term(lo, env) + (1 if lk == "excl" else 0)
                stop = self.term(hi, env) + (1 if hk == "incl" else 0)
                return range(start, stop)
        if lst is None:
            raise UnboundedQuantifier(
                f"quantifier over {var.name}:{var.sort} is not range-restricted; "
                "not concretely evaluable"
            )
        return self.term(lst, env)


def eval_formula(f: Formula, env=None, definitions=(), sig: Signature | None = None, consts=None) -> bool:
    return Evaluator(sig, definitions, consts).holds(f, env)
