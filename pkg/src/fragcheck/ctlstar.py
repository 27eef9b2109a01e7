"""CTL*(FO) state and path formulas over classical first-order leaves.

After :func:`nnf`, negation only occurs inside classical leaves, the only
temporal operators left are ``U``, ``R``, ``X`` and ``WX`` (weak next), and
every maximal classical subformula is a single :class:`Leaf`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import logic
from .logic import BOT, TOP, Formula


class PathFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Leaf(PathFormula):
    """A classical formula, evaluated at the first state of a path."""

    formula: Formula

    def __str__(self):
        return str(self.formula)


@dataclass(frozen=True)
class Neg(PathFormula):
    arg: PathFormula

    def __str__(self):
        return f"~({self.arg})"


@dataclass(frozen=True)
class Conj(PathFormula):
    args: tuple[PathFormula, ...]

    def __str__(self):
        return "(" + " && ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Disj(PathFormula):
    args: tuple[PathFormula, ...]

    def __str__(self):
        return "(" + " || ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Imp(PathFormula):
    lhs: PathFormula
    rhs: PathFormula

    def __str__(self):
        return f"({self.lhs} => {self.rhs})"


@dataclass(frozen=True)
class _Unary(PathFormula):
    arg: PathFormula
    keyword = ""

    def __str__(self):
        return f"{self.keyword} ({self.arg})"


@dataclass(frozen=True)
class _Binary(PathFormula):
    lhs: PathFormula
    rhs: PathFormula
    keyword = ""

    def __str__(self):
        return f"({self.lhs} {self.keyword} {self.rhs})"


class A(_Unary):
    keyword = "A"


class E(_Unary):
    keyword = "E"


class X(_Unary):
    keyword = "X"


class WX(_Unary):
    """Weak next: true at the last state of a path."""

    keyword = "WX"


class G(_Unary):
    keyword = "G"


class F(_Unary):
    keyword = "F"


class U(_Binary):
    keyword = "U"


class R(_Binary):
    keyword = "R"


class W(_Binary):
    keyword = "W"


TRUE = Leaf(TOP)
FALSE = Leaf(BOT)

TEMPORAL = (A, E, X, WX, G, F, U, R, W)


def is_classical(f: PathFormula) -> bool:
    if isinstance(f, Leaf):
        return True
    if isinstance(f, Neg):
        return is_classical(f.arg)
    if isinstance(f, (Conj, Disj)):
        return all(is_classical(a) for a in f.args)
    if isinstance(f, Imp):
        return is_classical(f.lhs) and is_classical(f.rhs)
    return False


def is_modal_atom(f: PathFormula) -> bool:
    return isinstance(f, TEMPORAL)


def to_fo(f: PathFormula) -> Formula:
    """The first-order formula of a classical path formula."""
    if isinstance(f, Leaf):
        return f.formula
    if isinstance(f, Neg):
        return logic.negate(to_fo(f.arg))
    if isinstance(f, Conj):
        return logic.conj(to_fo(a) for a in f.args)
    if isinstance(f, Disj):
        return logic.disj(to_fo(a) for a in f.args)
    if isinstance(f, Imp):
        return logic.Implies(to_fo(f.lhs), to_fo(f.rhs))
    raise ValueError(f"not a classical formula: {f}")


def conj(parts: Iterable[PathFormula]) -> PathFormula:
    """Conjunction that keeps classical parts merged in one leaf."""
    classical: list[Formula] = []
    modal: list[PathFormula] = []
    for p in parts:
        items = p.args if isinstance(p, Conj) else (p,)
        for q in items:
            if isinstance(q, Leaf):
                classical.append(q.formula)
            else:
                modal.append(q)
    out: list[PathFormula] = []
    if classical:
        fo = logic.conj(classical)
        if isinstance(fo, logic.Bot):
            return FALSE
        if not isinstance(fo, logic.Top) or not modal:
            out.append(Leaf(fo))
    out.extend(modal)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else Conj(tuple(out))


def disj(parts: Iterable[PathFormula]) -> PathFormula:
    classical: list[Formula] = []
    modal: list[PathFormula] = []
    for p in parts:
        items = p.args if isinstance(p, Disj) else (p,)
        for q in items:
            if isinstance(q, Leaf):
                classical.append(q.formula)
            else:
                modal.append(q)
    out: list[PathFormula] = []
    if classical:
        fo = logic.disj(classical)
        if isinstance(fo, logic.Top):
            return TRUE
        if not isinstance(fo, logic.Bot) or not modal:
            out.append(Leaf(fo))
    out.extend(modal)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Disj(tuple(out))


def collapse(f: PathFormula) -> PathFormula:
    """Merge every classical subtree into one leaf (no other rewriting)."""
    if is_classical(f) and not isinstance(f, Leaf):
        return Leaf(to_fo(f))
    if isinstance(f, Neg):
        return Neg(collapse(f.arg))
    if isinstance(f, Conj):
        return conj(collapse(a) for a in f.args)
    if isinstance(f, Disj):
        return disj(collapse(a) for a in f.args)
    if isinstance(f, Imp):
        return Imp(collapse(f.lhs), collapse(f.rhs))
    if isinstance(f, _Unary):
        return type(f)(collapse(f.arg))
    if isinstance(f, _Binary):
        return type(f)(collapse(f.lhs), collapse(f.rhs))
    return f


def desugar(f: PathFormula) -> PathFormula:
    """Rewrite G, F, W and implication into the core operators."""
    if isinstance(f, Leaf):
        return f
    if isinstance(f, Neg):
        return Neg(desugar(f.arg))
    if isinstance(f, Conj):
        return Conj(tuple(desugar(a) for a in f.args))
    if isinstance(f, Disj):
        return Disj(tuple(desugar(a) for a in f.args))
    if isinstance(f, Imp):
        return Disj((Neg(desugar(f.lhs)), desugar(f.rhs)))
    if isinstance(f, F):
        return U(TRUE, desugar(f.arg))
    if isinstance(f, G):
        return R(FALSE, desugar(f.arg))
    if isinstance(f, W):
        lhs, rhs = desugar(f.lhs), desugar(f.rhs)
        return R(rhs, Disj((lhs, rhs)))
    if isinstance(f, _Unary):
        return type(f)(desugar(f.arg))
    if isinstance(f, _Binary):
        return type(f)(desugar(f.lhs), desugar(f.rhs))
    raise TypeError(f)  # pragma: no cover


def nnf(f: PathFormula) -> PathFormula:
    return _nnf(desugar(collapse(f)), False)


_DUAL_UNARY = {A: E, E: A, X: WX, WX: X}
_DUAL_BINARY = {U: R, R: U}


def _nnf(f: PathFormula, neg: bool) -> PathFormula:
    if isinstance(f, Leaf):
        return Leaf(logic.negate(f.formula)) if neg else f
    if isinstance(f, Neg):
        return _nnf(f.arg, not neg)
    if isinstance(f, Conj):
        parts = [_nnf(a, neg) for a in f.args]
        return disj(parts) if neg else conj(parts)
    if isinstance(f, Disj):
        parts = [_nnf(a, neg) for a in f.args]
        return conj(parts) if neg else disj(parts)
    if isinstance(f, (A, E, X, WX)):
        cls = _DUAL_UNARY[type(f)] if neg else type(f)
        return cls(_nnf(f.arg, neg))
    if isinstance(f, (U, R)):
        cls = _DUAL_BINARY[type(f)] if neg else type(f)
        return cls(_nnf(f.lhs, neg), _nnf(f.rhs, neg))
    raise TypeError(f"unexpected operator in nnf: {f!r}")  # pragma: no cover


def is_nnf(f: PathFormula) -> bool:
    if isinstance(f, Leaf):
        return True
    if isinstance(f, (Conj, Disj)):
        return all(is_nnf(a) for a in f.args)
    if isinstance(f, (A, E, X, WX)):
        return is_nnf(f.arg)
    if isinstance(f, (U, R)):
        return is_nnf(f.lhs) and is_nnf(f.rhs)
    return False


def starts_with_quantifier(f: PathFormula) -> bool:
    return isinstance(f, (A, E))


def expand_query(query: PathFormula, constraints: Sequence[PathFormula]) -> PathFormula:
    """Fold constraints into a query: ``A(C => psi)`` or ``E(C && psi)``."""
    q = nnf(query)
    if not isinstance(q, (A, E)):
        raise ValueError(f"query must start with a path quantifier: {query}")
    if not constraints:
        return q
    c = Conj(tuple(constraints)) if len(constraints) > 1 else constraints[0]
    if isinstance(q, A):
        return nnf(A(Imp(c, q.arg)))
    return nnf(E(Conj((c, q.arg))))


def subformulas(f: PathFormula) -> Iterator[PathFormula]:
    yield f
    if isinstance(f, (Conj, Disj)):
        for a in f.args:
            yield from subformulas(a)
    elif isinstance(f, (Neg, _Unary)):
        yield from subformulas(f.arg)
    elif isinstance(f, (Imp, _Binary)):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)


def leaves(f: PathFormula) -> Iterator[Formula]:
    for g in subformulas(f):
        if isinstance(g, Leaf):
            yield g.formula


def temporal_depth(f: PathFormula) -> int:
    if isinstance(f, Leaf):
        return 0
    if isinstance(f, (Conj, Disj)):
        return max(temporal_depth(a) for a in f.args)
    if isinstance(f, Neg):
        return temporal_depth(f.arg)
    if isinstance(f, _Unary):
        return 1 + temporal_depth(f.arg)
    if isinstance(f, (_Binary, Imp)):
        extra = 0 if isinstance(f, Imp) else 1
        return extra + max(temporal_depth(f.lhs), temporal_depth(f.rhs))
    return 0
