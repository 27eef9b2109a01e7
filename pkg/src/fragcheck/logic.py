"""Sorted first-order terms and formulas, and the signature derived from a
JSON type environment.

Sorts are plain strings: ``Int``, ``Bool``, ``String``, the names of object
and enumeration types, and ``List[s]`` / ``Option[s]`` for container sorts.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .jsonmodel import (
    BoolT,
    EnumT,
    IntegerT,
    JsonType,
    ListT,
    NamedT,
    ObjT,
    OptionT,
    StringT,
    TypeEnv,
    canonical,
)

INT = "Int"
BOOL = "Bool"
STRING = "String"


class SortError(TypeError):
    pass


class DefinitionError(ValueError):
    pass


# --------------------------------------------------------------------------
# sorts and symbols


@dataclass(frozen=True)
class SortInfo:
    name: str
    kind: str  # int | bool | string | enum | obj | list | option
    elem: str | None = None
    fields: tuple[tuple[str, str], ...] = ()
    values: tuple[str, ...] = ()

    @property
    def field_map(self) -> dict[str, str]:
        return dict(self.fields)

    @property
    def finite(self) -> bool:
        return self.kind in ("bool", "enum")


@dataclass(frozen=True)
class FuncDecl:
    name: str
    args: tuple[str, ...]
    result: str
    op: str
    display: str = ""
    field: str | None = None
    owner: str | None = None

    def __post_init__(self):
        if not self.display:
            object.__setattr__(self, "display", self.name)


@dataclass(frozen=True)
class PredDecl:
    name: str
    args: tuple[str, ...]
    op: str  # mem | gt | ge | lt | le | def
    display: str = ""

    def __post_init__(self):
        if not self.display:
            object.__setattr__(self, "display", self.name)


ARITH_PREDS = {
    ">": PredDecl("gt", (INT, INT), "gt", ">"),
    ">=": PredDecl("ge", (INT, INT), "ge", ">="),
    "<": PredDecl("lt", (INT, INT), "lt", "<"),
    "<=": PredDecl("le", (INT, INT), "le", "<="),
}
ADD = FuncDecl("add", (INT, INT), INT, "add", "+")
SUB = FuncDecl("sub", (INT, INT), INT, "sub", "-")
NEG = FuncDecl("neg", (INT,), INT, "neg", "-")


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()
    sort: str


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    decl: FuncDecl
    args: tuple[Term, ...] = ()

    @property
    def sort(self) -> str:
        return self.decl.result

    def __str__(self):
        op = self.decl.op
        if op in ("add", "sub"):
            return f"({self.args[0]} {self.decl.display} {self.args[1]})"
        if op == "neg":
            return f"-({self.args[0]})"
        if not self.args:
            return self.decl.display
        return f"{self.decl.display}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Const(Term):
    """A ground JSON value of a given sort (integers, booleans, strings,
    null, and whole lists/objects for databases held as values)."""

    value: object = field(compare=False, hash=False)
    sort: str = ""
    key: str = field(default="", repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", canonical(self.value))

    def __str__(self):
        return self.key


def int_const(n: int) -> Const:
    return Const(n, INT)


TRUE_T = Const(True, BOOL)
FALSE_T = Const(False, BOOL)


# --------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bot(Formula):
    def __str__(self):
        return "false"


TOP = Top()
BOT = Bot()


@dataclass(frozen=True)
class Atom(Formula):
    pred: PredDecl
    args: tuple[Term, ...]

    def __str__(self):
        if self.pred.op in ("gt", "ge", "lt", "le"):
            return f"{self.args[0]} {self.pred.display} {self.args[1]}"
        if self.pred.op == "mem":
            return f"{self.args[0]} in {self.args[1]}"
        if not self.args:
            return self.pred.display
        return f"{self.pred.display}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self):
        if isinstance(self.arg, Eq):
            return f"{self.arg.lhs} <> {self.arg.rhs}"
        return f"~({self.arg})"


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __str__(self):
        return "(" + " && ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __str__(self):
        return "(" + " || ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def __str__(self):
        return f"({self.lhs} => {self.rhs})"


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula

    def __str__(self):
        return f"({self.lhs} <=> {self.rhs})"


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula

    def __str__(self):
        return f"(forall {self.var.name}:{self.var.sort} . {self.body})"


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula

    def __str__(self):
        return f"(exists {self.var.name}:{self.var.sort} . {self.body})"


def conj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif not isinstance(p, Top):
            flat.append(p)
    if not flat:
        return TOP
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.args)
        elif not isinstance(p, Bot):
            flat.append(p)
    if not flat:
        return BOT
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def negate(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    return Not(f)


@dataclass(frozen=True)
class Definition:
    pred: PredDecl
    params: tuple[Var, ...]
    body: Formula

    def as_formula(self) -> Formula:
        head = Atom(self.pred, self.params)
        f: Formula = Iff(head, self.body)
        for v in reversed(self.params):
            f = Forall(v, f)
        return f

    def __str__(self):
        return str(self.as_formula())


# --------------------------------------------------------------------------
# traversal


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, App):
        for a in t.args:
            yield from term_vars(a)


def free_vars(f: Formula | Term) -> set[Var]:
    if isinstance(f, Term):
        return set(term_vars(f))
    if isinstance(f, (Atom,)):
        return {v for a in f.args for v in term_vars(a)}
    if isinstance(f, Eq):
        return set(term_vars(f.lhs)) | set(term_vars(f.rhs))
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: set[Var] = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    return set()


def term_apps(t: Term) -> Iterator[App]:
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from term_apps(a)


def terms_of(f: Formula) -> Iterator[Term]:
    """All maximal terms occurring in ``f``."""
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, Eq):
        yield f.lhs
        yield f.rhs
    elif isinstance(f, Not):
        yield from terms_of(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from terms_of(a)
    elif isinstance(f, (Implies, Iff)):
        yield from terms_of(f.lhs)
        yield from terms_of(f.rhs)
    elif isinstance(f, (Forall, Exists)):
        yield from terms_of(f.body)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from atoms_of(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from atoms_of(a)
    elif isinstance(f, (Implies, Iff)):
        yield from atoms_of(f.lhs)
        yield from atoms_of(f.rhs)
    elif isinstance(f, (Forall, Exists)):
        yield from atoms_of(f.body)


# --------------------------------------------------------------------------
# substitution

_fresh_counter = itertools.count()


def subst_term(t: Term, binding: dict[Var, Term]) -> Term:
    if isinstance(t, Var):
        return binding.get(t, t)
    if isinstance(t, App) and t.args:
        new_args = tuple(subst_term(a, binding) for a in t.args)
        if new_args != t.args:
            return App(t.decl, new_args)
    return t


def substitute(f: Formula, binding: dict[Var, Term] | Var, term: Term | None = None) -> Formula:
    """Capture-avoiding substitution of free variables.

    Either ``substitute(f, {var: term, ...})`` or ``substitute(f, var, term)``.
    """
    if isinstance(binding, Var):
        binding = {binding: term}
    binding = {v: t for v, t in binding.items() if v != t}
    if not binding:
        return f
    return _subst(f, binding)


def _subst(f: Formula, binding: dict[Var, Term]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(subst_term(a, binding) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_term(f.lhs, binding), subst_term(f.rhs, binding))
    if isinstance(f, Not):
        return Not(_subst(f.arg, binding))
    if isinstance(f, And):
        return And(tuple(_subst(a, binding) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_subst(a, binding) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_subst(f.lhs, binding), _subst(f.rhs, binding))
    if isinstance(f, Iff):
        return Iff(_subst(f.lhs, binding), _subst(f.rhs, binding))
    if isinstance(f, (Forall, Exists)):
        inner = {v: t for v, t in binding.items() if v != f.var}
        if not inner:
            return f
        var = f.var
        body = f.body
        captured = any(var in set(term_vars(t)) for t in inner.values())
        if captured:
            used = {v.name for t in inner.values() for v in term_vars(t)} | {v.name for v in free_vars(body)}
            new_name = var.name
            while new_name in used:
                new_name = f"{var.name}_{next(_fresh_counter)}"
            new_var = Var(new_name, var.sort)
            body = _subst(body, {var: new_var})
            var = new_var
        return type(f)(var, _subst(body, inner))
    return f


# --------------------------------------------------------------------------
# definitions


def check_definitions(defs: Iterable[Definition]) -> dict[str, Definition]:
    """Index definitions by predicate name; reject duplicates and recursion."""
    table: dict[str, Definition] = {}
    for d in defs:
        if d.pred.name in table:
            raise DefinitionError(f"two definitions for predicate {d.pred.name}")
        table[d.pred.name] = d
    deps = {
        name: {a.pred.name for a in atoms_of(d.body) if a.pred.op == "def"}
        for name, d in table.items()
    }
    state: dict[str, int] = {}

    def visit(name, trail):
        if state.get(name) == 2 or name not in table:
            return
        if state.get(name) == 1:
            raise DefinitionError("recursive definition: " + " -> ".join(trail + [name]))
        state[name] = 1
        for dep in sorted(deps[name]):
            visit(dep, trail + [name])
        state[name] = 2

    for name in table:
        visit(name, [])
    return table


def expand_definitions(f: Formula, defs: dict[str, Definition] | Iterable[Definition]) -> Formula:
    """Replace every defined-predicate atom by its instantiated body."""
    table = defs if isinstance(defs, dict) else check_definitions(defs)
    if not table:
        return f
    return _expand(f, table)


def _expand(f: Formula, table: dict[str, Definition]) -> Formula:
    if isinstance(f, Atom):
        d = table.get(f.pred.name) if f.pred.op == "def" else None
        if d is None:
            return f
        if len(f.args) != len(d.params):
            raise DefinitionError(
                f"{f.pred.name} expects {len(d.params)} arguments, got {len(f.args)}"
            )
        return _expand(substitute(d.body, dict(zip(d.params, f.args))), table)
    if isinstance(f, Not):
        return Not(_expand(f.arg, table))
    if isinstance(f, And):
        return And(tuple(_expand(a, table) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_expand(a, table) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_expand(f.lhs, table), _expand(f.rhs, table))
    if isinstance(f, Iff):
        return Iff(_expand(f.lhs, table), _expand(f.rhs, table))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _expand(f.body, table))
    return f


# --------------------------------------------------------------------------
# signature


def _slug(sort: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", sort).strip("_").lower()


class Signature:
    """Sorts and symbols for a type environment.

    Build with :func:`derive_signature`.  Defined predicates are added when
    a specification's definitions are loaded.
    """

    def __init__(self, env: TypeEnv):
        self.env = env
        self.sorts: dict[str, SortInfo] = {}
        self.functions: dict[str, FuncDecl] = {}
        self.predicates: dict[str, PredDecl] = {}
        self._named_sort: dict[str, str] = {}
        self._field_syms: dict[tuple[str, str], tuple[FuncDecl, FuncDecl]] = {}
        self.db = Var("db", env.root)

    # -- sorts
    def sort_of_type(self, ty: JsonType, hint: str = "Anon") -> str:
        if isinstance(ty, NamedT):
            return self._named_sort[ty.name]
        if isinstance(ty, IntegerT):
            return INT
        if isinstance(ty, BoolT):
            return BOOL
        if isinstance(ty, StringT):
            return STRING
        if isinstance(ty, EnumT):
            # unnamed enumerations are compared as strings
            return STRING
        if isinstance(ty, ListT):
            elem = self.sort_of_type(ty.elem, hint + "_elem")
            name = f"List[{elem}]"
            if name not in self.sorts:
                self.sorts[name] = SortInfo(name, "list", elem=elem)
            return name
        if isinstance(ty, OptionT):
            inner = self.sort_of_type(ty.inner, hint)
            name = f"Option[{inner}]"
            if name not in self.sorts:
                self.sorts[name] = SortInfo(name, "option", elem=inner)
            return name
        if isinstance(ty, ObjT):
            name = hint
            while name in self.sorts or name in self.env.named_types:
                name += "_"
            self._add_object(name, ty)
            return name
        raise TypeError(ty)

    def _add_object(self, name: str, ty: ObjT):
        self.sorts[name] = SortInfo(name, "obj")  # placeholder while fields resolve
        fields = tuple((f, self.sort_of_type(t, f"{name}_{f}")) for f, t in ty.fields)
        self.sorts[name] = SortInfo(name, "obj", fields=fields)

    def info(self, sort: str) -> SortInfo:
        try:
            return self.sorts[sort]
        except KeyError:
            raise SortError(f"unknown sort {sort}") from None

    def list_sort(self, elem: str) -> str:
        name = f"List[{elem}]"
        if name not in self.sorts:
            self.sorts[name] = SortInfo(name, "list", elem=elem)
            self._add_list_ops(name)
        return name

    # -- symbols
    def field_symbols(self, sort: str, fld: str) -> tuple[FuncDecl, FuncDecl]:
        try:
            return self._field_syms[(sort, fld)]
        except KeyError:
            raise SortError(f"sort {sort} has no field {fld!r}") from None

    def accessor(self, sort: str, fld: str) -> FuncDecl:
        return self.field_symbols(sort, fld)[0]

    def updator(self, sort: str, fld: str) -> FuncDecl:
        return self.field_symbols(sort, fld)[1]

    def list_op(self, op: str, list_sort: str) -> FuncDecl:
        return self.functions[f"{op}_{_slug(list_sort)}"]

    def option_op(self, op: str, opt_sort: str) -> FuncDecl:
        return self.functions[f"{op}_{_slug(opt_sort)}"]

    def mem(self, list_sort: str) -> PredDecl:
        return self.predicates[f"mem_{_slug(list_sort)}"]

    def base_const(self, sort: str) -> FuncDecl:
        """Arbitrary base object of an object sort (for database-as-a-term)."""
        return self.functions[f"base_{_slug(sort)}"]

    def constant(self, name: str, sort: str) -> FuncDecl:
        decl = self.functions.get(name)
        if decl is None:
            decl = FuncDecl(name, (), sort, "const")
            self.functions[name] = decl
        elif decl.result != sort or decl.args:
            raise SortError(f"symbol {name} already declared differently")
        return decl

    def add_predicate(self, name: str, args: tuple[str, ...]) -> PredDecl:
        if name in self.predicates or name in self.functions:
            raise DefinitionError(f"symbol {name} already declared")
        decl = PredDecl(name, args, "def")
        self.predicates[name] = decl
        return decl

    def functions_named(self, display: str) -> list[FuncDecl]:
        return [f for f in self.functions.values() if f.display == display]

    def _add_list_ops(self, ls: str):
        elem = self.sorts[ls].elem
        s = _slug(ls)
        for decl in (
            FuncDecl(f"index_{s}", (ls, INT), elem, "index", "index", owner=ls),
            FuncDecl(f"update_{s}", (ls, INT, elem), ls, "update", "update", owner=ls),
            FuncDecl(f"append_{s}", (ls, elem), ls, "append", "append", owner=ls),
            FuncDecl(f"length_{s}", (ls,), INT, "length", "length", owner=ls),
            FuncDecl(f"isEmpty_{s}", (ls,), BOOL, "isEmpty", "isEmpty", owner=ls),
            FuncDecl(f"nil_{s}", (), ls, "nil", f"nil_{s}", owner=ls),
        ):
            self.functions[decl.name] = decl
        self.predicates[f"mem_{s}"] = PredDecl(f"mem_{s}", (elem, ls), "mem", "in")

    def _add_option_ops(self, os_: str):
        inner = self.sorts[os_].elem
        s = _slug(os_)
        for decl in (
            FuncDecl(f"some_{s}", (inner,), os_, "some", "some", owner=os_),
            FuncDecl(f"the_{s}", (os_,), inner, "the", "the", owner=os_),
            FuncDecl(f"null_{s}", (), os_, "null", "null", owner=os_),
        ):
            self.functions[decl.name] = decl

    def object_sorts(self) -> list[str]:
        return [n for n, i in self.sorts.items() if i.kind == "obj"]

    def __repr__(self):
        return f"Signature(sorts={list(self.sorts)}, functions={len(self.functions)})"


def derive_signature(env: TypeEnv) -> Signature:
    """Sorts, accessors, updators and list/option operations for ``env``."""
    sig = Signature(env)
    for s, kind in ((INT, "int"), (BOOL, "bool"), (STRING, "string")):
        sig.sorts[s] = SortInfo(s, kind)
    # named object and enum types become sorts of their own name; other
    # named types are aliases of their structural sort
    for name, ty in env.named_types.items():
        if isinstance(ty, (ObjT, EnumT)):
            sig._named_sort[name] = name
    for name, ty in env.named_types.items():
        if isinstance(ty, EnumT):
            sig.sorts[name] = SortInfo(name, "enum", values=ty.values)
    pending = [n for n in env.named_types if not isinstance(env.named_types[n], (ObjT, EnumT))]
    for name, ty in env.named_types.items():
        if isinstance(ty, ObjT):
            sig.sorts[name] = SortInfo(name, "obj")
    # aliases may refer to each other; resolve in dependency order
    while pending:
        progress = False
        for name in list(pending):
            try:
                sig._named_sort[name] = sig.sort_of_type(env.named_types[name], name)
            except KeyError:
                continue
            pending.remove(name)
            progress = True
        if not progress:  # pragma: no cover - TypeEnv rejects cycles
            raise SortError(f"cannot resolve type aliases {pending}")
    for name, ty in env.named_types.items():
        if isinstance(ty, ObjT):
            sig._add_object(name, ty)

    owners: dict[str, list[str]] = {}
    for sname, info in sig.sorts.items():
        if info.kind == "obj":
            for fname, _ in info.fields:
                owners.setdefault(fname, []).append(sname)
    for sname, info in list(sig.sorts.items()):
        if info.kind == "obj":
            for fname, fsort in info.fields:
                sym = fname if len(owners[fname]) == 1 else f"{sname}_{fname}"
                acc = FuncDecl(sym, (sname,), fsort, "acc", field=fname, owner=sname)
                upd = FuncDecl(f"upd_{sym}", (sname, fsort), sname, "upd", field=fname, owner=sname)
                sig.functions[acc.name] = acc
                sig.functions[upd.name] = upd
                sig._field_syms[(sname, fname)] = (acc, upd)
            base = FuncDecl(f"base_{_slug(sname)}", (), sname, "base", owner=sname)
            sig.functions[base.name] = base
    for sname, info in list(sig.sorts.items()):
        if info.kind == "list":
            sig._add_list_ops(sname)
        elif info.kind == "option":
            sig._add_option_ops(sname)
    for p in ARITH_PREDS.values():
        sig.predicates[p.name] = p
    for f in (ADD, SUB, NEG):
        sig.functions[f.name] = f
    return sig


# --------------------------------------------------------------------------
# well-sortedness


def check_term(t: Term) -> str:
    if isinstance(t, App):
        if len(t.args) != len(t.decl.args):
            raise SortError(f"{t.decl.display} expects {len(t.decl.args)} arguments")
        for a, s in zip(t.args, t.decl.args):
            got = check_term(a)
            if got != s:
                raise SortError(f"argument of {t.decl.display} has sort {got}, expected {s}")
    return t.sort


def check_formula(f: Formula) -> None:
    if isinstance(f, Atom):
        if len(f.args) != len(f.pred.args):
            raise SortError(f"{f.pred.display} expects {len(f.pred.args)} arguments")
        for a, s in zip(f.args, f.pred.args):
            if check_term(a) != s:
                raise SortError(f"argument of {f.pred.display} has sort {a.sort}, expected {s}")
    elif isinstance(f, Eq):
        if check_term(f.lhs) != check_term(f.rhs):
            raise SortError(f"cannot compare {f.lhs.sort} with {f.rhs.sort}")
    elif isinstance(f, Not):
        check_formula(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            check_formula(a)
    elif isinstance(f, (Implies, Iff)):
        check_formula(f.lhs)
        check_formula(f.rhs)
    elif isinstance(f, (Forall, Exists)):
        check_formula(f.body)
