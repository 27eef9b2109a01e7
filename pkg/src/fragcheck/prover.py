"""Satisfiability oracles for classical obligations.

Backends:

* ``ground``: evaluate closed formulas on concrete values (decisive when
  every term is ground and every quantifier bounded),
* ``external``: write a TPTP TFF problem and run a prover on it, reading
  the ``SZS status`` line,
* ``emit-only``: write the problem file and report unknown,
* ``auto``: ground first, external when the formulas are not ground.
"""
from __future__ import annotations

import itertools
import os
import re
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import logic as lg
from .jsonmodel import INT64_MAX, INT64_MIN
from .ground import EvaluationError, Evaluator, NotGround, UnboundedQuantifier
from .logic import (
    INT,
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
)

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass(frozen=True)
class SatVerdict:
    status: str  # sat | unsat | unknown
    reason: str = ""
    witness: dict | None = None
    backend: str = ""
    file: str | None = None

    @property
    def is_sat(self):
        return self.status == SAT

    @property
    def is_unsat(self):
        return self.status == UNSAT

    @property
    def is_unknown(self):
        return self.status == UNKNOWN


@dataclass
class SatQuery:
    formulas: list[Formula]
    sig: Signature
    definitions: dict[str, Definition] = field(default_factory=dict)
    axioms: list[tuple[str, Formula]] | None = None  # defaults to axioms_for(sig)
    mode: str = "symbolic"  # ground | symbolic
    consts: dict | None = None  # values for uninterpreted constants (ground mode)
    label: str = "obligation"


@dataclass
class ProverConfig:
    backend: str = "auto"  # ground | external | emit-only | auto
    command: str | None = None  # template with {file}
    timeout: float = 30.0
    outdir: str | None = None
    spec_name: str = "spec"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.backend not in ("ground", "external", "emit-only", "auto"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def resolved_command(self) -> str | None:
        return os.environ.get("FRAGCHECK_PROVER") or self.command or default_prover_command()


def default_prover_command() -> str | None:
    """A TFF-arithmetic prover found in the environment, if any."""
    for exe, template in (
        ("vampire", "vampire --mode casc -t 30 {file}"),
        ("eprover", "eprover --auto --tstp-format -s {file}"),
        ("SPASS+T", "SPASS+T {file}"),
    ):
        if shutil.which(exe):
            return template
    try:
        import importlib.util

        if importlib.util.find_spec("z3") is not None:
            return f"{shlex.quote(sys.executable)} -m fragcheck.tff_z3 {{file}} {{timeout}}"
    except (ImportError, ValueError):  # pragma: no cover
        pass
    return None


# --------------------------------------------------------------------------
# type-derived axioms


def _v(name, sort):
    return Var(name, sort)


def axioms_for(env_or_sig) -> list[Formula]:
    return [f for _, f in named_axioms(env_or_sig)]


def named_axioms(env_or_sig) -> list[tuple[str, Formula]]:
    """Axioms for objects (read-over-write, frame), lists and options."""
    sig = env_or_sig if isinstance(env_or_sig, Signature) else lg.derive_signature(env_or_sig)
    out: list[tuple[str, Formula]] = []
    for sname in sorted(sig.sorts):
        info = sig.sorts[sname]
        if info.kind == "obj":
            out.extend(_object_axioms(sig, sname))
        elif info.kind == "list":
            out.extend(_list_axioms(sig, sname))
        elif info.kind == "option":
            out.extend(_option_axioms(sig, sname))
    return out


def _object_axioms(sig: Signature, sname: str):
    info = sig.sorts[sname]
    o = _v("o", sname)
    for fname, fsort in info.fields:
        acc, upd = sig.field_symbols(sname, fname)
        v = _v("v", fsort)
        written = App(upd, (o, v))
        yield (
            f"{upd.name}_read",
            Forall(o, Forall(v, Eq(App(acc, (written,)), v))),
        )
        for other, _ in info.fields:
            if other == fname:
                continue
            oacc = sig.accessor(sname, other)
            yield (
                f"{upd.name}_frame_{oacc.name}",
                Forall(o, Forall(v, Eq(App(oacc, (written,)), App(oacc, (o,))))),
            )


def _in_bounds(i: Term, length: Term) -> Formula:
    return And((Atom(lg.ARITH_PREDS["<="], (lg.int_const(0), i)), Atom(lg.ARITH_PREDS["<"], (i, length))))


def _list_axioms(sig: Signature, ls: str):
    elem = sig.sorts[ls].elem
    a, i, j = _v("a", ls), _v("i", INT), _v("j", INT)
    v, e = _v("v", elem), _v("e", elem)
    op = lambda name: sig.list_op(name, ls)  # noqa: E731
    length = lambda t: App(op("length"), (t,))  # noqa: E731
    index = lambda t, k: App(op("index"), (t, k))  # noqa: E731
    upd = App(op("update"), (a, i, v))
    app = App(op("append"), (a, v))
    slug = op("index").name[len("index_"):]

    def fa(*vs_and_body):
        *vs, body = vs_and_body
        for var in reversed(vs):
            body = Forall(var, body)
        return body

    yield f"{slug}_update_read", fa(a, i, v, Implies(_in_bounds(i, length(a)), Eq(index(upd, i), v)))
    yield f"{slug}_update_frame", fa(
        a, i, j, v,
        Implies(
            And((Not(Eq(i, j)), _in_bounds(j, length(a)))),
            Eq(index(upd, j), index(a, j)),
        ),
    )
    yield f"{slug}_update_length", fa(a, i, v, Eq(length(upd), length(a)))
    yield f"{slug}_append_length", fa(a, v, Eq(length(app), App(lg.ADD, (length(a), lg.int_const(1)))))
    yield f"{slug}_append_last", fa(a, v, Eq(index(app, length(a)), v))
    yield f"{slug}_append_prefix", fa(
        a, v, i, Implies(_in_bounds(i, length(a)), Eq(index(app, i), index(a, i)))
    )
    yield f"{slug}_length_nonneg", fa(a, Atom(lg.ARITH_PREDS[">="], (length(a), lg.int_const(0))))
    yield f"{slug}_is_empty", fa(
        a, Iff(Eq(App(op("isEmpty"), (a,)), lg.TRUE_T), Eq(length(a), lg.int_const(0)))
    )
    yield f"{slug}_mem", fa(
        e, a,
        Iff(
            Atom(sig.mem(ls), (e, a)),
            Exists(i, And((_in_bounds(i, length(a)), Eq(index(a, i), e)))),
        ),
    )
    yield f"{slug}_nil_length", Eq(length(App(op("nil"), ())), lg.int_const(0))


def _option_axioms(sig: Signature, os_: str):
    inner = sig.sorts[os_].elem
    x, o = _v("x", inner), _v("o", os_)
    some, the, null = (sig.option_op(n, os_) for n in ("some", "the", "null"))
    slug = some.name[len("some_"):]
    yield f"{slug}_the_some", Forall(x, Eq(App(the, (App(some, (x,)),)), x))
    yield f"{slug}_some_not_null", Forall(x, Not(Eq(App(some, (x,)), App(null, ()))))
    yield f"{slug}_cases", Forall(
        o, Or((Eq(o, App(null, ())), Eq(o, App(some, (App(the, (o,)),)))))
    )


# --------------------------------------------------------------------------
# ground backend


def _ground_check(q: SatQuery) -> SatVerdict:
    ev = Evaluator(q.sig, q.definitions, q.consts)
    try:
        ok = all(ev.holds(f) for f in q.formulas)
    except NotGround as e:
        return SatVerdict(UNKNOWN, f"unbounded: {e}", backend="ground")
    except UnboundedQuantifier as e:
        return SatVerdict(UNKNOWN, f"unbounded-quantifier: {e}", backend="ground")
    except EvaluationError as e:
        return SatVerdict(UNKNOWN, f"evaluation error: {e}", backend="ground")
    return SatVerdict(SAT if ok else UNSAT, backend="ground", witness=dict(q.consts or {}) if ok else None)


def _uninterpreted_constants(formulas) -> dict[str, str]:
    out: dict[str, str] = {}
    for f in formulas:
        for t in lg.terms_of(f):
            for app in lg.term_apps(t):
                if app.decl.op == "const" and not app.args:
                    out[app.decl.name] = app.decl.result
    return out


def _int_pool(formulas) -> list[int]:
    pool = set(range(-4, 9))
    for f in formulas:
        for t in lg.terms_of(f):
            for s in lg.subterms(t):
                if isinstance(s, Const) and s.sort == INT:
                    pool.update(range(s.value - 2, s.value + 3))
    return sorted((v for v in pool if INT64_MIN <= v <= INT64_MAX), key=lambda v: (abs(v), v > 0))


class _ValueSampler:
    """Small JSON values of a sort, first the simplest, then random ones."""

    def __init__(self, sig: Signature, ints: list[int], strings: list[str], rng):
        self.sig, self.ints, self.strings, self.rng = sig, ints, strings, rng

    def simple(self, sort: str):
        info = self.sig.sorts[sort]
        if info.kind == "int":
            return 0
        if info.kind == "bool":
            return False
        if info.kind == "string":
            return self.strings[0]
        if info.kind == "enum":
            return info.values[0]
        if info.kind == "list":
            return []
        if info.kind == "option":
            return None
        return {f: self.simple(s) for f, s in info.fields}

    def variations(self, sort: str, value):
        """Values differing from ``value`` in exactly one place."""
        info = self.sig.sorts[sort]
        if info.kind == "int":
            yield from (v for v in self.ints if v != value)
        elif info.kind == "bool":
            yield not value
        elif info.kind in ("string", "enum"):
            yield from (v for v in (self.strings if info.kind == "string" else info.values) if v != value)
        elif info.kind == "option":
            if value is None:
                yield self.simple(info.elem)
            else:
                yield None
                yield from self.variations(info.elem, value)
        elif info.kind == "list":
            if len(value) < 3:
                yield value + [self.simple(info.elem)]
            for i, item in enumerate(value):
                for alt in self.variations(info.elem, item):
                    yield value[:i] + [alt] + value[i + 1:]
        else:
            for fname, fsort in info.fields:
                for alt in self.variations(fsort, value[fname]):
                    yield {**value, fname: alt}

    def sample(self, sort: str, depth: int = 0):
        info = self.sig.sorts[sort]
        r = self.rng
        if info.kind == "int":
            return r.choice(self.ints)
        if info.kind == "bool":
            return r.random() < 0.5
        if info.kind == "string":
            return r.choice(self.strings)
        if info.kind == "enum":
            return r.choice(info.values)
        if info.kind == "list":
            n = 0 if depth > 2 else r.choice((0, 1, 1, 2, 3))
            return [self.sample(info.elem, depth + 1) for _ in range(n)]
        if info.kind == "option":
            return None if r.random() < 0.3 else self.sample(info.elem, depth + 1)
        return {f: self.sample(s, depth + 1) for f, s in info.fields}


def search_witness(q: SatQuery, budget: int = 2000, seed: int = 0) -> dict | None:
    """Concrete values for the uninterpreted constants making all formulas true.

    A found witness proves satisfiability (the concrete JSON universe is a
    model of the type axioms); failing to find one proves nothing.
    """
    import random

    consts = _uninterpreted_constants(q.formulas)
    if not consts:
        return None
    strings = sorted(
        {s.value for f in q.formulas for t in lg.terms_of(f) for s in lg.subterms(t)
         if isinstance(s, Const) and isinstance(s.value, str)}
    ) or ["a"]
    sampler = _ValueSampler(q.sig, _int_pool(q.formulas), strings, random.Random(seed))
    fixed = dict(q.consts or {})
    names = sorted(consts)

    def candidates():
        base = {n: sampler.simple(consts[n]) for n in names}
        yield base
        frontier = [base]
        for _ in range(2):  # values at distance one, then two, from the simplest
            nxt = []
            for cand in frontier:
                for n in names:
                    for alt in sampler.variations(consts[n], cand[n]):
                        nxt.append({**cand, n: alt})
            yield from nxt
            frontier = nxt
        while True:
            yield {n: sampler.sample(consts[n]) for n in names}

    for trial in itertools.islice(candidates(), budget):
        trial.update(fixed)
        ev = Evaluator(q.sig, q.definitions, trial)
        try:
            if all(ev.holds(f) for f in q.formulas):
                return trial
        except EvaluationError:
            continue
    return None


# --------------------------------------------------------------------------
# SZS status

_SZS_RE = re.compile(r"SZS\s+status\s+(\w+)")
_SZS_UNSAT = {"Theorem", "Unsatisfiable", "ContradictoryAxioms"}
_SZS_SAT = {"CounterSatisfiable", "Satisfiable"}


def parse_szs(output: str) -> tuple[str, str]:
    """Map prover output to (status, SZS word)."""
    m = _SZS_RE.search(output or "")
    if not m:
        return UNKNOWN, "no SZS status line"
    word = m.group(1)
    if word in _SZS_UNSAT:
        return UNSAT, word
    if word in _SZS_SAT:
        return SAT, word
    return UNKNOWN, word


# --------------------------------------------------------------------------
# TPTP TFF emission


_TFF_WORD = re.compile(r"[^A-Za-z0-9_]")


def _lower(name: str) -> str:
    s = _TFF_WORD.sub("_", name)
    return s if s[:1].islower() else "s_" + s


class TffNames:
    """Deterministic TPTP names for sorts, symbols, literals and variables."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.sorts: dict[str, str] = {}
        taken: set[str] = {"bool_true", "bool_false"}
        for s in sorted(sig.sorts):
            if s == INT:
                self.sorts[s] = "$int"
                continue
            base = _lower(lg._slug(s))
            while base in taken:
                base += "_s"
            taken.add(base)
            self.sorts[s] = base
        self.funcs: dict[str, str] = {}
        for name in sorted(sig.functions):
            base = _lower(name)
            while base in taken:
                base += "_fn"
            taken.add(base)
            self.funcs[name] = base
        self.preds: dict[str, str] = {}
        for name in sorted(sig.predicates):
            base = _lower(name)
            while base in taken:
                base += "_p"
            taken.add(base)
            self.preds[name] = base
        self.taken = taken
        self.literals: dict[tuple[str, str], str] = {}

    def literal(self, value: str, sort: str) -> str:
        key = (sort, value)
        if key not in self.literals:
            base = "str_" + (_TFF_WORD.sub("_", value).lower() or "empty")
            name = base
            n = 1
            while name in self.taken:
                n += 1
                name = f"{base}_{n}"
            self.taken.add(name)
            self.literals[key] = name
        return self.literals[key]


def _var_name(v: Var) -> str:
    return "V_" + _TFF_WORD.sub("_", v.name)


class TffWriter:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.names = TffNames(sig)

    # terms
    def term(self, t: Term) -> str:
        if isinstance(t, Var):
            return _var_name(t)
        if isinstance(t, Const):
            return self.const(t.value, t.sort)
        d = t.decl
        if d.op == "add":
            return f"$sum({self.term(t.args[0])},{self.term(t.args[1])})"
        if d.op == "sub":
            return f"$difference({self.term(t.args[0])},{self.term(t.args[1])})"
        if d.op == "neg":
            return f"$uminus({self.term(t.args[0])})"
        name = self.names.funcs[d.name]
        if not t.args:
            return name
        return f"{name}({','.join(self.term(a) for a in t.args)})"

    def const(self, value, sort: str) -> str:
        info = self.sig.sorts.get(sort)
        if sort == INT:
            return str(value)
        if sort == lg.BOOL:
            return "bool_true" if value else "bool_false"
        if info is not None and info.kind in ("string", "enum"):
            return self.names.literal(value, sort)
        if info is not None and info.kind == "list":
            out = self.names.funcs[self.sig.list_op("nil", sort).name]
            app = self.names.funcs[self.sig.list_op("append", sort).name]
            for item in value:
                out = f"{app}({out},{self.const(item, info.elem)})"
            return out
        if info is not None and info.kind == "option":
            if value is None:
                return self.names.funcs[self.sig.option_op("null", sort).name]
            some = self.names.funcs[self.sig.option_op("some", sort).name]
            return f"{some}({self.const(value, info.elem)})"
        if info is not None and info.kind == "obj":
            out = self.names.funcs[self.sig.base_const(sort).name]
            for fname, fsort in info.fields:
                upd = self.names.funcs[self.sig.updator(sort, fname).name]
                out = f"{upd}({out},{self.const(value[fname], fsort)})"
            return out
        raise ValueError(f"cannot render constant of sort {sort}")  # pragma: no cover

    # formulas
    def formula(self, f: Formula) -> str:
        if isinstance(f, Top):
            return "$true"
        if isinstance(f, Bot):
            return "$false"
        if isinstance(f, Eq):
            return f"({self.term(f.lhs)} = {self.term(f.rhs)})"
        if isinstance(f, Atom):
            op = f.pred.op
            if op in ("gt", "ge", "lt", "le"):
                fn = {"gt": "$greater", "ge": "$greatereq", "lt": "$less", "le": "$lesseq"}[op]
                return f"{fn}({self.term(f.args[0])},{self.term(f.args[1])})"
            name = self.names.preds[f.pred.name]
            if not f.args:
                return name
            return f"{name}({','.join(self.term(a) for a in f.args)})"
        if isinstance(f, Not):
            if isinstance(f.arg, Eq):
                return f"({self.term(f.arg.lhs)} != {self.term(f.arg.rhs)})"
            return f"~({self.formula(f.arg)})"
        if isinstance(f, And):
            return "(" + " & ".join(self.formula(a) for a in f.args) + ")"
        if isinstance(f, Or):
            return "(" + " | ".join(self.formula(a) for a in f.args) + ")"
        if isinstance(f, Implies):
            return f"({self.formula(f.lhs)} => {self.formula(f.rhs)})"
        if isinstance(f, Iff):
            return f"({self.formula(f.lhs)} <=> {self.formula(f.rhs)})"
        if isinstance(f, (Forall, Exists)):
            q = "!" if isinstance(f, Forall) else "?"
            return f"{q}[{_var_name(f.var)}:{self.names.sorts[f.var.sort]}]: {self.formula(f.body)}"
        raise TypeError(f)  # pragma: no cover

    # whole problems
    def declarations(self) -> list[str]:
        sig, nm = self.sig, self.names
        lines = []
        for s in sorted(sig.sorts):
            if s == INT:
                continue
            lines.append(f"tff({nm.sorts[s]}_type, type, {nm.sorts[s]}: $tType).")
        for name in sorted(sig.functions):
            d = sig.functions[name]
            if d.op in ("add", "sub", "neg"):
                continue
            res = nm.sorts[d.result]
            fn = nm.funcs[name]
            if d.args:
                args = " * ".join(nm.sorts[a] for a in d.args)
                args = f"({args})" if len(d.args) > 1 else args
                lines.append(f"tff({fn}_decl, type, {fn}: {args} > {res}).")
            else:
                lines.append(f"tff({fn}_decl, type, {fn}: {res}).")
        for name in sorted(sig.predicates):
            d = sig.predicates[name]
            if d.op in ("gt", "ge", "lt", "le"):
                continue
            pn = nm.preds[name]
            if d.args:
                args = " * ".join(nm.sorts[a] for a in d.args)
                args = f"({args})" if len(d.args) > 1 else args
                lines.append(f"tff({pn}_decl, type, {pn}: {args} > $o).")
            else:
                lines.append(f"tff({pn}_decl, type, {pn}: $o).")
        return lines

    def literal_axioms(self) -> list[str]:
        """Booleans and string/enum literals: distinctness and closure."""
        nm = self.names
        lines = []
        if lg.BOOL in self.sig.sorts:
            b = nm.sorts[lg.BOOL]
            lines.insert(0, f"tff(bool_true_decl, type, bool_true: {b}).")
            lines.insert(1, f"tff(bool_false_decl, type, bool_false: {b}).")
            lines.append("tff(bool_distinct, axiom, bool_true != bool_false).")
            lines.append(f"tff(bool_cases, axiom, ![B:{b}]: ((B = bool_true) | (B = bool_false))).")
        by_sort: dict[str, list[tuple[str, str]]] = {}
        for (sort, value), name in sorted(nm.literals.items()):
            by_sort.setdefault(sort, []).append((value, name))
        for sname, info in sorted(self.sig.sorts.items()):
            if info.kind == "enum":
                for v in info.values:
                    by_sort.setdefault(sname, [])
                    if all(v != x for x, _ in by_sort[sname]):
                        by_sort[sname].append((v, nm.literal(v, sname)))
        for sort in sorted(by_sort):
            items = sorted(by_sort[sort], key=lambda x: x[1])
            st = nm.sorts[sort]
            for _, name in items:
                lines.append(f"tff({name}_decl, type, {name}: {st}).")
            for k, (_, a) in enumerate(items):
                for _, b in items[k + 1:]:
                    lines.append(f"tff({a}_ne_{b}, axiom, {a} != {b}).")
            info = self.sig.sorts[sort]
            if info.kind == "enum":
                cases = " | ".join(f"(X = {n})" for _, n in items)
                lines.append(f"tff({st}_cases, axiom, ![X:{st}]: ({cases})).")
        return lines


def tptp_emit(q: SatQuery, header: str | None = None) -> str:
    """TFF problem whose axioms are satisfiable iff the query formulas are.

    The conjecture is ``$false``, so a prover answer of Theorem means the
    formulas are unsatisfiable together with the definitions and axioms.
    """
    w = TffWriter(q.sig)
    axioms = q.axioms if q.axioms is not None else named_axioms(q.sig)
    body: list[str] = []
    body.append("% type-derived axioms")
    for name, f in axioms:
        body.append(f"tff({_lower(name)}, axiom, {w.formula(f)}).")
    if q.definitions:
        body.append("% definitions")
        for name in sorted(q.definitions):
            d = q.definitions[name]
            body.append(f"tff(def_{w.names.preds[name]}, axiom, {w.formula(d.as_formula())}).")
    if q.formulas:
        body.append("% obligation")
        for k, f in enumerate(q.formulas):
            body.append(f"tff(obligation_{k}, axiom, {w.formula(f)}).")
        body.append("tff(goal, conjecture, $false).")
    # literals are collected while rendering, so declarations come last
    lines = [f"% {header or q.label}"]
    lines.append("% declarations")
    lines.extend(w.declarations())
    lines.extend(w.literal_axioms())
    lines.extend(body)
    return "\n".join(lines) + "\n"


def emit_axioms(sig: Signature, definitions: dict[str, Definition] | None = None, header: str = "axioms") -> str:
    return tptp_emit(SatQuery([], sig, definitions or {}), header=header)


# --------------------------------------------------------------------------
# external backend


class ObligationWriter:
    """Writes obligation files named ``<spec>_<branch>_<seq>.p``."""

    def __init__(self, outdir: str | Path, spec_name: str = "spec"):
        self.outdir = Path(outdir)
        self.spec_name = re.sub(r"[^A-Za-z0-9_-]", "_", spec_name)
        self.seq = 0
        self.files: list[str] = []

    def write(self, text: str, branch: str = "0") -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / f"{self.spec_name}_{branch}_{self.seq}.p"
        self.seq += 1
        path.write_text(text, encoding="utf-8")
        self.files.append(str(path))
        return path


def run_external(path: Path | str, command: str, timeout: float) -> SatVerdict:
    cmd = command if "{file}" in command else command + " {file}"
    cmd = cmd.replace("{file}", shlex.quote(str(path))).replace("{timeout}", f"{timeout * 0.9:g}")
    try:
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return SatVerdict(UNKNOWN, "timeout", backend="external", file=str(path))
    except OSError as e:
        return SatVerdict(UNKNOWN, f"prover failed to start: {e}", backend="external", file=str(path))
    status, word = parse_szs(proc.stdout + "\n" + proc.stderr)
    if status == UNKNOWN and word == "no SZS status line" and proc.returncode != 0:
        word = f"prover exited with code {proc.returncode}"
    return SatVerdict(status, word if status == UNKNOWN else f"SZS {word}", backend="external", file=str(path))


def check_sat(
    q: SatQuery,
    cfg: ProverConfig | None = None,
    writer: ObligationWriter | None = None,
    branch: str = "0",
) -> SatVerdict:
    """Decide satisfiability of ``q.formulas`` with definitions and axioms."""
    cfg = cfg or ProverConfig()
    if cfg.backend in ("ground", "auto"):
        v = _ground_check(q)
        if cfg.backend == "ground" or not v.is_unknown:
            return v
        if not v.reason.startswith("unbounded"):
            return v
        witness = search_witness(q)
        if witness is not None:
            return SatVerdict(SAT, "ground witness", witness=witness, backend="ground")
    text = tptp_emit(q)
    if writer is None and cfg.outdir is None:
        import tempfile

        with tempfile.TemporaryDirectory(prefix="fragcheck_") as tmp:
            return _external(text, cfg, ObligationWriter(tmp, cfg.spec_name), branch)
    return _external(text, cfg, writer or ObligationWriter(cfg.outdir, cfg.spec_name), branch)


def _external(text: str, cfg: ProverConfig, writer: ObligationWriter, branch: str) -> SatVerdict:
    path = writer.write(text, branch)
    if cfg.backend == "emit-only":
        return SatVerdict(UNKNOWN, "emit-only", backend="emit-only", file=str(path))
    command = cfg.resolved_command()
    if not command:
        return SatVerdict(UNKNOWN, "no external prover configured", backend="external", file=str(path))
    return run_external(path, command, cfg.timeout)
