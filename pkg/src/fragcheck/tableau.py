"""Bounded tableau for CTL*(FO) over a process model.

A query holds when the tableau for its negation closes.  Nodes are sets
of sequents ``(n, t) |-Q Phi``: state ``(n, t)``, path quantifier ``Q``
and a set of NNF path formulas read conjunctively (``E``) or
disjunctively (``A``).  Sequents of one node are read conjunctively.

Rules, highest priority first: Boolean, path quantifier elimination,
Split, U/R expansion, X simplification, Unsat, X expansion.

In concrete mode the state term is a ground JSON value, only enabled
transitions are expanded and classical sequents are decided immediately
by the ground evaluator.  In symbolic mode the initial database is an
uninterpreted constant, every edge is expanded with its instantiated
guard and satisfiability is delegated to a prover oracle.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Callable

from . import ctlstar as ct
from . import logic as lg
from .ground import EvaluationError
from .jsonmodel import canonical
from .process import Instance, Run, State, Transition, enabled_transitions
from .prover import SatVerdict

CLOSED, OPEN, UNKNOWN = "closed", "open", "unknown"


@dataclass(frozen=True, eq=False)
class Sequent:
    state: State
    quant: str  # "A" | "E"
    formulas: tuple[ct.PathFormula, ...]
    steps: int = 0
    lineage: int = 0  # identifies sequents descending from one E claim

    def key(self):
        return (self.quant, self.state.key(), self.steps, frozenset(self.formulas))

    @property
    def classical(self) -> bool:
        return all(isinstance(f, ct.Leaf) for f in self.formulas)

    def with_formulas(self, formulas, **kw) -> "Sequent":
        return Sequent(
            kw.get("state", self.state),
            kw.get("quant", self.quant),
            _dedupe(formulas),
            kw.get("steps", self.steps),
            kw.get("lineage", self.lineage),
        )

    def __str__(self):
        state = self.state
        db = str(state.db) if state.symbolic else _abbrev(canonical(state.db))
        body = ", ".join(map(str, self.formulas))
        return f"({state.node}, {db}) |-{self.quant}[{self.steps}] {{{body}}}"


def _abbrev(text: str, limit: int = 60) -> str:
    return text if len(text) <= limit else text[: limit - 3] + "..."


def _dedupe(items) -> tuple:
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return tuple(out)


def _dedupe_sequents(items) -> tuple[Sequent, ...]:
    best: dict = {}
    for s in items:
        k = s.key()
        if k not in best or s.lineage < best[k].lineage:
            best[k] = s
    return tuple(best.values())


@dataclass(frozen=True, eq=False)
class TableauNode:
    sequents: tuple[Sequent, ...]

    def key(self):
        return frozenset(s.key() for s in self.sequents)

    def __str__(self):
        return " ; ".join(map(str, self.sequents)) or "{}"


@dataclass(frozen=True)
class Step:
    """One E-X expansion taken on a branch (used to rebuild a witness run)."""

    lineage: int
    source: State
    steps: int
    transition: Transition | None  # None: the run ends at ``source``


@dataclass
class RuleApplication:
    rule: str
    premise: Sequent | None
    children: list[TableauNode]
    closed: bool = False
    open: bool = False
    unknown: SatVerdict | None = None
    moves: list[Step | None] | None = None  # per child, for witness extraction


@dataclass
class TableauResult:
    status: str  # closed | open | unknown
    bound: int
    counterexample: Run | None = None
    initial_condition: lg.Formula | None = None
    witness: dict | None = None
    obligations: list[str] = field(default_factory=list)
    unknown_reasons: list[str] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    nodes: int = 0
    files: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool | None:
        if self.status == CLOSED:
            return True
        if self.status == OPEN:
            return False
        return None


class _Undecided(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


# --------------------------------------------------------------------------
# oracle and context


SatOracle = Callable[[list, str], SatVerdict]


class Context:
    """Everything the rules need besides the node itself."""

    def __init__(self, instance: Instance, bound: int, oracle: SatOracle | None = None):
        if bound < 0:
            raise ValueError("depth bound must be non-negative")
        self.instance = instance
        self.spec = instance.spec
        self.sig = instance.spec.sig
        self.bound = bound
        self.symbolic = instance.symbolic
        self.oracle = oracle
        if self.symbolic and oracle is None:
            raise ValueError("symbolic mode needs a satisfiability oracle")
        self.ev = self.spec.evaluator()
        self.diagnostics: list[str] = []
        self._succ: dict = {}
        self._lineages = itertools.count(1)
        self._sat_cache: dict = {}
        self.branch = "0"

    def fresh_lineage(self) -> int:
        return next(self._lineages)

    def transitions(self, state: State, steps: int) -> list[Transition]:
        if steps >= self.bound:
            return []  # depth bound reached: pretend there are no successors
        key = state.key()
        hit = self._succ.get(key)
        if hit is None:
            diags: list[str] = []
            hit = enabled_transitions(state, self.spec, diagnostics=diags)
            for d in diags:
                if d not in self.diagnostics:
                    self.diagnostics.append(d)
            self._succ[key] = hit
        return hit

    # readings of classical sequents
    def reading(self, s: Sequent) -> lg.Formula:
        parts = [ct.to_fo(f) for f in s.formulas]
        body = lg.conj(parts) if s.quant == "E" else lg.disj(parts)
        if s.state.symbolic:
            return lg.substitute(body, self.sig.db, s.state.db)
        return body

    def decide(self, s: Sequent) -> bool:
        """Truth of a classical sequent at a concrete state."""
        try:
            return self.ev.holds(self.reading(s), {self.sig.db: s.state.db})
        except EvaluationError as e:
            raise _Undecided(f"cannot evaluate {s}: {e}") from None

    def check(self, formulas: list[lg.Formula]) -> SatVerdict:
        key = frozenset(formulas)
        hit = self._sat_cache.get(key)
        if hit is None:
            hit = self.oracle(list(formulas), self.branch)
            self._sat_cache[key] = hit
        return hit


# --------------------------------------------------------------------------
# node construction


def initial_node(instance: Instance, formula: ct.PathFormula) -> TableauNode:
    """Root node for the state formula ``formula`` (normally a negated query)."""
    f = ct.nnf(formula)
    if not isinstance(f, (ct.A, ct.E)):
        f = ct.A(f)
    return TableauNode((Sequent(instance.initial_state(), type(f).__name__, (f.arg,), 0, 0),))


def _normalize(ctx: Context, sequents) -> TableauNode | None:
    """Drop trivially true sequents; None when the node is closed."""
    out = []
    for s in sequents:
        fs = []
        for f in s.formulas:
            if isinstance(f, ct.Leaf):
                if isinstance(f.formula, lg.Top):
                    if s.quant == "A":
                        fs = None
                        break
                    continue
                if isinstance(f.formula, lg.Bot):
                    if s.quant == "E":
                        return None
                    continue
            fs.append(f)
        if fs is None:
            continue  # A-sequent containing true
        if not fs:
            if s.quant == "A":
                return None  # empty disjunction
            continue  # empty conjunction
        s = s.with_formulas(fs)
        if not s.state.symbolic and s.classical:
            if ctx.decide(s):
                continue
            return None
        out.append(s)
    return TableauNode(_dedupe_sequents(out))


def _replace(node: TableauNode, old: Sequent, new: list[Sequent]) -> list[Sequent]:
    out = []
    for s in node.sequents:
        if s is old:
            out.extend(new)
        else:
            out.append(s)
    return out


# --------------------------------------------------------------------------
# rules


def _boolean(ctx, node, s: Sequent):
    fs = s.formulas
    flat_cls = ct.Conj if s.quant == "E" else ct.Disj
    for i, f in enumerate(fs):
        if isinstance(f, flat_cls):
            rule = "E-and" if s.quant == "E" else "A-or"
            new = s.with_formulas(fs[:i] + f.args + fs[i + 1:])
            return RuleApplication(rule, s, [_replace(node, s, [new])])
    for i, f in enumerate(fs):
        rest = fs[:i] + fs[i + 1:]
        if s.quant == "A" and isinstance(f, ct.Conj):
            parts = [s.with_formulas((a,) + rest) for a in f.args]
            return RuleApplication("A-and", s, [_replace(node, s, parts)])
        if s.quant == "E" and isinstance(f, ct.Disj):
            kids = [_replace(node, s, [s.with_formulas((a,) + rest)]) for a in f.args]
            return RuleApplication("E-or", s, kids)
    return None


def _elim(ctx, node, s: Sequent):
    for i, f in enumerate(s.formulas):
        if isinstance(f, (ct.A, ct.E)):
            rest = s.formulas[:i] + s.formulas[i + 1:]
            inner = Sequent(s.state, type(f).__name__, (f.arg,), s.steps, ctx.fresh_lineage())
            if s.quant == "E":
                new = [inner] + ([s.with_formulas(rest)] if rest else [])
                return RuleApplication("E-elim", s, [_replace(node, s, new)])
            kids = [_replace(node, s, [inner])]
            if rest:
                kids.append(_replace(node, s, [s.with_formulas(rest)]))
            return RuleApplication("A-elim", s, kids)
    return None


def _split(ctx, node, s: Sequent):
    gamma = [f for f in s.formulas if isinstance(f, ct.Leaf)]
    if not gamma or len(gamma) == len(s.formulas):
        return None
    rest = [f for f in s.formulas if not isinstance(f, ct.Leaf)]
    g, r = s.with_formulas(gamma), s.with_formulas(rest)
    if s.quant == "E":
        return RuleApplication("E-split", s, [_replace(node, s, [g, r])])
    return RuleApplication("A-split", s, [_replace(node, s, [g]), _replace(node, s, [r])])


def _expand_until(ctx, node, s: Sequent):
    for i, f in enumerate(s.formulas):
        if isinstance(f, ct.U):
            unfolded = ct.disj([f.rhs, ct.conj([f.lhs, ct.X(f)])])
        elif isinstance(f, ct.R):
            unfolded = ct.conj([f.rhs, ct.disj([f.lhs, ct.WX(f)])])
        else:
            continue
        new = s.with_formulas(s.formulas[:i] + (unfolded,) + s.formulas[i + 1:])
        return RuleApplication(f"{type(f).__name__}-exp", s, [_replace(node, s, [new])])
    return None


def _simplify_next(ctx, node, s: Sequent):
    if len(s.formulas) < 2 or not all(isinstance(f, (ct.X, ct.WX)) for f in s.formulas):
        return None
    strong = [f.arg for f in s.formulas if isinstance(f, ct.X)]
    weak = [f.arg for f in s.formulas if isinstance(f, ct.WX)]
    args = strong + weak
    if s.quant == "E":
        merged = ct.WX(ct.conj(args)) if not strong else ct.X(ct.conj(args))
    else:
        merged = ct.X(ct.disj(args)) if not weak else ct.WX(ct.disj(args))
    return RuleApplication(f"{s.quant}-X-simp", s, [_replace(node, s, [s.with_formulas((merged,))])])


def _expand_next(ctx: Context, node, s: Sequent):
    (f,) = s.formulas
    strong = isinstance(f, ct.X)
    trans = ctx.transitions(s.state, s.steps)
    name = f"{s.quant}-{'X' if strong else 'WX'}-exp"
    if s.quant == "E":
        kids, moves = [], []
        for t in trans:
            nxt = Sequent(t.target, "E", _dedupe((ct.Leaf(t.guard), f.arg)), s.steps + 1, s.lineage)
            kids.append(_replace(node, s, [nxt]))
            moves.append(Step(s.lineage, s.state, s.steps, t))
        if not strong:
            none_enabled = ct.Leaf(lg.conj(lg.negate(t.guard) for t in trans))
            kids.append(_replace(node, s, [s.with_formulas((none_enabled,))]))
            moves.append(Step(s.lineage, s.state, s.steps, None))
        if not kids:
            return RuleApplication(name, s, [], closed=True)
        return RuleApplication(name, s, kids, moves=moves)
    new = [
        Sequent(t.target, "A", _dedupe((ct.Leaf(lg.negate(t.guard)), f.arg)), s.steps + 1, s.lineage)
        for t in trans
    ]
    if strong:
        some_enabled = ct.Leaf(lg.disj(t.guard for t in trans))
        new.append(Sequent(s.state, "E", (some_enabled,), s.steps, ctx.fresh_lineage()))
    return RuleApplication(name, s, [_replace(node, s, new)])


_LOCAL_RULES = (_boolean, _elim, _split, _expand_until, _simplify_next)


def apply_rule(ctx: Context, node: TableauNode) -> RuleApplication:
    """Apply the highest-priority applicable rule to ``node``.

    Children are returned unnormalized; :func:`saturate` normalizes them.
    A node whose sequents are all classical is a leaf: it is open when the
    conjunction of their readings is satisfiable.
    """
    for rule in _LOCAL_RULES:
        for s in node.sequents:
            app = rule(ctx, node, s)
            if app is not None:
                return app
    classical = [s for s in node.sequents if s.classical]
    pending = [s for s in node.sequents if not s.classical]
    if ctx.symbolic and classical:
        verdict = ctx.check([ctx.reading(s) for s in classical])
        if verdict.is_unsat:
            return RuleApplication("unsat", None, [], closed=True)
        if not pending:
            if verdict.is_sat:
                return RuleApplication("open", None, [], open=True)
            return RuleApplication("unknown", None, [], unknown=verdict)
    if not pending:
        return RuleApplication("open", None, [], open=True)
    # expand the least advanced sequent; A before E to delay branching
    s = min(pending, key=lambda x: (x.steps, x.quant != "A"))
    return _expand_next(ctx, node, s)


# --------------------------------------------------------------------------
# search


class _Search:
    def __init__(self, ctx: Context, trace: bool, trace_limit: int):
        self.ctx = ctx
        self.memo: dict = {}
        self.trace_on = trace
        self.trace_limit = trace_limit
        self.trace: list[str] = []
        self.nodes = 0
        self.branches = 0
        self.open_node: TableauNode | None = None
        self.open_path: tuple = ()
        self.unknowns: list[tuple[TableauNode, SatVerdict]] = []

    def log(self, depth: int, text: str):
        if self.trace_on and len(self.trace) < self.trace_limit:
            self.trace.append("  " * min(depth, 40) + text)
            if len(self.trace) == self.trace_limit:
                self.trace.append("... trace truncated")

    def solve(self, node: TableauNode, path, depth: int) -> str:
        chain = []
        ctx = self.ctx
        while True:
            key = node.key()
            hit = self.memo.get(key)
            if hit is not None:
                self.log(depth, f"[{hit}, seen] {node}")
                result = hit
                break
            chain.append(key)
            self.nodes += 1
            try:
                app = apply_rule(ctx, node)
            except _Undecided as e:
                self.unknowns.append((node, SatVerdict("unknown", e.reason)))
                result = UNKNOWN
                break
            self.log(depth, f"{app.rule}: {node}")
            if app.closed:
                result = CLOSED
                break
            if app.open:
                self.open_node, self.open_path = node, path
                result = OPEN
                break
            if app.unknown is not None:
                self.unknowns.append((node, app.unknown))
                result = UNKNOWN
                break
            kids = []
            for i, raw in enumerate(app.children):
                try:
                    child = _normalize(ctx, raw)
                except _Undecided as e:
                    self.unknowns.append((node, SatVerdict("unknown", e.reason)))
                    kids.append((i, UNKNOWN))
                    continue
                kids.append((i, child))
            live = [(i, c) for i, c in kids if c is not None]
            if not live:
                result = CLOSED
                break
            if len(app.children) == 1 and live[0][1] != UNKNOWN:
                path = self._extend(path, app, 0)
                node = live[0][1]
                continue
            result = CLOSED
            for i, child in live:
                if child == UNKNOWN:
                    result = UNKNOWN
                    continue
                self.branches += 1
                ctx.branch = str(self.branches)
                r = self.solve(child, self._extend(path, app, i), depth + 1)
                if r == OPEN:
                    return OPEN
                if r == UNKNOWN:
                    result = UNKNOWN
            break
        if result != OPEN:
            for k in chain:
                self.memo[k] = result
        return result

    @staticmethod
    def _extend(path, app: RuleApplication, i: int):
        if app.moves is None:
            return path
        return (app.moves[i], path)


def _path_steps(path) -> list[Step]:
    out = []
    while path:
        step, path = path
        out.append(step)
    out.reverse()
    return out


def saturate(
    ctx: Context,
    root: TableauNode,
    trace: bool = False,
    trace_limit: int = 5000,
) -> TableauResult:
    """Expand ``root`` depth first until a branch stays open or all close."""
    search = _Search(ctx, trace, trace_limit)
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 20000))
    try:
        root_n = _normalize(ctx, root.sequents)
        if root_n is None:
            status = CLOSED
        else:
            status = search.solve(root_n, (), 0)
    except _Undecided as e:
        search.unknowns.append((root, SatVerdict("unknown", e.reason)))
        status = UNKNOWN
    finally:
        sys.setrecursionlimit(old_limit)
    res = TableauResult(status, ctx.bound, trace=search.trace, nodes=search.nodes)
    res.diagnostics = list(ctx.diagnostics)
    if status == OPEN:
        node = search.open_node
        res.counterexample = extract_counterexample(ctx, root, _path_steps(search.open_path))
        if ctx.symbolic:
            readings = [ctx.reading(s) for s in node.sequents if s.classical]
            res.initial_condition = lg.conj(readings)
            verdict = ctx.check(readings) if readings else None
            res.witness = verdict.witness if verdict is not None else None
    elif status == UNKNOWN:
        for node, verdict in search.unknowns:
            if verdict.reason not in res.unknown_reasons:
                res.unknown_reasons.append(verdict.reason)
            if verdict.file:
                res.files.append(verdict.file)
            res.obligations.append(str(node))
    return res


def extract_counterexample(ctx: Context, root: TableauNode, steps: list[Step]) -> Run | None:
    """The run chosen for the root E claim along an open branch.

    Concrete runs that stop before the bound without ending are extended
    with arbitrary enabled transitions; the formula does not constrain
    those positions.
    """
    if not root.sequents or root.sequents[0].quant != "E":
        return None
    start = root.sequents[0].state
    states, edges = [start], []
    ended = False
    for st in steps:
        if st.lineage != 0 or st.steps != len(edges) or st.source.key() != states[-1].key():
            continue
        if st.transition is None:
            ended = True
            break
        states.append(st.transition.target)
        edges.append(st.transition.edge.id)
    if not ctx.symbolic and not ended:
        while True:
            succ = ctx.transitions(states[-1], len(edges))
            if not succ:
                break
            states.append(succ[0].target)
            edges.append(succ[0].edge.id)
    return Run(tuple(states), tuple(edges))
