"""Reference semantics of CTL*(FO) over bounded runs, by explicit enumeration.

Runs are bounded by an absolute depth: a state reached after ``bound``
transitions has no successors.  The set of runs from a state contains every
maximal run, i.e. each run ends at a state without enabled transitions or at
the bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from . import ctlstar as ct
from .ground import Evaluator
from .jsonmodel import canonical
from .logic import Formula
from .process import Instance, Run, State, enabled_transitions


def eval_classical(formula: Formula, db, definitions=(), sig=None) -> bool:
    """Decide a classical formula on a ground database.

    Defined predicates are unfolded on demand.  Quantifiers must range over
    a finite sort or be restricted by ``x in list``; otherwise
    :class:`~fragcheck.ground.UnboundedQuantifier` is raised.
    """
    ev = Evaluator(sig, definitions)
    env = {sig.db: db} if sig is not None else {}
    return ev.holds(formula, env)


@dataclass
class Verdict:
    holds: bool
    witness: Run | None = None
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.holds


class _Explorer:
    """Successor and run enumeration with memoization."""

    def __init__(self, instance: Instance, bound: int):
        if instance.symbolic:
            raise ValueError("run enumeration needs a concrete initial database")
        self.spec = instance.spec
        self.bound = bound
        self.ev = self.spec.evaluator()
        self.diagnostics: list[str] = []
        self._succ: dict = {}
        self._runs: dict = {}
        self._state_memo: dict = {}

    def successors(self, state: State, depth: int):
        if depth >= self.bound:
            return []
        key = (state.key(), depth)
        hit = self._succ.get(key)
        if hit is None:
            diags: list[str] = []
            hit = enabled_transitions(state, self.spec, diagnostics=diags)
            for d in diags:
                if d not in self.diagnostics:
                    self.diagnostics.append(d)
            self._succ[key] = hit
        return hit

    def runs(self, state: State, depth: int) -> list[tuple[tuple[State, ...], tuple[str, ...]]]:
        key = (state.key(), depth)
        hit = self._runs.get(key)
        if hit is not None:
            return hit
        succ = self.successors(state, depth)
        if not succ:
            out = [((state,), ())]
        else:
            out = []
            for t in succ:
                for states, edges in self.runs(t.target, depth + 1):
                    out.append(((state,) + states, (t.edge.id,) + edges))
        self._runs[key] = out
        return out

    # ---- evaluation
    def classical(self, f: Formula, state: State) -> bool:
        return self.ev.holds(f, {self.spec.sig.db: state.db})

    def state_formula(self, f: ct.PathFormula, state: State, depth: int) -> bool:
        if isinstance(f, ct.Leaf):
            return self.classical(f.formula, state)
        key = (state.key(), depth, f)
        hit = self._state_memo.get(key)
        if hit is not None:
            return hit
        if isinstance(f, ct.A):
            res = all(self.path(f.arg, st, d) for st, d in self._run_views(state, depth))
        elif isinstance(f, ct.E):
            res = any(self.path(f.arg, st, d) for st, d in self._run_views(state, depth))
        else:
            # boolean combination of state formulas: evaluate along the trivial run
            res = self.path(f, ((state,), ()), depth)
        self._state_memo[key] = res
        return res

    def _run_views(self, state, depth):
        for r in self.runs(state, depth):
            yield r, depth

    def path(self, f: ct.PathFormula, run, depth: int, i: int = 0) -> bool:
        states = run[0]
        n = len(states)
        if isinstance(f, ct.Leaf):
            return self.classical(f.formula, states[i])
        if isinstance(f, (ct.A, ct.E)):
            return self.state_formula(f, states[i], depth + i)
        if isinstance(f, ct.Neg):
            return not self.path(f.arg, run, depth, i)
        if isinstance(f, ct.Conj):
            return all(self.path(a, run, depth, i) for a in f.args)
        if isinstance(f, ct.Disj):
            return any(self.path(a, run, depth, i) for a in f.args)
        if isinstance(f, ct.Imp):
            return (not self.path(f.lhs, run, depth, i)) or self.path(f.rhs, run, depth, i)
        if isinstance(f, ct.X):
            return n - i > 1 and self.path(f.arg, run, depth, i + 1)
        if isinstance(f, ct.WX):
            return n - i <= 1 or self.path(f.arg, run, depth, i + 1)
        if isinstance(f, ct.F):
            return any(self.path(f.arg, run, depth, j) for j in range(i, n))
        if isinstance(f, ct.G):
            return all(self.path(f.arg, run, depth, j) for j in range(i, n))
        if isinstance(f, ct.U):
            for j in range(i, n):
                if self.path(f.rhs, run, depth, j):
                    return True
                if not self.path(f.lhs, run, depth, j):
                    return False
            return False
        if isinstance(f, ct.R):
            # rhs holds up to and including the first position where lhs holds
            for j in range(i, n):
                if not self.path(f.rhs, run, depth, j):
                    return False
                if self.path(f.lhs, run, depth, j):
                    return True
            return True
        if isinstance(f, ct.W):
            # weak until: lhs until rhs, or lhs throughout
            for j in range(i, n):
                if self.path(f.rhs, run, depth, j):
                    return True
                if not self.path(f.lhs, run, depth, j):
                    return False
            return True
        raise TypeError(f"unexpected formula {f!r}")  # pragma: no cover


def enumerate_runs(instance: Instance, bound: int) -> Iterator[Run]:
    """All maximal runs with at most ``bound`` transitions, depth first."""
    ex = _Explorer(instance, bound)
    start = instance.initial_state()

    def walk(states, edges, depth):
        succ = ex.successors(states[-1], depth)
        if not succ:
            yield Run(tuple(states), tuple(edges), tuple(ex.diagnostics))
            return
        for t in succ:
            yield from walk(states + [t.target], edges + [t.edge.id], depth + 1)

    yield from walk([start], [], 0)


def eval_query(instance: Instance, query: ct.PathFormula, bound: int) -> Verdict:
    """Evaluate a state formula at the initial state of ``instance``.

    For ``E psi`` that holds, the witness is a run satisfying ``psi``; for
    ``A psi`` that fails, it is a run violating ``psi``.
    """
    ex = _Explorer(instance, bound)
    start = instance.initial_state()
    q = query
    witness = None
    if isinstance(q, (ct.A, ct.E)):
        want = isinstance(q, ct.E)
        result = not want
        for r in ex.runs(start, 0):
            if ex.path(q.arg, r, 0) == want:
                result = want
                witness = Run(r[0], r[1])
                break
    else:
        result = ex.state_formula(q, start, 0)
    return Verdict(result, witness, list(ex.diagnostics))


def eval_path_on_run(formula: ct.PathFormula, run: Run, instance: Instance, bound: int | None = None) -> bool:
    """Truth of a path formula on a given run (nested A/E use ``bound``)."""
    bound = len(run) - 1 if bound is None else bound
    ex = _Explorer(instance, bound)
    return ex.path(formula, (run.states, run.edges), 0)


def simulate(instance: Instance, max_steps: int) -> tuple[list[Run], list[str]]:
    runs = list(enumerate_runs(instance, max_steps))
    lines = []
    for r in runs:
        line = r.render()
        if len(r) == 1 and max_steps > 0:
            line += "  (stuck: no enabled transition)"
        lines.append(line + "  " + canonical(r.states[-1].db))
    return runs, lines
