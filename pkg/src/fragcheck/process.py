"""Process fragments, their composition into one process model, and runs."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import ctlstar as ct
from . import logic as lg
from .ground import EvaluationError, Evaluator, UnboundedQuantifier
from .jsonmodel import TypeEnv, canonical
from .logic import Definition, Formula, Signature, Term
from .script import EMPTY, Script, exec_script, to_update_term

log = logging.getLogger(__name__)

NODE_LABELS = ("init", "entry", "exit")


class ProcessError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    fragment: str = ""
    labels: frozenset = frozenset()
    guard: Formula | None = None
    guard_text: str | None = None
    # labels outside init/entry/exit (e.g. "final") are kept but never interpreted
    metadata: tuple = ()

    @property
    def is_init(self):
        return "init" in self.labels

    @property
    def is_entry(self):
        return "entry" in self.labels

    @property
    def is_exit(self):
        return "exit" in self.labels


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    guard: Formula = lg.TOP
    script: Script = EMPTY
    update: Term | None = None
    composed: bool = False  # added by composition (exit -> entry)
    guard_text: str = "true"

    def __str__(self):
        return self.id


@dataclass(frozen=True)
class Fragment:
    name: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...] = ()

    def entry(self) -> Node | None:
        entries = [n for n in self.nodes if n.is_entry]
        return entries[0] if entries else None


@dataclass(frozen=True)
class ProcessModel:
    nodes: tuple[Node, ...]
    init: str
    edges: tuple[Edge, ...]

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def out_edges(self, node_id: str) -> list[Edge]:
        """Outgoing edges in the fixed order: by target id, then edge id."""
        return [e for e in self.edges if e.source == node_id]

    @property
    def composed_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.composed]


def _edge_key(e: Edge):
    return (e.source, e.target, e.composed, e.id)


def compose(fragments: Iterable[Fragment], sig: Signature | None = None) -> ProcessModel:
    """Union of the fragments plus an edge from every exit to every entry.

    Each added edge is labeled with the entry node's guard, the empty script
    and the identity update ``db``.  Self-pairs are kept.
    """
    fragments = list(fragments)
    nodes: dict[str, Node] = {}
    for frag in fragments:
        entries = [n for n in frag.nodes if n.is_entry]
        if len(entries) > 1:
            raise ProcessError(f"fragment {frag.name} has {len(entries)} entry nodes; at most one is allowed")
        if not entries:
            log.debug("fragment %s has no entry node", frag.name)
        for n in frag.nodes:
            if n.id in nodes:
                raise ProcessError(f"node id {n.id!r} is used twice")
            if n.is_entry and n.guard is None:
                raise ProcessError(f"entry node {n.id} has no guard")
            nodes[n.id] = n
    inits = [n.id for n in nodes.values() if n.is_init]
    if len(inits) != 1:
        raise ProcessError(f"exactly one init node is required, found {len(inits)}: {sorted(inits)}")
    edges: list[Edge] = []
    seen_ids: set[str] = set()
    for frag in fragments:
        for e in frag.edges:
            if e.source not in nodes or e.target not in nodes:
                raise ProcessError(f"edge {e.id} connects unknown nodes {e.source} -> {e.target}")
            if e.id in seen_ids:
                raise ProcessError(f"edge id {e.id!r} is used twice")
            seen_ids.add(e.id)
            edges.append(e)
    identity = sig.db if sig is not None else None
    exits = sorted(n.id for n in nodes.values() if n.is_exit)
    entries = sorted(n.id for n in nodes.values() if n.is_entry)
    for m in exits:
        for n in entries:
            entry = nodes[n]
            edges.append(
                Edge(
                    id=f"{m}+{n}",
                    source=m,
                    target=n,
                    guard=entry.guard,
                    script=EMPTY,
                    update=identity,
                    composed=True,
                    guard_text=entry.guard_text or str(entry.guard),
                )
            )
    return ProcessModel(
        nodes=tuple(sorted(nodes.values(), key=lambda n: n.id)),
        init=inits[0],
        edges=tuple(sorted(edges, key=_edge_key)),
    )


# --------------------------------------------------------------------------
# specifications and instances


@dataclass
class Specification:
    env: TypeEnv
    sig: Signature
    process: ProcessModel
    definitions: dict[str, Definition] = field(default_factory=dict)
    constraints: list[ct.PathFormula] = field(default_factory=list)
    name: str = "spec"
    constraint_names: list[str] = field(default_factory=list)
    database: object = None  # optional inline initial database

    def evaluator(self, consts=None) -> Evaluator:
        return Evaluator(self.sig, self.definitions, consts)


@dataclass(frozen=True)
class State:
    node: str
    db: object  # a JSON value (concrete) or a Term over the initial constant

    @property
    def symbolic(self) -> bool:
        return isinstance(self.db, Term)

    def key(self):
        return (self.node, str(self.db) if self.symbolic else canonical(self.db))

    def __str__(self):
        return f"({self.node}, {self.db if self.symbolic else canonical(self.db)})"


@dataclass
class Instance:
    spec: Specification
    initial: object  # JSON value, or a Term of sort DB for unrestricted mode

    @property
    def symbolic(self) -> bool:
        return isinstance(self.initial, Term)

    def initial_state(self) -> State:
        return State(self.spec.process.init, self.initial)


def symbolic_instance(spec: Specification, name: str = "c") -> Instance:
    c = lg.App(spec.sig.constant(name, spec.sig.db.sort), ())
    return Instance(spec, c)


@dataclass(frozen=True)
class Run:
    states: tuple[State, ...]
    edges: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def suffix(self, i: int) -> "Run":
        return Run(self.states[i:], self.edges[i:], self.notes)

    def render(self) -> str:
        parts = [self.states[0].node]
        for e, s in zip(self.edges, self.states[1:]):
            parts.append(f"--{e}--> {s.node}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {
            "nodes": [s.node for s in self.states],
            "edges": list(self.edges),
            "databases": [str(s.db) if s.symbolic else s.db for s in self.states],
        }


# --------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class Transition:
    edge: Edge
    target: State
    guard: Formula  # guard instantiated at the source database


GuardOracle = Callable[[Formula, object], bool]


def edge_update(edge: Edge, sig: Signature) -> Term:
    return edge.update if edge.update is not None else to_update_term(edge.script, sig)


def enabled_transitions(
    state: State,
    spec: Specification,
    oracle: GuardOracle | None = None,
    diagnostics: list | None = None,
) -> list[Transition]:
    """Edges leaving ``state`` that may fire, with their successor states.

    Concrete states keep only edges whose guard holds (decided by ``oracle``,
    by default the ground evaluator with the definitions as axioms); an edge
    whose guard or script fails at run time is dropped and a message is
    appended to ``diagnostics``.  Symbolic states keep every edge and attach
    the instantiated guard.
    """
    out: list[Transition] = []
    sig = spec.sig
    if state.symbolic:
        for e in spec.process.out_edges(state.node):
            upd = edge_update(e, sig)
            guard = lg.substitute(e.guard, sig.db, state.db)
            out.append(Transition(e, State(e.target, lg.subst_term(upd, {sig.db: state.db})), guard))
        return out
    ev = spec.evaluator()
    for e in spec.process.out_edges(state.node):
        try:
            ok = oracle(e.guard, state.db) if oracle else ev.holds(e.guard, {sig.db: state.db})
        except UnboundedQuantifier:
            raise
        except EvaluationError as exc:
            if diagnostics is not None:
                diagnostics.append(f"guard of {e.id} at {state.node} failed: {exc}")
            continue
        if not ok:
            continue
        try:
            new_db = exec_script(e.script, state.db)
        except EvaluationError as exc:
            if diagnostics is not None:
                diagnostics.append(f"script of {e.id} at {state.node} failed: {exc}")
            continue
        out.append(Transition(e, State(e.target, new_db), lg.TOP))
    return out


def validate_run(run: Run, instance: Instance) -> list[str]:
    """Problems with ``run`` as a run of ``instance`` (empty when valid)."""
    spec = instance.spec
    problems = []
    if not run.states:
        return ["run is empty"]
    first = run.states[0]
    if first.node != spec.process.init:
        problems.append(f"run starts at {first.node}, not at the init node {spec.process.init}")
    if not first.symbolic and canonical(first.db) != canonical(instance.initial):
        problems.append("run does not start with the initial database")
    if len(run.edges) != len(run.states) - 1:
        problems.append("edge count does not match state count")
        return problems
    ev = spec.evaluator()
    for i, (eid, a, b) in enumerate(zip(run.edges, run.states, run.states[1:])):
        matches = [e for e in spec.process.edges if e.id == eid]
        if not matches:
            problems.append(f"step {i}: unknown edge {eid}")
            continue
        e = matches[0]
        if (e.source, e.target) != (a.node, b.node):
            problems.append(f"step {i}: edge {eid} does not connect {a.node} to {b.node}")
        if a.symbolic:
            continue
        try:
            if not ev.holds(e.guard, {spec.sig.db: a.db}):
                problems.append(f"step {i}: guard of {eid} is false")
            if canonical(exec_script(e.script, a.db)) != canonical(b.db):
                problems.append(f"step {i}: database after {eid} is not the script result")
        except EvaluationError as exc:
            problems.append(f"step {i}: {exc}")
    return problems
