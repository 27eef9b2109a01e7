"""High-level checking entry points shared by the library API and the CLI."""
from __future__ import annotations

import tempfile
import time
from dataclasses import dataclass, field

from . import ctlstar as ct
from .ground import EvaluationError
from .jsonmodel import type_errors
from .process import Instance, Specification, symbolic_instance
from .prover import ObligationWriter, ProverConfig, SatQuery, check_sat
from .semantics import eval_query
from .syntax import parse_path_formula
from .tableau import CLOSED, OPEN, Context, initial_node, saturate

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


@dataclass
class Report:
    command: str
    verdict: str  # holds | fails | unknown
    query: str = ""
    depth: int | None = None
    engine: str = "tableau"
    counterexample: dict | None = None
    witness: dict | None = None
    initial_condition: str | None = None
    reasons: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    obligations: int = 0
    files: list[str] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "verdict": self.verdict,
            "query": self.query,
            "depth": self.depth,
            "engine": self.engine,
        }
        for key in ("counterexample", "witness", "initial_condition"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        for key in ("reasons", "warnings", "diagnostics", "files", "trace"):
            val = getattr(self, key)
            if val:
                out[key] = val
        if self.obligations:
            out["obligations"] = self.obligations
        if self.stats:
            out["stats"] = self.stats
        return out


class QueryError(ValueError):
    pass


def prepare_query(spec: Specification, query) -> tuple[ct.PathFormula, ct.PathFormula, list[str]]:
    """Parse ``query`` and fold in the constraints.

    Returns ``(query, expanded, warnings)``.  A query that does not start
    with a path quantifier is read under ``A``.
    """
    warnings = []
    q = parse_path_formula(query, spec.sig) if isinstance(query, str) else query
    if not isinstance(ct.nnf(q), (ct.A, ct.E)):
        warnings.append("query has no leading path quantifier; checking it under A")
        q = ct.A(q)
    return q, ct.expand_query(q, spec.constraints), warnings


def _check_database(spec: Specification, db):
    errs = type_errors(db, spec.env.db_type, spec.env, first_only=True)
    if errs:
        raise QueryError(f"database does not match the DB type: {errs[0]}")


def check(
    spec: Specification,
    db,
    query,
    depth: int = 10,
    oracle: bool = False,
    trace: bool = False,
) -> Report:
    """Concrete bounded model checking from the database ``db``.

    With ``oracle`` the verdict comes from explicit run enumeration instead
    of the tableau.
    """
    _check_database(spec, db)
    q, expanded, warnings = prepare_query(spec, query)
    instance = Instance(spec, db)
    start = time.perf_counter()
    if oracle:
        rep = Report("check", UNKNOWN, str(q), depth, engine="enumeration", warnings=warnings)
        try:
            v = eval_query(instance, expanded, depth)
        except EvaluationError as e:
            rep.reasons.append(str(e))
            return rep
        rep.verdict = HOLDS if v.holds else FAILS
        rep.diagnostics = v.diagnostics
        if v.witness is not None and isinstance(expanded, ct.A) and not v.holds:
            rep.counterexample = v.witness.to_json()
        elif v.witness is not None:
            rep.witness = v.witness.to_json()
        rep.stats = {"seconds": round(time.perf_counter() - start, 4)}
        return rep
    ctx = Context(instance, depth)
    res = saturate(ctx, initial_node(instance, ct.Neg(expanded)), trace=trace)
    rep = Report("check", _verdict(res.status), str(q), depth, warnings=warnings)
    rep.diagnostics = res.diagnostics
    rep.reasons = res.unknown_reasons
    rep.trace = res.trace
    if res.counterexample is not None:
        # a failing A query has a violating run; a holding E query never reaches here
        rep.counterexample = res.counterexample.to_json()
    rep.stats = {"nodes": res.nodes, "seconds": round(time.perf_counter() - start, 4)}
    return rep


def _verdict(status: str) -> str:
    return {CLOSED: HOLDS, OPEN: FAILS}.get(status, UNKNOWN)


def verify(
    spec: Specification,
    query,
    depth: int = 10,
    cfg: ProverConfig | None = None,
    trace: bool = False,
) -> Report:
    """Bounded model checking for every initial database at once.

    The initial database is the uninterpreted constant ``c``.  An open
    branch yields the condition on ``c`` under which the query fails.
    """
    cfg = cfg or ProverConfig(spec_name=spec.name)
    q, expanded, warnings = prepare_query(spec, query)
    if cfg.outdir is None:
        with tempfile.TemporaryDirectory(prefix="fragcheck_") as tmp:
            return _verify_in(spec, q, expanded, warnings, depth, cfg, trace, tmp)
    return _verify_in(spec, q, expanded, warnings, depth, cfg, trace, cfg.outdir)


def _verify_in(spec, q, expanded, warnings, depth, cfg, trace, outdir) -> Report:
    instance = symbolic_instance(spec)
    writer = ObligationWriter(outdir, spec.name)

    def oracle(formulas, branch):
        return check_sat(SatQuery(formulas, spec.sig, spec.definitions), cfg, writer, branch)

    start = time.perf_counter()
    ctx = Context(instance, depth, oracle)
    res = saturate(ctx, initial_node(instance, ct.Neg(expanded)), trace=trace)
    rep = Report("verify", _verdict(res.status), str(q), depth, warnings=warnings)
    rep.reasons = res.unknown_reasons
    rep.trace = res.trace
    rep.files = writer.files if cfg.backend == "emit-only" or cfg.outdir else []
    rep.obligations = len(writer.files)
    if res.status == OPEN:
        rep.initial_condition = str(res.initial_condition)
        rep.witness = res.witness
        if res.counterexample is not None:
            rep.counterexample = res.counterexample.to_json()
    rep.stats = {"nodes": res.nodes, "seconds": round(time.perf_counter() - start, 4)}
    return rep
