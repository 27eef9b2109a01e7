"""Command-line interface: ``fragcheck typecheck|simulate|check|verify|emit-axioms``.

Exit codes: 0 holds/pass, 1 fails, 2 unknown, 3 usage or load error.
Every command prints a JSON report (``--pretty`` for a readable summary),
except ``emit-axioms`` which prints TPTP text unless ``--out`` is given.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .checker import FAILS, HOLDS, QueryError, Report, check, verify
from .ground import EvaluationError
from .jsonmodel import type_errors
from .process import Instance
from .prover import ProverConfig, emit_axioms
from .semantics import simulate
from .specfile import BUNDLED, SpecLoadError, bundled_path, load_database, load_spec
from .syntax import ParseError

EXIT_HOLDS, EXIT_FAILS, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fragcheck", description="Bounded CTL* model checking of data-aware process fragments.")
    p.add_argument("--version", action="version", version=f"fragcheck {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, db=True):
        sp.add_argument("spec", help=f"spec file, or a bundled spec name ({', '.join(BUNDLED)})")
        if db:
            sp.add_argument("--db", help="initial database: JSON file or inline JSON (default: the database in the spec file)")
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="pretty", action="store_false", help="JSON report (default)")
        fmt.add_argument("--pretty", dest="pretty", action="store_true", help="human-readable report")
        sp.set_defaults(pretty=False)

    common(sub.add_parser("typecheck", help="validate the spec file and the database type"))
    sp = sub.add_parser("simulate", help="enumerate bounded runs")
    common(sp)
    sp.add_argument("--max-steps", type=int, default=10)
    sp = sub.add_parser("check", help="concrete bounded model checking")
    common(sp)
    sp.add_argument("--query", "-q", required=True)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--oracle", action="store_true", help="decide by explicit run enumeration")
    sp.add_argument("--trace", action="store_true", help="include the tableau rule trace")
    sp = sub.add_parser("verify", help="bounded model checking for all initial databases")
    common(sp, db=False)
    sp.add_argument("--query", "-q", required=True)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--prover", help="external prover command; {file} is replaced by the problem path")
    sp.add_argument("--emit-tptp", metavar="DIR", help="only write obligations to DIR; verdict is unknown")
    sp.add_argument("--backend", choices=("auto", "ground", "external"), default="auto")
    sp.add_argument("--timeout", type=float, default=30.0, help="seconds per prover call")
    sp.add_argument("--trace", action="store_true")
    sp = sub.add_parser("emit-axioms", help="print the TFF axioms and definitions of a spec")
    common(sp, db=False)
    sp.add_argument("--out", help="write to this file instead of stdout")
    return p


def _resolve_spec(name: str):
    if name in BUNDLED and not Path(name).exists():
        return load_spec(bundled_path(name))
    return load_spec(name)


def _database(args, spec):
    if getattr(args, "db", None):
        return load_database(args.db, spec)
    if spec.database is None:
        raise UsageError("no database given: pass --db or add 'database' to the spec file")
    return spec.database


def _emit(report: dict, pretty: bool, out=sys.stdout):
    if pretty:
        out.write(_pretty(report) + "\n")
    else:
        out.write(json.dumps(report, indent=2, sort_keys=False, default=str) + "\n")


def _pretty(rep: dict) -> str:
    lines = [f"{rep.get('command', 'fragcheck')}: {rep.get('verdict', rep.get('status', ''))}"]
    for key in ("query", "depth", "engine", "initial_condition", "error", "pointer"):
        if rep.get(key) not in (None, ""):
            lines.append(f"  {key}: {rep[key]}")
    for key in ("counterexample", "witness_run"):
        run = rep.get(key)
        if isinstance(run, dict) and "nodes" in run:
            steps = [run["nodes"][0]] + [f"--{e}--> {n}" for e, n in zip(run["edges"], run["nodes"][1:])]
            lines.append(f"  {key}: " + " ".join(steps))
    if rep.get("witness") is not None:
        lines.append(f"  witness: {json.dumps(rep['witness'])}")
    for key in ("errors", "reasons", "warnings", "diagnostics", "files", "runs", "trace"):
        for item in rep.get(key, []) or []:
            lines.append(f"  {key[:-1]}: {item}")
    if rep.get("stats"):
        lines.append("  stats: " + ", ".join(f"{k}={v}" for k, v in rep["stats"].items()))
    return "\n".join(lines)


def _exit_for(verdict: str) -> int:
    return {HOLDS: EXIT_HOLDS, "pass": EXIT_HOLDS, FAILS: EXIT_FAILS, "fail": EXIT_FAILS}.get(verdict, EXIT_UNKNOWN)


def cmd_typecheck(args) -> tuple[dict, int]:
    spec = _resolve_spec(args.spec)
    errors = []
    db = None
    try:
        db = _database(args, spec)
    except UsageError:
        pass
    if db is not None:
        errors = type_errors(db, spec.env.db_type, spec.env)
    proc = spec.process
    rep = {
        "command": "typecheck",
        "verdict": "fail" if errors else "pass",
        "spec": spec.name,
        "summary": {
            "nodes": len(proc.nodes),
            "edges": len(proc.edges),
            "composed_edges": len(proc.composed_edges),
            "definitions": len(spec.definitions),
            "constraints": len(spec.constraints),
            "database_checked": db is not None,
        },
    }
    if errors:
        rep["errors"] = errors
    return rep, _exit_for(rep["verdict"])


def cmd_simulate(args) -> tuple[dict, int]:
    if args.max_steps < 0:
        raise UsageError("--max-steps must be non-negative")
    spec = _resolve_spec(args.spec)
    db = _database(args, spec)
    errs = type_errors(db, spec.env.db_type, spec.env, first_only=True)
    if errs:
        raise QueryError(f"database does not match the DB type: {errs[0]}")
    runs, lines = simulate(Instance(spec, db), args.max_steps)
    rep = {
        "command": "simulate",
        "verdict": "pass",
        "max_steps": args.max_steps,
        "count": len(runs),
        "runs": lines if args.pretty else [r.to_json() | {"stuck": len(r) == 1 and args.max_steps > 0} for r in runs],
    }
    return rep, EXIT_HOLDS


def cmd_check(args) -> tuple[dict, int]:
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    spec = _resolve_spec(args.spec)
    db = _database(args, spec)
    rep: Report = check(spec, db, args.query, args.depth, oracle=args.oracle, trace=args.trace)
    return rep.to_json(), _exit_for(rep.verdict)


def cmd_verify(args) -> tuple[dict, int]:
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    spec = _resolve_spec(args.spec)
    if args.emit_tptp:
        cfg = ProverConfig(backend="emit-only", outdir=args.emit_tptp, timeout=args.timeout, spec_name=spec.name)
    else:
        cfg = ProverConfig(backend=args.backend, command=args.prover, timeout=args.timeout, spec_name=spec.name)
    rep = verify(spec, args.query, args.depth, cfg, trace=args.trace)
    return rep.to_json(), _exit_for(rep.verdict)


def cmd_emit_axioms(args) -> tuple[dict | str, int]:
    spec = _resolve_spec(args.spec)
    text = emit_axioms(spec.sig, spec.definitions, header=f"axioms for {spec.name}")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        return {"command": "emit-axioms", "verdict": "pass", "file": args.out, "lines": text.count("\n")}, EXIT_HOLDS
    return text, EXIT_HOLDS


COMMANDS = {
    "typecheck": cmd_typecheck,
    "simulate": cmd_simulate,
    "check": cmd_check,
    "verify": cmd_verify,
    "emit-axioms": cmd_emit_axioms,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    pretty = "--pretty" in argv
    command = next((a for a in argv if a in COMMANDS), None)
    try:
        args = build_parser().parse_args(argv)
        result, code = COMMANDS[args.command](args)
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except UsageError as e:
        result, code = {"command": command, "verdict": "error", "error": f"usage: {e}"}, EXIT_USAGE
    except SpecLoadError as e:
        result = {"command": command, "verdict": "error", "error": e.reason, "pointer": e.pointer}
        code = EXIT_USAGE
    except (ParseError, QueryError, ValueError, KeyError, EvaluationError, OSError) as e:
        result, code = {"command": command, "verdict": "error", "error": str(e)}, EXIT_USAGE
    if isinstance(result, str):
        out.write(result)
    else:
        _emit(result, pretty, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
