"""Loading specifications from JSON spec files.

A spec file is one JSON object::

    {
      "name": "purchase",
      "types": "DB = { ... }  Stock = { ... }",     # or {"DB": "{...}", ...}
      "fragments": [
        {"name": "Paid",
         "nodes": [{"id": "Paid", "labels": ["entry", "exit"], "guard": "true"}],
         "edges": [{"id": "e7", "from": "Paid", "to": "Paid",
                    "guard": "db.status.paid <> true",
                    "script": "db.status.paid = true"}]}
      ],
      "definitions": ["forall s:Status . completed(s) <=> ..."],
      "constraints": ["nongold: db.gold = false => (...)"],
      "database": { ... }                            # optional
    }

Definitions and constraints may also be objects with a ``formula`` key.
Errors are reported as :class:`SpecLoadError` with a JSON-pointer path.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import logic as lg
from .jsonmodel import JsonError, TypeDefError, parse_type_defs, parse_value, type_env_from_json, type_errors
from .process import Edge, Fragment, Node, NODE_LABELS, ProcessError, Specification, compose
from .script import parse_script, to_update_term
from .syntax import ParseError, parse_definitions, parse_formula, parse_path_formula, _strip_label

_IGNORED_KEYS = {"id", "labels", "guard", "reconstructed", "comment", "note"}


class SpecLoadError(ValueError):
    def __init__(self, pointer: str, msg: str):
        self.pointer = pointer or "/"
        self.reason = msg
        super().__init__(f"{self.pointer}: {msg}")


def _need(obj, key, pointer, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SpecLoadError(pointer, f"missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SpecLoadError(f"{pointer}/{key}", f"expected {kind.__name__}")
    return val


def _text_of(item, pointer) -> str:
    if isinstance(item, str):
        return item
    if isinstance(item, dict) and isinstance(item.get("formula"), str):
        return item["formula"]
    raise SpecLoadError(pointer, "expected a formula string or an object with 'formula'")


def load_spec(source, name: str | None = None) -> Specification:
    """Load a spec from a path, JSON text, or an already parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            path = Path(source)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise SpecLoadError("/", f"cannot read {path}: {e.strerror}") from None
            name = name or path.stem
        else:
            text = source
        try:
            doc = parse_value(text)
        except JsonError as e:
            raise SpecLoadError("/", str(e)) from None
    if not isinstance(doc, dict):
        raise SpecLoadError("/", "spec file must contain a JSON object")
    return _build(doc, name or doc.get("name") or "spec")


def _build(doc: dict, name: str) -> Specification:
    types = _need(doc, "types", "")
    try:
        if isinstance(types, str):
            env = parse_type_defs(types)
        elif isinstance(types, dict):
            env = type_env_from_json(types)
        else:
            raise SpecLoadError("/types", "expected type text or an object of type texts")
    except TypeDefError as e:
        raise SpecLoadError("/types", str(e)) from None
    sig = lg.derive_signature(env)

    defs_raw = doc.get("definitions", [])
    if not isinstance(defs_raw, list):
        raise SpecLoadError("/definitions", "expected a list")
    def_texts = [_text_of(d, f"/definitions/{i}") for i, d in enumerate(defs_raw)]
    try:
        definitions = parse_definitions(def_texts, sig)
    except (ParseError, lg.DefinitionError, lg.SortError) as e:
        idx = _locate_definition_error(def_texts, sig.env)
        raise SpecLoadError(f"/definitions/{idx}" if idx is not None else "/definitions", str(e)) from None

    frags_raw = _need(doc, "fragments", "", list)
    fragments = [_fragment(f, f"/fragments/{i}", sig) for i, f in enumerate(frags_raw)]
    try:
        process = compose(fragments, sig)
    except ProcessError as e:
        raise SpecLoadError("/fragments", str(e)) from None

    constraints = []
    cnames = []
    cons_raw = doc.get("constraints", [])
    if not isinstance(cons_raw, list):
        raise SpecLoadError("/constraints", "expected a list")
    for i, c in enumerate(cons_raw):
        text = _text_of(c, f"/constraints/{i}")
        label, _ = _strip_label(text)
        try:
            constraints.append(parse_path_formula(text, sig))
        except (ParseError, lg.SortError) as e:
            raise SpecLoadError(f"/constraints/{i}", str(e)) from None
        cnames.append((c.get("name") if isinstance(c, dict) else None) or label or f"c{i}")

    database = doc.get("database")
    if database is not None:
        errs = type_errors(database, env.db_type, env, first_only=True)
        if errs:
            raise SpecLoadError("/database" + errs[0].split(":")[0].rstrip("/"), errs[0])
    return Specification(
        env=env,
        sig=sig,
        process=process,
        definitions=lg.check_definitions(definitions),
        constraints=constraints,
        name=name,
        constraint_names=cnames,
        database=database,
    )


def _locate_definition_error(texts, env):
    for i in range(len(texts)):
        try:
            parse_definitions(texts[: i + 1], lg.derive_signature(env))
        except Exception:
            return i
    return None


def _fragment(obj, pointer: str, sig) -> Fragment:
    fname = _need(obj, "name", pointer, str)
    nodes = []
    for j, n in enumerate(_need(obj, "nodes", pointer, list)):
        p = f"{pointer}/nodes/{j}"
        nid = _need(n, "id", p, str)
        labels_raw = n.get("labels", [])
        if not isinstance(labels_raw, list) or not all(isinstance(x, str) for x in labels_raw):
            raise SpecLoadError(f"{p}/labels", "expected a list of strings")
        labels = frozenset(x for x in labels_raw if x in NODE_LABELS)
        metadata = [(x, True) for x in labels_raw if x not in NODE_LABELS]
        metadata += [(k, v) for k, v in n.items() if k not in _IGNORED_KEYS]
        guard = None
        gtext = n.get("guard")
        if gtext is not None:
            if not isinstance(gtext, str):
                raise SpecLoadError(f"{p}/guard", "expected a formula string")
            try:
                guard = parse_formula(gtext, sig)
            except (ParseError, lg.SortError) as e:
                raise SpecLoadError(f"{p}/guard", str(e)) from None
        if "entry" in labels and guard is None:
            raise SpecLoadError(p, f"entry node {nid} has no guard")
        nodes.append(
            Node(nid, fname, labels, guard, gtext, tuple(sorted((k, json.dumps(v)) for k, v in metadata)))
        )
    edges = []
    for j, e in enumerate(obj.get("edges", [])):
        p = f"{pointer}/edges/{j}"
        src = _need(e, "from", p, str)
        dst = _need(e, "to", p, str)
        eid = e.get("id") or f"{fname}.{j}"
        gtext = e.get("guard", "true")
        stext = e.get("script", "")
        if not isinstance(gtext, str):
            raise SpecLoadError(f"{p}/guard", "expected a formula string")
        if not isinstance(stext, str):
            raise SpecLoadError(f"{p}/script", "expected a script string")
        try:
            guard = parse_formula(gtext, sig)
        except (ParseError, lg.SortError) as ex:
            raise SpecLoadError(f"{p}/guard", str(ex)) from None
        try:
            script = parse_script(stext, sig)
        except (ParseError, lg.SortError) as ex:
            raise SpecLoadError(f"{p}/script", str(ex)) from None
        edges.append(Edge(eid, src, dst, guard, script, to_update_term(script, sig), False, gtext))
    ids = {n.id for n in nodes}
    for j, e in enumerate(edges):
        if e.source not in ids or e.target not in ids:
            raise SpecLoadError(f"{pointer}/edges/{j}", f"edge {e.id} leaves its fragment ({e.source} -> {e.target})")
    return Fragment(fname, tuple(nodes), tuple(edges))


def load_database(source, spec: Specification | None = None):
    if isinstance(source, (dict, list)):
        return source
    if isinstance(source, Path) or not str(source).lstrip().startswith(("{", "[")):
        try:
            source = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise SpecLoadError("/", f"cannot read database: {e.strerror}") from None
    try:
        return parse_value(source)
    except JsonError as e:
        raise SpecLoadError("/", str(e)) from None


BUNDLED = ("purchase", "decrement")


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise KeyError(f"no bundled spec {name!r}; available: {', '.join(BUNDLED)}")
    return Path(str(resources.files("fragcheck").joinpath("data").joinpath(f"{name}.json")))


def bundled_spec(name: str = "purchase") -> Specification:
    return load_spec(bundled_path(name))
