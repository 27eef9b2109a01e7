"""JSON values and the static type system used for databases.

Values are plain Python data: ``int``, ``bool``, ``str``, ``None``, ``list``
and ``dict``.  Types are small frozen dataclasses; a :class:`TypeEnv` maps
type names to types and always contains the root type ``DB``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterator

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

JsonValue = Any


class JsonError(ValueError):
    """Raised for malformed JSON text."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)
        self.line = line
        self.column = column


class TypeDefError(ValueError):
    pass


# --------------------------------------------------------------------------
# values


def _reject_constant(name):
    raise JsonError(f"non-standard numeric constant {name!r}")


def _reject_float(text):
    raise JsonError(f"only integer numbers are supported, got {text!r}")


def _parse_int(text):
    value = int(text)
    if not INT64_MIN <= value <= INT64_MAX:
        raise JsonError(f"integer {text} does not fit in 64 bits")
    return value


def _unique_object(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise JsonError(f"duplicate field name {key!r}")
        obj[key] = value
    return obj


def parse_value(text: str | bytes) -> JsonValue:
    """Parse RFC 8259 JSON text into a Python value.

    Fractional or exponent numbers and duplicate sibling field names are
    rejected.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(
            text,
            object_pairs_hook=_unique_object,
            parse_float=_reject_float,
            parse_int=_parse_int,
            parse_constant=_reject_constant,
        )
    except json.JSONDecodeError as exc:
        raise JsonError(exc.msg, exc.lineno, exc.colno) from None


def dump_value(value: JsonValue, indent: int | None = None) -> str:
    """Serialize with sorted field names, so equal values give equal text."""
    return json.dumps(value, sort_keys=True, indent=indent, ensure_ascii=False)


def canonical(value: JsonValue) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


# --------------------------------------------------------------------------
# types


class JsonType:
    __slots__ = ()


@dataclass(frozen=True)
class IntegerT(JsonType):
    def __str__(self):
        return "Integer"


@dataclass(frozen=True)
class BoolT(JsonType):
    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class StringT(JsonType):
    def __str__(self):
        return "String"


@dataclass(frozen=True)
class ListT(JsonType):
    elem: JsonType

    def __str__(self):
        return f"List[{self.elem}]"


@dataclass(frozen=True)
class OptionT(JsonType):
    inner: JsonType

    def __str__(self):
        return f"Option[{self.inner}]"


@dataclass(frozen=True)
class ObjT(JsonType):
    fields: tuple[tuple[str, JsonType], ...]

    def __post_init__(self):
        names = [n for n, _ in self.fields]
        if len(set(names)) != len(names):
            raise TypeDefError(f"duplicate field in object type: {names}")
        object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda p: p[0])))

    @property
    def field_map(self) -> dict[str, JsonType]:
        return dict(self.fields)

    def __str__(self):
        inner = ", ".join(f"{n}: {t}" for n, t in self.fields)
        return "{ " + inner + " }" if inner else "{ }"


@dataclass(frozen=True)
class EnumT(JsonType):
    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise TypeDefError("EnumTy needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise TypeDefError(f"duplicate value in EnumTy{list(self.values)}")

    def __str__(self):
        return "EnumTy[" + ", ".join(json.dumps(v) for v in self.values) + "]"


@dataclass(frozen=True)
class NamedT(JsonType):
    """Reference to a named type in a :class:`TypeEnv`."""

    name: str

    def __str__(self):
        return self.name


INTEGER = IntegerT()
BOOL = BoolT()
STRING = StringT()


@dataclass(frozen=True)
class TypeEnv:
    named_types: dict[str, JsonType] = field(hash=False)
    root: str = "DB"

    def __post_init__(self):
        if self.root not in self.named_types:
            raise TypeDefError(f"missing root type {self.root}")
        for name, ty in self.named_types.items():
            _check_no_nested_option(ty, name)
            for ref in _references(ty):
                if ref not in self.named_types:
                    raise TypeDefError(f"unknown type name {ref!r} in definition of {name}")
        self._check_acyclic()

    def _check_acyclic(self):
        state: dict[str, int] = {}

        def visit(name, trail):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                cycle = " -> ".join(trail[trail.index(name):] + [name])
                raise TypeDefError(f"cyclic type definition: {cycle}")
            state[name] = 1
            for ref in _references(self.named_types[name]):
                visit(ref, trail + [name])
            state[name] = 2

        for name in self.named_types:
            visit(name, [])

    def resolve(self, ty: JsonType) -> JsonType:
        """Unfold a top-level name reference (not nested ones)."""
        while isinstance(ty, NamedT):
            ty = self.named_types[ty.name]
        return ty

    def expand(self, ty: JsonType) -> JsonType:
        """Substitute every name reference, recursively."""
        ty = self.resolve(ty)
        if isinstance(ty, ListT):
            return ListT(self.expand(ty.elem))
        if isinstance(ty, OptionT):
            return OptionT(self.expand(ty.inner))
        if isinstance(ty, ObjT):
            return ObjT(tuple((n, self.expand(t)) for n, t in ty.fields))
        return ty

    @property
    def db_type(self) -> JsonType:
        return self.named_types[self.root]

    def __iter__(self) -> Iterator[str]:
        return iter(self.named_types)


def _references(ty: JsonType) -> Iterator[str]:
    if isinstance(ty, NamedT):
        yield ty.name
    elif isinstance(ty, ListT):
        yield from _references(ty.elem)
    elif isinstance(ty, OptionT):
        yield from _references(ty.inner)
    elif isinstance(ty, ObjT):
        for _, t in ty.fields:
            yield from _references(t)


def _check_no_nested_option(ty: JsonType, where: str):
    if isinstance(ty, OptionT):
        if isinstance(ty.inner, OptionT):
            raise TypeDefError(f"nested Option in definition of {where}")
        _check_no_nested_option(ty.inner, where)
    elif isinstance(ty, ListT):
        _check_no_nested_option(ty.elem, where)
    elif isinstance(ty, ObjT):
        for _, t in ty.fields:
            _check_no_nested_option(t, where)


# --------------------------------------------------------------------------
# type-definition text

_TOKEN = re.compile(r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[=\[\]{},:]))')


def _tokenize_types(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = re.sub(r"(#|//)[^\n]*", "", text)
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TypeDefError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _TypeParser:
    def __init__(self, text):
        self.toks = _tokenize_types(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, -1)

    def take(self, value=None, kind=None):
        tok = self.peek()
        if tok[0] is None:
            raise TypeDefError(f"unexpected end of type definitions, expected {value or kind}")
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            raise TypeDefError(f"expected {value or kind} at offset {tok[2]}, got {tok[1]!r}")
        self.i += 1
        return tok[1]

    def definitions(self) -> dict[str, JsonType]:
        defs: dict[str, JsonType] = {}
        while self.peek()[0] is not None:
            name = self.take(kind="id")
            self.take("=")
            if name in defs:
                raise TypeDefError(f"type {name} defined twice")
            defs[name] = self.type()
            if self.peek()[1] == ",":
                self.take(",")
        return defs

    def type(self) -> JsonType:
        kind, val, _ = self.peek()
        if val == "{":
            self.take("{")
            fields = []
            while self.peek()[1] != "}":
                fname = self.take(kind="id") if self.peek()[0] == "id" else json.loads(self.take(kind="str"))
                self.take(":")
                fields.append((fname, self.type()))
                if self.peek()[1] != ",":
                    break
                self.take(",")
            self.take("}")
            return ObjT(tuple(fields))
        name = self.take(kind="id")
        if name == "Integer":
            return INTEGER
        if name == "Bool":
            return BOOL
        if name == "String":
            return STRING
        if name in ("List", "Option"):
            self.take("[")
            inner = self.type()
            self.take("]")
            return ListT(inner) if name == "List" else OptionT(inner)
        if name == "EnumTy":
            self.take("[")
            values = [json.loads(self.take(kind="str"))]
            while self.peek()[1] == ",":
                self.take(",")
                values.append(json.loads(self.take(kind="str")))
            self.take("]")
            return EnumT(tuple(values))
        return NamedT(name)


def parse_type(text: str) -> JsonType:
    p = _TypeParser(text)
    ty = p.type()
    if p.peek()[0] is not None:
        raise TypeDefError(f"trailing input in type {text!r}")
    return ty


def parse_type_defs(text: str) -> TypeEnv:
    """Parse ``Name = type`` definitions (whitespace-insensitive)."""
    return TypeEnv(_TypeParser(text).definitions())


def type_env_from_json(obj: dict[str, str]) -> TypeEnv:
    """Build an environment from ``{"Name": "type text", ...}``."""
    return TypeEnv({name: parse_type(text) for name, text in obj.items()})


# --------------------------------------------------------------------------
# checking


def check_type(v: JsonValue, ty: JsonType, env: TypeEnv) -> bool:
    return type_errors(v, ty, env, first_only=True) == []


def type_errors(v: JsonValue, ty: JsonType, env: TypeEnv, path: str = "", first_only: bool = False) -> list[str]:
    """Return JSON-pointer paths (with a reason) where ``v`` violates ``ty``."""
    errors: list[str] = []
    _collect(v, ty, env, path, errors, first_only)
    return errors


def _collect(v, ty, env, path, errors, first_only):
    ty = env.resolve(ty)
    where = path or "/"
    if isinstance(ty, OptionT):
        if v is None:
            return
        _collect(v, ty.inner, env, path, errors, first_only)
    elif isinstance(ty, IntegerT):
        if not is_int(v):
            errors.append(f"{where}: expected Integer, got {_describe(v)}")
    elif isinstance(ty, BoolT):
        if not isinstance(v, bool):
            errors.append(f"{where}: expected Bool, got {_describe(v)}")
    elif isinstance(ty, StringT):
        if not isinstance(v, str):
            errors.append(f"{where}: expected String, got {_describe(v)}")
    elif isinstance(ty, EnumT):
        if not isinstance(v, str) or v not in ty.values:
            errors.append(f"{where}: expected one of {list(ty.values)}, got {_describe(v)}")
    elif isinstance(ty, ListT):
        if not isinstance(v, list):
            errors.append(f"{where}: expected {ty}, got {_describe(v)}")
            return
        for i, el in enumerate(v):
            _collect(el, ty.elem, env, f"{path}/{i}", errors, first_only)
            if first_only and errors:
                return
    elif isinstance(ty, ObjT):
        if not isinstance(v, dict):
            errors.append(f"{where}: expected object, got {_describe(v)}")
            return
        tf = ty.field_map
        for name in sorted(set(tf) - set(v)):
            errors.append(f"{path}/{_escape(name)}: missing field")
        for name in sorted(set(v) - set(tf)):
            errors.append(f"{path}/{_escape(name)}: unexpected field")
        for name in sorted(set(v) & set(tf)):
            if first_only and errors:
                return
            _collect(v[name], tf[name], env, f"{path}/{_escape(name)}", errors, first_only)
    else:  # pragma: no cover
        raise TypeError(f"not a JSON type: {ty!r}")


def _escape(name: str) -> str:
    return name.replace("~", "~0").replace("/", "~1")


def _describe(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return "array"
    if isinstance(v, dict):
        return "object"
    return json.dumps(v)
