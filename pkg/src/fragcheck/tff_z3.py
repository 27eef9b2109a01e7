"""Run z3 on a TPTP TFF problem and print an SZS status line.

Only the fragment written by :mod:`fragcheck.prover` is understood:
sort and symbol declarations, axioms and one conjecture, first-order
connectives, quantifiers, equality and ``$int`` arithmetic.

Usage: ``python -m fragcheck.tff_z3 problem.p [timeout-seconds]``
"""
from __future__ import annotations

import re
import sys

import z3

_TOKEN = re.compile(
    r"\s*(?:(%[^\n]*)|(<=>|=>|!=|[()\[\],:.&|~=!?*>])|(\$?[A-Za-z_][A-Za-z0-9_]*)|(-?\d+))"
)


class TffSyntaxError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TffSyntaxError(f"unexpected input at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1):
            continue
        out.append(m.group(2) or m.group(3) or m.group(4))
    return out


_CLOSURE = re.compile(
    r"tff\(\s*\w+\s*,\s*axiom\s*,\s*!\[\s*([A-Z]\w*)\s*:\s*(\w+)\s*\]\s*:\s*\(((?:\s*\|?\s*\(\s*\1\s*=\s*\w+\s*\))+)\s*\)\s*\)\s*\."
)


def _finite_sorts(text: str) -> dict[str, list[str]]:
    """Sorts with a closure axiom ``![X:s]: ((X = a) | (X = b) ...)``."""
    out = {}
    for m in _CLOSURE.finditer(text):
        out[m.group(2)] = re.findall(r"=\s*(\w+)\s*\)", m.group(3))
    return out


class _Problem:
    def __init__(self, finite: dict[str, list[str]] | None = None):
        # a private context, so enumeration sorts can be redeclared per problem
        self.ctx = z3.Context()
        self.sorts: dict[str, z3.SortRef] = {"$int": z3.IntSort(self.ctx), "$o": z3.BoolSort(self.ctx)}
        self.funcs: dict[str, z3.FuncDeclRef] = {}
        # sorts closed over finitely many constants become z3 enumerations
        self.finite = finite or {}
        self.enum_consts: dict[str, z3.ExprRef] = {}
        self.axioms: list[z3.BoolRef] = []
        self.conjecture: z3.BoolRef | None = None


class _Parser:
    def __init__(self, toks: list[str], prob: _Problem):
        self.toks = toks
        self.i = 0
        self.p = prob

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise TffSyntaxError(f"expected {expect or 'a token'}, got {tok!r}")
        self.i += 1
        return tok

    # ---- top level
    def problem(self):
        while self.peek() is not None:
            self.take("tff")
            self.take("(")
            self.take()  # name
            self.take(",")
            role = self.take()
            self.take(",")
            if role == "type":
                self.type_decl()
            else:
                f = self.formula({})
                if role == "conjecture":
                    self.p.conjecture = f
                else:
                    self.p.axioms.append(f)
            self.take(")")
            self.take(".")

    def type_decl(self):
        name = self.take()
        self.take(":")
        if self.peek() == "$tType":
            self.take()
            members = self.p.finite.get(name)
            if members and len(set(members)) == len(members):
                sort, consts = z3.EnumSort(name, members, ctx=self.p.ctx)
                self.p.sorts[name] = sort
                self.p.enum_consts.update(zip(members, consts))
            else:
                self.p.sorts[name] = z3.DeclareSort(name, self.p.ctx)
            return
        if name in self.p.enum_consts:
            self.sort()
            return
        args = []
        if self.peek() == "(":
            self.take("(")
            args.append(self.sort())
            while self.peek() == "*":
                self.take()
                args.append(self.sort())
            self.take(")")
            self.take(">")
            res = self.sort()
        else:
            first = self.sort()
            if self.peek() == ">":
                self.take()
                args, res = [first], self.sort()
            else:
                res = first
        self.p.funcs[name] = z3.Function(name, *args, res)

    def sort(self) -> z3.SortRef:
        name = self.take()
        try:
            return self.p.sorts[name]
        except KeyError:
            raise TffSyntaxError(f"unknown sort {name}") from None

    # ---- formulas
    def formula(self, scope) -> z3.BoolRef:
        lhs = self.unitary(scope)
        tok = self.peek()
        if tok == "&" or tok == "|":
            parts = [lhs]
            while self.peek() == tok:
                self.take()
                parts.append(self.unitary(scope))
            return z3.And(*parts) if tok == "&" else z3.Or(*parts)
        if tok == "=>":
            self.take()
            return z3.Implies(lhs, self.unitary(scope))
        if tok == "<=>":
            self.take()
            return lhs == self.unitary(scope)
        return lhs

    def unitary(self, scope) -> z3.BoolRef:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula(scope)
            self.take(")")
            return f
        if tok == "~":
            self.take()
            return z3.Not(self.unitary(scope))
        if tok in ("!", "?"):
            self.take()
            self.take("[")
            bound = []
            inner = dict(scope)
            while True:
                vname = self.take()
                self.take(":")
                v = z3.Const(vname, self.sort())
                inner[vname] = v
                bound.append(v)
                if self.peek() != ",":
                    break
                self.take(",")
            self.take("]")
            self.take(":")
            body = self.unitary(inner)
            return z3.ForAll(bound, body) if tok == "!" else z3.Exists(bound, body)
        if tok == "$true":
            self.take()
            return z3.BoolVal(True, self.p.ctx)
        if tok == "$false":
            self.take()
            return z3.BoolVal(False, self.p.ctx)
        lhs = self.term(scope)
        if self.peek() in ("=", "!="):
            op = self.take()
            rhs = self.term(scope)
            return lhs == rhs if op == "=" else lhs != rhs
        if not z3.is_bool(lhs):
            raise TffSyntaxError(f"expected a formula, got term {lhs}")
        return lhs

    # ---- terms
    _ARITH = {
        "$sum": lambda a, b: a + b,
        "$difference": lambda a, b: a - b,
        "$product": lambda a, b: a * b,
        "$uminus": lambda a: -a,
        "$greater": lambda a, b: a > b,
        "$greatereq": lambda a, b: a >= b,
        "$less": lambda a, b: a < b,
        "$lesseq": lambda a, b: a <= b,
    }

    def term(self, scope):
        tok = self.take()
        if re.fullmatch(r"-?\d+", tok):
            return z3.IntVal(int(tok), self.p.ctx)
        if tok in scope:
            return scope[tok]
        args = []
        if self.peek() == "(":
            self.take("(")
            args.append(self.term(scope))
            while self.peek() == ",":
                self.take()
                args.append(self.term(scope))
            self.take(")")
        if tok in self._ARITH:
            return self._ARITH[tok](*args)
        if tok in self.p.enum_consts and not args:
            return self.p.enum_consts[tok]
        decl = self.p.funcs.get(tok)
        if decl is None:
            raise TffSyntaxError(f"undeclared symbol {tok}")
        return decl(*args) if args else decl()


def parse_problem(text: str) -> _Problem:
    prob = _Problem(_finite_sorts(text))
    _Parser(_tokens(text), prob).problem()
    return prob


def solve(text: str, timeout: float = 30.0) -> str:
    """The SZS status word for the problem in ``text``."""
    prob = parse_problem(text)
    s = z3.Solver(ctx=prob.ctx)
    s.set("timeout", int(timeout * 1000))
    for a in prob.axioms:
        s.add(a)
    if prob.conjecture is not None:
        s.add(z3.Not(prob.conjecture))
    res = s.check()
    if res == z3.unsat:
        return "Theorem" if prob.conjecture is not None else "Unsatisfiable"
    if res == z3.sat:
        return "CounterSatisfiable" if prob.conjecture is not None else "Satisfiable"
    return "GaveUp"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        print("usage: python -m fragcheck.tff_z3 FILE [TIMEOUT]", file=sys.stderr)
        return 2
    timeout = float(argv[1]) if len(argv) > 1 else 30.0
    try:
        with open(argv[0], encoding="utf-8") as fh:
            status = solve(fh.read(), timeout)
    except (OSError, TffSyntaxError, z3.Z3Exception) as e:
        print(f"% SZS status Error : {e}")
        return 1
    print(f"% SZS status {status} for {argv[0]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
