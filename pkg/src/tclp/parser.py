"""Reader for the program and query text format.

Programs are Prolog-style clauses. Constraints appear in `{...}` blocks or as
bare relations (`X = f(Y)`, `D is D1 + D2`, `D .>. 0`). Directives:

    :- solver(linq).
    :- table dist/3, nat/1.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from .lang import Clause, Constraint, LanguageError, Literal, Program, Query, TRUE
from .terms import ARITH_FUNCTORS, Compound, Const, Term, Var

SOLVERS = ("herbrand", "linq", "gaporder")

_REL_ALIASES = {
    "=": "=", "<": "<", ">": ">", "=<": "=<", "<=": "=<", ">=": ">=", "is": "=",
    ".=.": "=", ".<.": "<", ".>.": ">", ".=<.": "=<", ".>=.": ">=",
    "#=": "=", "#<": "<", "#>": ">", "#=<": "=<", "#>=": ">=",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<dotrel>\.(?:=<|>=|=|<|>)\.)
  | (?P<hashrel>\#(?:=<|>=|=|<|>))
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<punct>:-|\?-|=<|>=|<=|[(){},.=<>+\-*/])
    """,
    re.VERBOSE,
)

_RESERVED_VAR = re.compile(r"_E\d+$")


class ParseError(LanguageError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} at line {line}, column {col}" if line else msg)
        self.line, self.col = line, col


class UnknownSolver(LanguageError):
    pass


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            if kind in ("dotrel", "hashrel"):
                kind = "punct"
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = pos + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.anon = itertools.count()

    # -- token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "name") and t.text == text

    def take(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.take()

    def fail(self, msg: str):
        t = self.tok
        found = t.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", t.line, t.col)

    def at_relation(self) -> bool:
        t = self.tok
        return t.kind in ("punct", "name") and t.text in _REL_ALIASES

    # -- expressions
    def expr(self) -> Term:
        t = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            t = Compound(op, (t, self.term()))
        return t

    def term(self) -> Term:
        t = self.unary()
        while self.at("*") or self.at("/"):
            op_tok = self.take()
            rhs = self.unary()
            if op_tok.text == "/" and _is_num(t) and _is_num(rhs):
                if rhs.value == 0:
                    raise ParseError("division by zero", op_tok.line, op_tok.col)
                t = Const(t.value / rhs.value)
            else:
                t = Compound(op_tok.text, (t, rhs))
        return t

    def unary(self) -> Term:
        if self.at("-"):
            self.take()
            t = self.unary()
            if _is_num(t):
                return Const(-t.value)
            return Compound("-", (t,))
        return self.primary()

    def primary(self) -> Term:
        t = self.tok
        if t.kind == "number":
            self.take()
            return Const(Fraction(t.text))
        if t.kind == "var":
            self.take()
            if t.text == "_":
                return Var(f"_Anon{next(self.anon)}")
            if _RESERVED_VAR.match(t.text):
                raise ParseError(f"variable name {t.text} is reserved", t.line, t.col)
            return Var(t.text)
        if t.kind == "name":
            self.take()
            if self.at("("):
                self.take()
                args = [self.expr()]
                while self.at(","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return Compound(t.text, tuple(args))
            return Const(t.text)
        if self.at("("):
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected a term")

    # -- clauses
    def constraint_after(self, lhs: Term) -> Constraint:
        if not self.at_relation():
            self.fail("expected a relation")
        op = _REL_ALIASES[self.take().text]
        return Constraint(op, lhs, self.expr())

    def constraint(self) -> Constraint:
        if self.at("true"):
            self.take()
            return TRUE
        return self.constraint_after(self.expr())

    def items(self) -> list:
        """One body item; a `{...}` block yields one item per constraint."""
        if self.at("{"):
            self.take()
            out = [self.constraint()]
            while self.at(","):
                self.take()
                out.append(self.constraint())
            self.expect("}")
            return [c for c in out if c.op != "true"] if len(out) > 1 else out
        start = self.tok
        e = self.expr()
        if self.at_relation():
            return [self.constraint_after(e)]
        if e == Const("true"):
            return [TRUE]
        return [self.as_literal(e, start)]

    def as_literal(self, t: Term, where: _Tok) -> Literal:
        if isinstance(t, Const) and isinstance(t.value, str):
            return Literal(t.value, ())
        if isinstance(t, Compound) and t.functor not in ARITH_FUNCTORS:
            return Literal(t.functor, t.args)
        raise ParseError(f"{t} is not a callable literal", where.line, where.col)

    def body(self) -> list:
        out = self.items()
        while self.at(","):
            self.take()
            out.extend(self.items())
        return out

    def clause(self) -> Clause:
        start = self.tok
        head = self.as_literal(self.expr(), start)
        body: list = []
        if self.at(":-"):
            self.take()
            body = self.body()
        self.expect(".")
        body = [i for i in body if not (isinstance(i, Constraint) and i.op == "true")] or (
            [TRUE] if body else []
        )
        return Clause(head, tuple(body))

    def directive(self, tabled: set, solver: list):
        self.expect(":-")
        t = self.tok
        if self.at("table"):
            self.take()
            while True:
                name = self.take()
                if name.kind != "name":
                    raise ParseError("expected predicate name", name.line, name.col)
                self.expect("/")
                n = self.take()
                if n.kind != "number" or not n.text.isdigit():
                    raise ParseError("expected arity", n.line, n.col)
                tabled.add((name.text, int(n.text)))
                if not self.at(","):
                    break
                self.take()
        elif self.at("solver"):
            self.take()
            self.expect("(")
            name = self.take()
            self.expect(")")
            if name.text not in SOLVERS:
                raise UnknownSolver(f"unknown solver {name.text!r}")
            solver.append(name.text)
        else:
            raise ParseError("unknown directive", t.line, t.col)
        self.expect(".")

    def program(self, default_solver: str) -> Program:
        clauses, tabled, solver, queries = [], set(), [], []
        while self.tok.kind != "eof":
            if self.at(":-"):
                self.directive(tabled, solver)
            elif self.at("?-"):
                queries.append(self.query(standalone=False))
            else:
                clauses.append(self.clause())
        return Program(
            tuple(clauses), frozenset(tabled), solver[-1] if solver else default_solver, tuple(queries)
        )

    def query(self, standalone: bool = True) -> Query:
        if self.at("?-"):
            self.take()
        items = self.body()
        if standalone:
            if self.at("."):
                self.take()
            if self.tok.kind != "eof":
                self.fail("expected end of query")
        else:
            self.expect(".")
        *cs, goal = items
        if not isinstance(goal, Literal) or any(isinstance(c, Literal) for c in cs):
            raise ParseError("a query is constraints followed by exactly one literal")
        return Query(tuple(c for c in cs if c.op != "true"), goal)


def _is_num(t: Term) -> bool:
    return isinstance(t, Const) and isinstance(t.value, Fraction)


def parse_program(text: str, default_solver: str = "herbrand") -> Program:
    if default_solver not in SOLVERS:
        raise UnknownSolver(f"unknown solver {default_solver!r}")
    return _Parser(text).program(default_solver)


def parse_query(text: str) -> Query:
    return _Parser(text).query()


def parse_clause(text: str) -> Clause:
    p = _Parser(text)
    c = p.clause()
    if p.tok.kind != "eof":
        p.fail("expected end of clause")
    return c


def parse_constraints(text: str) -> list[Constraint]:
    """Parse `X > 0, X < 10` (braces optional) into constraint items."""
    p = _Parser(text.strip().rstrip("."))
    if p.tok.kind == "eof":
        return []
    items = p.body()
    if p.tok.kind != "eof":
        p.fail("expected end of constraints")
    if any(isinstance(i, Literal) for i in items):
        raise ParseError("expected only constraints")
    return [i for i in items if i.op != "true"]


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.expr()
    if p.tok.kind != "eof":
        p.fail("expected end of term")
    return t
