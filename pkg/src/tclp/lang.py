"""Definite-clause language with constraint items: clauses, programs, queries."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .terms import Compound, Const, Term, Var, format_term, substitute, term_vars

RELATIONS = ("=", "<", "=<", ">=", ">")


class LanguageError(Exception):
    pass


class ArityConflict(LanguageError):
    pass


@dataclass(frozen=True, slots=True)
class Literal:
    pred: str
    args: tuple = ()

    @property
    def indicator(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True, slots=True)
class Constraint:
    """A primitive constraint `lhs op rhs`; op 'true' carries no operands."""

    op: str
    lhs: Optional[Term] = None
    rhs: Optional[Term] = None

    def __post_init__(self):
        if self.op != "true" and self.op not in RELATIONS:
            raise LanguageError(f"unknown relation {self.op!r}")

    def __str__(self) -> str:
        if self.op == "true":
            return "true"
        return f"{format_term(self.lhs, 699)} {self.op} {format_term(self.rhs, 699)}"


TRUE = Constraint("true")

BodyItem = Union[Literal, Constraint]


def item_vars(item: BodyItem) -> Iterator[str]:
    if isinstance(item, Literal):
        for a in item.args:
            yield from term_vars(a)
    elif item.op != "true":
        yield from term_vars(item.lhs)
        yield from term_vars(item.rhs)


def subst_item(item: BodyItem, mapping) -> BodyItem:
    if isinstance(item, Literal):
        return Literal(item.pred, tuple(substitute(a, mapping) for a in item.args))
    if item.op == "true":
        return item
    return Constraint(item.op, substitute(item.lhs, mapping), substitute(item.rhs, mapping))


@dataclass(frozen=True, slots=True)
class Clause:
    head: Literal
    body: tuple = ()

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for item in (self.head, *self.body):
            for v in item_vars(item):
                seen.setdefault(v, None)
        return list(seen)

    def __str__(self) -> str:
        return format_clause(self)


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    tabled: frozenset = frozenset()
    solver: str = "herbrand"
    queries: tuple = ()  # `?-` lines embedded in the source file
    _by_pred: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _normalized: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        arities: dict[str, int] = {}
        for c in self.clauses:
            for lit in (c.head, *(i for i in c.body if isinstance(i, Literal))):
                n = arities.setdefault(lit.pred, len(lit.args))
                if n != len(lit.args):
                    raise ArityConflict(f"{lit.pred} used with arities {n} and {len(lit.args)}")
        for name, n in self.tabled:
            if arities.get(name, n) != n:
                raise ArityConflict(f"table {name}/{n} conflicts with {name}/{arities[name]}")

    def predicates(self) -> list[tuple[str, int]]:
        seen: dict = {}
        for c in self.clauses:
            seen.setdefault(c.head.indicator, None)
        return list(seen)

    def normalized(self) -> list[Clause]:
        if not self._normalized and self.clauses:
            self._normalized.extend(normalize_clause(c) for c in self.clauses)
        return self._normalized

    def clauses_for(self, indicator: tuple[str, int]) -> list[Clause]:
        """Normalized clauses defining a predicate, in program order."""
        got = self._by_pred.get(indicator)
        if got is None:
            got = [c for c in self.normalized() if c.head.indicator == indicator]
            self._by_pred[indicator] = got
        return got

    def is_tabled(self, indicator: tuple[str, int]) -> bool:
        return indicator in self.tabled

    def with_clauses(self, extra) -> "Program":
        return Program(self.clauses + tuple(extra), self.tabled, self.solver, self.queries)

    def __str__(self) -> str:
        return format_program(self)


@dataclass(frozen=True, slots=True)
class Query:
    """`?- c, q`: a conjunction of constraints followed by one literal."""

    constraints: tuple
    goal: Literal

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for v in item_vars(self.goal):
            seen.setdefault(v, None)
        return list(seen)

    def all_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for item in (*self.constraints, self.goal):
            for v in item_vars(item):
                seen.setdefault(v, None)
        return list(seen)

    def __str__(self) -> str:
        parts = [f"{{{c}}}" for c in self.constraints] + [str(self.goal)]
        return f"?- {', '.join(parts)}."


def normalize_clause(clause: Clause, prefix: str = "_N") -> Clause:
    """Make head arguments pairwise-distinct variables.

    Each non-variable or repeated head argument is replaced by a fresh variable
    and a leading `{fresh = arg}` constraint is added to the body.
    """
    used = set(clause.variables())
    counter = itertools.count()
    seen: set[str] = set()
    args, eqs = [], []
    for a in clause.head.args:
        if isinstance(a, Var) and a.name not in seen:
            seen.add(a.name)
            args.append(a)
            continue
        while True:
            name = f"{prefix}{next(counter)}"
            if name not in used:
                break
        used.add(name)
        seen.add(name)
        args.append(Var(name))
        eqs.append(Constraint("=", Var(name), a))
    if not eqs:
        return clause
    return Clause(Literal(clause.head.pred, tuple(args)), tuple(eqs) + clause.body)


def rename_apart(clause: Clause, counter: Iterator[int], prefix: str = "_V") -> Clause:
    """Rename every variable of `clause` to a fresh `_V<n>` drawn from `counter`."""
    mapping = {v: Var(f"{prefix}{next(counter)}") for v in clause.variables()}
    return Clause(
        subst_item(clause.head, mapping),
        tuple(subst_item(i, mapping) for i in clause.body),
    )


def _alpha_key(items) -> tuple:
    names: dict[str, str] = {}

    def canon(t):
        if isinstance(t, Var):
            return Var(names.setdefault(t.name, f"#{len(names)}"))
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(canon(a) for a in t.args))
        return t

    out = []
    for item in items:
        if isinstance(item, Literal):
            out.append(Literal(item.pred, tuple(canon(a) for a in item.args)))
        elif item.op == "true":
            out.append(item)
        else:
            out.append(Constraint(item.op, canon(item.lhs), canon(item.rhs)))
    return tuple(out)


def alpha_equivalent(c1: Clause, c2: Clause) -> bool:
    return _alpha_key((c1.head, *c1.body)) == _alpha_key((c2.head, *c2.body))


def format_item(item: BodyItem) -> str:
    if isinstance(item, Literal):
        return str(item)
    return f"{{{item}}}"


def format_clause(clause: Clause) -> str:
    if not clause.body:
        return f"{clause.head}."
    return f"{clause.head} :- {', '.join(format_item(i) for i in clause.body)}."


def format_program(program: Program) -> str:
    lines = [f":- solver({program.solver})."]
    for name, n in sorted(program.tabled):
        lines.append(f":- table {name}/{n}.")
    lines.extend(format_clause(c) for c in program.clauses)
    lines.extend(str(q) for q in program.queries)
    return "\n".join(lines) + "\n"


__all__ = [
    "ArityConflict",
    "BodyItem",
    "Clause",
    "Constraint",
    "Const",
    "Compound",
    "LanguageError",
    "Literal",
    "Program",
    "Query",
    "TRUE",
    "Var",
    "alpha_equivalent",
    "format_clause",
    "format_program",
    "normalize_clause",
    "rename_apart",
]
