"""Terms: variables, constants (symbols and rationals) and compound terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Union

ARITH_FUNCTORS = frozenset({"+", "-", "*", "/"})

# binary operator precedences for printing; unary minus binds tightest
_PREC = {"+": 500, "-": 500, "*": 400, "/": 400}


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    """A constant symbol (str value) or a rational number (Fraction value)."""

    value: Union[str, Fraction]

    @property
    def is_number(self) -> bool:
        return isinstance(self.value, Fraction)

    def __str__(self) -> str:
        if isinstance(self.value, Fraction):
            return format_number(self.value)
        return self.value


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple
    # cached so that deep ground terms (p(f(f(...)))) hash and substitute in O(1)
    ground: bool = field(init=False, compare=False, repr=False)
    _hash: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ground", all(not isinstance(a, Var) and getattr(a, "ground", True) for a in self.args))
        object.__setattr__(self, "_hash", hash((self.functor, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Compound) or self._hash != other._hash:
            return False
        return self.functor == other.functor and self.args == other.args

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Const, Compound]


def num(value) -> Const:
    return Const(Fraction(value))


def sym(name: str) -> Const:
    return Const(name)


def format_number(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_arith(t: Term) -> bool:
    """True for numbers and compounds built from arithmetic functors."""
    if isinstance(t, Const):
        return t.is_number
    return isinstance(t, Compound) and t.functor in ARITH_FUNCTORS and len(t.args) in (1, 2)


def term_vars(t: Term) -> Iterator[str]:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t.name
        elif isinstance(t, Compound) and not t.ground:
            stack.extend(reversed(t.args))


def ordered_vars(terms) -> list[str]:
    """Variable names in order of first occurrence."""
    seen: dict[str, None] = {}
    for t in terms:
        for v in term_vars(t):
            seen.setdefault(v, None)
    return list(seen)


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Compound) and not t.ground:
        return Compound(t.functor, tuple(substitute(a, mapping) for a in t.args))
    return t


def term_depth(t: Term) -> int:
    if isinstance(t, Compound) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 1


def format_term(t: Term, prec: int = 1200) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        if isinstance(t.value, Fraction) and t.value.denominator != 1:
            return f"({format_number(t.value)})"
        return str(t)
    if t.functor in _PREC and len(t.args) == 2:
        p = _PREC[t.functor]
        left = format_term(t.args[0], p)
        # right operand of a left-associative operator needs strictly tighter binding
        right = format_term(t.args[1], p - 1)
        text = f"{left} {t.functor} {right}" if p == 500 else f"{left}{t.functor}{right}"
        return f"({text})" if p > prec else text
    if t.functor == "-" and len(t.args) == 1:
        inner = format_term(t.args[0], 200)
        return f"-{inner}" if prec >= 200 else f"(-{inner})"
    if not t.args:
        return f"{t.functor}()"
    return f"{t.functor}({', '.join(format_term(a) for a in t.args)})"
