"""Herbrand (finite tree) equality constraints.

A store is a triangular substitution (`bindings`) kept free of cycles by the
occurs check; the idempotent solved form is computed on demand. Arithmetic
domains reuse this class and add an `arith` store over the variables that are
not bound by the substitution: numbers are ordinary constants of the term
universe, and a variable with arithmetic constraints may only be bound to a
number or aliased to another variable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Optional

from immutables import Map

from ..lang import Constraint
from ..terms import Compound, Const, Term, Var, format_term, is_arith, substitute, term_vars
from .linear import to_q
from .base import (
    ConstraintStore,
    Inconsistent,
    NonLinear,
    SolverError,
    check_injective,
    is_witness,
)

_Q0, _Q1 = to_q(Fraction(0)), to_q(Fraction(1))
_PATTERN = "_M"
INDEX_DEPTH = 8
_REL = {"=": "=", "<": "<", "=<": "<=", ">=": ">=", ">": ">"}


class _Clash(Exception):
    """A symbolic term met an arithmetic context."""


def _is_pattern(name: str) -> bool:
    return name.startswith(_PATTERN) and name[2:].isdigit()


def _numeric(t: Term) -> bool:
    return isinstance(t, Var) or (isinstance(t, Const) and t.is_number)


class HerbrandStore(ConstraintStore):
    domain = "herbrand"
    arith_factory = None
    default_value: Term = Const("a")

    __slots__ = ("bindings", "arith")

    def __init__(self, bindings: Map = Map(), arith=None):
        self.bindings = bindings
        if arith is None and self.arith_factory is not None:
            arith = self.arith_factory()
        self.arith = arith

    def _new(self, bindings, arith) -> "HerbrandStore":
        return type(self)(bindings, arith)

    def _fail(self) -> Inconsistent:
        return Inconsistent(self.domain)

    # ------------------------------------------------------------ terms
    def walk(self, t: Term, bindings=None) -> Term:
        b = self.bindings if bindings is None else bindings
        while isinstance(t, Var):
            nxt = b.get(t.name)
            if nxt is None:
                return t
            t = nxt
        return t

    def resolve(self, t: Term, bindings=None, memo=None) -> Term:
        """Apply the substitution exhaustively."""
        b = self.bindings if bindings is None else bindings
        if isinstance(t, Var):
            t = self.walk(t, b)
            if isinstance(t, Var):
                return t
        if isinstance(t, Compound) and not t.ground:
            if memo is not None:
                got = memo.get(t)
                if got is not None:
                    return got
            out = Compound(t.functor, tuple(self.resolve(a, b, memo) for a in t.args))
            if memo is not None:
                memo[t] = out
            return out
        return t

    def solved(self) -> dict:
        """The idempotent solved form {var: term}."""
        memo: dict = {}
        return {k: self.resolve(Var(k), None, memo) for k in self.bindings.keys()}

    # ------------------------------------------------------------ tell
    def tell(self, constraint: Constraint) -> ConstraintStore:
        if constraint.op == "true":
            return self
        if self.arith is None:
            if constraint.op != "=":
                raise SolverError(f"{constraint}: the herbrand domain has only equality")
            quick = self._quick_eq(constraint.lhs, constraint.rhs)
            return quick if quick is not None else self._solve([(constraint.lhs, constraint.rhs)])
        if constraint.op == "=":
            quick = self._quick_eq(constraint.lhs, constraint.rhs)
            return quick if quick is not None else self._solve([(constraint.lhs, constraint.rhs)])
        try:
            atom = self._atom(constraint.lhs, _REL[constraint.op], constraint.rhs, self.bindings)
        except _Clash:
            return self._fail()
        arith = self.arith.tell_user(atom) if hasattr(self.arith, "tell_user") else self.arith.tell(atom)
        return self._fail() if arith is None else self._new(self.bindings, arith)

    def _quick_eq(self, lhs: Term, rhs: Term) -> Optional["HerbrandStore"]:
        """Equalities between a free variable and a constant or another free variable."""
        s, t = self.walk(lhs), self.walk(rhs)
        if s == t:
            return self
        if not isinstance(s, Var):
            s, t = t, s
        if not isinstance(s, Var) or isinstance(t, Compound):
            return None
        arith = self.arith
        if arith is not None:
            if isinstance(t, Const) and t.is_number:
                return None
            if arith.has_var(s.name) or (isinstance(t, Var) and arith.has_var(t.name)):
                return None
        return self._new(self.bindings.set(s.name, t), arith)

    def tell_all(self, constraints: Iterable[Constraint]) -> ConstraintStore:
        s: ConstraintStore = self
        for c in constraints:
            s = s.tell(c)
            if not s.consistent:
                return s
        return s

    def _linear(self, t: Term, b) -> tuple[dict, Fraction]:
        t = self.walk(t, b)
        if isinstance(t, Var):
            return {t.name: _Q1}, _Q0
        if isinstance(t, Const):
            if t.is_number:
                return {}, to_q(t.value)
            raise _Clash
        if t.functor not in ("+", "-", "*", "/"):
            raise _Clash
        if t.functor == "-" and len(t.args) == 1:
            c, k = self._linear(t.args[0], b)
            return {v: -x for v, x in c.items()}, -k
        if len(t.args) != 2:
            raise _Clash
        (c1, k1), (c2, k2) = self._linear(t.args[0], b), self._linear(t.args[1], b)
        if t.functor in ("+", "-"):
            sign = 1 if t.functor == "+" else -1
            out = dict(c1)
            for v, x in c2.items():
                out[v] = out.get(v, 0) + sign * x
            return out, k1 + sign * k2
        if t.functor == "*":
            if c1 and c2:
                raise NonLinear(f"non-linear term {format_term(t)}")
            if c1:
                return {v: x * k2 for v, x in c1.items()}, k1 * k2
            return {v: x * k1 for v, x in c2.items()}, k1 * k2
        if c2:
            raise NonLinear(f"non-linear term {format_term(t)}")
        if k2 == 0:
            raise SolverError("division by zero")
        return {v: x / k2 for v, x in c1.items()}, k1 / k2

    def _atom(self, lhs: Term, rel: str, rhs: Term, b):
        from .linear import LinAtom

        c1, k1 = self._linear(lhs, b)
        c2, k2 = self._linear(rhs, b)
        for v, x in c2.items():
            c1[v] = c1.get(v, 0) - x
        return LinAtom.make(c1, rel, k2 - k1)

    def _solve(self, pairs, atoms=()) -> ConstraintStore:
        """Unify term pairs, then add linear atoms (over possibly bound variables)."""
        b = self.bindings.mutate()
        arith = self.arith
        stack = list(pairs)
        try:
            while stack:
                s, t = stack.pop()
                s, t = self.walk(s, b), self.walk(t, b)
                if s == t:
                    continue
                if arith is not None and (is_arith(s) or is_arith(t)):
                    if isinstance(s, Var) and isinstance(t, Const):
                        arith = self._bind(b, arith, s, t)
                    elif isinstance(t, Var) and isinstance(s, Const):
                        arith = self._bind(b, arith, t, s)
                    else:
                        atom = self._atom(s, "=", t, b)
                        arith = arith.tell(atom)
                elif isinstance(s, Var):
                    arith = self._bind(b, arith, s, t)
                elif isinstance(t, Var):
                    arith = self._bind(b, arith, t, s)
                elif (
                    isinstance(s, Compound)
                    and isinstance(t, Compound)
                    and s.functor == t.functor
                    and len(s.args) == len(t.args)
                ):
                    stack.extend(zip(s.args, t.args))
                else:
                    return self._fail()
                if arith is None and self.arith is not None:
                    return self._fail()
            for a in atoms:
                a = self._rebase(a, b)
                arith = arith.tell(a)
                if arith is None:
                    return self._fail()
        except _Clash:
            return self._fail()
        return self._new(b.finish(), arith)

    def _bind(self, b, arith, v: Var, t: Term):
        if isinstance(t, Compound):
            if v.name in term_vars(self.resolve(t, b)):
                raise _Clash  # occurs check
        if arith is not None and arith.has_var(v.name):
            if isinstance(t, Var):
                arith = arith.alias(v.name, t.name)
            elif isinstance(t, Const) and t.is_number:
                arith = arith.substitute(v.name, t.value)
            else:
                raise _Clash
        b[v.name] = t
        return arith

    def _rebase(self, atom, b):
        """Rewrite a linear atom over variables that may since have been bound."""
        if isinstance(atom, bool):
            return atom
        sub = {}
        for v in atom.vars:
            t = self.walk(Var(v), b)
            if isinstance(t, Var):
                if t.name != v:
                    sub[v] = t.name
            elif isinstance(t, Const) and t.is_number:
                sub[v] = t.value
            else:
                raise _Clash
        return atom.substitute(sub) if sub else atom

    # ------------------------------------------------------------ api
    def _witnesses(self) -> set:
        out = {v for t in self.bindings.values() for v in term_vars(t) if is_witness(v)}
        out.update(k for k in self.bindings.keys() if is_witness(k))
        if self.arith is not None:
            out.update(v for v in self.arith.variables() if is_witness(v))
        return out

    def _raw_rename(self, mapping: Mapping[str, str]) -> "HerbrandStore":
        vm = {k: Var(v) for k, v in mapping.items()}
        b = Map({mapping.get(k, k): substitute(t, vm) for k, t in self.bindings.items()})
        arith = self.arith.rename(mapping) if self.arith is not None else None
        return self._new(b, arith)

    def conjoin(self, other: ConstraintStore) -> ConstraintStore:
        self.check_domain(other)
        if not other.consistent:
            return other
        theirs = other._witnesses()
        if theirs:
            mine = self._witnesses()
            start = 1 + max((int(w[2:]) for w in mine), default=-1)
            other = other._raw_rename({w: f"_E{start + i}" for i, w in enumerate(sorted(theirs))})
        pairs = [(Var(k), t) for k, t in other.bindings.items()]
        atoms = other.arith.atom_list() if other.arith is not None else ()
        return self._solve(pairs, atoms)

    def variables(self) -> frozenset:
        out = set(self.bindings.keys())
        for t in self.bindings.values():
            out.update(term_vars(t))
        if self.arith is not None:
            out.update(self.arith.variables())
        return frozenset(v for v in out if not is_witness(v))

    def rename(self, mapping: Mapping[str, str]) -> ConstraintStore:
        mapping = {k: v for k, v in mapping.items() if not is_witness(k)}
        check_injective(mapping, self.variables())
        return self._raw_rename(mapping)

    def entails(self, other: ConstraintStore) -> bool:
        self.check_domain(other)
        if not other.consistent:
            return False
        theirs = sorted(other._witnesses())
        if theirs:
            other = other._raw_rename({w: f"{_PATTERN}{i}" for i, w in enumerate(theirs)})
        memo: dict = {}
        theta: dict = {}
        obligations: list = []
        for k, t in other.solved().items():
            if _is_pattern(k):
                continue  # value already substituted into the other bindings
            target = self.resolve(Var(k), None, memo)
            pattern = self._self_side(t, memo)
            if not self._match(pattern, target, theta, obligations):
                return False
        atoms = []
        if other.arith is not None and not other.arith.is_true():
            a1 = other.arith
            unmapped = {v for v in a1.variables() if _is_pattern(v) and v not in theta}
            if unmapped:
                a1 = a1.project(a1.variables() - unmapped)
            sub = {}
            for v in a1.variables():
                val = theta[v] if _is_pattern(v) else self.resolve(Var(v), None, memo)
                if isinstance(val, Var):
                    sub[v] = val.name
                elif isinstance(val, Const) and val.is_number:
                    sub[v] = val.value
                else:
                    return False
            atoms = [a.substitute(sub) for a in a1.atom_list()]
        from .linear import LinAtom

        for x, y in obligations:
            c: dict = {}
            k = Fraction(0)
            for sign, t in ((1, x), (-1, y)):
                if isinstance(t, Var):
                    c[t.name] = c.get(t.name, 0) + sign
                else:
                    k -= sign * t.value
            atoms.append(LinAtom.make(c, "=", k))
        if any(a is False for a in atoms):
            return False
        if self.arith is None:
            return True
        return all(self.arith.entails_atom(a) for a in atoms if a is not True)

    def _self_side(self, t: Term, memo) -> Term:
        if isinstance(t, Var):
            if _is_pattern(t.name):
                return t
            return self.resolve(t, None, memo)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self._self_side(a, memo) for a in t.args))
        return t

    def _match(self, p: Term, t: Term, theta: dict, obl: list) -> bool:
        if isinstance(p, Var) and _is_pattern(p.name):
            if p.name in theta:
                return self._same(theta[p.name], t, obl)
            theta[p.name] = t
            return True
        if p == t:
            return True
        if isinstance(p, Compound):
            return (
                isinstance(t, Compound)
                and p.functor == t.functor
                and len(p.args) == len(t.args)
                and all(self._match(a, b, theta, obl) for a, b in zip(p.args, t.args))
            )
        if self.arith is not None and _numeric(p) and _numeric(t):
            obl.append((p, t))
            return True
        return False

    def _same(self, a: Term, b: Term, obl: list) -> bool:
        if a == b:
            return True
        if isinstance(a, Compound) and isinstance(b, Compound):
            return (
                a.functor == b.functor
                and len(a.args) == len(b.args)
                and all(self._same(x, y, obl) for x, y in zip(a.args, b.args))
            )
        if self.arith is not None and _numeric(a) and _numeric(b):
            obl.append((a, b))
            return True
        return False

    def project(self, keep: Iterable[str]) -> ConstraintStore:
        keep = set(keep)
        sigma = self.solved()
        # orient aliases toward kept variables
        rho: dict[str, str] = {}
        for k in sorted(keep):
            t = sigma.get(k)
            if isinstance(t, Var) and t.name not in keep and t.name not in rho:
                rho[t.name] = k
        vm = {w: Var(k) for w, k in rho.items()}
        bindings: dict[str, Term] = {}
        for k in sorted(keep):
            if k in sigma:
                t = substitute(sigma[k], vm) if vm else sigma[k]
                if t != Var(k):
                    bindings[k] = t
        arith = self.arith
        if arith is not None:
            if rho:
                arith = arith.rename(rho)
            live = set(keep)
            for t in bindings.values():
                live.update(term_vars(t))
            arith = arith.project(live & arith.variables())
            # pin variables whose value the arithmetic determines
            fixed = arith.fixed()
            if fixed:
                pins = {v: Const(x) for v, x in fixed.items()}
                for v, x in fixed.items():
                    arith = arith.substitute(v, x)
                bindings = {k: substitute(t, pins) for k, t in bindings.items()}
                for v in fixed:
                    if v in keep and v not in bindings:
                        bindings[v] = pins[v]
        # drop bindings to a witness that occurs nowhere else
        counts: dict[str, int] = {}
        for t in bindings.values():
            for v in term_vars(t):
                counts[v] = counts.get(v, 0) + 1
        arith_vars = arith.variables() if arith is not None else frozenset()
        for k in list(bindings):
            t = bindings[k]
            if isinstance(t, Var) and t.name not in keep and counts[t.name] == 1 and t.name not in arith_vars:
                del bindings[k]
        # canonical witness names by first occurrence
        names: dict[str, str] = {}
        for k in sorted(bindings):
            for v in term_vars(bindings[k]):
                if v not in keep and v not in names:
                    names[v] = f"_E{len(names)}"
        for v in sorted(arith_vars):
            if v not in keep and v not in names:
                names[v] = f"_E{len(names)}"
        if names:
            wm = {w: Var(n) for w, n in names.items()}
            bindings = {k: substitute(t, wm) for k, t in bindings.items()}
            if arith is not None:
                arith = arith.rename(names)
        return self._new(Map(bindings), arith)

    def atoms(self) -> list:
        out = [Constraint("=", Var(k), t) for k, t in sorted(self.solved().items())]
        if self.arith is not None:
            for a in self.arith.atom_list():
                out.append(_atom_constraint(a))
        return out

    def render(self) -> str:
        parts = [f"{k} = {format_term(t, 699)}" for k, t in self.solved().items()]
        if self.arith is not None:
            parts.extend(self.arith.render_atoms())
        return ", ".join(sorted(parts)) if parts else "true"

    def is_true(self) -> bool:
        return not self.bindings and (self.arith is None or self.arith.is_true())

    # ------------------------------------------------------------ engine helpers
    def index_key(self, names: Iterable[str], depth: int = INDEX_DEPTH) -> tuple:
        """Preorder tokens of the solved values of `names`; variables become '*'.

        Below `depth` a ground subterm collapses to one hashed token and any
        other subterm to '*', so keys stay short for deep terms.
        """
        out: list = []
        for n in names:
            stack = [(self.resolve(Var(n)), 0)]
            while stack:
                t, d = stack.pop()
                if isinstance(t, Var):
                    out.append("*")
                elif isinstance(t, Const):
                    out.append(("c", t.value))
                elif d >= depth:
                    out.append(("g", hash(t)) if t.ground else "*")
                else:
                    out.append(("f", t.functor, len(t.args)))
                    stack.extend((a, d + 1) for a in reversed(t.args))
        return tuple(out)

    def ground_values(self, names: Iterable[str]) -> Optional[tuple]:
        """The ground value of every name, or None when some name is not ground."""
        out = []
        for n in names:
            t = self.resolve(Var(n))
            if isinstance(t, Var) or (isinstance(t, Compound) and not t.ground):
                return None
            out.append(t)
        return tuple(out)

    def numeric_point(self, names: Iterable[str]) -> list:
        """Values of `names` in one solution; None where a value is not a number."""
        values = self.arith.sample() if self.arith is not None else {}
        arith_vars = self.arith.variables() if self.arith is not None else frozenset()
        out: list = []
        for n in names:
            t = self.resolve(Var(n))
            if isinstance(t, Const) and t.is_number:
                out.append(t.value)
            elif isinstance(t, Var) and self.arith is not None:
                if t.name in values:
                    out.append(values[t.name])
                else:
                    out.append(None if t.name in arith_vars else Fraction(0))
            else:
                out.append(None)
        return out

    def numeric_box(self, names: Iterable[str]) -> list:
        """Outer bounds (lo, hi) per name; (None, None) when unknown or unbounded."""
        out: list = []
        for n in names:
            t = self.resolve(Var(n))
            if isinstance(t, Const) and t.is_number:
                out.append((t.value, t.value))
            elif isinstance(t, Var) and self.arith is not None:
                out.append(self.arith.bounds(t.name))
            else:
                out.append((None, None))
        return out

    def sample_binding(self, names: Iterable[str]) -> Optional[tuple[str, Term]]:
        """A solution value for the first of `names` that is not yet fixed."""
        values = self.arith.sample() if self.arith is not None else {}
        for n in sorted(names):
            t = self.resolve(Var(n))
            free = list(dict.fromkeys(term_vars(t)))
            if not free:
                continue
            fill = {v: (Const(values[v]) if v in values else self.default_value) for v in free}
            return n, substitute(t, fill)
        return None


def _atom_constraint(a) -> Constraint:
    from .linear import as_fraction

    lhs: Optional[Term] = None
    for v, c in a.coeffs:
        term: Term = Var(v) if c == 1 else Compound("*", (Const(as_fraction(c)), Var(v)))
        lhs = term if lhs is None else Compound("+", (lhs, term))
    op = {"<": "<", "<=": "=<", "=": "=", ">=": ">=", ">": ">"}[a.rel]
    return Constraint(op, lhs, Const(as_fraction(a.rhs)))
