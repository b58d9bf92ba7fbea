"""Exact linear arithmetic over the rationals.

`LinStore` keeps non-unary atoms in a set, unary bounds as per-variable boxes,
and a witness solution (`model`). Adding an atom that the model already
satisfies, or that can be satisfied by moving variables constrained only by
their boxes, is cheap; anything else falls back to Fourier-Motzkin
elimination, which also rebuilds the model by back-substitution.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from immutables import Map

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

from ..terms import format_number
from .base import FMBlowup

FM_CAP = 10_000


@functools.lru_cache(maxsize=4096)
def to_q(x: Fraction):
    return Q(x)


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(int(x.numerator), int(x.denominator))

_ZERO = Q(0)
_FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}
_SHOW = {"<": "<", "<=": "=<", "=": "=", ">=": ">=", ">": ">"}


# ---------------------------------------------------------------- intervals


@dataclass(frozen=True, slots=True)
class Interval:
    """A possibly unbounded, possibly open interval; None marks infinity."""

    lo: Optional[Fraction] = None
    lo_open: bool = False
    hi: Optional[Fraction] = None
    hi_open: bool = False

    @staticmethod
    def point(v: Fraction) -> "Interval":
        return Interval(v, False, v, False)

    @staticmethod
    def from_rel(rel: str, b: Fraction) -> "Interval":
        if rel == "<":
            return Interval(hi=b, hi_open=True)
        if rel == "<=":
            return Interval(hi=b)
        if rel == ">":
            return Interval(lo=b, lo_open=True)
        if rel == ">=":
            return Interval(lo=b)
        return Interval.point(b)

    @property
    def is_full(self) -> bool:
        return self.lo is None and self.hi is None

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi and not self.is_empty

    @property
    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        return self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open))

    def contains(self, x: Fraction) -> bool:
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return True

    def subset_of(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        if other.lo is not None:
            if self.lo is None or self.lo < other.lo:
                return False
            if self.lo == other.lo and other.lo_open and not self.lo_open:
                return False
        if other.hi is not None:
            if self.hi is None or self.hi > other.hi:
                return False
            if self.hi == other.hi and other.hi_open and not self.hi_open:
                return False
        return True

    def intersect(self, o: "Interval") -> "Interval":
        lo, lo_open = self.lo, self.lo_open
        if o.lo is not None and (lo is None or o.lo > lo or (o.lo == lo and o.lo_open)):
            lo, lo_open = o.lo, o.lo_open
        hi, hi_open = self.hi, self.hi_open
        if o.hi is not None and (hi is None or o.hi < hi or (o.hi == hi and o.hi_open)):
            hi, hi_open = o.hi, o.hi_open
        return Interval(lo, lo_open, hi, hi_open)

    def add(self, o: "Interval") -> "Interval":
        lo = None if self.lo is None or o.lo is None else self.lo + o.lo
        hi = None if self.hi is None or o.hi is None else self.hi + o.hi
        return Interval(lo, self.lo_open or o.lo_open, hi, self.hi_open or o.hi_open)

    def scale(self, c: Fraction) -> "Interval":
        if c == 0:
            return Interval.point(_ZERO)
        lo = None if self.lo is None else self.lo * c
        hi = None if self.hi is None else self.hi * c
        if c > 0:
            return Interval(lo, self.lo_open, hi, self.hi_open)
        return Interval(hi, self.hi_open, lo, self.lo_open)

    def shift(self, k: Fraction) -> "Interval":
        return Interval(
            None if self.lo is None else self.lo + k, self.lo_open,
            None if self.hi is None else self.hi + k, self.hi_open,
        )

    def pick(self) -> Fraction:
        """A simple member: 0 if possible, else an integer, else the midpoint."""
        if self.contains(_ZERO):
            return _ZERO
        if self.lo is not None and self.hi is None:
            k = Q(math.floor(self.lo) + 1)
            return self.lo if not self.lo_open and self.lo.denominator == 1 else k
        if self.hi is not None and self.lo is None:
            k = Q(math.ceil(self.hi) - 1)
            return self.hi if not self.hi_open and self.hi.denominator == 1 else k
        if self.lo == self.hi:
            return self.lo
        k = Q(math.ceil(self.lo))
        if self.contains(k):
            return k
        if self.contains(k + 1):
            return k + 1
        return simplest_between(self.lo, self.hi)


def simplest_between(lo, hi):
    """The rational with the smallest denominator strictly inside (lo, hi)."""
    fl = math.floor(lo)
    if hi is None or fl + 1 < hi:
        return Q(fl + 1)
    # no integer strictly inside: recurse on the reciprocal of the fractional part
    upper = None if lo == fl else 1 / (lo - fl)
    return fl + 1 / simplest_between(1 / (hi - fl), upper)


FULL = Interval()


# ---------------------------------------------------------------- atoms


@dataclass(frozen=True, slots=True)
class LinAtom:
    """sum(c*x) rel rhs, coefficients sorted by variable with the first equal to 1."""

    coeffs: tuple
    rel: str
    rhs: Fraction

    @staticmethod
    def make(coeffs: Mapping[str, Fraction], rel: str, rhs) -> Union["LinAtom", bool]:
        items = sorted((v, Q(c)) for v, c in coeffs.items() if c != 0)
        rhs = Q(rhs)
        if not items:
            return _compare(_ZERO, rel, rhs)
        lead = items[0][1]
        if lead != 1:
            items = [(v, c / lead) for v, c in items]
            rhs = rhs / lead
            if lead < 0:
                rel = _FLIP[rel]
        return LinAtom(tuple(items), rel, rhs)

    @property
    def vars(self) -> tuple:
        return tuple(v for v, _ in self.coeffs)

    @property
    def is_unary(self) -> bool:
        return len(self.coeffs) == 1

    def interval(self) -> Interval:
        return Interval.from_rel(self.rel, self.rhs)

    def lhs_value(self, valuation: Mapping[str, Fraction]) -> Fraction:
        return sum((c * valuation[v] for v, c in self.coeffs), _ZERO)

    def holds(self, valuation: Mapping[str, Fraction]) -> bool:
        return _compare(self.lhs_value(valuation), self.rel, self.rhs)

    def substitute(self, mapping: Mapping[str, Union[str, Fraction]]) -> Union["LinAtom", bool]:
        out: dict[str, Fraction] = {}
        rhs = self.rhs
        for v, c in self.coeffs:
            t = mapping.get(v, v)
            if isinstance(t, str):
                out[t] = out.get(t, _ZERO) + c
            else:
                rhs -= c * t
        return LinAtom.make(out, self.rel, rhs)

    def row(self) -> "Row":
        d = dict(self.coeffs)
        if self.rel in ("<", "<=", "="):
            return Row.make(d, -self.rhs, self.rel)
        return Row.make({v: -c for v, c in d.items()}, self.rhs, "<" if self.rel == ">" else "<=")

    def render(self) -> str:
        return f"{render_linear(self.coeffs)} {_SHOW[self.rel]} {format_number(self.rhs)}"

    def __str__(self) -> str:
        return self.render()


def render_linear(coeffs) -> str:
    parts = []
    for i, (v, c) in enumerate(coeffs):
        mag = abs(c)
        term = v if mag == 1 else f"{format_number(mag)}*{v}"
        if i == 0:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {term}")
    return " ".join(parts)


def _compare(a: Fraction, rel: str, b: Fraction) -> bool:
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == "=":
        return a == b
    if rel == ">=":
        return a >= b
    return a > b


# ---------------------------------------------------------------- FM rows


@dataclass(frozen=True, slots=True)
class Row:
    """sum(c*x) + const (kind) 0, kind in '=', '<', '<='."""

    coeffs: tuple
    const: Fraction
    kind: str

    @staticmethod
    def make(coeffs: Mapping[str, Fraction], const: Fraction, kind: str) -> Union["Row", bool]:
        items = sorted((v, c) for v, c in coeffs.items() if c != 0)
        if not items:
            return _compare(const, kind, _ZERO)
        lead = abs(items[0][1])
        if kind == "=" and items[0][1] < 0:
            lead = -lead
        if lead != 1:
            items = [(v, c / lead) for v, c in items]
            const = const / lead
        return Row(tuple(items), const, kind)

    def coeff(self, v: str) -> Fraction:
        for w, c in self.coeffs:
            if w == v:
                return c
        return _ZERO

    def to_atom(self) -> LinAtom:
        rel = "<=" if self.kind == "<=" else self.kind
        return LinAtom.make(dict(self.coeffs), rel, -self.const)

    def negated(self) -> list["Row"]:
        """Rows whose disjunction is the negation; equalities yield two alternatives."""
        neg = {v: -c for v, c in self.coeffs}
        if self.kind == "<":
            return [Row.make(neg, -self.const, "<=")]
        if self.kind == "<=":
            return [Row.make(neg, -self.const, "<")]
        return [Row.make(dict(self.coeffs), self.const, "<"), Row.make(neg, -self.const, "<")]


def _tighter(a: Row, b: Row) -> Row:
    # same coefficients; larger constant is tighter, strict wins ties
    if a.const != b.const:
        return a if a.const > b.const else b
    return a if a.kind == "<" else b


class _System:
    """A working set of rows with deduplication of parallel inequalities."""

    def __init__(self):
        self.eqs: dict[tuple, Row] = {}
        self.ineqs: dict[tuple, Row] = {}
        self.unsat = False

    def add(self, r: Union[Row, bool]):
        if r is True:
            return
        if r is False:
            self.unsat = True
            return
        if r.kind == "=":
            old = self.eqs.get(r.coeffs)
            if old is not None and old.const != r.const:
                self.unsat = True
            self.eqs[r.coeffs] = r
        else:
            old = self.ineqs.get(r.coeffs)
            self.ineqs[r.coeffs] = r if old is None else _tighter(old, r)

    def rows(self) -> list[Row]:
        return list(self.eqs.values()) + list(self.ineqs.values())

    def __len__(self):
        return len(self.eqs) + len(self.ineqs)


def _combine(p: Row, n: Row, v: str) -> Union[Row, bool]:
    a, b = p.coeff(v), -n.coeff(v)
    out: dict[str, Fraction] = {}
    for w, c in p.coeffs:
        out[w] = c * b
    for w, c in n.coeffs:
        out[w] = out.get(w, _ZERO) + c * a
    out.pop(v, None)
    kind = "<" if "<" in (p.kind, n.kind) else "<="
    return Row.make(out, p.const * b + n.const * a, kind)


def _subst_row(r: Row, v: str, expr: dict, const: Fraction) -> Union[Row, bool]:
    # replace v by sum(expr) + const
    a = r.coeff(v)
    if a == 0:
        return r
    out = {w: c for w, c in r.coeffs if w != v}
    for w, c in expr.items():
        out[w] = out.get(w, _ZERO) + a * c
    return Row.make(out, r.const + a * const, r.kind)


def _eliminate(rows: list[Row], v: str, trail: Optional[list] = None) -> Union[list[Row], bool]:
    """Remove v from rows (exact projection). Returns False when unsatisfiable."""
    with_v = [r for r in rows if r.coeff(v) != 0]
    rest = [r for r in rows if r.coeff(v) == 0]
    sys = _System()
    for r in rest:
        sys.add(r)
    eqs = [r for r in with_v if r.kind == "="]
    if eqs:
        e = min(eqs, key=lambda r: len(r.coeffs))
        a = e.coeff(v)
        expr = {w: -c / a for w, c in e.coeffs if w != v}
        const = -e.const / a
        if trail is not None:
            trail.append((v, "eq", expr, const))
        for r in with_v:
            if r is not e:
                sys.add(_subst_row(r, v, expr, const))
    else:
        pos = [r for r in with_v if r.coeff(v) > 0]
        neg = [r for r in with_v if r.coeff(v) < 0]
        if trail is not None:
            trail.append((v, "fm", pos, neg))
        for p in pos:
            for n in neg:
                sys.add(_combine(p, n, v))
                if sys.unsat:
                    return False
    if sys.unsat:
        return False
    if len(sys) > FM_CAP:
        raise FMBlowup(f"more than {FM_CAP} atoms while eliminating {v}")
    return sys.rows()


def _next_var(rows: list[Row], candidates: set) -> str:
    best, best_cost = None, None
    stats: dict[str, list] = {}
    for r in rows:
        for w, c in r.coeffs:
            if w in candidates:
                s = stats.setdefault(w, [0, 0, False])
                if r.kind == "=":
                    s[2] = True
                elif c > 0:
                    s[0] += 1
                else:
                    s[1] += 1
    for w in sorted(stats):
        p, n, has_eq = stats[w]
        cost = -1 if has_eq else p * n - p - n
        if best_cost is None or cost < best_cost:
            best, best_cost = w, cost
    return best


def eliminate_vars(rows: list[Row], drop: Iterable[str]) -> Union[list[Row], bool]:
    cands = set(drop)
    sys = _System()
    for r in rows:
        sys.add(r)
    if sys.unsat:
        return False
    rows = sys.rows()
    while True:
        v = _next_var(rows, cands)
        if v is None:
            return rows
        cands.discard(v)
        rows = _eliminate(rows, v)
        if rows is False:
            return False


def fm_solve(rows: list[Row]) -> Optional[dict]:
    """A solution of the row system, or None when it is unsatisfiable."""
    sys = _System()
    for r in rows:
        sys.add(r)
    if sys.unsat:
        return None
    rows = sys.rows()
    trail: list = []
    cands = {w for r in rows for w, _ in r.coeffs}
    while True:
        v = _next_var(rows, cands)
        if v is None:
            break
        cands.discard(v)
        rows = _eliminate(rows, v, trail)
        if rows is False:
            return None
    model: dict[str, Fraction] = {}

    def val(w):
        return model.setdefault(w, _ZERO)

    for entry in reversed(trail):
        v = entry[0]
        if entry[1] == "eq":
            _, _, expr, const = entry
            model[v] = const + sum((c * val(w) for w, c in expr.items()), _ZERO)
            continue
        _, _, pos, neg = entry
        box = FULL
        for r in pos + neg:
            a = r.coeff(v)
            rest = r.const + sum((c * val(w) for w, c in r.coeffs if w != v), _ZERO)
            bound = -rest / a
            strict = r.kind == "<"
            if a > 0:
                box = box.intersect(Interval(hi=bound, hi_open=strict))
            else:
                box = box.intersect(Interval(lo=bound, lo_open=strict))
        model[v] = box.pick()
    return model


def rows_satisfiable(rows: list[Row]) -> bool:
    return eliminate_vars(rows, {w for r in rows for w, _ in r.coeffs}) is not False


def rows_entail(rows: list[Row], goal: Row) -> bool:
    return all(not rows_satisfiable(rows + [n]) for n in goal.negated() if n is not True)


# ---------------------------------------------------------------- store


def _solve_single(terms: list, rel: str, target: Fraction) -> Optional[list]:
    """Values for sum(c_i * x_i) rel target with each x_i in its interval."""
    scaled = [box.scale(c) for _, c, box in terms]
    total = Interval.point(_ZERO)
    for s in scaled:
        total = total.add(s)
    want = total.intersect(Interval.from_rel(rel, target))
    if want.is_empty:
        return None
    s = want.pick()
    out = []
    for i, (v, c, _) in enumerate(terms):
        if i == len(terms) - 1:
            t = s
            if not scaled[i].contains(t):
                return None
        else:
            rest = Interval.point(_ZERO)
            for r in scaled[i + 1:]:
                rest = rest.add(r)
            choice = scaled[i].intersect(rest.scale(Q(-1)).shift(s))
            if choice.is_empty:
                return None
            t = choice.pick()
        out.append((v, t / c))
        s -= t
    return out


@dataclass(frozen=True, eq=False)
class LinStore:
    """A satisfiable conjunction of linear atoms with a witness solution."""

    nonunary: Map = Map()
    boxes: Map = Map()
    occ: Map = Map()
    model: Map = Map()

    # -- queries
    def variables(self) -> frozenset:
        return frozenset(self.boxes.keys()) | frozenset(self.occ.keys())

    def has_var(self, v: str) -> bool:
        return v in self.boxes or v in self.occ

    def is_true(self) -> bool:
        return not self.nonunary and not self.boxes

    def atom_list(self) -> list[LinAtom]:
        out = list(self.nonunary.keys())
        for v, box in self.boxes.items():
            out.extend(box_atoms(v, box))
        return out

    def rows(self) -> list[Row]:
        return [a.row() for a in self.atom_list()]

    def fixed(self) -> dict:
        return {v: as_fraction(b.lo) for v, b in self.boxes.items() if b.is_point}

    def sample(self) -> dict:
        return {v: as_fraction(x) for v, x in self.model.items()}

    def bounds(self, v: str) -> tuple:
        """Closed outer bounds of v (None when unbounded)."""
        b = self.boxes.get(v, FULL)
        return (None if b.lo is None else as_fraction(b.lo), None if b.hi is None else as_fraction(b.hi))

    def render_atoms(self) -> list[str]:
        return [a.render() for a in self.atom_list()]

    # -- tell
    def tell(self, atom: Union[LinAtom, bool]) -> Optional["LinStore"]:
        if atom is True:
            return self
        if atom is False:
            return None
        if atom.is_unary:
            return self._tell_box(atom.coeffs[0][0], atom.interval())
        return self._tell_general(atom)

    def _tell_box(self, v: str, iv: Interval) -> Optional["LinStore"]:
        old = self.boxes.get(v, FULL)
        new = old.intersect(iv)
        if new.is_empty:
            return None
        if new == old:
            return self
        boxes = self.boxes.set(v, new)
        m = self.model.get(v)
        if m is not None and new.contains(m):
            return LinStore(self.nonunary, boxes, self.occ, self.model)
        if v not in self.occ:
            return LinStore(self.nonunary, boxes, self.occ, self.model.set(v, new.pick()))
        return _rebuild(self.nonunary, boxes)

    def _tell_general(self, a: LinAtom) -> Optional["LinStore"]:
        if a in self.nonunary:
            return self
        model = self.model
        if all(v in model for v in a.vars) and a.holds(model):
            return self._with_atom(a, model)
        flex = [(v, c, self.boxes.get(v, FULL)) for v, c in a.coeffs if v not in self.occ]
        if flex:
            fixed = sum((c * model[v] for v, c in a.coeffs if v in self.occ), _ZERO)
            got = _solve_single(flex, a.rel, a.rhs - fixed)
            if got is not None:
                mm = model.mutate()
                for v, x in got:
                    mm[v] = x
                return self._with_atom(a, mm.finish())
        return _rebuild(self.nonunary.set(a, None), self.boxes)

    def _with_atom(self, a: LinAtom, model: Map) -> "LinStore":
        occ = self.occ.mutate()
        for v in a.vars:
            occ[v] = occ.get(v, frozenset()) | {a}
        return LinStore(self.nonunary.set(a, None), self.boxes, occ.finish(), model)

    def tell_all(self, atoms: Iterable) -> Optional["LinStore"]:
        s = self
        for a in atoms:
            s = s.tell(a)
            if s is None:
                return None
        return s

    # -- variable elimination by substitution
    def _drop_var(self, v: str):
        """Remove v; return (store without v's atoms, the removed atoms)."""
        removed = self.occ.get(v, frozenset())
        nonunary = self.nonunary.mutate()
        occ = self.occ.mutate()
        for a in removed:
            del nonunary[a]
            for w in a.vars:
                if w != v:
                    left = occ[w] - {a}
                    if left:
                        occ[w] = left
                    else:
                        del occ[w]
        occ.pop(v, None)
        boxes = self.boxes.delete(v) if v in self.boxes else self.boxes
        model = self.model.delete(v) if v in self.model else self.model
        return LinStore(nonunary.finish(), boxes, occ.finish(), model), sorted(removed, key=str)

    def substitute(self, v: str, value: Fraction) -> Optional["LinStore"]:
        """Conjoin v = value and eliminate v."""
        if v not in self.variables():
            return self
        if not self.boxes.get(v, FULL).contains(value):
            return None
        base, removed = self._drop_var(v)
        return base.tell_all(a.substitute({v: value}) for a in removed)

    def alias(self, v: str, w: str) -> Optional["LinStore"]:
        """Conjoin v = w and eliminate v."""
        if v == w or v not in self.variables():
            return self
        box = self.boxes.get(v)
        base, removed = self._drop_var(v)
        s = base if box is None else base._tell_box(w, box)
        if s is None:
            return None
        return s.tell_all(a.substitute({v: w}) for a in removed)

    def rename(self, mapping: Mapping[str, str]) -> "LinStore":
        if not any(v in mapping for v in self.variables()):
            return self
        atoms = [a.substitute(mapping) for a in self.nonunary.keys()]
        boxes = {mapping.get(v, v): b for v, b in self.boxes.items()}
        model = {mapping.get(v, v): x for v, x in self.model.items()}
        return _assemble(atoms, boxes, model)

    # -- logic
    def entails_atom(self, a: Union[LinAtom, bool]) -> bool:
        if a is True:
            return True
        if a is False:
            return False
        if all(v in self.model for v in a.vars) and not a.holds(self.model):
            return False
        if a.is_unary and a.vars[0] not in self.occ:
            return self.boxes.get(a.vars[0], FULL).subset_of(a.interval())
        return rows_entail(self.rows(), a.row())

    def entails(self, other: "LinStore") -> bool:
        return all(self.entails_atom(a) for a in other.atom_list())

    def project(self, keep: Iterable[str]) -> "LinStore":
        keep = set(keep)
        if not self.nonunary:
            # boxes only: projection is restriction, already canonical
            boxes = {v: b for v, b in self.boxes.items() if v in keep and not b.is_full}
            model = {v: x for v, x in self.model.items() if v in boxes}
            return LinStore(Map(), Map(boxes), Map(), Map(model))
        drop = self.variables() - keep
        rows = self.rows()
        if drop:
            rows = eliminate_vars(rows, drop)
            if rows is False:  # pragma: no cover - stores are kept satisfiable
                raise AssertionError("projection of a satisfiable store failed")
        model = {v: x for v, x in self.model.items() if v in keep}
        return canonical_store(rows, model)


def box_atoms(v: str, box: Interval) -> list[LinAtom]:
    if box.is_point:
        return [LinAtom(((v, Q(1)),), "=", box.lo)]
    out = []
    if box.lo is not None:
        out.append(LinAtom(((v, Q(1)),), ">" if box.lo_open else ">=", box.lo))
    if box.hi is not None:
        out.append(LinAtom(((v, Q(1)),), "<" if box.hi_open else "<=", box.hi))
    return out


def _assemble(atoms, boxes: Mapping, model: Mapping) -> "LinStore":
    """Build a store from parts known to be consistent with `model`."""
    nonunary: dict = {}
    bx = dict(boxes)
    for a in atoms:
        if a is True:
            continue
        if a.is_unary:
            v = a.vars[0]
            bx[v] = bx.get(v, FULL).intersect(a.interval())
        else:
            nonunary[a] = None
    occ: dict[str, frozenset] = {}
    for a in nonunary:
        for v in a.vars:
            occ[v] = occ.get(v, frozenset()) | {a}
    mdl = dict(model)
    for v in set(bx) | set(occ):
        if v not in mdl:
            mdl[v] = bx.get(v, FULL).pick()
    return LinStore(Map(nonunary), Map(bx), Map(occ), Map(mdl))


def _rebuild(nonunary: Map, boxes: Map) -> Optional[LinStore]:
    rows = [a.row() for a in nonunary.keys()]
    for v, b in boxes.items():
        rows.extend(a.row() for a in box_atoms(v, b))
    model = fm_solve(rows)
    if model is None:
        return None
    return _assemble(list(nonunary.keys()), dict(boxes), model)


def from_atoms(atoms: Iterable) -> Optional[LinStore]:
    return LinStore().tell_all(atoms)


def canonical_store(rows: list[Row], model: Mapping) -> LinStore:
    """Put a satisfiable row system into a canonical, redundancy-free store."""
    sys = _System()
    for r in rows:
        sys.add(r)
    eqs = list(sys.eqs.values())
    ineqs = []
    # fuse e =< k and e >= k into an equality
    for key, r in sys.ineqs.items():
        neg = tuple((v, -c) for v, c in key)
        o = sys.ineqs.get(neg)
        if o is not None and r.kind == "<=" and o.kind == "<=" and o.const == -r.const:
            if key < neg:
                eqs.append(Row.make(dict(key), r.const, "="))
            continue
        ineqs.append(r)
    eqs = _rref(eqs)
    pivots = [(e.coeffs[0][0], e) for e in eqs]
    subbed = []
    for r in ineqs:
        for v, e in pivots:
            a = r.coeff(v) if r is not True else 0
            if a:
                expr = {w: -c for w, c in e.coeffs if w != v}
                r = _subst_row(r, v, expr, -e.const)
        if r is not True:
            subbed.append(r)
    sys2 = _System()
    for r in subbed:
        sys2.add(r)
    atoms = [e.to_atom() for e in eqs] + [r.to_atom() for r in sys2.rows()]
    store = _assemble(atoms, {}, model)
    return _prune(store)


def _rref(eqs: list[Row]) -> list[Row]:
    rows = [dict(e.coeffs) | {"$c": e.const} for e in eqs]
    out: list[dict] = []
    variables = sorted({v for r in rows for v in r if v != "$c"})
    for v in variables:
        piv = next((r for r in rows if r.get(v, 0) != 0), None)
        if piv is None:
            continue
        rows.remove(piv)
        a = piv[v]
        piv = {w: c / a for w, c in piv.items()}
        for group in (rows, out):
            for i, r in enumerate(group):
                f = r.get(v, 0)
                if f:
                    group[i] = {w: r.get(w, 0) - f * piv.get(w, 0) for w in set(r) | set(piv)}
        out.append(piv)
    result = []
    for r in out:
        const = r.pop("$c", _ZERO)
        row = Row.make(r, const, "=")
        if row is not True:
            result.append(row)
    return result


def _prune(store: LinStore) -> LinStore:
    """Drop inequalities implied by the remaining atoms.

    Bounds of variables that occur in non-unary atoms are candidates too, so
    that equivalent full-dimensional systems end up with the same atoms.
    """
    nonunary = list(store.nonunary.keys())
    linked = [v for v in store.occ if v in store.boxes and not store.boxes[v].is_point]
    bounds = [a for v in linked for a in box_atoms(v, store.boxes[v])]
    candidates = [a for a in nonunary if a.rel != "="] + bounds
    if not candidates:
        return store
    candidates.sort(key=str)
    fixed = {v: b for v, b in store.boxes.items() if v not in linked}
    kept = nonunary + bounds
    fixed_rows = [a.row() for v, b in fixed.items() for a in box_atoms(v, b)]
    removed = False
    for a in candidates:
        others = [b.row() for b in kept if b != a] + fixed_rows
        if rows_entail(others, a.row()):
            kept.remove(a)
            removed = True
    if not removed:
        return store
    return _assemble(kept, fixed, dict(store.model))
