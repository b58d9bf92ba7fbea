"""Gap-order constraints over the integers.

Internally a store is a closed difference-bound graph: `lo[(x, y)] = b` means
`y - x >= b`, with the pseudo-variable `$0` standing for the constant zero.
Closure is the all-pairs longest path; a positive cycle means inconsistency.
User atoms must have gap-order shape (`x + k < y` with k >= 0, `u < x`,
`x < u`, their mirrored `>` forms, non-strict or `=` only against constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from ..terms import Const
from .base import MalformedGapAtom
from .herbrand import HerbrandStore
from .linear import LinAtom, as_fraction

ZERO = "$0"


def atom_edges(a: Union[LinAtom, bool], user: bool = False) -> Union[list, bool]:
    """Translate a linear atom into difference edges (x, y, b): y - x >= b."""
    if isinstance(a, bool):
        return a
    if user:
        _check_shape(a)
    rel, r = a.rel, as_fraction(a.rhs)
    if a.is_unary:
        (x, c), = a.coeffs
        if c != 1:
            raise MalformedGapAtom(f"{a} is not a gap-order atom")
        return _bound_edges(ZERO, x, rel, r)
    if len(a.coeffs) == 2 and a.coeffs[0][1] == 1 and a.coeffs[1][1] == -1:
        x, y = a.coeffs[0][0], a.coeffs[1][0]
        return _bound_edges(y, x, rel, r)
    raise MalformedGapAtom(f"{a} is not a difference constraint")


def _bound_edges(y: str, x: str, rel: str, r: Fraction) -> Union[list, bool]:
    # edges for x - y rel r over the integers
    out = []
    if rel in ("<", "<=", "="):
        top = math.ceil(r) - 1 if rel == "<" else math.floor(r)
        out.append((x, y, -top))
    if rel in (">", ">=", "="):
        bot = math.floor(r) + 1 if rel == ">" else math.ceil(r)
        out.append((y, x, bot))
    return out


def _check_shape(a: LinAtom):
    r = as_fraction(a.rhs)
    if r.denominator != 1:
        raise MalformedGapAtom(f"{a}: gap-order constants are integers")
    if a.is_unary:
        return
    if len(a.coeffs) != 2 or a.coeffs[1][1] != -1:
        raise MalformedGapAtom(f"{a} is not a gap-order atom")
    # first - second rel r: strict gap x + k < y needs k >= 0
    if (a.rel == "<" and r <= 0) or (a.rel == ">" and r >= 0):
        return
    raise MalformedGapAtom(f"{a} is not of the form x + k < y with k >= 0")


@dataclass(frozen=True, eq=False)
class GapStore:
    lo: tuple = ()  # sorted ((x, y), b) pairs of the closed graph, x != y
    nodes: frozenset = frozenset()

    @property
    def graph(self) -> dict:
        g = self.__dict__.get("_graph")
        if g is None:
            g = dict(self.lo)
            object.__setattr__(self, "_graph", g)
        return g

    @staticmethod
    def _make(graph: dict, nodes) -> "GapStore":
        s = GapStore(tuple(sorted(graph.items())), frozenset(nodes))
        object.__setattr__(s, "_graph", graph)
        return s

    def bound(self, x: str, y: str) -> Optional[int]:
        if x == y:
            return 0
        return self.graph.get((x, y))

    def variables(self) -> frozenset:
        return self.nodes - {ZERO}

    def has_var(self, v: str) -> bool:
        return v in self.nodes

    def is_true(self) -> bool:
        return not self.lo

    # -- tell
    def add_edges(self, edges: Iterable) -> Optional["GapStore"]:
        g = dict(self.graph)
        nodes = set(self.nodes)
        for x, y, b in edges:
            nodes.add(x)
            nodes.add(y)
            if x == y:
                if b > 0:
                    return None
                continue
            cur = g.get((x, y))
            if cur is not None and cur >= b:
                continue
            back = g.get((y, x))
            if back is not None and back + b > 0:
                return None
            into = [(i, c) for (i, j), c in g.items() if j == x] + [(x, 0)]
            outof = [(j, c) for (i, j), c in g.items() if i == y] + [(y, 0)]
            for i, ci in into:
                for j, cj in outof:
                    if i == j:
                        if ci + b + cj > 0:
                            return None
                        continue
                    w = ci + b + cj
                    old = g.get((i, j))
                    if old is None or w > old:
                        g[(i, j)] = w
        return GapStore._make(g, nodes)

    def tell(self, atom, user: bool = False) -> Optional["GapStore"]:
        edges = atom_edges(atom, user)
        if edges is True:
            return self
        if edges is False:
            return None
        return self.add_edges(edges)

    def tell_user(self, atom) -> Optional["GapStore"]:
        return self.tell(atom, user=True)

    def tell_all(self, atoms) -> Optional["GapStore"]:
        s = self
        for a in atoms:
            s = s.tell(a)
            if s is None:
                return None
        return s

    # -- logic
    def entails_atom(self, a) -> bool:
        edges = atom_edges(a)
        if isinstance(edges, bool):
            return edges
        for x, y, b in edges:
            cur = self.bound(x, y)
            if cur is None or cur < b:
                return False
        return True

    def entails(self, other: "GapStore") -> bool:
        for (x, y), b in other.lo:
            cur = self.bound(x, y)
            if cur is None or cur < b:
                return False
        return True

    def project(self, keep: Iterable[str]) -> "GapStore":
        keep = set(keep) | {ZERO}
        g = {k: b for k, b in self.graph.items() if k[0] in keep and k[1] in keep}
        return GapStore._make(g, (self.nodes & keep) | ({ZERO} if g else set()))

    def rename(self, mapping: Mapping[str, str]) -> "GapStore":
        if not any(v in mapping for v in self.nodes):
            return self
        g = {(mapping.get(x, x), mapping.get(y, y)): b for (x, y), b in self.graph.items()}
        return GapStore._make(g, {mapping.get(v, v) for v in self.nodes})

    def substitute(self, v: str, value: Fraction) -> Optional["GapStore"]:
        if v not in self.nodes:
            return self
        if Fraction(value).denominator != 1:
            return None
        s = self.add_edges([(ZERO, v, int(value)), (v, ZERO, -int(value))])
        return None if s is None else s.project(self.nodes - {v})

    def alias(self, v: str, w: str) -> Optional["GapStore"]:
        if v == w or v not in self.nodes:
            return self
        s = self.add_edges([(v, w, 0), (w, v, 0)])
        return None if s is None else s.project((self.nodes | {w}) - {v})

    # -- views
    def fixed(self) -> dict:
        out = {}
        for v in self.variables():
            lo, hi = self.bound(ZERO, v), self.bound(v, ZERO)
            if lo is not None and hi is not None and lo == -hi:
                out[v] = Fraction(lo)
        return out

    def bounds(self, v: str) -> tuple:
        lo, hi = self.bound(ZERO, v), self.bound(v, ZERO)
        return (None if lo is None else Fraction(lo), None if hi is None else Fraction(-hi))

    def sample(self) -> dict:
        s, out = self, {}
        for v in sorted(self.variables()):
            lo, hi = s.bound(ZERO, v), s.bound(v, ZERO)
            hi = None if hi is None else -hi
            if lo is not None and lo > 0:
                x = lo
            elif hi is not None and hi < 0:
                x = hi
            else:
                x = 0
            out[v] = Fraction(x)
            s = s.add_edges([(ZERO, v, x), (v, ZERO, -x)])
        return out

    def essential_edges(self) -> list:
        """A minimal edge list whose closure is this store (greedy, sorted order)."""
        fixed = self.fixed()
        edges = dict(self.graph)
        for (x, y) in sorted(self.graph):
            b = edges[(x, y)]
            del edges[(x, y)]
            if _longest(edges, x, y) is None or _longest(edges, x, y) < b:
                edges[(x, y)] = b
        return [(x, y, b) for (x, y), b in sorted(edges.items()) if not _is_fixed_edge(x, y, fixed)]

    def atom_list(self) -> list:
        fixed = self.fixed()
        out = [LinAtom.make({v: 1}, "=", x) for v, x in sorted(fixed.items())]
        for x, y, b in self.essential_edges():
            out.append(_edge_atom(x, y, b))
        return out

    def render_atoms(self) -> list[str]:
        fixed = self.fixed()
        out = [f"{v} = {x}" for v, x in sorted(fixed.items())]
        out.extend(_render_edge(x, y, b) for x, y, b in self.essential_edges())
        return out


def _is_fixed_edge(x, y, fixed) -> bool:
    return (x == ZERO and y in fixed) or (y == ZERO and x in fixed)


def _longest(edges: dict, src: str, dst: str) -> Optional[int]:
    # longest path without positive cycles (Bellman-Ford style relaxation)
    dist = {src: 0}
    nodes = {n for k in edges for n in k}
    for _ in range(len(nodes)):
        changed = False
        for (x, y), b in edges.items():
            if x in dist and (y not in dist or dist[x] + b > dist[y]):
                dist[y] = dist[x] + b
                changed = True
        if not changed:
            break
    return dist.get(dst) if dst != src else None


def _edge_atom(x: str, y: str, b: int):
    # y - x >= b
    if x == ZERO:
        return LinAtom.make({y: 1}, ">", b - 1)
    if y == ZERO:
        return LinAtom.make({x: 1}, "<", 1 - b)
    return LinAtom.make({y: 1, x: -1}, ">", b - 1)


def _render_edge(x: str, y: str, b: int) -> str:
    if x == ZERO:
        return f"{y} > {b - 1}"
    if y == ZERO:
        return f"{x} < {1 - b}"
    k = b - 1
    if k > 0:
        return f"{x} + {k} < {y}"
    if k == 0:
        return f"{x} < {y}"
    return f"{x} < {y} + {-k}"


class GapOrderStore(HerbrandStore):
    """Herbrand terms combined with gap-order constraints on integer variables."""

    domain = "gaporder"
    arith_factory = GapStore
    default_value = Const(Fraction(0))


__all__ = ["GapOrderStore", "GapStore", "ZERO", "atom_edges"]
