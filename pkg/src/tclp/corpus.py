"""Bundled example programs and the termination matrix over the distance corpus."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional

from .engine import STRATEGIES, EngineConfig, solve
from .lang import Program, Query
from .parser import parse_program

GRAPHS = {
    "acyclic": [("a", "b", 50), ("b", "c", 30)],
    "cyclic": [("a", "b", 50), ("b", "a", 30), ("b", "c", 20)],
}
RECURSIONS = ("left", "right")
MATRIX_BOUND = 150

# strategy -> (graph, recursion) -> completes?
TABLE1_EXPECTED = {
    "lp": {("acyclic", "left"): False, ("acyclic", "right"): True, ("cyclic", "left"): False, ("cyclic", "right"): False},
    "clp": {("acyclic", "left"): False, ("acyclic", "right"): True, ("cyclic", "left"): False, ("cyclic", "right"): True},
    "tab-variant": {
        ("acyclic", "left"): True,
        ("acyclic", "right"): True,
        ("cyclic", "left"): False,
        ("cyclic", "right"): False,
    },
    "tclp": {("acyclic", "left"): True, ("acyclic", "right"): True, ("cyclic", "left"): True, ("cyclic", "right"): True},
}

_LP_BODY = {
    "left": "dist(X, Z, D1), edge(Z, Y, D2), D is D1 + D2",
    "right": "edge(X, Z, D1), dist(Z, Y, D2), D is D1 + D2",
}
_CLP_BODY = {
    "left": "{D1 > 0, D2 > 0}, {D = D1 + D2}, dist(X, Z, D1), edge(Z, Y, D2)",
    "right": "{D1 > 0, D2 > 0}, {D = D1 + D2}, edge(X, Z, D1), dist(Z, Y, D2)",
}


def bundled_names() -> list[str]:
    return sorted(p.name for p in resources.files("tclp.programs").iterdir() if p.name.endswith(".pl"))


def bundled_source(name: str) -> str:
    if not name.endswith(".pl"):
        name += ".pl"
    return resources.files("tclp.programs").joinpath(name).read_text(encoding="utf-8")


def load(name: str) -> tuple[Program, Query]:
    """A bundled program with its first embedded query."""
    program = parse_program(bundled_source(name))
    return program, program.queries[0]


def dist_source(graph: str, recursion: str, encoding: str) -> str:
    """The distance program over one of the matrix graphs.

    The `lp` encoding computes distances with `is` after the recursive call and
    filters with a driver clause; the `clp` encoding states the constraints
    before the calls so that the query bound prunes the search.
    """
    lines = [":- solver(linq).", ":- table dist/3."]
    body = (_LP_BODY if encoding == "lp" else _CLP_BODY)[recursion]
    lines.append(f"dist(X, Y, D) :- {body}.")
    lines.append("dist(X, Y, D) :- edge(X, Y, D).")
    lines.extend(f"edge({x}, {y}, {w})." for x, y, w in GRAPHS[graph])
    if encoding == "lp":
        lines.append(f"query(Y, D) :- dist(a, Y, D), {{D < {MATRIX_BOUND}}}.")
        lines.append("?- query(Y, D).")
    else:
        lines.append(f"?- {{D < {MATRIX_BOUND}}}, dist(a, Y, D).")
    return "\n".join(lines) + "\n"


def encoding_for(strategy: str) -> str:
    return "lp" if strategy in ("lp", "tab-variant") else "clp"


def dist_program(graph: str, recursion: str, strategy: str) -> tuple[Program, Query]:
    program = parse_program(dist_source(graph, recursion, encoding_for(strategy)))
    return program, program.queries[0]


@dataclass
class MatrixCell:
    graph: str
    recursion: str
    strategy: str
    status: str
    answers: int
    transitions: int
    seconds: float

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def expected(self) -> bool:
        return TABLE1_EXPECTED[self.strategy][(self.graph, self.recursion)]


def run_matrix(budget: int = 100_000, strategies=STRATEGIES, base: Optional[EngineConfig] = None) -> list[MatrixCell]:
    """Run every (graph, recursion, strategy) cell and report termination."""
    cells = []
    for graph in GRAPHS:
        for recursion in RECURSIONS:
            for strategy in strategies:
                program, query = dist_program(graph, recursion, strategy)
                cfg = replace(base or EngineConfig(), strategy=strategy, budget=budget, record_forest=False)
                t0 = time.perf_counter()
                r = solve(program, query, cfg)
                dt = time.perf_counter() - t0
                cells.append(
                    MatrixCell(graph, recursion, strategy, r.status, len(r.answers), r.stats["transitions"], dt)
                )
    return cells


def format_matrix(cells: list[MatrixCell]) -> str:
    strategies = list(dict.fromkeys(c.strategy for c in cells))
    head = f"{'graph':<8} {'recursion':<9} " + " ".join(f"{s:>11}" for s in strategies)
    lines = [head]
    for graph in GRAPHS:
        for recursion in RECURSIONS:
            row = {c.strategy: c for c in cells if c.graph == graph and c.recursion == recursion}
            if not row:
                continue
            marks = " ".join(f"{('yes' if row[s].complete else 'no'):>11}" for s in strategies if s in row)
            lines.append(f"{graph:<8} {recursion:<9} {marks}")
    return "\n".join(lines) + "\n"


def matrix_corpus() -> list[tuple[str, Program, Query]]:
    """Programs with a finite least fixpoint, used by the oracle checks."""
    return [(name, *load(name)) for name in ("p", "dist_acyclic", "reach_gap")]


__all__ = [
    "GRAPHS",
    "MatrixCell",
    "TABLE1_EXPECTED",
    "bundled_names",
    "bundled_source",
    "dist_program",
    "dist_source",
    "format_matrix",
    "load",
    "matrix_corpus",
    "run_matrix",
]
