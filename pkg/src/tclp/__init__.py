"""Tabled constraint logic programming: engine, solvers and fixpoint oracle."""

from .engine import EngineConfig, SolveResult, solve
from .lang import Clause, Constraint, Literal, Program, Query
from .parser import ParseError, parse_program, parse_query
from .solvers import get_domain

__all__ = [
    "Clause",
    "Constraint",
    "EngineConfig",
    "Literal",
    "ParseError",
    "Program",
    "Query",
    "SolveResult",
    "get_domain",
    "parse_program",
    "parse_query",
    "solve",
]
