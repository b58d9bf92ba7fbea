"""Constraint domains behind one interface.

Every domain provides stores supporting conjunction, entailment, projection
and renaming. `get_domain(tag)` returns the domain object for a program's
`:- solver(tag).` directive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .base import (
    ConstraintStore,
    DomainMismatch,
    FMBlowup,
    Inconsistent,
    MalformedGapAtom,
    NonInjectiveRenaming,
    NonLinear,
    NoSampleAvailable,
    SolverError,
    is_witness,
)
from .gaporder import GapOrderStore
from .herbrand import HerbrandStore
from .linq import LinQStore


@dataclass(frozen=True)
class Domain:
    tag: str
    store_class: type

    def top(self) -> ConstraintStore:
        return self.store_class()

    def store(self, constraints: Union[str, Iterable] = ()) -> ConstraintStore:
        """A store from constraint items or text such as `"X > 0, X < 10"`."""
        if isinstance(constraints, str):
            from ..parser import parse_constraints

            constraints = parse_constraints(constraints)
        return self.top().tell_all(constraints)

    def false(self) -> ConstraintStore:
        return Inconsistent(self.tag)


DOMAINS = {
    "herbrand": Domain("herbrand", HerbrandStore),
    "linq": Domain("linq", LinQStore),
    "gaporder": Domain("gaporder", GapOrderStore),
}


def get_domain(tag: str) -> Domain:
    from ..parser import UnknownSolver

    try:
        return DOMAINS[tag]
    except KeyError:
        raise UnknownSolver(f"unknown solver {tag!r}") from None


def consistent(c: ConstraintStore) -> bool:
    return c.consistent


def conjoin(c0: ConstraintStore, c1: ConstraintStore) -> ConstraintStore:
    if not c0.consistent:
        c0.check_domain(c1)
        return c0
    return c0.conjoin(c1)


def entails(c0: ConstraintStore, c1: ConstraintStore) -> bool:
    """c0 ⊑ c1."""
    c0.check_domain(c1)
    if not c0.consistent:
        return True
    return c0.entails(c1)


def equivalent(c0: ConstraintStore, c1: ConstraintStore) -> bool:
    return entails(c0, c1) and entails(c1, c0)


def project(c: ConstraintStore, keep: Iterable[str]) -> ConstraintStore:
    return c.project(keep)


def rename(c: ConstraintStore, mapping: Mapping[str, str]) -> ConstraintStore:
    return c.rename(mapping)


def covers(c0s: Iterable[ConstraintStore], c1s: Iterable[ConstraintStore]) -> bool:
    """Every store of c0s is entailed by some store of c1s."""
    c1s = list(c1s)
    return all(any(entails(a, b) for b in c1s) for a in c0s)


__all__ = [
    "ConstraintStore",
    "DOMAINS",
    "Domain",
    "DomainMismatch",
    "FMBlowup",
    "GapOrderStore",
    "HerbrandStore",
    "Inconsistent",
    "LinQStore",
    "MalformedGapAtom",
    "NoSampleAvailable",
    "NonInjectiveRenaming",
    "NonLinear",
    "SolverError",
    "conjoin",
    "consistent",
    "covers",
    "entails",
    "equivalent",
    "get_domain",
    "is_witness",
    "project",
    "rename",
]
