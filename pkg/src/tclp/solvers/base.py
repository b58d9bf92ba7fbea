"""Domain-agnostic constraint-store interface.

A store is an immutable value. Operations that can fail logically return an
`Inconsistent` store instead of raising; errors are reserved for misuse
(mixing domains, non-injective renamings, unsupported atoms).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Mapping

WITNESS_PREFIX = "_E"


class SolverError(Exception):
    pass


class DomainMismatch(SolverError):
    pass


class NonInjectiveRenaming(SolverError):
    pass


class NonLinear(SolverError):
    pass


class MalformedGapAtom(SolverError):
    pass


class FMBlowup(SolverError):
    """Fourier-Motzkin elimination exceeded its atom cap."""


class NoSampleAvailable(UserWarning):
    pass


def is_witness(name: str) -> bool:
    """Existential variables introduced by projection are named `_E<n>`."""
    return name.startswith(WITNESS_PREFIX) and name[2:].isdigit()


class ConstraintStore(ABC):
    domain: str = "?"

    @property
    def consistent(self) -> bool:
        return True

    @abstractmethod
    def tell(self, constraint) -> "ConstraintStore":
        """Conjoin one primitive constraint (a `lang.Constraint`)."""

    @abstractmethod
    def conjoin(self, other: "ConstraintStore") -> "ConstraintStore": ...

    @abstractmethod
    def entails(self, other: "ConstraintStore") -> bool:
        """self ⊑ other: every solution of self is a solution of other."""

    @abstractmethod
    def project(self, keep: Iterable[str]) -> "ConstraintStore": ...

    @abstractmethod
    def rename(self, mapping: Mapping[str, str]) -> "ConstraintStore": ...

    @abstractmethod
    def variables(self) -> frozenset: ...

    @abstractmethod
    def atoms(self) -> list:
        """The store as a list of `lang.Constraint` items."""

    def render(self) -> str:
        parts = sorted(str(a) for a in self.atoms())
        return ", ".join(parts) if parts else "true"

    def __str__(self) -> str:
        return self.render()

    def check_domain(self, other: "ConstraintStore"):
        if other.domain != self.domain:
            raise DomainMismatch(f"cannot combine {self.domain} and {other.domain} stores")


@dataclass(frozen=True)
class Inconsistent(ConstraintStore):
    """The unsatisfiable store of a domain."""

    domain: str = "?"

    @property
    def consistent(self) -> bool:
        return False

    def tell(self, constraint):
        return self

    def conjoin(self, other):
        self.check_domain(other)
        return self

    def entails(self, other):
        self.check_domain(other)
        return True

    def project(self, keep):
        return self

    def rename(self, mapping):
        return self

    def variables(self):
        return frozenset()

    def atoms(self):
        return []

    def render(self) -> str:
        return "false"


def check_injective(mapping: Mapping[str, str], names: Iterable[str]):
    seen: dict[str, str] = {}
    for n in names:
        img = mapping.get(n, n)
        if img in seen and seen[img] != n:
            raise NonInjectiveRenaming(f"{seen[img]} and {n} both map to {img}")
        seen[img] = n
