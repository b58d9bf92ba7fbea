"""Projection operators used for generator calls and answers."""

from __future__ import annotations

import warnings
from typing import Iterable

from .lang import Constraint
from .solvers import ConstraintStore, NoSampleAvailable
from .terms import Var, term_vars

MODES = ("precise", "over_true", "over_drop", "under_sample")


def apply_projection(mode: str, c: ConstraintStore, keep: Iterable[str], on_fallback=None) -> ConstraintStore:
    """Project `c` onto `keep` under one of the projection modes.

    precise       exact existential projection
    over_true     the empty (true) store: maximal over-approximation
    over_drop     keep only atoms whose variables all lie in `keep`
    under_sample  the precise projection plus one sampled value for one variable

    When under_sample finds nothing to sample it falls back to the precise
    result and warns, or calls `on_fallback()` instead when given.
    """
    keep = list(keep)
    if mode == "precise":
        return c.project(keep)
    if not c.consistent:
        return c
    if mode == "over_true":
        return type(c)()
    if mode == "over_drop":
        ks = set(keep)
        kept = [a for a in c.atoms() if set(_constraint_vars(a)) <= ks]
        return type(c)().tell_all(kept).project(keep)
    if mode == "under_sample":
        p = c.project(keep)
        got = p.sample_binding(keep)
        if got is None:
            if on_fallback is not None:
                on_fallback()
                return p
            warnings.warn(NoSampleAvailable("every projected variable is already fixed"), stacklevel=2)
            return p
        name, value = got
        return p.tell(Constraint("=", Var(name), value)).project(keep)
    raise ValueError(f"unknown projection mode {mode!r}")


def _constraint_vars(a: Constraint):
    if a.op == "true":
        return []
    return list(term_vars(a.lhs)) + list(term_vars(a.rhs))
