"""Bottom-up immediate-consequence operator over constraint literals.

An interpretation maps each predicate p/n to a list of stores over the
position variables _A1.._An; the pair (p(_A1..), c) stands for every
instance of p whose arguments satisfy c. `lfp` iterates `s_step` from the
empty interpretation and serves as the oracle for the engine's answers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .engine import position_vars
from .lang import Clause, Constraint, Program, Query, rename_apart
from .solvers import ConstraintStore, get_domain
from .terms import Var


class OracleIncomplete(Exception):
    """The interpretation is not a fixpoint, so it cannot judge answers."""


@dataclass
class Interpretation:
    domain: str
    pairs: dict = field(default_factory=dict)  # (name, arity) -> [store over _A vars]

    def size(self) -> int:
        return sum(len(v) for v in self.pairs.values())

    def stores(self, indicator) -> list:
        return self.pairs.get(indicator, [])

    def copy(self) -> "Interpretation":
        return Interpretation(self.domain, {k: list(v) for k, v in self.pairs.items()})

    def lines(self) -> list[str]:
        out = []
        for (name, n), stores in self.pairs.items():
            mapping = {a: f"V{i}" for i, a in enumerate(position_vars(n))}
            head = f"{name}({', '.join(mapping.values())})" if n else name
            for c in stores:
                out.append(f"{head} :: {c.rename(mapping).render()}")
        return sorted(out)

    def dump(self) -> str:
        return "".join(line + "\n" for line in self.lines())


@dataclass
class Fixpoint:
    interpretation: Interpretation
    iterations: int
    complete: bool = True


@dataclass
class BoundExceeded:
    interpretation: Interpretation
    iterations: int
    complete: bool = False


@dataclass
class Verdict:
    ok: bool
    witness: Optional[ConstraintStore] = None

    def __bool__(self) -> bool:
        return self.ok


class _Fresh:
    def __init__(self):
        self.counter = itertools.count()

    def clause(self, clause: Clause) -> Clause:
        return rename_apart(clause, self.counter, prefix="_F")

    def names(self, n: int) -> list[str]:
        return [f"_F{next(self.counter)}" for _ in range(n)]


def _bind(store: ConstraintStore, pair: ConstraintStore, args, fresh: _Fresh) -> ConstraintStore:
    """store ∧ pair(renamed to fresh variables) ∧ fresh = args."""
    names = fresh.names(len(args))
    c = store.conjoin(pair.rename(dict(zip(position_vars(len(args)), names))))
    for w, t in zip(names, args):
        if not c.consistent:
            break
        c = c.tell(Constraint("=", Var(w), t))
    return c


def _consequences(clause: Clause, interp: Interpretation, top: ConstraintStore, fresh: _Fresh):
    """Every consistent head store derivable from one clause and `interp`."""
    clause = fresh.clause(clause)
    head_vars = [a.name for a in clause.head.args]
    n = len(head_vars)

    def walk(i: int, c: ConstraintStore):
        if i == len(clause.body):
            yield c.project(head_vars).rename(dict(zip(head_vars, position_vars(n))))
            return
        item = clause.body[i]
        if isinstance(item, Constraint):
            c2 = c.tell(item)
            if c2.consistent:
                yield from walk(i + 1, c2)
            return
        for pair in interp.stores(item.indicator):
            c2 = _bind(c, pair, item.args, fresh)
            if c2.consistent:
                yield from walk(i + 1, c2)

    yield from walk(0, top)


def s_step(program: Program, interp: Interpretation) -> Interpretation:
    """One application of the immediate-consequence operator.

    A derived store entailed by a store already present for the same
    predicate adds nothing (the existing, more general store stands in for it);
    new stores are deduplicated up to mutual entailment. The result contains
    `interp`.
    """
    top = get_domain(program.solver).top()
    fresh = _Fresh()
    out = interp.copy()
    for clause in program.normalized():
        ind = clause.head.indicator
        old = interp.stores(ind)
        for c in _consequences(clause, interp, top, fresh):
            if any(c.entails(o) for o in old):
                continue
            new = out.pairs.setdefault(ind, [])
            if any(c.entails(o) and o.entails(c) for o in new[len(old):]):
                continue
            new.append(c)
    return out


def lfp(program: Program, iter_bound: int = 100):
    """Iterate `s_step` from the empty interpretation."""
    interp = Interpretation(program.solver)
    for i in range(1, iter_bound + 1):
        nxt = s_step(program, interp)
        if nxt.size() == interp.size():
            return Fixpoint(nxt, i)
        interp = nxt
    return BoundExceeded(interp, iter_bound)


def oracle_answers(program: Program, query: Query, result) -> list[ConstraintStore]:
    """Query answers implied by a fixpoint: c_q ∧ pair ∧ args, projected onto the query variables."""
    if not isinstance(result, Fixpoint):
        raise OracleIncomplete(f"no fixpoint within {result.iterations} iterations")
    domain = get_domain(program.solver)
    c_q = domain.store(query.constraints)
    fresh = _Fresh()
    qvars = query.variables()
    out = []
    for pair in result.interpretation.stores(query.goal.indicator):
        c = _bind(c_q, pair, query.goal.args, fresh)
        if c.consistent:
            out.append(c.project(qvars))
    return out


def check_soundness(program: Program, query: Query, answers, result, exact: bool = True) -> Verdict:
    """Every answer is backed by the fixpoint.

    With `exact`, an answer must be equivalent to some oracle answer; otherwise
    it suffices that it entails one (it describes no valuation the fixpoint
    does not).
    """
    oracle = oracle_answers(program, query, result)
    for a in answers:
        if exact:
            backed = any(a.entails(o) and o.entails(a) for o in oracle)
        else:
            backed = any(a.entails(o) for o in oracle)
        if not backed:
            return Verdict(False, a)
    return Verdict(True)


def check_completeness(program: Program, query: Query, answers, result) -> Verdict:
    """Every oracle answer is entailed by some answer."""
    answers = list(answers)
    for o in oracle_answers(program, query, result):
        if not any(o.entails(a) for a in answers):
            return Verdict(False, o)
    return Verdict(True)


__all__ = [
    "BoundExceeded",
    "Fixpoint",
    "Interpretation",
    "OracleIncomplete",
    "Verdict",
    "check_completeness",
    "check_soundness",
    "lfp",
    "oracle_answers",
    "s_step",
]
