"""Resolution engine: SLD-style CLP evaluation and tabled (TCLP) evaluation.

Strategies
    lp, clp      left-to-right, depth-first resolution without tabling
    tab-variant  tabling with variant call and answer checks
    tclp         tabling with entailment checks on calls and answers

Tabled evaluation builds a forest: one tree per generator. A tabled call
whose (projected) store entails an existing generator's store of the same
predicate becomes a consumer of it; otherwise it creates a new generator and
becomes that generator's first consumer. Program-clause branches are explored
depth-first; answer deliveries to consumers wait in a FIFO queue and are taken
only when no branch is left to expand ("first search, then consume").

One transition is one expansion of a pending node (constraint step, clause
resolution, tabled call, or reaching an answer) or one answer delivery.
"""

from __future__ import annotations

import gc
import itertools
import re
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

from .forest import ForestRecord, generator_letter
from .index import BoxIndex, TermIndex
from .lang import Clause, Constraint, Literal, Program, Query, subst_item
from .projection import MODES, apply_projection
from .solvers import ConstraintStore, get_domain
from .terms import Var

STRATEGIES = ("lp", "clp", "tab-variant", "tclp")
POLICIES = ("keep-all", "discard-new-entailed", "discard-and-remove")
DEFAULT_BUDGET = 100_000


class EngineError(Exception):
    pass


class InvariantViolation(EngineError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    strategy: str = "tclp"
    answer_policy: str = "discard-and-remove"
    call_projection: str = "precise"
    answer_projection: str = "precise"
    budget: int = DEFAULT_BUDGET
    record_forest: bool = True
    check_invariants: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.answer_policy not in POLICIES:
            raise ValueError(f"unknown answer policy {self.answer_policy!r}")
        for mode in (self.call_projection, self.answer_projection):
            if mode not in MODES:
                raise ValueError(f"unknown projection mode {mode!r}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass
class Answer:
    store: ConstraintStore
    key: tuple
    alive: bool = True
    values: Optional[tuple] = None  # set when the answer binds every argument to a ground term


@dataclass
class Generator:
    id: int
    indicator: tuple
    store: ConstraintStore  # over the position variables _A1.._An
    tree: int
    answers: list = field(default_factory=list)
    consumers: list = field(default_factory=list)
    index: TermIndex = field(default_factory=TermIndex)
    variants: dict = field(default_factory=dict)
    complete: bool = False

    @property
    def names(self) -> list[str]:
        return position_vars(self.indicator[1])

    @property
    def letter(self) -> str:
        return generator_letter(self.id)

    def literal(self) -> Literal:
        return Literal(self.indicator[0], tuple(Var(n) for n in self.names))

    def live_answers(self) -> list[ConstraintStore]:
        return [a.store for a in self.answers if a.alive]


@dataclass
class Suspension:
    id: int
    generator: Generator
    node: Optional[int]
    tree: int
    args: tuple
    rest: object
    store: ConstraintStore
    delivered: int = 0


@dataclass
class SolveResult:
    status: str  # complete | budget-exceeded
    answers: list
    query: Query
    config: EngineConfig
    generators: list
    forest: Optional[ForestRecord]
    stats: dict

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def answer_texts(self) -> list[str]:
        return [a.render() for a in self.answers]


def position_vars(n: int) -> list[str]:
    return [f"_A{i + 1}" for i in range(n)]


class _Template:
    __slots__ = ("head_vars", "body", "others")

    def __init__(self, clause: Clause):
        self.head_vars = [a.name for a in clause.head.args]
        self.body = clause.body
        hv = set(self.head_vars)
        self.others = [v for v in clause.variables() if v not in hv]


class _Run:
    def __init__(self, program: Program, query: Query, cfg: EngineConfig):
        self.program = program
        self.query = query
        self.cfg = cfg
        self.domain = get_domain(program.solver)
        self.tabling = cfg.strategy in ("tab-variant", "tclp")
        used = [int(m.group(1)) for v in query.all_variables() if (m := re.fullmatch(r"_V(\d+)", v))]
        self.fresh = itertools.count(max(used, default=-1) + 1)
        self.templates: dict = {}
        self.stack: list = []  # pending nodes: (node_id, tree, resolvent, store)
        self.queue: deque = deque()  # (suspension, answer slot)
        self.generators: list[Generator] = []
        self.by_pred: dict = {}
        self.suspensions: list[Suspension] = []
        self.forest = ForestRecord() if cfg.record_forest else None
        self.node_ids = itertools.count()
        self.transitions = 0
        self.stats = {"discarded": 0, "removed": 0, "deliveries": 0, "failures": 0, "sample_fallbacks": 0}
        self.query_answers: list = []
        self.query_keys: set = set()
        self.query_gen: Optional[Generator] = None
        self.query_tree: Optional[int] = None
        self.tree_gen: dict[int, Generator] = {}
        self.tree_count = 0

    # ---------------------------------------------------------------- nodes
    def _new_tree(self, generator: Optional[dict]) -> int:
        if self.forest is not None:
            return self.forest.new_tree(generator)
        self.tree_count += 1
        return self.tree_count - 1

    def _node(self, tree: int, parent: Optional[int], label: str, resolvent, store) -> int:
        if self.forest is not None:
            return self.forest.add_node(tree, parent, label, resolvent, store)
        return next(self.node_ids)

    def _mark(self, nid: Optional[int], mark: str):
        if self.forest is not None and nid is not None:
            self.forest.mark(nid, mark)

    def _push(self, nid: int, tree: int, resolvent, store):
        self.stack.append((nid, tree, resolvent, store))

    def _fallback(self):
        self.stats["sample_fallbacks"] += 1

    def _fresh(self) -> str:
        return f"_V{next(self.fresh)}"

    # ---------------------------------------------------------------- main loop
    def run(self) -> SolveResult:
        q = self.query
        store0 = self.domain.store(q.constraints)
        status = "complete"
        if store0.consistent:
            goal = q.goal
            if self.tabling and self.program.is_tabled(goal.indicator):
                self.query_gen = self._tabled_call(None, None, goal, None, store0)
            else:
                self.query_tree = self._new_tree(None)
                nid = self._node(self.query_tree, None, "", (goal, None), store0)
                self._push(nid, self.query_tree, (goal, None), store0)
            status = self._loop()
        answers = self._collect_answers(store0) if store0.consistent else []
        self._mark_completion(status)
        stats = dict(self.stats)
        stats.update(
            transitions=self.transitions,
            generators=len(self.generators),
            consumers=len(self.suspensions),
            answers=len(answers),
        )
        return SolveResult(status, answers, q, self.cfg, self.generators, self.forest, stats)

    def _loop(self) -> str:
        budget = self.cfg.budget
        stack, queue = self.stack, self.queue
        while True:
            if stack:
                if self.transitions >= budget:
                    return "budget-exceeded"
                self.transitions += 1
                self._expand(*stack.pop())
            elif queue:
                susp, slot = queue.popleft()
                ans = susp.generator.answers[slot]
                if not ans.alive:
                    continue
                if self.transitions >= budget:
                    queue.appendleft((susp, slot))
                    return "budget-exceeded"
                self.transitions += 1
                self._deliver(susp, slot, ans)
            else:
                return "complete"

    # ---------------------------------------------------------------- expansion
    def _expand(self, nid: int, tree: int, resolvent, store: ConstraintStore):
        if resolvent is None:
            self._final(nid, tree, store)
            return
        item, rest = resolvent
        if isinstance(item, Constraint):
            c2 = store.tell(item)
            child = self._node(tree, nid, "constraint", rest, c2)
            if c2.consistent:
                self._push(child, tree, rest, c2)
            else:
                self._mark(child, "fail")
                self.stats["failures"] += 1
            return
        if self.tabling and self.program.is_tabled(item.indicator):
            self._tabled_call(nid, tree, item, rest, store)
            return
        clauses = self.program.clauses_for(item.indicator)
        if not clauses:
            self._mark(nid, "fail")
            self.stats["failures"] += 1
            return
        children = []
        for k, clause in enumerate(clauses):
            r2 = self._resolve_clause(clause, item.args, rest)
            child = self._node(tree, nid, f"clause({k + 1})", r2, store)
            children.append((child, tree, r2, store))
        self.stack.extend(reversed(children))

    def _resolve_clause(self, clause: Clause, args: tuple, rest):
        t = self.templates.get(id(clause))
        if t is None:
            t = self.templates[id(clause)] = _Template(clause)
        mapping = dict(zip(t.head_vars, args))
        for v in t.others:
            mapping[v] = Var(self._fresh())
        r = rest
        for item in reversed(t.body):
            r = (subst_item(item, mapping), r)
        return r

    def _final(self, nid: int, tree: int, store: ConstraintStore):
        if tree == self.query_tree:
            self._mark(nid, "answer")
            self._add_query_answer(store.project(self.query.variables()))
            return
        gen = self.tree_gen[tree]
        a = apply_projection(self.cfg.answer_projection, store, gen.names, self._fallback)
        if self._add_answer(gen, a):
            self._mark(nid, "answer")
        else:
            self._mark(nid, "discarded")

    def _add_query_answer(self, a: ConstraintStore):
        key = a.render()
        if key not in self.query_keys:
            self.query_keys.add(key)
            self.query_answers.append(a)

    # ---------------------------------------------------------------- tabling
    def _call_store(self, lit: Literal, store: ConstraintStore):
        """The call's store over fresh variables W, bound to the literal's arguments."""
        names = [self._fresh() for _ in lit.args]
        c = store
        for w, a in zip(names, lit.args):
            c = c.tell(Constraint("=", Var(w), a))
        return c, names

    def _tabled_call(self, nid, tree, lit: Literal, rest, store: ConstraintStore) -> Generator:
        c1, names = self._call_store(lit, store)
        pos = position_vars(len(names))
        to_pos = dict(zip(names, pos))
        precise = c1.project(names).rename(to_pos)
        gen = self._find_generator(lit.indicator, precise)
        creator = gen is None
        if creator:
            mode = self.cfg.call_projection
            g_store = precise if mode == "precise" else apply_projection(mode, c1, names, self._fallback).rename(to_pos)
            gen = self._new_generator(lit.indicator, g_store, precise)
        if self.cfg.check_invariants and not (creator and self.cfg.call_projection == "under_sample"):
            if not precise.entails(gen.store):
                raise InvariantViolation(f"call {lit} with {precise} does not entail {gen.store}")
        if nid is not None:
            self._suspend(gen, nid, tree, lit.args, rest, store)
            self._mark(nid, f"consumer of {gen.letter}")
        return gen

    def _find_generator(self, indicator, precise: ConstraintStore) -> Optional[Generator]:
        entry = self.by_pred.get(indicator)
        if entry is None:
            return None
        if self.cfg.strategy == "tab-variant":
            return entry["variants"].get(precise.render())
        names = position_vars(indicator[1])
        point = precise.numeric_point(names) if entry["boxes"] is not None else None
        if point is not None and any(x is not None for x in point):
            candidates = entry["boxes"].stab(point)
        else:
            candidates = entry["index"].generalizations(precise.index_key(names))
        for gid in candidates:
            g = self.generators[gid]
            if precise.entails(g.store):
                return g
        return None

    def _new_generator(self, indicator, g_store: ConstraintStore, precise) -> Generator:
        gid = len(self.generators)
        lit = Literal(indicator[0], tuple(Var(n) for n in position_vars(indicator[1])))
        tree = self._new_tree({"literal": str(lit), "store": g_store})
        gen = Generator(gid, indicator, g_store, tree)
        self.generators.append(gen)
        self.tree_gen[tree] = gen
        entry = self.by_pred.get(indicator)
        if entry is None:
            boxes = BoxIndex() if g_store.arith is not None else None
            entry = self.by_pred[indicator] = {"index": TermIndex(), "boxes": boxes, "variants": {}}
        if entry["boxes"] is not None:
            entry["boxes"].insert(g_store.numeric_box(gen.names), gid)
        if self.cfg.strategy == "tab-variant":
            entry["variants"].setdefault(precise.render(), gen)
        entry["index"].insert(g_store.index_key(gen.names), gid)
        resolvent = (lit, None)
        root = self._node(tree, None, "", resolvent, g_store)
        self._expand_root(gen, root, tree, lit, g_store)
        return gen

    def _expand_root(self, gen: Generator, root: int, tree: int, lit: Literal, store):
        # the root is resolved against program clauses (never against the table)
        self.transitions += 1
        clauses = self.program.clauses_for(gen.indicator)
        children = []
        for k, clause in enumerate(clauses):
            r2 = self._resolve_clause(clause, lit.args, None)
            child = self._node(tree, root, f"clause({k + 1})", r2, store)
            children.append((child, tree, r2, store))
        if not children:
            self._mark(root, "fail")
        self.stack.extend(reversed(children))

    def _suspend(self, gen: Generator, nid: int, tree: int, args, rest, store):
        s = Suspension(len(self.suspensions), gen, nid, tree, args, rest, store)
        self.suspensions.append(s)
        gen.consumers.append(s)
        for slot, a in enumerate(gen.answers):
            if a.alive:
                self.queue.append((s, slot))

    def _deliver(self, s: Suspension, slot: int, ans: Answer):
        self.stats["deliveries"] += 1
        gen = s.generator
        if ans.values is not None:
            # a ground answer is just its bindings: tell them directly
            c = s.store
            for t, v in zip(s.args, ans.values):
                if not c.consistent:
                    break
                c = c.tell(Constraint("=", t, v))
        else:
            names = [self._fresh() for _ in s.args]
            a = ans.store.rename(dict(zip(gen.names, names)))
            c = s.store.conjoin(a)
            for w, t in zip(names, s.args):
                if not c.consistent:
                    break
                c = c.tell(Constraint("=", Var(w), t))
        label = f"answer({gen.letter}{slot + 1})"
        child = self._node(s.tree, s.node, label, s.rest, c)
        if c.consistent:
            self._push(child, s.tree, s.rest, c)
        else:
            self._mark(child, "fail")
            self.stats["failures"] += 1

    def _add_answer(self, gen: Generator, a: ConstraintStore) -> bool:
        if not a.consistent:
            return False
        policy = "variant" if self.cfg.strategy == "tab-variant" else self.cfg.answer_policy
        key = a.index_key(gen.names)
        if policy == "variant":
            text = a.render()
            if text in gen.variants:
                self.stats["discarded"] += 1
                return False
            gen.variants[text] = len(gen.answers)
        elif policy != "keep-all":
            for slot in gen.index.generalizations(key):
                old = gen.answers[slot]
                if old.alive and a.entails(old.store):
                    self.stats["discarded"] += 1
                    return False
            if policy == "discard-and-remove":
                for slot in gen.index.instances(key):
                    old = gen.answers[slot]
                    if old.alive and old.store.entails(a):
                        old.alive = False
                        gen.index.remove(old.key, slot)
                        self.stats["removed"] += 1
        slot = len(gen.answers)
        gen.answers.append(Answer(a, key, values=a.ground_values(gen.names)))
        gen.index.insert(key, slot)
        for s in gen.consumers:
            self.queue.append((s, slot))
        return True

    # ---------------------------------------------------------------- results
    def _collect_answers(self, store0: ConstraintStore) -> list:
        if self.query_gen is None:
            return self.query_answers
        gen = self.query_gen
        qvars = self.query.variables()
        for a in gen.live_answers():
            names = [self._fresh() for _ in gen.names]
            c = store0.conjoin(a.rename(dict(zip(gen.names, names))))
            for w, t in zip(names, self.query.goal.args):
                if not c.consistent:
                    break
                c = c.tell(Constraint("=", Var(w), t))
            if c.consistent:
                self._add_query_answer(c.project(qvars))
        return self.query_answers

    def _mark_completion(self, status: str):
        if status == "complete":
            for g in self.generators:
                g.complete = True
            return
        # a generator is complete when nothing pending remains in its dependency closure
        busy = {t for _, t, _, _ in self.stack}
        busy.update(s.tree for s, _ in self.queue)
        dependents: dict[int, set] = {}
        for s in self.suspensions:
            dependents.setdefault(s.generator.tree, set()).add(s.tree)
        todo = list(busy)
        while todo:
            for t in dependents.get(todo.pop(), ()):
                if t not in busy:
                    busy.add(t)
                    todo.append(t)
        for g in self.generators:
            g.complete = g.tree not in busy


def solve(program: Program, query: Query, config: Optional[EngineConfig] = None, **overrides) -> SolveResult:
    """Evaluate `query` against `program`."""
    cfg = config or EngineConfig()
    if overrides:
        cfg = replace(cfg, **overrides)
    # evaluation allocates long-lived, acyclic persistent structures; the cyclic
    # collector only rescans them, so it is paused for the duration of the run
    paused = gc.isenabled()
    gc.disable()
    try:
        return _Run(program, query, cfg).run()
    finally:
        if paused:
            gc.enable()


__all__ = [
    "DEFAULT_BUDGET",
    "EngineConfig",
    "EngineError",
    "Generator",
    "InvariantViolation",
    "POLICIES",
    "STRATEGIES",
    "SolveResult",
    "position_vars",
    "solve",
]
