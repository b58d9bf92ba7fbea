"""Generated-case suites for the solver and engine laws.

Each `suite_*` function runs one hypothesis property for `n` examples and
returns the number of cases actually executed. The acceptance tests call them
with n=500; the module itself is not collected by pytest.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import ground_terms, grid, satisfies, solutions
from tclp.engine import EngineConfig, Generator, InvariantViolation, _Run, solve
from tclp.lang import Constraint
from tclp.parser import parse_program, parse_query
from tclp.solvers import get_domain
from tclp.terms import Compound, Const, Var, num

LINQ = get_domain("linq")
GAP = get_domain("gaporder")
HERB = get_domain("herbrand")

VARS3 = ("X", "Y", "Z")


def _settings(n: int):
    return settings(
        max_examples=n,
        derandomize=True,
        database=None,
        deadline=None,
        suppress_health_check=list(HealthCheck),
    )


def _counting(strategy, n: int, body) -> int:
    seen = [0]

    @_settings(n)
    @given(strategy)
    def run(case):
        seen[0] += 1
        body(case)

    run()
    return seen[0]


# ---------------------------------------------------------------- generators
def _lin_atom():
    coeffs = st.lists(st.integers(-2, 2), min_size=3, max_size=3).filter(any)
    return st.tuples(coeffs, st.sampled_from(["<", "=<", "=", ">=", ">"]), st.integers(-10, 10))


def _lin_text(atom, names=VARS3) -> str:
    coeffs, rel, k = atom
    terms = [f"{c} * {v}" for c, v in zip(coeffs, names) if c]
    return f"{' + '.join(terms)} {rel} {k}"


linq_stores = st.lists(_lin_atom(), min_size=1, max_size=4).map(
    lambda atoms: LINQ.store(", ".join(_lin_text(a) for a in atoms))
)


def _gap_atom():
    pair = st.tuples(st.sampled_from(VARS3), st.sampled_from(VARS3)).filter(lambda p: p[0] != p[1])
    return st.one_of(
        st.tuples(st.just("gap"), pair, st.integers(0, 3)),
        st.tuples(st.just("lo"), st.sampled_from(VARS3), st.integers(-5, 5)),
        st.tuples(st.just("hi"), st.sampled_from(VARS3), st.integers(-5, 5)),
    )


def _gap_text(atom) -> str:
    kind, what, k = atom
    if kind == "gap":
        return f"{what[0]} + {k} < {what[1]}"
    return f"{k} < {what}" if kind == "lo" else f"{what} < {k}"


gap_atom_lists = st.lists(_gap_atom(), min_size=1, max_size=5)

# Herbrand terms over the signature {a/0, f/2}, at most depth 2
_h_leaf = st.one_of(st.sampled_from(VARS3).map(Var), st.just(Const("a")))
_h_term = st.recursive(_h_leaf, lambda inner: st.tuples(inner, inner).map(lambda p: Compound("f", p)), max_leaves=3)
herb_atoms = st.lists(
    st.tuples(st.sampled_from(VARS3).map(Var), _h_term).map(lambda p: Constraint("=", *p)), min_size=0, max_size=3
)
H_UNIVERSE = ground_terms(2)


# ---------------------------------------------------------------- sampling
def _sample_linq(store, names, rng: random.Random, tries: int = 30):
    """One solution of `store` over `names` on the half-step grid, or None."""
    pts = grid(-200, 200, Fraction(1, 2))
    val, s = {}, store
    order = list(names)
    rng.shuffle(order)
    for n in order:
        for _ in range(tries):
            v = rng.choice(pts)
            s2 = s.tell(Constraint("=", Var(n), Const(v)))
            if s2.consistent:
                break
        else:
            got = s.sample_binding([n])
            if got is None:
                v = s.numeric_point([n])[0]
            else:
                v = got[1].value
            s2 = s.tell(Constraint("=", Var(n), Const(v)))
            if not s2.consistent:
                return None
        val[n], s = v, s2
    return val


def _bind(store, val: dict):
    return store.tell_all([Constraint("=", Var(k), Const(v) if isinstance(v, Fraction) else v) for k, v in val.items()])


# ---------------------------------------------------------------- suites
def suite_entailment_preorder(n: int = 500) -> int:
    stores = st.one_of(
        st.tuples(linq_stores, linq_stores, linq_stores),
        st.tuples(*[gap_atom_lists.map(lambda a: GAP.store(", ".join(map(_gap_text, a))))] * 3),
        st.tuples(*[herb_atoms.map(HERB.store)] * 3),
    )

    def body(case):
        a, b, c = case
        assert a.entails(a)
        ab = a.conjoin(b)
        abc = ab.conjoin(c)
        assert ab.entails(a) and ab.entails(b)
        assert abc.entails(ab) and abc.entails(a)  # chain a∧b∧c ⊑ a∧b ⊑ a
        if a.entails(b) and b.entails(c):
            assert a.entails(c)
        assert a.entails(get_domain(a.domain).top())
        if a.consistent:
            keep = sorted(a.variables())[:1]
            assert a.entails(a.project(keep))
        else:
            assert a.entails(b)

    return _counting(stores, n, body)


def suite_projection_def7(n: int = 500) -> int:
    """Both projection bullets, per domain, under the sampling oracles."""
    subsets = st.lists(st.sampled_from(VARS3), min_size=1, max_size=2, unique=True)
    cases = st.one_of(
        st.tuples(st.just("linq"), linq_stores, subsets, st.integers(0, 2**16)),
        st.tuples(st.just("gaporder"), gap_atom_lists, subsets, st.integers(0, 2**16)),
        st.tuples(st.just("herbrand"), herb_atoms, subsets, st.integers(0, 2**16)),
    )

    def body(case):
        dom, c, keep, seed = case
        if dom == "linq":
            _def7_linq(c, keep, random.Random(seed))
        elif dom == "gaporder":
            _def7_gap(c, keep)
        else:
            _def7_herbrand(c, keep)

    return _counting(cases, n, body)


def _def7_linq(c, keep, rng):
    p = c.project(keep)
    assert p.variables() <= set(keep)
    if not c.consistent:
        assert not p.consistent
        return
    for _ in range(3):
        v = _sample_linq(c, VARS3, rng)
        if v is None:
            continue
        assert satisfies(c.atoms(), v), (c, v)
        assert satisfies(p.atoms(), {k: v[k] for k in keep}), (c, keep, p, v)
    for _ in range(3):
        w = _sample_linq(p, keep, rng)
        if w is not None:
            assert satisfies(p.atoms(), w)
            assert _bind(c, w).consistent, (c, keep, p, w)


def _np_eval(t, env):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return int(t.value)
    a, b = (_np_eval(x, env) for x in t.args)
    return a + b if t.functor == "+" else a - b if t.functor == "-" else a * b


_NP_REL = {"<": np.less, "=<": np.less_equal, "=": np.equal, ">=": np.greater_equal, ">": np.greater}


def _np_mask(atoms, env, shape):
    m = np.ones(shape, dtype=bool)
    for a in atoms:
        if a.op != "true":
            m &= _NP_REL[a.op](_np_eval(a.lhs, env), _np_eval(a.rhs, env))
    return m


_R = np.arange(-20, 21)
_MESH = dict(zip(VARS3, np.meshgrid(_R, _R, _R, indexing="ij")))


def _def7_gap(atoms, keep):
    c = GAP.store(", ".join(map(_gap_text, atoms)))
    sols = _np_mask([_parse_gap(a) for a in atoms], _MESH, _MESH["X"].shape)
    # constants and gaps are small, so every satisfiable store has a grid point
    assert c.consistent == bool(sols.any()), (atoms, c)
    p = c.project(keep)
    if not c.consistent:
        assert not p.consistent
        return
    assert satisfies_mask_subset(sols, _np_mask(p.atoms(), _MESH, sols.shape))
    assert satisfies_mask_subset(sols, _np_mask(c.atoms(), _MESH, sols.shape))
    assert satisfies_mask_subset(_np_mask(c.atoms(), _MESH, sols.shape), sols)
    # projected points inside [-8, 8] extend to solutions inside the grid
    axes = tuple(i for i, v in enumerate(VARS3) if v not in keep)
    restricted = sols.any(axis=axes) if axes else sols
    inner = np.abs(_R) <= 8
    sub = {v: np.meshgrid(*[_R] * len(keep), indexing="ij")[i] for i, v in enumerate(sorted(keep, key=VARS3.index))}
    pm = _np_mask(p.atoms(), sub, restricted.shape)
    sel = np.ix_(*[inner] * len(keep))
    assert np.array_equal(pm[sel], restricted[sel]), (atoms, keep, p)


def satisfies_mask_subset(a, b) -> bool:
    return not np.any(a & ~b)


_GAP_CACHE: dict = {}


def _parse_gap(atom):
    from tclp.parser import parse_constraints

    text = _gap_text(atom)
    if text not in _GAP_CACHE:
        _GAP_CACHE[text] = parse_constraints(text)[0]
    return _GAP_CACHE[text]


def _def7_herbrand(atoms, keep):
    c = HERB.store(atoms)
    p = c.project(keep)
    if not c.consistent:
        assert not p.consistent
        return
    for v in solutions(atoms, VARS3, H_UNIVERSE):
        assert _bind(p, {k: v[k] for k in keep}).consistent, (atoms, keep, p, v)
    for w in itertools.product(H_UNIVERSE, repeat=len(keep)):
        wv = dict(zip(keep, w))
        if _bind(p, wv).consistent:
            assert _bind(c, wv).consistent, (atoms, keep, p, wv)
        else:
            assert not _bind(c, wv).consistent


def suite_projection_order(n: int = 500) -> int:
    """linq: eliminating two variables in either order gives one result."""
    names = ("X", "Y", "Z", "W")
    atom = st.tuples(
        st.lists(st.integers(-2, 2), min_size=4, max_size=4).filter(any),
        st.sampled_from(["<", "=<", "=", ">=", ">"]),
        st.integers(-10, 10),
    )
    cases = st.tuples(
        st.lists(atom, min_size=1, max_size=5),
        st.lists(st.sampled_from(names), min_size=2, max_size=2, unique=True),
    )

    def body(case):
        atoms, (u, w) = case
        c = LINQ.store(", ".join(_lin_text(a, names) for a in atoms))
        rest = [v for v in names if v not in (u, w)]
        direct = c.project(rest)
        via_u = c.project([v for v in names if v != u]).project(rest)
        via_w = c.project([v for v in names if v != w]).project(rest)
        for other in (via_u, via_w):
            assert other.entails(direct) and direct.entails(other), (c, u, w, direct, other)
        assert via_u.render() == via_w.render() == direct.render(), (str(c), u, w, direct.render(), via_u.render(), via_w.render())

    return _counting(cases, n, body)


def suite_herbrand_entails(n: int = 500) -> int:
    """h_entails agrees with inclusion of depth-2 ground solution sets."""

    def body(case):
        a0, a1 = case
        s0 = list(solutions(a0, VARS3, H_UNIVERSE))
        c0, c1 = HERB.store(a0), HERB.store(a1)
        if not s0:
            # no ground instance this shallow: only the inconsistent case is decided
            if not c0.consistent:
                assert c0.entails(c1)
            return
        included = all(satisfies(a1, v) for v in s0)
        assert c0.entails(c1) == included, (a0, a1)

    return _counting(st.tuples(herb_atoms, herb_atoms), n, body)


def suite_gaporder_closure(n: int = 500) -> int:
    """Consistency and implied gaps agree with brute force on [-20, 20]^3."""
    cases = st.tuples(gap_atom_lists, st.sampled_from(VARS3), st.sampled_from(VARS3), st.integers(0, 8))

    def body(case):
        atoms, x, y, k = case
        c = GAP.store(", ".join(map(_gap_text, atoms)))
        sols = _np_mask([_parse_gap(a) for a in atoms], _MESH, _MESH["X"].shape)
        assert c.consistent == bool(sols.any()), atoms
        if not c.consistent or x == y:
            return
        # x + k < y holds at every solution iff the closed store entails it
        holds_all = not np.any(sols & ~(_MESH[x] + k < _MESH[y]))
        goal = Constraint("<", Compound("+", (Var(x), num(k))), Var(y))
        assert c.entails(GAP.top().tell(goal)) == holds_all, (atoms, x, y, k)

    return _counting(cases, n, body)


def suite_antichain(n: int = 500) -> int:
    """discard-and-remove keeps a covering antichain of everything offered."""
    offer = st.one_of(
        st.tuples(st.just("="), st.integers(0, 6)),
        st.tuples(st.just(">"), st.integers(-2, 6)),
        st.tuples(st.just("<"), st.integers(-2, 8)),
        st.tuples(st.just("()"), st.integers(-2, 6), st.integers(0, 5)),
    )
    program = parse_program(":- solver(linq).\n:- table q/1.\nq(0).\n")
    query = parse_query("?- q(X).")
    a1 = Var("_A1")

    def store(o):
        if o[0] == "()":
            return LINQ.top().tell_all([Constraint(">", a1, num(o[1])), Constraint("<", a1, num(o[1] + o[2] + 1))])
        return LINQ.top().tell(Constraint(o[0], a1, num(o[1])))

    def body(offers):
        run = _Run(program, query, EngineConfig(answer_policy="discard-and-remove", record_forest=False))
        gen = Generator(0, ("q", 1), LINQ.top(), 0)
        stores = [store(o) for o in offers]
        for s in stores:
            run._add_answer(gen, s)
        live = gen.live_answers()
        for i, x in enumerate(live):
            for j, y in enumerate(live):
                if i != j:
                    assert not x.entails(y), (offers, x, y)
        for s in stores:
            assert any(s.entails(x) for x in live), (offers, s)

    return _counting(st.lists(offer, min_size=1, max_size=8), n, body)


def _dist_program(edges, recursion: str) -> str:
    body = {
        "left": "{D1 > 0, D2 > 0}, {D = D1 + D2}, dist(X, Z, D1), edge(Z, Y, D2)",
        "right": "{D1 > 0, D2 > 0}, {D = D1 + D2}, edge(X, Z, D1), dist(Z, Y, D2)",
    }[recursion]
    lines = [":- solver(linq).", ":- table dist/3.", f"dist(X, Y, D) :- {body}.", "dist(X, Y, D) :- edge(X, Y, D)."]
    for x, y, w, spread in edges:
        if spread:
            lines.append(f"edge({x}, {y}, W) :- {{W > {w}, W < {w + spread}}}.")
        else:
            lines.append(f"edge({x}, {y}, {w}).")
    return "\n".join(lines) + "\n"


def suite_consumer_invariant(n: int = 500) -> int:
    """Every consumer's call store entails its generator's store at run time."""
    nodes = st.sampled_from("abcd")
    edge = st.tuples(nodes, nodes, st.integers(1, 60), st.sampled_from([0, 0, 10]))
    dist_case = st.tuples(
        st.just("dist"), st.lists(edge, min_size=1, max_size=5), st.sampled_from(["left", "right"]), st.integers(10, 120)
    )
    nat_case = st.tuples(st.just("nat"), st.integers(-2, 6), st.integers(0, 15))
    gap_case = st.tuples(st.just("gap"), st.integers(1, 12))
    cases = st.tuples(
        st.one_of(dist_case, nat_case, gap_case),
        st.sampled_from(["precise", "over_true"]),
        st.sampled_from(["keep-all", "discard-new-entailed", "discard-and-remove"]),
    )
    from tclp.corpus import bundled_source

    nat_src, gap_src = bundled_source("nat"), bundled_source("reach_gap")

    def body(case):
        spec, call_mode, policy = case
        if spec[0] == "dist":
            _, edges, rec, bound = spec
            prog = parse_program(_dist_program(edges, rec))
            q = parse_query(f"?- {{D < {bound}}}, dist(a, Y, D).")
        elif spec[0] == "nat":
            _, lo, hi = spec
            prog = parse_program(nat_src)
            q = parse_query(f"?- {{X > {lo}, X < {hi}}}, nat(X).")
        else:
            prog = parse_program(gap_src)
            q = parse_query(f"?- {{T < {spec[1]}}}, reach(a, Y, T).")
        cfg = EngineConfig(
            call_projection=call_mode, answer_policy=policy, budget=400, record_forest=False, check_invariants=True
        )
        try:
            r = solve(prog, q, cfg)
        except InvariantViolation as e:  # pragma: no cover - the property under test
            raise AssertionError(f"consumer invariant fired: {e}") from None
        if policy == "discard-and-remove":
            for g in r.generators:
                live = g.live_answers()
                for i, x in enumerate(live):
                    assert not any(x.entails(y) for j, y in enumerate(live) if j != i)

    return _counting(cases, n, body)


SUITES = {
    "entailment preorder": suite_entailment_preorder,
    "projection bullets": suite_projection_def7,
    "projection order (linq)": suite_projection_order,
    "herbrand entails vs enumeration": suite_herbrand_entails,
    "gaporder closure vs brute force": suite_gaporder_closure,
    "answer antichain": suite_antichain,
    "consumer invariant": suite_consumer_invariant,
}
