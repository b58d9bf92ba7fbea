import itertools
from fractions import Fraction

import pytest

from oracles import ground_terms, satisfies
from tclp.lang import (
    ArityConflict,
    Clause,
    Constraint,
    Literal,
    Program,
    alpha_equivalent,
    format_program,
    normalize_clause,
    rename_apart,
)
from tclp.parser import ParseError, UnknownSolver, parse_clause, parse_program, parse_query, parse_term
from tclp.terms import Const, Var, num

FIG1C = """
:- solver(linq).
:- table dist/3.
dist(X, Y, D) :- {D1 > 0, D2 > 0}, {D = D1 + D2}, edge(X, Z, D1), dist(Z, Y, D2).
dist(X, Y, D) :- edge(X, Y, D).
"""


def test_fig1c_source_parses():
    prog = parse_program(FIG1C)
    assert prog.solver == "linq"
    assert prog.tabled == frozenset({("dist", 3)})
    assert len(prog.clauses) == 2
    assert [str(i) for i in prog.clauses[0].body[-2:]] == ["edge(X, Z, D1)", "dist(Z, Y, D2)"]


def test_fact_program():
    prog = parse_program("p(a).")
    assert len(prog.clauses) == 1
    assert prog.clauses[0].body == ()
    assert prog.solver == "herbrand"


def test_missing_paren_reports_position():
    with pytest.raises(ParseError) as err:
        parse_program("p(X) :- q(X")
    assert (err.value.line, err.value.col) == (1, 12)
    assert "')'" in str(err.value)


def test_unknown_solver():
    with pytest.raises(UnknownSolver):
        parse_program(":- solver(reals).\np(1).")


def test_arity_conflict():
    with pytest.raises(ArityConflict):
        parse_program("p(a).\np(a, b).")
    with pytest.raises(ArityConflict):
        parse_program(":- table p/2.\np(a).")


def test_reserved_witness_names_rejected():
    with pytest.raises(ParseError):
        parse_query("?- p(_E3).")


def test_constraint_syntax_aliases():
    c = parse_clause("q(D) :- D is 1 + 2, D .>. 0, D #< 5.")
    assert [i.op for i in c.body] == ["=", ">", "<"]


def test_rationals_and_decimals():
    assert parse_term("3/4") == parse_term("0.75") == num(Fraction(3, 4))
    assert str(parse_term("6/8")) == "3/4"


def test_embedded_queries_roundtrip():
    prog = parse_program(FIG1C + "?- {D < 150}, dist(a, Y, D).\n")
    assert [str(q) for q in prog.queries] == ["?- {D < 150}, dist(a, Y, D)."]
    again = parse_program(format_program(prog))
    assert again.queries == prog.queries
    assert again.clauses == prog.clauses


def test_query_parts():
    q = parse_query("?- {X > 0, X < 10}, nat(X).")
    assert len(q.constraints) == 2
    assert q.goal == Literal("nat", (Var("X"),))
    assert q.variables() == ["X"]


# -- normalization
def test_normalize_fact():
    c = normalize_clause(parse_clause("p(a)."))
    assert str(c) == "p(_N0) :- {_N0 = a}."


def test_normalize_linear_head_unchanged():
    c = parse_clause("dist(X, Y, D) :- edge(X, Y, D).")
    assert normalize_clause(c) == c


def test_normalize_repeated_variable():
    c = normalize_clause(parse_clause("p(X, X)."))
    assert str(c) == "p(X, _N0) :- {_N0 = X}."
    # same ground instances as the original, enumerated to depth 2
    universe = ground_terms(2)
    original = {(t, t) for t in universe}
    normalized = {
        (x, v) for x, v in itertools.product(universe, repeat=2) if satisfies(c.body, {"X": x, "_N0": v})
    }
    assert original == normalized


def test_rename_apart_with_counter():
    c = parse_clause("p(X) :- {X = a}.")
    assert str(rename_apart(c, itertools.count(7))) == "p(_V7) :- {_V7 = a}."


def test_rename_apart_ground_clause_identical():
    c = parse_clause("p(a) :- q(b).")
    assert rename_apart(c, itertools.count()) == c


def test_rename_twice_alpha_equivalent():
    c = parse_clause("p(X, Y) :- {X < Y}, q(Y, Z).")
    r1 = rename_apart(c, itertools.count(0))
    r2 = rename_apart(c, itertools.count(100))
    assert r1 != r2
    assert alpha_equivalent(r1, r2)
    assert alpha_equivalent(r1, c)


def test_program_accessors():
    prog = parse_program(FIG1C + "edge(a, b, 50).\n")
    assert prog.predicates() == [("dist", 3), ("edge", 3)]
    assert prog.is_tabled(("dist", 3)) and not prog.is_tabled(("edge", 3))
    (edge,) = prog.clauses_for(("edge", 3))
    assert str(edge) == "edge(_N0, _N1, _N2) :- {_N0 = a}, {_N1 = b}, {_N2 = 50}."


def test_constraint_validation():
    from tclp.lang import LanguageError

    with pytest.raises(LanguageError):
        Constraint("!=", Var("X"), num(1))
    assert str(Constraint("=", Var("X"), Const("a"))) == "X = a"


def test_with_clauses_keeps_settings():
    prog = parse_program(FIG1C)
    more = prog.with_clauses([Clause(Literal("edge", (Const("a"), Const("b"), num(50))))])
    assert isinstance(more, Program)
    assert more.tabled == prog.tabled and more.solver == "linq"
    assert len(more.clauses) == 3
