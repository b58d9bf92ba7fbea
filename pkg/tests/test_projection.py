import json
import warnings

import pytest
from hypothesis import given, settings

from property_suites import linq_stores
from tclp.projection import MODES, apply_projection
from tclp.projvariants import (
    ANSWER_MODES,
    CALL_MODES,
    CellVerdict,
    expected_complete,
    expected_sound,
    report,
    report_json,
    run_variant_matrix,
)
from tclp.solvers import NoSampleAvailable, get_domain

L = get_domain("linq")
H = get_domain("herbrand")


class TestApplyProjection:
    def test_modes(self):
        assert MODES == ("precise", "over_true", "over_drop", "under_sample")

    def test_over_true(self):
        assert apply_projection("over_true", L.store("X > 3, Y = X"), ["X"]).render() == "true"

    def test_over_drop_loses_linked_bound(self):
        c = L.store("X = Y + 1, Y > 0")
        assert apply_projection("over_drop", c, ["X"]).render() == "true"
        assert apply_projection("precise", c, ["X"]).render() == "X > 1"

    def test_over_drop_keeps_local_atoms(self):
        c = L.store("X < 7, X = Y + 1, Y > 0")
        assert apply_projection("over_drop", c, ["X"]).render() == "X < 7"

    def test_under_sample_binds_one_variable(self):
        c = L.store("X = Y + 1, Y > 0")
        assert apply_projection("under_sample", c, ["X"]).render() == "X = 2"

    def test_under_sample_herbrand(self):
        got = apply_projection("under_sample", H.store("X = f(Y)"), ["X"])
        assert got.entails(H.store("X = f(Y)").project(["X"]))
        assert not got.render().count("_E")

    def test_under_sample_fallback_warns(self):
        c = L.store("X = 4")
        with pytest.warns(UserWarning):
            assert apply_projection("under_sample", c, ["X"]).render() == "X = 4"

    def test_under_sample_fallback_callback(self):
        calls = []
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            apply_projection("under_sample", L.store("X = 4"), ["X"], on_fallback=lambda: calls.append(1))
        assert calls == [1]

    def test_warning_category(self):
        assert issubclass(NoSampleAvailable, Warning)

    def test_inconsistent_passthrough(self):
        for mode in MODES:
            assert not apply_projection(mode, L.store("X > 1, X < 0"), ["X"]).consistent

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            apply_projection("exact", L.top(), [])


@settings(max_examples=150, deadline=None, derandomize=True, database=None)
@given(linq_stores)
def test_mode_ordering(c):
    keep = ["X"]
    precise = apply_projection("precise", c, keep)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        under = apply_projection("under_sample", c, keep)
    assert under.entails(precise)
    assert precise.entails(apply_projection("over_drop", c, keep))
    assert precise.entails(apply_projection("over_true", c, keep))


class TestExpectations:
    def test_sound_pattern(self):
        assert [expected_sound(c, a) for a in ANSWER_MODES for c in CALL_MODES] == [
            True, True, True, False, False, False, True, True, True,
        ]

    def test_complete_pattern(self):
        assert [expected_complete(c, a) for a in ANSWER_MODES for c in CALL_MODES] == [
            True, True, False, True, True, False, False, False, False,
        ]

    def test_agrees_ignores_unguaranteed(self):
        cell = CellVerdict("precise", "over_drop", sound=True, complete=True)
        assert cell.agrees()
        assert not CellVerdict("precise", "precise", sound=True, complete=False).agrees()
        assert not CellVerdict("precise", "precise").agrees()


@pytest.fixture(scope="module")
def cells():
    return {(c.call, c.answer): c for c in run_variant_matrix()}


class TestVariantMatrix:
    def test_nine_cells(self, cells):
        assert len(cells) == 9
        assert all(c.sound is not None for c in cells.values())

    def test_call_abstraction_sound_and_complete(self, cells):
        c = cells[("over_true", "precise")]
        assert c.sound and c.complete

    def test_over_drop_answers_unsound(self, cells):
        c = cells[("precise", "over_drop")]
        assert c.sound is False
        assert c.sound_witness == "dist_acyclic: D < 150, Y = c"

    def test_under_sample_calls_incomplete(self, cells):
        c = cells[("under_sample", "precise")]
        assert c.complete is False
        assert c.complete_witness == "p: X = a"

    def test_every_guaranteed_cell_holds(self, cells):
        assert all(c.agrees() for c in cells.values())

    def test_report(self, cells):
        text = report(list(cells.values()))
        assert text.startswith("soundness (rows: answer projection, columns: call projection)")
        assert "unsound call=precise answer=over_drop: dist_acyclic: D < 150, Y = c" in text
        assert "no counterexample to soundness found in corpus for call=under_sample answer=over_drop" in text

    def test_report_json(self, cells):
        data = json.loads(report_json(list(cells.values())))
        assert len(data["cells"]) == 9
        assert {"call", "answer", "sound", "complete", "expected_sound", "expected_complete"} <= set(data["cells"][0])


def test_not_run_entries():
    from tclp.corpus import load

    program, query = load("nat")
    (cell,) = [c for c in run_variant_matrix([("nat", program, query)], iter_bound=5) if c.call == c.answer == "precise"]
    assert cell.sound is None and cell.statuses == {"nat": "not-run"}
