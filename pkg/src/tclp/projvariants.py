"""Soundness and completeness of tabled evaluation under approximate projections.

Every (call mode, answer mode) cell runs the tclp strategy on a corpus of
programs whose least fixpoint is finite, and judges the answers against that
fixpoint. Soundness here means each answer entails some oracle answer (an
under-approximated answer is still sound); completeness means each oracle
answer is entailed by some answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .corpus import matrix_corpus
from .engine import EngineConfig, solve
from .fixpoint import Fixpoint, OracleIncomplete, check_completeness, check_soundness, lfp

CALL_MODES = ("precise", "over_true", "under_sample")
ANSWER_MODES = ("precise", "over_drop", "under_sample")
SYMBOL = {"precise": "≡", "over_true": "⊑", "over_drop": "⊑", "under_sample": "⊒"}

VARIANT_BUDGET = 10_000


def expected_sound(call: str, answer: str) -> bool:
    """Sound unless answers are over-approximated."""
    return not answer.startswith("over")


def expected_complete(call: str, answer: str) -> bool:
    """Complete unless calls or answers are under-approximated."""
    return not call.startswith("under") and not answer.startswith("under")


@dataclass
class CellVerdict:
    call: str
    answer: str
    sound: Optional[bool] = None  # None: not run
    complete: Optional[bool] = None
    sound_witness: Optional[str] = None
    complete_witness: Optional[str] = None
    statuses: dict = field(default_factory=dict)  # corpus entry -> engine status

    @property
    def expected_sound(self) -> bool:
        return expected_sound(self.call, self.answer)

    @property
    def expected_complete(self) -> bool:
        return expected_complete(self.call, self.answer)

    def agrees(self) -> bool:
        """Every guaranteed property holds; properties marked as not guaranteed may go either way."""
        ok = True
        if self.expected_sound:
            ok &= self.sound is True
        if self.expected_complete:
            ok &= self.complete is True
        return ok

    def to_json(self) -> dict:
        return {
            "call": self.call,
            "answer": self.answer,
            "sound": self.sound,
            "complete": self.complete,
            "expected_sound": self.expected_sound,
            "expected_complete": self.expected_complete,
            "sound_witness": self.sound_witness,
            "complete_witness": self.complete_witness,
            "statuses": self.statuses,
        }


def run_cell(call: str, answer: str, corpus, oracles: dict, budget: int = VARIANT_BUDGET) -> CellVerdict:
    cell = CellVerdict(call, answer)
    sound = complete = True
    ran = False
    for name, program, query in corpus:
        oracle = oracles[name]
        if not isinstance(oracle, Fixpoint):
            cell.statuses[name] = "not-run"
            continue
        cfg = EngineConfig(
            strategy="tclp", call_projection=call, answer_projection=answer, budget=budget, record_forest=False
        )
        r = solve(program, query, cfg)
        cell.statuses[name] = r.status
        ran = True
        try:
            s = check_soundness(program, query, r.answers, oracle, exact=False)
            c = check_completeness(program, query, r.answers, oracle)
        except OracleIncomplete:  # pragma: no cover - guarded above
            cell.statuses[name] = "not-run"
            continue
        if not s and sound:
            sound = False
            cell.sound_witness = f"{name}: {s.witness.render()}"
        if not c and complete:
            complete = False
            cell.complete_witness = f"{name}: {c.witness.render()}"
    if ran:
        cell.sound, cell.complete = sound, complete
    return cell


def run_variant_matrix(corpus=None, budget: int = VARIANT_BUDGET, iter_bound: int = 100) -> list[CellVerdict]:
    corpus = list(corpus) if corpus is not None else matrix_corpus()
    oracles = {name: lfp(program, iter_bound) for name, program, _ in corpus}
    return [run_cell(c, a, corpus, oracles, budget) for a in ANSWER_MODES for c in CALL_MODES]


def _mark(value: Optional[bool]) -> str:
    return "-" if value is None else ("✓" if value else "✗")


def report(cells: list[CellVerdict]) -> str:
    """Two grids, rows = answer projection, columns = call projection.

    Each entry shows the observed verdict followed by the guaranteed one in
    brackets.
    """
    by = {(c.call, c.answer): c for c in cells}
    out = []
    for title, attr, exp in (
        ("soundness", "sound", expected_sound),
        ("completeness", "complete", expected_complete),
    ):
        out.append(f"{title} (rows: answer projection, columns: call projection)")
        out.append(f"{'':<16}" + "".join(f"{c + ' ' + SYMBOL[c]:>18}" for c in CALL_MODES))
        for a in ANSWER_MODES:
            row = f"{a + ' ' + SYMBOL[a]:<16}"
            for c in CALL_MODES:
                cell = by.get((c, a))
                got = _mark(getattr(cell, attr) if cell else None)
                row += f"{got + ' [' + _mark(exp(c, a)) + ']':>18}"
            out.append(row)
        out.append("")
    for cell in cells:
        for kind, w in (("unsound", cell.sound_witness), ("incomplete", cell.complete_witness)):
            if w:
                out.append(f"{kind} call={cell.call} answer={cell.answer}: {w}")
    for cell in cells:
        for prop, got, exp in (
            ("soundness", cell.sound, cell.expected_sound),
            ("completeness", cell.complete, cell.expected_complete),
        ):
            if got is True and not exp:
                out.append(f"no counterexample to {prop} found in corpus for call={cell.call} answer={cell.answer}")
    return "\n".join(out).rstrip() + "\n"


def report_json(cells: list[CellVerdict]) -> str:
    return json.dumps({"cells": [c.to_json() for c in cells]}, indent=2, ensure_ascii=False)


__all__ = [
    "ANSWER_MODES",
    "CALL_MODES",
    "CellVerdict",
    "expected_complete",
    "expected_sound",
    "report",
    "report_json",
    "run_cell",
    "run_variant_matrix",
]
