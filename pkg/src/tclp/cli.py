"""Command-line front end.

    tclp run PROGRAM [--query Q] [--strategy S] ... [--forest out.json|out.dot]
    tclp matrix              termination of the distance corpus per strategy
    tclp variants            soundness/completeness under projection variants
    tclp fixpoint PROGRAM    bottom-up least fixpoint

Settings are resolved as: command-line flag, then --config file, then the
TCLP_BUDGET environment variable (budget only), then built-in defaults.
Exit status: 0 complete, 2 budget (or iteration bound) exceeded, 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional

from .corpus import bundled_names, bundled_source, format_matrix, run_matrix
from .engine import DEFAULT_BUDGET, POLICIES, STRATEGIES, EngineConfig, SolveResult, solve
from .fixpoint import Fixpoint, lfp
from .lang import LanguageError, Program, Query
from .parser import ParseError, UnknownSolver, parse_program, parse_query
from .projection import MODES
from .projvariants import VARIANT_BUDGET, report, report_json, run_variant_matrix
from .solvers import SolverError

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2

_CONFIG_KEYS = {f.name for f in fields(EngineConfig)} | {"format", "iter_bound"}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """`key = value` lines; `#` starts a comment; values may be quoted."""
    out: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e.strerror}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown setting {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key] = value
    return out


def _positive(value, what: str) -> int:
    try:
        n = int(str(value).replace("_", ""))
    except ValueError:
        raise UsageError(f"{what} must be a positive integer, got {value!r}") from None
    if n <= 0:
        raise UsageError(f"{what} must be a positive integer, got {value!r}")
    return n


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


def resolve_settings(args: argparse.Namespace, env=None) -> dict:
    env = os.environ if env is None else env
    settings: dict = {"format": "text"}
    if env.get("TCLP_BUDGET"):
        settings["budget"] = _positive(env["TCLP_BUDGET"], "TCLP_BUDGET")
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "budget" in settings:
        settings["budget"] = _positive(settings["budget"], "budget")
    if "iter_bound" in settings:
        settings["iter_bound"] = _positive(settings["iter_bound"], "iter-bound")
    for key, allowed in (
        ("strategy", STRATEGIES),
        ("answer_policy", POLICIES),
        ("call_projection", MODES),
        ("answer_projection", MODES),
        ("format", ("text", "json")),
    ):
        if key in settings and settings[key] not in allowed:
            raise UsageError(f"{key.replace('_', '-')} must be one of {', '.join(allowed)}; got {settings[key]!r}")
    for key in ("record_forest", "check_invariants"):
        if key in settings:
            settings[key] = _bool(settings[key])
    return settings


def engine_config(settings: dict) -> EngineConfig:
    kwargs = {f.name: settings[f.name] for f in fields(EngineConfig) if f.name in settings}
    return EngineConfig(**kwargs)


def load_program(spec: str) -> Program:
    """A program from a file path, falling back to the bundled examples by name."""
    path = Path(spec)
    if path.exists():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot read {spec}: {e.strerror}") from None
    else:
        name = path.name if path.name.endswith(".pl") else path.name + ".pl"
        if name not in bundled_names():
            raise UsageError(f"no such program file: {spec}")
        text = bundled_source(name)
    return parse_program(text)


def pick_query(program: Program, text: Optional[str]) -> Query:
    if text:
        return parse_query(text)
    if not program.queries:
        raise UsageError("no --query given and the program embeds no `?-` query")
    return program.queries[0]


# ---------------------------------------------------------------- subcommands
def format_result(result: SolveResult, fmt: str) -> str:
    stats = dict(sorted(result.stats.items()))
    if fmt == "json":
        return json.dumps({"answers": result.answer_texts(), "status": result.status, "stats": stats}, indent=2) + "\n"
    lines = list(result.answer_texts())
    lines.append(f"status: {result.status}")
    lines.extend(f"{k}: {v}" for k, v in stats.items())
    return "\n".join(lines) + "\n"


def cmd_run(args, settings, out) -> int:
    program = load_program(args.program)
    query = pick_query(program, args.query)
    if args.forest:
        suffix = Path(args.forest).suffix
        if suffix not in (".json", ".dot"):
            raise UsageError("--forest path must end in .json or .dot")
        settings["record_forest"] = True
    else:
        settings.setdefault("record_forest", False)
    result = solve(program, query, engine_config(settings))
    out.write(format_result(result, settings["format"]))
    if args.forest and result.forest is not None:
        text = result.forest.dumps() if args.forest.endswith(".json") else result.forest.to_dot()
        Path(args.forest).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    return EXIT_OK if result.complete else EXIT_BUDGET


def cmd_matrix(args, settings, out) -> int:
    cells = run_matrix(budget=settings.get("budget", DEFAULT_BUDGET), base=engine_config(settings))
    if settings["format"] == "json":
        rows = [
            {
                "graph": c.graph,
                "recursion": c.recursion,
                "strategy": c.strategy,
                "status": c.status,
                "expected_complete": c.expected,
                "answers": c.answers,
                "transitions": c.transitions,
            }
            for c in cells
        ]
        out.write(json.dumps({"cells": rows}, indent=2) + "\n")
    else:
        out.write(format_matrix(cells))
        bad = [c for c in cells if c.complete != c.expected]
        out.write(f"matches expected termination: {'yes' if not bad else 'no'}\n")
    return EXIT_OK


def cmd_variants(args, settings, out) -> int:
    cells = run_variant_matrix(budget=settings.get("budget", VARIANT_BUDGET))
    out.write(report_json(cells) + "\n" if settings["format"] == "json" else report(cells))
    return EXIT_OK


def cmd_fixpoint(args, settings, out) -> int:
    program = load_program(args.program)
    result = lfp(program, settings.get("iter_bound", 100))
    lines = result.interpretation.lines()
    if settings["format"] == "json":
        kind = "fixpoint" if isinstance(result, Fixpoint) else "bound-exceeded"
        out.write(json.dumps({"result": kind, "iterations": result.iterations, "pairs": lines}, indent=2) + "\n")
    else:
        out.writelines(line + "\n" for line in lines)
        if isinstance(result, Fixpoint):
            out.write(f"fixpoint after {result.iterations} iterations\n")
        else:
            out.write(f"BoundExceeded after {result.iterations} iterations\n")
    return EXIT_OK if isinstance(result, Fixpoint) else EXIT_BUDGET


# ---------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tclp", description="Tabled constraint logic programming engine.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, engine: bool = True):
        sp.add_argument("--config", help="file of `key = value` settings")
        sp.add_argument("--format", choices=("text", "json"), default=None)
        sp.add_argument("--budget", default=None, help=f"maximum transitions (default {DEFAULT_BUDGET})")
        if engine:
            sp.add_argument("--strategy", default=None, help="|".join(STRATEGIES))
            sp.add_argument("--answer-policy", dest="answer_policy", default=None, help="|".join(POLICIES))
            sp.add_argument("--call-projection", dest="call_projection", default=None, help="|".join(MODES))
            sp.add_argument("--answer-projection", dest="answer_projection", default=None, help="|".join(MODES))
            sp.add_argument(
                "--check-invariants", dest="check_invariants", action="store_const", const=True, default=None
            )

    run = sub.add_parser("run", help="evaluate a query")
    run.add_argument("program", help="program file (or the name of a bundled example)")
    run.add_argument("--query", default=None, help='e.g. "?- {D < 150}, dist(a, Y, D)."')
    run.add_argument("--forest", default=None, help="write the forest to a .json or .dot file")
    common(run)

    matrix = sub.add_parser("matrix", help="termination matrix over the distance corpus")
    common(matrix)

    variants = sub.add_parser("variants", help="projection-variant soundness/completeness grid")
    common(variants, engine=False)

    fix = sub.add_parser("fixpoint", help="bottom-up least fixpoint")
    fix.add_argument("program")
    fix.add_argument("--iter-bound", dest="iter_bound", default=None)
    fix.add_argument("--config")
    fix.add_argument("--format", choices=("text", "json"), default=None)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    handlers = {"run": cmd_run, "matrix": cmd_matrix, "variants": cmd_variants, "fixpoint": cmd_fixpoint}
    try:
        settings = resolve_settings(args)
        return handlers[args.command](args, settings, out)
    except ParseError as e:
        err.write(f"tclp: parse error: {e}\n")
    except (UsageError, UnknownSolver, LanguageError, ValueError) as e:
        err.write(f"tclp: {e}\n")
    except SolverError as e:
        err.write(f"tclp: solver error: {e}\n")
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
