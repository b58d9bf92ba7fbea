import argparse
import io
import json
import subprocess
import sys

import pytest

from tclp.cli import UsageError, main, read_config, resolve_settings
from tclp.corpus import bundled_source

FIG2_OUT = """D = 50, Y = b
D < 85, D > 75, Y = a
D < 135, D > 125, Y = b
status: complete
"""


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def no_env_budget(monkeypatch):
    monkeypatch.delenv("TCLP_BUDGET", raising=False)


def test_run_bundled_example():
    code, out, _ = run("run", "dist_right")
    assert code == 0
    assert out.startswith(FIG2_OUT)
    assert "generators: 2" in out and "transitions: 42" in out


def test_run_program_file(tmp_path):
    path = tmp_path / "dist.pl"
    path.write_text(bundled_source("dist_right"))
    assert run("run", str(path))[1].startswith(FIG2_OUT)


def test_run_explicit_query():
    code, out, _ = run("run", "nat", "--query", "?- {X < 3}, nat(X).")
    assert code == 0
    assert out.startswith("X = 0\nX = 1\nX = 2\nstatus: complete\n")


def test_budget_exceeded_exit_code():
    code, out, _ = run("run", "nat", "--query", "?- nat(X).", "--budget", "500")
    assert code == 2
    assert "status: budget-exceeded" in out


def test_json_output():
    code, out, _ = run("run", "p", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["answers"] == ["X = a"] and data["status"] == "complete"
    assert data["stats"]["generators"] == 1


def test_deterministic_output():
    assert run("run", "dist_right") == run("run", "dist_right")


@pytest.mark.parametrize(
    "argv,message",
    [
        (["run", "nowhere.pl"], "nowhere.pl"),
        (["run", "nat", "--strategy", "slg"], "strategy must be one of"),
        (["run", "nat", "--budget", "0"], "budget must be a positive integer"),
        (["run", "nat", "--query", "?- bad syntax"], "parse error"),
        (["run", "nat", "--forest", "out.png"], ".json or .dot"),
    ],
)
def test_errors_exit_1(argv, message):
    code, _, err = run(*argv)
    assert code == 1
    assert err.startswith("tclp: ") and message in err


def test_bad_program_syntax(tmp_path):
    path = tmp_path / "bad.pl"
    path.write_text("p(X) :- q(X")
    code, _, err = run("run", str(path), "--query", "?- p(X).")
    assert code == 1
    assert "line 1, column 12" in err


def test_unknown_solver(tmp_path):
    path = tmp_path / "bad.pl"
    path.write_text(":- solver(reals).\np(1).\n?- p(X).\n")
    assert run("run", str(path))[0] == 1


def test_argparse_usage_errors():
    assert run()[0] == 1
    assert run("frobnicate")[0] == 1
    assert run("--help")[0] == 0


def test_forest_json(tmp_path):
    path = tmp_path / "forest.json"
    code, _, _ = run("run", "dist_right", "--forest", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert len(data["trees"]) == 2


def test_forest_dot(tmp_path):
    path = tmp_path / "forest.dot"
    run("run", "dist_right", "--forest", str(path))
    assert path.read_text().startswith("digraph forest {")


class TestSettings:
    def ns(self, **kw):
        return argparse.Namespace(**kw)

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "tclp.toml"
        cfg.write_text('[engine]\nstrategy = "clp"  # plain CLP\nbudget = 1_000\nanswer-policy = keep-all\n')
        assert read_config(str(cfg)) == {"strategy": "clp", "budget": "1_000", "answer_policy": "keep-all"}
        s = resolve_settings(self.ns(config=str(cfg)), env={})
        assert s["strategy"] == "clp" and s["budget"] == 1000

    def test_precedence(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("budget = 300\n")
        env = {"TCLP_BUDGET": "200"}
        assert resolve_settings(self.ns(), env=env)["budget"] == 200
        assert resolve_settings(self.ns(config=str(cfg)), env=env)["budget"] == 300
        assert resolve_settings(self.ns(config=str(cfg), budget="400"), env=env)["budget"] == 400
        assert "budget" not in resolve_settings(self.ns(), env={})

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("speed = fast\n")
        with pytest.raises(UsageError):
            read_config(str(cfg))

    def test_missing_config(self):
        with pytest.raises(UsageError):
            read_config("/nonexistent/tclp.cfg")

    def test_booleans(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("check_invariants = yes\nrecord_forest = off\n")
        s = resolve_settings(self.ns(config=str(cfg)), env={})
        assert s["check_invariants"] is True and s["record_forest"] is False

    def test_env_budget_applies(self, monkeypatch):
        monkeypatch.setenv("TCLP_BUDGET", "300")
        code, out, _ = run("run", "nat", "--query", "?- nat(X).")
        assert code == 2 and "transitions: 300" in out

    def test_config_via_cli(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("format = json\n")
        code, out, _ = run("run", "p", "--config", str(cfg))
        assert code == 0 and json.loads(out)["answers"] == ["X = a"]


def test_fixpoint_command():
    code, out, _ = run("fixpoint", "p")
    assert code == 0
    assert out == "p(V0) :: V0 = a\nfixpoint after 2 iterations\n"


def test_fixpoint_bound_exceeded():
    code, out, _ = run("fixpoint", "nat", "--iter-bound", "5")
    assert code == 2
    assert out.endswith("BoundExceeded after 5 iterations\n")


def test_fixpoint_json():
    code, out, _ = run("fixpoint", "dist_acyclic", "--format", "json")
    data = json.loads(out)
    assert data["result"] == "fixpoint" and len(data["pairs"]) == 5


def test_matrix_command():
    code, out, _ = run("matrix", "--budget", "20000")
    assert code == 0
    assert out.rstrip().endswith("matches expected termination: yes")


def test_variants_command():
    code, out, _ = run("variants")
    assert code == 0
    assert out.startswith("soundness (rows: answer projection, columns: call projection)")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tclp", "run", "p"], capture_output=True, text=True, timeout=120, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("X = a\nstatus: complete\n")
