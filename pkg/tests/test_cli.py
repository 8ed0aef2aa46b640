"""CLI contract: subcommands, exit codes, and output routing."""

import json
import os
import shutil

import pytest

from conftest import DEMO_AUDIT, DEMO_STACK

from miniweave.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    shutil.copytree(DEMO_AUDIT, tmp_path / "demo")
    shutil.copytree(DEMO_STACK, tmp_path / "demo_stack")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_run_audit_demo_exit_zero(workdir, capsys):
    code = main(["run", "demo/jobs.ml0", "demo/jobs.audit", "--entry", "Main.main"])
    out = capsys.readouterr().out
    assert code == 0
    assert "start copying 2 files from /home/ to /tmp/ ([/home/a.pdf, /home/b.pdf])" in out


def test_run_strip_hide_deadlocks_exit_two(workdir, capsys):
    code = main(
        [
            "run",
            "demo_stack/stack.ml0",
            "demo_stack/stack.cool",
            "demo_stack/auditor.ma0",
            "--strip-hide",
        ]
    )
    err = capsys.readouterr().err
    assert code == 2
    assert "deadlock at step" in err
    assert "held by itself" in err


def test_compile_missing_file_exit_one(workdir, capsys):
    code = main(["compile", "nosuch.ml0"])
    err = capsys.readouterr().err
    assert code == 1
    assert "file not found" in err


def test_runtime_error_exit_three(workdir, capsys):
    (workdir / "boom.ml0").write_text(
        "class Main { def main() { var xs = []; print(xs[1]); } }"
    )
    code = main(["run", "boom.ml0"])
    assert code == 3
    assert "runtime error" in capsys.readouterr().err


def test_step_limit_exit_four(workdir, capsys):
    (workdir / "spin.ml0").write_text("class Main { def main() { while (true) { } } }")
    code = main(["run", "spin.ml0", "--step-limit", "50"])
    assert code == 4
    assert "step limit" in capsys.readouterr().err


def test_relationships_subcommand_writes_json(workdir, capsys):
    code = main(
        ["relationships", "demo/jobs.ml0", "demo/jobs.audit", "-o", "rel.json"]
    )
    assert code == 0
    rel = json.loads((workdir / "rel.json").read_text())
    assert rel["advises"]


def test_audit_sink_redirects_audit_lines(workdir, capsys):
    code = main(
        ["run", "demo/jobs.ml0", "demo/jobs.audit", "--audit-sink", "audit.log"]
    )
    assert code == 0
    out = capsys.readouterr().out
    sink = (workdir / "audit.log").read_text()
    assert "start copying" in sink
    assert "start copying" not in out


def test_trace_file(workdir):
    code = main(["run", "demo/jobs.ml0", "demo/jobs.audit", "--trace", "t.txt"])
    assert code == 0
    text = (workdir / "t.txt").read_text()
    assert "jp method_execution" in text


def test_dsals_registry_found_next_to_inputs(workdir):
    # no ./dsals.txt in CWD; the one beside the first input applies
    assert not os.path.exists("dsals.txt")
    assert main(["compile", "demo/jobs.ml0", "demo/jobs.audit"]) == 0


def test_explain_hides_lists_suppressions(workdir, capsys):
    code = main(
        ["compile", "demo_stack/stack.ml0", "demo_stack/stack.cool", "--explain-hides"]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "HIDDEN method_execution Coord_BoundedStack.enter_push/1" in out


def test_compile_relationships_flag(workdir):
    code = main(
        ["compile", "demo/jobs.ml0", "demo/jobs.audit", "--relationships", "r.json"]
    )
    assert code == 0
    assert (workdir / "r.json").exists()


def test_unwritable_report_path_is_cli_error(workdir, capsys):
    code = main(
        ["relationships", "demo/jobs.ml0", "demo/jobs.audit", "-o", "no/such/dir/rel.json"]
    )
    err = capsys.readouterr().err
    assert code == 1
    assert "cannot write" in err
