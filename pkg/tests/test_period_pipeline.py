import sys
from pathlib import Path

import pytest

from period_pipeline import PeriodPipeline, main
from tropical.smoke_test import smoke_test

WORKSPACE_ROOT = Path(__file__).resolve().parent.parent


def _records(pipeline):
    return dict(pipeline.records)


def test_period_command_on_tate(capsys):
    pipeline = PeriodPipeline(WORKSPACE_ROOT)
    assert pipeline.run("period", ["tate_k2"])
    records = _records(pipeline)
    assert records["tate_k2.period.beta.t_exponent"] == "2"
    assert records["tate_k2.period.beta.sign"] == "1"
    assert records["tate_k2.period.beta.reversal"] == "pass"
    assert records["tate_k2.period.beta.radius_invariance"] == "pass"
    assert "h_beta = t^2" in capsys.readouterr().out


def test_relative_cycles_are_marked(capsys):
    pipeline = PeriodPipeline(WORKSPACE_ROOT)
    assert pipeline.run("period", ["interval"])
    assert _records(pipeline)["interval.period.across"] == "relative"


def test_homology_command_on_torus():
    pipeline = PeriodPipeline(WORKSPACE_ROOT)
    assert pipeline.run("homology", ["torus"])
    records = _records(pipeline)
    assert records["torus.homology.level"] == "cells"
    assert [records[f"torus.homology.H_{i}.rank"] for i in range(3)] == ["2", "4", "2"]
    assert records["torus.homology.poincare_lefschetz"] == "pass"


def test_generate_command_spans_homology():
    pipeline = PeriodPipeline(WORKSPACE_ROOT)
    assert pipeline.run("generate", ["torus", "focus_focus"])
    records = _records(pipeline)
    assert records["torus.generate.achieved_rank"] == "4"
    assert records["focus_focus.generate.spans"] == "pass"


def test_report_is_deterministic():
    first, second = PeriodPipeline(WORKSPACE_ROOT), PeriodPipeline(WORKSPACE_ROOT)
    first.run("period", ["circle", "torus"])
    second.run("period", ["circle", "torus"])
    assert first.report_block() == second.report_block()
    assert "circle.period.loop.constant=3.0" in first.report_block().splitlines()


def test_overrides_beat_manifest_options():
    pipeline = PeriodPipeline(WORKSPACE_ROOT, {"seed": 5, "quadrature": {"tolerance": 1e-6}})
    pipeline.load("tate_k1")
    assert pipeline.config.seed == 5
    assert pipeline.config.quadrature.tolerance == 1e-6


def test_unknown_manifest_is_a_failure(capsys):
    pipeline = PeriodPipeline(WORKSPACE_ROOT)
    assert not pipeline.run("validate", ["no_such_fixture"])
    assert _records(pipeline)["no_such_fixture.load"] == "fail"
    assert pipeline.failures


def test_cli_exit_code(monkeypatch, tmp_path):
    report = tmp_path / "report.txt"
    monkeypatch.setattr(sys, "argv", ["period_pipeline.py", "period", "tate_k3", "--report", str(report)])
    with pytest.raises(SystemExit) as exc:
        main()
    assert exc.value.code == 0
    assert "tate_k3.period.beta.t_exponent=3" in report.read_text(encoding="utf-8").splitlines()


def test_smoke_test_passes(fixtures_dir):
    results = smoke_test(fixtures_dir)
    assert results["status"] == "passed", results["errors"]
    assert results["periods_checked"] > 0
