"""Unit tests for the acceptance checks."""

import io
import json
import math

import pytest

from src.commands import EXIT_OK, EXIT_VALIDATION, validate
from src.commands.validate import (
    CHECKS,
    check_oracle,
    check_tmsv,
    format_table,
    run_check,
    run_checks,
    run_validate,
    tmsv_measurement,
)
from src.config import CHECK_NAMES, RunSpec, Subcommand


def validate_spec(*only: str, **overrides) -> RunSpec:
    spec = RunSpec(subcommand=Subcommand.VALIDATE, only=only, **overrides)
    spec.resolve()
    spec.validate()
    return spec


def test_check_names_match_registry():
    assert tuple(CHECKS) == CHECK_NAMES


def test_fast_checks_pass():
    assert check_oracle().passed
    tmsv = check_tmsv()
    assert tmsv.passed
    assert tmsv.measured < 1e-8
    assert tmsv.limit == 1e-8


@pytest.mark.parametrize(
    "photon_error, amplitude_error, passed",
    [
        (1e-9, 1e-12, True),
        (1e-9, 5e-8, False),
        (2e-6, 1e-12, False),
    ],
)
def test_tmsv_gates_photon_number_and_amplitudes_separately(
    photon_error, amplitude_error, passed
):
    measurement = tmsv_measurement(photon_error, amplitude_error)
    assert measurement.passed is passed
    assert measurement.measured == amplitude_error
    assert "⟨n⟩ error" in measurement.detail


def test_exceptions_become_failures(monkeypatch):
    def broken():
        raise RuntimeError("engine exploded")

    monkeypatch.setitem(validate.CHECKS, "eq5", ("broken check", broken))
    result = run_check("eq5")

    assert not result.passed
    assert math.isnan(result.measured)
    assert "RuntimeError: engine exploded" in result.detail


def test_selection_keeps_canonical_order():
    report = run_checks(("tmsv", "oracle"))
    assert [check.name for check in report.checks] == ["oracle", "tmsv"]
    assert report.all_passed


def test_table_lists_every_check():
    report = run_checks(("oracle",))
    lines = format_table(report).splitlines()
    assert lines[0].split()[:4] == ["CHECK", "STATUS", "MEASURED", "LIMIT"]
    assert lines[1].startswith("oracle")
    assert "PASS" in lines[1]


def test_run_validate_writes_report_and_metrics(tmp_path):
    out = tmp_path / "report.json"
    metrics_out = tmp_path / "metrics.prom"
    stream = io.StringIO()

    code = run_validate(validate_spec("tmsv", out=out, metrics_out=metrics_out), stream=stream)

    assert code == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["all_passed"] is True
    assert [check["name"] for check in report["checks"]] == ["tmsv"]
    assert "catamp_checks_total" in metrics_out.read_text(encoding="utf-8")
    assert "FAILED" not in stream.getvalue()


def test_run_validate_reports_failures(monkeypatch):
    monkeypatch.setitem(
        validate.CHECKS,
        "oracle",
        ("always fails", lambda: validate.Measurement(1.0, 0.5, False, "forced")),
    )
    stream = io.StringIO()

    code = run_validate(validate_spec("oracle"), stream=stream)

    assert code == EXIT_VALIDATION
    assert stream.getvalue().endswith("FAILED: oracle\n")


@pytest.mark.slow
def test_full_suite_passes():
    report = run_checks()
    assert report.failed == []
    assert len(report.checks) == len(CHECK_NAMES)
