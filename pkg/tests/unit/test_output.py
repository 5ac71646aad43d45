"""Unit tests for the CSV/JSON writers."""

import io
import json
from pathlib import Path

import pytest

from src import __version__
from src.commands.output import (
    OutputError,
    emit,
    format_number,
    render_rows,
    render_summary,
    summary_path,
)
from src.config import OutputFormat

COLUMNS = ["theta", "probability"]
ROWS = [(0.0, 0.5), (0.1, 0.4987523)]


def test_numbers_keep_full_precision():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(1.0 / 3.0)) == 1.0 / 3.0


def test_summary_path():
    assert summary_path(Path("sweep.csv")) == Path("sweep.summary.json")
    assert summary_path(Path("out/sweep.json")) == Path("out/sweep.summary.json")


def test_csv_rows():
    lines = render_rows(COLUMNS, ROWS, OutputFormat.CSV).splitlines()
    assert lines[0] == "theta,probability"
    assert len(lines) == 3
    assert [float(value) for value in lines[2].split(",")] == list(ROWS[1])


def test_json_rows():
    records = json.loads(render_rows(COLUMNS, ROWS, OutputFormat.JSON))
    assert records == [{"theta": 0.0, "probability": 0.5}, {"theta": 0.1, "probability": 0.4987523}]


def test_summary_carries_version():
    summary = json.loads(render_summary({"visibility": 1.0}))
    assert summary == {"visibility": 1.0, "metadata": {"version": __version__}}


def test_emit_to_stream():
    stream = io.StringIO()
    emit(COLUMNS, ROWS, {"p_max": 0.5}, None, OutputFormat.CSV, stream=stream)
    text = stream.getvalue()
    assert text.startswith("theta,probability\n")
    assert text.index('"p_max"') > text.index(format_number(0.4987523))


def test_emit_to_files(tmp_path):
    out = tmp_path / "sweep.csv"
    emit(COLUMNS, ROWS, {"p_max": 0.5}, out, OutputFormat.CSV)
    assert out.read_text(encoding="utf-8").count("\n") == 3
    assert json.loads(summary_path(out).read_text(encoding="utf-8"))["p_max"] == 0.5


def test_emit_reports_unwritable_target(tmp_path):
    with pytest.raises(OutputError):
        emit(COLUMNS, ROWS, {}, tmp_path / "missing" / "sweep.csv", OutputFormat.CSV)
