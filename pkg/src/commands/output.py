"""CSV and JSON writers for sweep data and run summaries.

Numbers are written with 17 significant digits so every double survives a
round trip. Data files carry no timestamps; summaries carry the package
version under ``metadata``.
"""

import csv
import io
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TextIO

import structlog

from src import __version__
from src.config import OutputFormat

logger = structlog.get_logger(__name__)


class OutputError(Exception):
    """Raised when an output file cannot be written."""

    pass


def format_number(value: float) -> str:
    return f"{float(value):.17g}"


def summary_path(data_path: Path) -> Path:
    """``out.csv`` -> ``out.summary.json``."""
    return data_path.with_suffix(".summary.json")


def with_metadata(summary: dict[str, Any]) -> dict[str, Any]:
    return {**summary, "metadata": {"version": __version__}}


def render_rows(
    columns: Sequence[str],
    rows: Sequence[Sequence[float]],
    output_format: OutputFormat,
) -> str:
    """Render data rows as CSV with a header line, or as a JSON list of objects."""
    if output_format is OutputFormat.JSON:
        records = [dict(zip(columns, map(float, row), strict=True)) for row in rows]
        return json.dumps(records, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(value) for value in row])
    return buffer.getvalue()


def render_summary(summary: dict[str, Any]) -> str:
    return json.dumps(with_metadata(summary), indent=2) + "\n"


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e


def emit(
    columns: Sequence[str],
    rows: Sequence[Sequence[float]],
    summary: dict[str, Any],
    out: Path | None,
    output_format: OutputFormat,
    stream: TextIO | None = None,
) -> None:
    """Write data and summary to ``out`` and its summary path, or to ``stream``.

    Raises:
        OutputError: If a file cannot be written.
    """
    data = render_rows(columns, rows, output_format)
    summary_text = render_summary(summary)
    if out is None:
        target = stream if stream is not None else sys.stdout
        target.write(data)
        target.write(summary_text)
        return
    _write_text(out, data)
    _write_text(summary_path(out), summary_text)
    logger.info("Wrote results", data=str(out), summary=str(summary_path(out)), rows=len(rows))
