"""CSV result tables.

The header is fixed (``CSV_COLUMNS``); absent values are empty cells. Lines
starting with ``#`` are comments and are skipped when reading.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from pathlib import Path

from pydantic import ValidationError

from ..exceptions import LoadError
from ..models import CSV_COLUMNS, ResultRow


def _cell(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".6g")


def rows_to_csv(rows: Iterable[ResultRow], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.value(column)) for column in columns])
    return buffer.getvalue()


def read_records(payload: str) -> list[dict[str, str]]:
    """Parse CSV text into dicts, skipping ``#`` comments and blank lines.

    Raises ``LoadError`` when a data line does not match the header.
    """
    lines = [line for line in payload.splitlines() if line.strip() and not line.startswith("#")]
    if not lines:
        raise LoadError("CSV input has no header")
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    records = []
    for number, record in enumerate(reader, start=2):
        if None in record or any(value is None for value in record.values()):
            raise LoadError(f"CSV line {number} does not match the header {header}")
        records.append(record)
    return records


def rows_from_csv(payload: str) -> list[ResultRow]:
    """Parse a result table. Raises ``LoadError`` on a bad header or cell."""
    records = read_records(payload)
    rows = []
    for number, record in enumerate(records, start=2):
        if "level" not in record or "dofs" not in record:
            raise LoadError("CSV result table needs 'level' and 'dofs' columns")
        values = {key: value for key, value in record.items() if value != ""}
        try:
            rows.append(ResultRow.model_validate(values))
        except ValidationError as exc:
            raise LoadError(f"CSV line {number}: {exc}") from exc
    return rows


def save_rows_csv(rows: Iterable[ResultRow], path: str | Path) -> Path:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(rows_to_csv(rows), encoding="utf-8")
    return output_path


def load_rows_csv(path: str | Path) -> list[ResultRow]:
    return rows_from_csv(Path(path).read_text(encoding="utf-8"))
