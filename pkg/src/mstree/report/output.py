"""Report emitters for JSON, CSV and text output."""

import csv
import io
import json
from collections.abc import Mapping, Sequence
from enum import Enum

import typer

from mstree.config.settings import OutputFormat
from mstree.report.display import render_records
from mstree.utils.formatting import significant

Record = Mapping[str, object]


def normalize(value: object, digits: int = 12) -> object:
    """Convert a report value to plain JSON types at fixed precision."""
    if isinstance(value, bool) or value is None or isinstance(value, int | str):
        return value
    if isinstance(value, float):
        return significant(value, digits)
    if isinstance(value, complex):
        return [significant(value.real, digits), significant(value.imag, digits)]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): normalize(v, digits) for k, v in value.items()}
    if isinstance(value, Sequence):
        return [normalize(v, digits) for v in value]
    return str(value)


def flatten(record: Record, digits: int = 12) -> dict[str, object]:
    """One CSV row: vectors become name[i] columns, mappings name[key]."""
    row: dict[str, object] = {}
    for key, value in record.items():
        plain = normalize(value, digits)
        if isinstance(plain, list):
            for i, item in enumerate(plain):
                row[f"{key}[{i}]"] = item
        elif isinstance(plain, dict):
            for sub, item in plain.items():
                row[f"{key}[{sub}]"] = item
        else:
            row[key] = plain
    return row


def to_json(records: Sequence[Record] | Record, digits: int = 12) -> str:
    return json.dumps(normalize(records, digits), indent=2)


def to_csv(records: Sequence[Record], digits: int = 12) -> str:
    rows = [flatten(record, digits) for record in records]
    columns: list[str] = []
    for row in rows:
        columns.extend(c for c in row if c not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


def emit(
    records: Sequence[Record] | Record,
    fmt: OutputFormat,
    title: str = "",
    digits: int = 12,
    decimals: int | None = None,
) -> None:
    """Write a report to stdout in the requested format.

    A single mapping is emitted as a JSON object and as a one-row CSV.
    decimals switches text floats from significant digits to fixed
    decimals, for tables.
    """
    if fmt == "json":
        typer.echo(to_json(records, digits))
        return
    rows = [records] if isinstance(records, Mapping) else list(records)
    if fmt == "csv":
        typer.echo(to_csv(rows, digits))
        return
    render_records(rows, title=title, digits=digits, decimals=decimals)
