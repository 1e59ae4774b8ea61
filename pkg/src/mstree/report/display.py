"""Rich text rendering for reports and tables."""

from collections.abc import Mapping, Sequence
from enum import Enum

from rich.console import Console
from rich.table import Table

from mstree.utils.formatting import fmt_fixed

CONSOLE_WIDTH = 120


def _console() -> Console:
    """Fixed-width console so text output does not depend on the terminal."""
    return Console(width=CONSOLE_WIDTH, highlight=False, soft_wrap=True)


def format_cell(value: object, digits: int = 12, decimals: int | None = None) -> str:
    """Render one value for a text cell."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if decimals is not None:
            return fmt_fixed(value, decimals)
        return f"{value:.{digits}g}"
    if isinstance(value, complex):
        real = format_cell(value.real, digits, decimals)
        imag = format_cell(abs(value.imag), digits, decimals)
        sign = "-" if value.imag < 0 else "+"
        return f"{real} {sign} {imag}i"
    if isinstance(value, Enum):
        return str(value.value)
    if value is None:
        return "n/a"
    if isinstance(value, Mapping):
        return ", ".join(
            f"{k}: {format_cell(v, digits, decimals)}" for k, v in value.items()
        )
    if isinstance(value, Sequence) and not isinstance(value, str):
        return "(" + ", ".join(format_cell(v, digits, decimals) for v in value) + ")"
    return str(value)


def build_table(
    rows: Sequence[Mapping[str, object]],
    title: str = "",
    digits: int = 12,
    decimals: int | None = None,
) -> Table:
    """Rows become table rows; a single record becomes a field/value table."""
    table = Table(title=title or None, show_lines=False)
    if len(rows) == 1:
        table.add_column("Field", style="bold")
        table.add_column("Value")
        for key, value in rows[0].items():
            table.add_row(key, format_cell(value, digits, decimals))
        return table

    columns = list(rows[0].keys()) if rows else []
    for column in columns:
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(
            *(format_cell(row.get(c), digits, decimals) for c in columns)
        )
    return table


def render_records(
    rows: Sequence[Mapping[str, object]],
    title: str = "",
    digits: int = 12,
    decimals: int | None = None,
) -> None:
    _console().print(build_table(rows, title, digits, decimals))
