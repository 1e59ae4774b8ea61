"""Number formatting: half-even table rounding and significant digits."""

from decimal import ROUND_HALF_EVEN, Decimal


def round_half_even(value: float, decimals: int = 3) -> float:
    """Round the exact binary value of a float half-to-even."""
    quantum = Decimal(1).scaleb(-decimals)
    rounded = float(Decimal(value).quantize(quantum, rounding=ROUND_HALF_EVEN))
    return rounded + 0.0  # drops a negative zero


def fmt_fixed(value: float, decimals: int = 3) -> str:
    """Table cell: half-even rounding to a fixed number of decimals."""
    return f"{round_half_even(value, decimals):.{decimals}f}"


def significant(value: float, digits: int = 12) -> float:
    """Round to a number of significant digits for JSON and CSV output."""
    if value == 0:
        return 0.0
    return float(f"{value:.{digits}g}")


def fmt_saving(ratio: float) -> str:
    """Format a compact/plain ratio as the space saved."""
    return f"{(1.0 - ratio) * 100:.1f}% smaller"
