from fractions import Fraction
from pathlib import Path
from typing import Optional, Union
import math

Number = Union[int, float, Fraction]

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def bundled_path(name: str) -> Path:
    """Path of a file shipped in the data/ directory"""
    return DATA_DIR / name


def parse_factor(text: Union[str, Number]) -> Fraction:
    """Parse a scaling factor: '2', '0.5', 'x1.25', '×10' or '1/2'"""
    if isinstance(text, Fraction):
        value = text
    elif isinstance(text, (int, float)):
        value = Fraction(str(text)) if isinstance(text, float) else Fraction(text)
    else:
        cleaned = text.strip().lstrip("x×*").strip()
        try:
            value = Fraction(cleaned)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a scaling factor: {text!r}")
    if value <= 0:
        raise ValueError(f"scaling factor must be positive, got {text!r}")
    return value


def format_factor(factor: Number) -> str:
    """Compact label for a factor: 2, 0.5, 1.25"""
    value = parse_factor(factor)
    if value.denominator == 1:
        return str(value.numerator)
    as_float = float(value)
    text = f"{as_float:.6f}".rstrip("0").rstrip(".")
    return text if Fraction(text) == value else f"{value.numerator}/{value.denominator}"


def scale_count(count: int, factor: Number, minimum: int = 1) -> int:
    """count * factor rounded half-up to an integer, never below minimum"""
    exact = Fraction(count) * Fraction(factor)
    rounded = math.floor(exact + Fraction(1, 2))
    return max(minimum, rounded)


def format_fixed(value: Optional[float], decimals: int = 3) -> str:
    """Locale-independent fixed-point text; empty for missing values"""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.{decimals}f}"


def format_percentage(value: float, decimals: int = 2) -> str:
    """Format a relative change with sign: 153.16 -> +53.16%"""
    if value is None:
        return "0.00%"
    change = value - 100.0
    sign = "+" if change > 0 else ""
    return f"{sign}{change:.{decimals}f}%"


def strip_comment(line: str) -> str:
    """Drop everything after '#' and surrounding whitespace"""
    return line.split("#", 1)[0].strip()
