"""Wire-format helpers.

All rationals travel as strings "p/q" (or "p" when the denominator is 1);
ints are accepted on input wherever a rational is expected.  Floats are
rejected everywhere.  Parsers take a ``path`` argument so schema errors can
point at the offending entry.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InputError


def parse_rational(value, path: str) -> Fraction:
    if isinstance(value, bool):
        raise InputError("expected a rational, got a boolean", path)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise InputError("floats are not accepted; use a \"p/q\" string", path)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"malformed rational {value!r}", path) from None
    raise InputError(f"expected a rational, got {type(value).__name__}", path)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"expected an integer, got {type(value).__name__}", path)
    return value


def parse_int_vector(value, path: str, length: int | None = None) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise InputError(f"expected a list of integers, got {type(value).__name__}", path)
    out = tuple(parse_int(v, f"{path}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise InputError(f"expected {length} entries, got {len(out)}", path)
    return out


def parse_rational_vector(value, path: str, length: int | None = None) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise InputError(f"expected a list of rationals, got {type(value).__name__}", path)
    out = tuple(parse_rational(v, f"{path}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise InputError(f"expected {length} entries, got {len(out)}", path)
    return out


def parse_int_matrix(value, path: str, rows: int | None = None,
                     cols: int | None = None) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list):
        raise InputError(f"expected a matrix (list of rows), got {type(value).__name__}", path)
    out = tuple(parse_int_vector(row, f"{path}[{i}]", cols) for i, row in enumerate(value))
    if rows is not None and len(out) != rows:
        raise InputError(f"expected {rows} rows, got {len(out)}", path)
    return out


def get_key(obj, key: str, path: str):
    if not isinstance(obj, dict):
        raise InputError(f"expected an object, got {type(obj).__name__}", path)
    if key not in obj:
        raise InputError(f"missing required key {key!r}", path)
    return obj[key]


def get_optional(obj, key: str, path: str, default=None):
    if not isinstance(obj, dict):
        raise InputError(f"expected an object, got {type(obj).__name__}", path)
    return obj.get(key, default)
