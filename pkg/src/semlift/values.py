"""Literal value spaces: numbers, dates, dateTimes, durations.

The numeric tower keeps integers exact and promotes division and
exponentiation to 64-bit floats.  Durations normalize to signed seconds
with the fixed calendar 1 day = 86400 s, 1 month = 30 days, 1 year = 365
days, which makes duration comparison a total order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime

from .terms import (
    Literal,
    Term,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_DURATION,
    XSD_INTEGER,
    XSD_LONG,
    XSD_NS,
)

SECONDS_PER_DAY = 86_400
SECONDS_PER_MONTH = 30 * SECONDS_PER_DAY
SECONDS_PER_YEAR = 365 * SECONDS_PER_DAY

_INTEGER_TYPES = {XSD_INTEGER, XSD_LONG, XSD_NS + "int", XSD_NS + "short", XSD_NS + "byte"}
_FLOAT_TYPES = {XSD_DOUBLE, XSD_DECIMAL, XSD_NS + "float"}


@dataclass(frozen=True)
class DurationValue:
    """A duration normalized to signed whole seconds."""

    seconds: int

    def lexical(self) -> str:
        return format_duration(self.seconds)


_DURATION_RE = re.compile(
    r"^(?P<sign>-)?P(?:(?P<years>\d+)Y)?(?:(?P<months>\d+)M)?(?:(?P<days>\d+)D)?"
    r"(?:T(?:(?P<hours>\d+)H)?(?:(?P<minutes>\d+)M)?(?:(?P<seconds>\d+(?:\.\d+)?)S)?)?$"
)


def parse_duration(lexical: str) -> int:
    """Duration lexical form -> normalized signed seconds."""
    m = _DURATION_RE.match(lexical.strip())
    if not m or lexical.strip() in ("P", "-P"):
        raise ValueError(f"invalid duration {lexical!r}")
    g = m.groupdict()
    if not any(g[k] for k in ("years", "months", "days", "hours", "minutes", "seconds")):
        raise ValueError(f"invalid duration {lexical!r}")
    total = 0
    total += int(g["years"] or 0) * SECONDS_PER_YEAR
    total += int(g["months"] or 0) * SECONDS_PER_MONTH
    total += int(g["days"] or 0) * SECONDS_PER_DAY
    total += int(g["hours"] or 0) * 3600
    total += int(g["minutes"] or 0) * 60
    sec = g["seconds"]
    if sec:
        f = float(sec)
        if f != int(f):
            raise ValueError(f"fractional seconds not supported in {lexical!r}")
        total += int(f)
    return -total if g["sign"] else total


def format_duration(seconds: int) -> str:
    """Canonical lexical form using days and time parts (months and years
    are ambiguous on output, days are exact under the normalization)."""
    if seconds == 0:
        return "PT0S"
    sign = "-" if seconds < 0 else ""
    rest = abs(seconds)
    days, rest = divmod(rest, SECONDS_PER_DAY)
    hours, rest = divmod(rest, 3600)
    minutes, secs = divmod(rest, 60)
    out = sign + "P"
    if days:
        out += f"{days}D"
    if hours or minutes or secs:
        out += "T"
        if hours:
            out += f"{hours}H"
        if minutes:
            out += f"{minutes}M"
        if secs:
            out += f"{secs}S"
    return out


# ---------------------------------------------------------------------------
# Term -> value
# ---------------------------------------------------------------------------

def numeric_value(t: Term) -> int | float | None:
    """Numeric value of a literal, or None when the term is not numeric."""
    if not isinstance(t, Literal):
        return None
    try:
        if t.datatype in _INTEGER_TYPES:
            return int(t.lexical)
        if t.datatype in _FLOAT_TYPES:
            return float(t.lexical)
    except ValueError:
        return None
    return None


def temporal_value(t: Term) -> datetime | None:
    """date/dateTime literal -> naive datetime (dates promote to midnight)."""
    if not isinstance(t, Literal):
        return None
    try:
        if t.datatype == XSD_DATE:
            d = date.fromisoformat(t.lexical)
            return datetime(d.year, d.month, d.day)
        if t.datatype == XSD_DATETIME:
            dt = datetime.fromisoformat(t.lexical)
            if dt.tzinfo is not None:
                return None  # zoned timestamps are outside the subset
            return dt
    except ValueError:
        return None
    return None


def duration_term_value(t: Term) -> int | None:
    if not isinstance(t, Literal) or t.datatype != XSD_DURATION:
        return None
    try:
        return parse_duration(t.lexical)
    except ValueError:
        return None


def int_literal(v: int) -> Literal:
    return Literal(str(v), XSD_INTEGER)


def double_literal(v: float) -> Literal:
    return Literal(repr(v), XSD_DOUBLE)


def number_literal(v: int | float) -> Literal:
    if isinstance(v, bool):  # bool is an int subclass; never wanted here
        raise TypeError("boolean is not a number literal")
    return int_literal(v) if isinstance(v, int) else double_literal(v)


def datetime_literal(dt: datetime) -> Literal:
    return Literal(dt.isoformat(sep="T"), XSD_DATETIME)


def duration_literal(seconds: int) -> Literal:
    return Literal(format_duration(seconds), XSD_DURATION)


# ---------------------------------------------------------------------------
# Lexical validation for database values
# ---------------------------------------------------------------------------

_CANONICAL_INT_RE = re.compile(r"^-?\d+$")


def lexical_for_db_value(value, datatype: str) -> str | None:
    """Lexical form of a database value under an XSD datatype, or None when
    the stored value violates the datatype's lexical space."""
    if value is None:
        return None
    if datatype in (XSD_LONG, XSD_INTEGER):
        if isinstance(value, bool) or not isinstance(value, int):
            return None
        return str(value)
    if datatype == XSD_DOUBLE:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None
        return repr(float(value))
    if datatype == XSD_BOOLEAN:
        if value in (0, 1):
            return "true" if value else "false"
        return None
    if datatype == XSD_DATE:
        if not isinstance(value, str):
            return None
        try:
            date.fromisoformat(value)
        except ValueError:
            return None
        return value
    if datatype == XSD_DATETIME:
        if not isinstance(value, str):
            return None
        text = value.replace(" ", "T", 1) if " " in value else value
        try:
            dt = datetime.fromisoformat(text)
        except ValueError:
            return None
        if dt.tzinfo is not None:
            return None
        return dt.isoformat(sep="T")
    # strings: anything textual goes
    if isinstance(value, str):
        return value
    return None
