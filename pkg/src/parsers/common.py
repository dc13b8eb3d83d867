"""Field-level parsing shared by the CSV readers.

Every helper raises ``ValueError`` with a short reason; the readers attach the line number.
"""

import csv
from datetime import date, datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import Iterator, Sequence, TextIO

from models.errors import IngestError
from models.records import format_timestamp


def parse_timestamp(raw: str) -> int:
    """Parses ISO-8601 UTC (``YYYY-MM-DDThh:mm:ssZ``) or integer UNIX seconds."""
    text = raw.strip()
    if not text:
        raise ValueError("empty timestamp")
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        parsed = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError:
        raise ValueError(f"unparseable timestamp {raw!r}") from None
    return int(parsed.replace(tzinfo=timezone.utc).timestamp())


def parse_optional_timestamp(raw: str):
    return None if not raw.strip() else parse_timestamp(raw)


def parse_day(raw: str) -> date:
    try:
        return date.fromisoformat(raw.strip())
    except ValueError:
        raise ValueError(f"unparseable date {raw!r}") from None


def parse_bool(raw: str) -> bool:
    match raw.strip().lower():
        case "true":
            return True
        case "false":
            return False
        case _:
            raise ValueError(f"expected true/false, got {raw!r}")


def parse_non_negative_int(raw: str, what: str) -> int:
    text = raw.strip()
    if not text.isdigit():
        raise ValueError(f"{what} must be a non-negative integer, got {raw!r}")
    return int(text)


def parse_positive_int(raw: str, what: str) -> int:
    value = parse_non_negative_int(raw, what)
    if value <= 0:
        raise ValueError(f"{what} must be positive, got {raw!r}")
    return value


def parse_decimal(raw: str, what: str) -> Decimal:
    try:
        value = Decimal(raw.strip())
    except InvalidOperation:
        raise ValueError(f"{what} is not a number: {raw!r}") from None
    if not value.is_finite():
        raise ValueError(f"{what} is not finite: {raw!r}")
    return value


def parse_optional_float(raw: str):
    text = raw.strip()
    return None if not text else float(text)


def format_decimal(value: Decimal) -> str:
    """Plain notation without exponent or trailing zeros."""
    text = format(value.normalize(), "f")
    return "0" if text in ("-0", "") else text


def format_float(value) -> str:
    return "" if value is None else repr(float(value))


def format_bool(value: bool) -> str:
    return "true" if value else "false"


def format_ts(ts: int) -> str:
    return format_timestamp(ts)


def open_csv_rows(handle: TextIO, expected_header: Sequence[str], path: str,
                  check_width: bool = True) -> Iterator[tuple[int, list[str]]]:
    """Yields ``(line_number, fields)`` after checking the header.

    Blank lines are skipped. With ``check_width`` a row with the wrong field count raises
    ``IngestError``; otherwise the caller validates the width.
    """
    reader = csv.reader(handle)
    header = next(reader, None)
    if header is None:
        raise IngestError("missing header", line=1, path=path)
    if [column.strip() for column in header] != list(expected_header):
        raise IngestError(f"header {header} does not match {list(expected_header)}", line=1, path=path)
    for fields in reader:
        line = reader.line_num
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if check_width and len(fields) != len(expected_header):
            raise IngestError(f"expected {len(expected_header)} fields, got {len(fields)}", line=line, path=path)
        yield line, fields


def csv_writer(handle: TextIO):
    return csv.writer(handle, lineterminator="\n")
