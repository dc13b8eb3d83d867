""" Module for the parsing of pre-joined transaction output files.
One row per output, with its creation and (optional) spend timestamp.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional

from models.errors import IngestError
from models.records import OutputRecord
from parsers.common import (open_csv_rows, parse_bool, parse_non_negative_int, parse_optional_timestamp,
                            parse_positive_int, parse_timestamp)
from util.log_config import setup_logging

logger = setup_logging("output_parser")

OUTPUT_HEADER = ("tx_id", "output_index", "value", "created_at", "spent_at", "is_coinbase")


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str


def _parse_output_row(fields: list[str]) -> OutputRecord:
    if len(fields) != len(OUTPUT_HEADER):
        raise ValueError(f"expected {len(OUTPUT_HEADER)} fields, got {len(fields)}")
    tx_id, output_index, value, created_at, spent_at, is_coinbase = fields
    if not tx_id.strip():
        raise ValueError("empty tx_id")
    record = OutputRecord(
        tx_id=tx_id.strip(),
        output_index=parse_non_negative_int(output_index, "output_index"),
        value=parse_positive_int(value, "value"),
        created_at=parse_timestamp(created_at),
        spent_at=parse_optional_timestamp(spent_at),
        is_coinbase=parse_bool(is_coinbase),
    )
    if record.spent_at is not None and record.spent_at < record.created_at:
        raise ValueError("spent_at is earlier than created_at")
    return record


def iter_output_records(path: str, rejected: Optional[List[RejectedRow]] = None) -> Iterator[OutputRecord]:
    """Streams validated output records in file order.

    Args:
        path (str): pre-joined CSV file
        rejected (list, optional): if given, invalid rows are appended here and skipped
            instead of aborting the read

    Raises:
        IngestError: malformed row, duplicate (tx_id, output_index) or spend before creation
    """
    seen = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, fields in open_csv_rows(handle, OUTPUT_HEADER, path, check_width=False):
            try:
                record = _parse_output_row(fields)
                if record.key in seen:
                    raise ValueError(f"duplicate output {record.tx_id}:{record.output_index}")
            except ValueError as e:
                if rejected is None:
                    logger.error("Rejecting %s line %d: %s", path, line, e)
                    raise IngestError(str(e), line=line, path=path) from None
                logger.warning("Skipping %s line %d: %s", path, line, e)
                rejected.append(RejectedRow(line, str(e)))
                continue
            seen.add(record.key)
            yield record


def load_output_records(path: str, format: str = "pre-joined",
                        rejected: Optional[List[RejectedRow]] = None) -> List[OutputRecord]:
    """Loads a pre-joined output file sorted by (created_at, tx_id, output_index).

    Args:
        path (str): file path
        format (str): only 'pre-joined' is read here; raw transactions go through
            parsers.transaction_parser and ledger.replay.match_spends
        rejected (list, optional): collects skipped rows in lenient mode

    Returns:
        List[OutputRecord]: sorted records
    """
    if format != "pre-joined":
        raise ValueError(f"unsupported output record format {format!r}")
    records = sorted(iter_output_records(path, rejected), key=lambda r: r.sort_key)
    logger.info(f"Loaded {len(records)} output records from {path}")
    return records
