"""Module for parsing raw transaction files (inputs and outputs per transaction)."""

from typing import Iterator, List, Optional

from models.errors import IngestError
from models.records import OutPoint, TransactionRecord
from parsers.common import open_csv_rows, parse_bool, parse_non_negative_int, parse_positive_int, parse_timestamp
from parsers.output_parser import RejectedRow
from util.log_config import setup_logging

logger = setup_logging("transaction_parser")

TRANSACTION_HEADER = ("tx_id", "timestamp", "is_coinbase", "inputs", "outputs")


def _parse_inputs(raw: str) -> tuple:
    inputs = []
    for token in raw.split(";"):
        token = token.strip()
        if not token:
            continue
        source, sep, index = token.rpartition(":")
        if not sep or not source:
            raise ValueError(f"input {token!r} is not of the form src_tx:idx")
        inputs.append(OutPoint(source, parse_non_negative_int(index, "input output_index")))
    return tuple(inputs)


def _parse_outputs(raw: str) -> tuple:
    outputs = tuple(parse_positive_int(token, "output value") for token in raw.split(";") if token.strip())
    if not outputs:
        raise ValueError("transaction has no outputs")
    return outputs


def _parse_transaction_row(fields: list[str]) -> TransactionRecord:
    if len(fields) != len(TRANSACTION_HEADER):
        raise ValueError(f"expected {len(TRANSACTION_HEADER)} fields, got {len(fields)}")
    tx_id, timestamp, is_coinbase, inputs, outputs = fields
    if not tx_id.strip():
        raise ValueError("empty tx_id")
    tx = TransactionRecord(
        tx_id=tx_id.strip(),
        timestamp=parse_timestamp(timestamp),
        inputs=_parse_inputs(inputs),
        outputs=_parse_outputs(outputs),
        is_coinbase=parse_bool(is_coinbase),
    )
    if tx.is_coinbase and tx.inputs:
        raise ValueError("coinbase transaction with non-empty inputs")
    return tx


def iter_transactions(path: str, rejected: Optional[List[RejectedRow]] = None) -> Iterator[TransactionRecord]:
    """Streams validated transactions in file order.

    Args:
        path (str): raw transaction CSV
        rejected (list, optional): lenient mode, collects skipped rows
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, fields in open_csv_rows(handle, TRANSACTION_HEADER, path, check_width=False):
            try:
                tx = _parse_transaction_row(fields)
            except ValueError as e:
                if rejected is None:
                    logger.error("Rejecting %s line %d: %s", path, line, e)
                    raise IngestError(str(e), line=line, path=path) from None
                logger.warning("Skipping %s line %d: %s", path, line, e)
                rejected.append(RejectedRow(line, str(e)))
                continue
            yield tx


def load_transactions(path: str, rejected: Optional[List[RejectedRow]] = None) -> List[TransactionRecord]:
    """Loads raw transactions sorted by timestamp.

    The sort is stable, so transactions sharing a timestamp keep their file order
    (a spender listed after its source stays after it).
    """
    transactions = sorted(iter_transactions(path, rejected), key=lambda tx: tx.timestamp)
    logger.info(f"Loaded {len(transactions)} transactions from {path}")
    return transactions
