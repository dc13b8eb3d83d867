"""Exception hierarchy shared by every coinlens package.

Library code raises these; only the CLI turns them into exit codes.
"""

from datetime import date
from typing import Optional



class CoinlensError(Exception):
    """Base class for all errors raised on purpose by coinlens."""


class IngestError(CoinlensError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ""
        if path:
            location += f"{path}"
        if line is not None:
            location += f"{':' if path else 'line '}{line}"
        super().__init__(f"{location}: {message}" if location else message)


class LedgerError(CoinlensError, ValueError):
    """Dangling input or double spend while resolving transactions."""

    def __init__(self, message: str, tx_id: str):
        self.tx_id = tx_id
        super().__init__(f"tx {tx_id}: {message}")


class MissingPriceError(CoinlensError, ValueError):
    def __init__(self, day: date):
        self.date = day
        super().__init__(f"no close price for signal date {day.isoformat()}")


class InvariantViolation(CoinlensError, RuntimeError):
    """An internal consistency check failed (conservation, normalization, accounting)."""
