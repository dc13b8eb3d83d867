"""Shared fixtures: hand-built ledgers, price paths and file writers."""

from datetime import date, timedelta
from decimal import Decimal

import pytest

from models.configs import BacktestConfig
from models.records import (BASE_UNITS_PER_COIN, SECONDS_PER_YEAR, MarketSeries, OutputRecord, PricePoint, Signal,
                            day_start)
from parsers.common import parse_timestamp

WAL_SPEND_DAY = date(2021, 1, 1)
FIXTURE_START = date(2014, 1, 1)


def coins(amount) -> int:
    return int(Decimal(str(amount)) * BASE_UNITS_PER_COIN)


@pytest.fixture
def ts():
    """ISO-8601 UTC text to UNIX seconds."""
    return parse_timestamp


@pytest.fixture
def write_lines(tmp_path):
    """Writes ``lines`` (newline-joined, trailing newline) to ``tmp_path / name``."""

    def _write(name: str, *lines: str) -> str:
        path = tmp_path / name
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def alice_record(ts):
    """7 coins minted on 2020-07-02 12:00, paid to Bob half a year later."""
    return OutputRecord("a", 0, coins(7), ts("2020-07-02T12:00:00Z"), ts("2021-01-01T12:00:00Z"), True)


@pytest.fixture
def three_spend_records():
    """Three 1-coin outputs spent on 2021-01-01 at noon after 9, 6 and 6 years."""
    spend = day_start(WAL_SPEND_DAY) + 43_200
    records = []
    for index, years in enumerate((9, 6, 6)):
        records.append(OutputRecord(f"old{index}", 0, coins(1), spend - years * SECONDS_PER_YEAR, spend, True))
    return sorted(records, key=lambda r: r.sort_key)


@pytest.fixture
def half_day_record():
    """10 coins left unspent for half a day."""
    created = day_start(WAL_SPEND_DAY) + 3_600
    return OutputRecord("ten", 0, coins(10), created, created + 43_200, True)


def daily_coinbase_records(start: date, days: int, amount=50):
    """One unspent coinbase output per day at 06:00."""
    return [
        OutputRecord(f"cb{offset:04d}", 0, coins(amount), day_start(start + timedelta(days=offset)) + 21_600, None,
                     True)
        for offset in range(days)
    ]


def market_from(closes, start: date = FIXTURE_START) -> MarketSeries:
    return MarketSeries(tuple(PricePoint(start + timedelta(days=i), Decimal(str(c))) for i, c in enumerate(closes)))


@pytest.fixture
def five_day_market():
    return market_from([10, 10, 20, 20, 20])


@pytest.fixture
def five_day_signals():
    kinds = [Signal.BUY, Signal.HOLD, Signal.SELL, Signal.HOLD, Signal.HOLD]
    return [(FIXTURE_START + timedelta(days=i), kind) for i, kind in enumerate(kinds)]


@pytest.fixture
def five_day_config():
    """Published protocol, except the fee is raised to 1% so the hand ledger has round numbers."""
    return BacktestConfig(fee_rate=Decimal("0.01"))


@pytest.fixture
def coinbase_chain():
    return daily_coinbase_records


@pytest.fixture
def make_market():
    return market_from


@pytest.fixture
def to_units():
    return coins
