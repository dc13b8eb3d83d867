"""Module for parsing daily close price files."""

from models.errors import IngestError
from models.records import MarketSeries, PricePoint
from parsers.common import open_csv_rows, parse_day, parse_decimal
from util.log_config import setup_logging

logger = setup_logging("price_parser")

PRICE_HEADER = ("date", "close_usd")


def load_price_series(path: str) -> MarketSeries:
    """Parses a ``date,close_usd`` file into a MarketSeries.

    Rows may come in any order; gaps in calendar days are kept as they are.

    Args:
        path (str): price CSV

    Raises:
        IngestError: non-positive price, duplicate date or unparseable date

    Returns:
        MarketSeries: prices sorted by date
    """
    points = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, (raw_day, raw_close) in open_csv_rows(handle, PRICE_HEADER, path):
            try:
                day = parse_day(raw_day)
                close = parse_decimal(raw_close, "close_usd")
                if close <= 0:
                    raise ValueError(f"non-positive close {raw_close!r}")
                if day in points:
                    raise ValueError(f"duplicate date {day.isoformat()}")
            except ValueError as e:
                logger.error("Rejecting %s line %d: %s", path, line, e)
                raise IngestError(str(e), line=line, path=path) from None
            points[day] = close

    series = MarketSeries(tuple(PricePoint(day, points[day]) for day in sorted(points)))
    logger.info(f"Loaded {len(series)} daily prices from {path}")
    return series
