"""Canonical CSV writers for everything coinlens produces, and the readers that load
those files back (records, metric series, distributions, valuation rows, signals,
trades, equity curves).

Writers are deterministic: fixed column order, ``\\n`` line endings, shortest
round-trip float formatting and exponent-free decimals.
"""

from decimal import Decimal
from typing import Iterable, List, Sequence

from models.errors import IngestError
from models.records import (DEFAULT_BINNING, AgeBinning, DailyAgeDistribution, DistributionKind, MarketSeries,
                            MetricSeries, OutputRecord, PuPoint, Side, Signal, Trade, TransactionRecord,
                            UtilityInputs, ValuationRow, Zone)
from parsers.common import (csv_writer, format_bool, format_decimal, format_float, format_ts, open_csv_rows,
                            parse_bool, parse_day, parse_decimal, parse_optional_float)
from parsers.output_parser import OUTPUT_HEADER
from parsers.price_parser import PRICE_HEADER
from parsers.transaction_parser import TRANSACTION_HEADER
from util.log_config import setup_logging

logger = setup_logging("writers")

VALUATION_HEADER = ("date", "price_usd", "velocity", "staking_ratio", "volatility", "dilution",
                    "token_utility", "pu", "zone", "floored")
SIGNAL_HEADER = ("date", "pu", "signal")
TRADE_HEADER = ("date", "side", "units", "price_usd", "fee_usd", "cash_after", "holdings_after")
EQUITY_HEADER = ("date", "equity_usd")


def distribution_header(binning: AgeBinning = DEFAULT_BINNING) -> tuple:
    return ("date",) + tuple(f"bin_{label}" for label in binning.labels)


def write_output_records(records: Iterable[OutputRecord], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(OUTPUT_HEADER)
        for record in records:
            writer.writerow([
                record.tx_id,
                record.output_index,
                record.value,
                format_ts(record.created_at),
                "" if record.spent_at is None else format_ts(record.spent_at),
                format_bool(record.is_coinbase),
            ])
            count += 1
    logger.debug("Wrote %d output records to %s", count, path)
    return count


def write_transactions(transactions: Iterable[TransactionRecord], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(TRANSACTION_HEADER)
        for tx in transactions:
            writer.writerow([
                tx.tx_id,
                format_ts(tx.timestamp),
                format_bool(tx.is_coinbase),
                ";".join(f"{i.tx_id}:{i.output_index}" for i in tx.inputs),
                ";".join(str(v) for v in tx.outputs),
            ])
            count += 1
    logger.debug("Wrote %d transactions to %s", count, path)
    return count


def write_price_series(market: MarketSeries, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(PRICE_HEADER)
        for point in market.points:
            writer.writerow([point.date.isoformat(), format_decimal(point.close_usd)])


def write_series_csv(series: MetricSeries, path: str, value_column: str = "value") -> None:
    """Writes ``date,value``; absent values become empty cells."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(["date", value_column])
        for day, value in series.items():
            writer.writerow([day.isoformat(), format_float(value)])


def read_series_csv(path: str, name: str = "", unit: str = "", value_column: str = "value") -> MetricSeries:
    pairs = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, (raw_day, raw_value) in open_csv_rows(handle, ("date", value_column), path):
            try:
                pairs.append((parse_day(raw_day), parse_optional_float(raw_value)))
            except ValueError as e:
                raise IngestError(str(e), line=line, path=path) from None
    return MetricSeries.from_pairs(name, unit, pairs)


def write_distribution_csv(distributions: Iterable[DailyAgeDistribution], path: str,
                           binning: AgeBinning = DEFAULT_BINNING) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(distribution_header(binning))
        for dist in distributions:
            writer.writerow([dist.date.isoformat()] + [format_float(share) for share in dist.shares])


def read_distribution_csv(path: str, kind: DistributionKind,
                          binning: AgeBinning = DEFAULT_BINNING) -> List[DailyAgeDistribution]:
    """Re-loads a distribution export. The value totals are not exported and read back as 0."""
    distributions = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, fields in open_csv_rows(handle, distribution_header(binning), path):
            try:
                shares = tuple(float(f) for f in fields[1:])
                distributions.append(DailyAgeDistribution(parse_day(fields[0]), kind, shares, 0))
            except ValueError as e:
                raise IngestError(str(e), line=line, path=path) from None
    return distributions


def write_valuation_csv(rows: Iterable[ValuationRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(VALUATION_HEADER)
        for row in rows:
            writer.writerow([
                row.point.date.isoformat(),
                format_decimal(row.point.price_usd),
                format_float(row.inputs.velocity),
                format_float(row.inputs.staking_ratio),
                format_float(row.inputs.volatility),
                format_float(row.inputs.dilution),
                format_float(row.point.token_utility),
                format_float(row.point.pu),
                row.point.zone.value,
                format_bool(row.floored),
            ])


def load_valuation_csv(path: str) -> List[ValuationRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, fields in open_csv_rows(handle, VALUATION_HEADER, path):
            try:
                day = parse_day(fields[0])
                inputs = UtilityInputs(day, *(parse_optional_float(f) for f in fields[2:6]))
                point = PuPoint(day, parse_decimal(fields[1], "price_usd"), float(fields[6]),
                                float(fields[7]), Zone(fields[8]))
                rows.append(ValuationRow(inputs, point, parse_bool(fields[9])))
            except ValueError as e:
                raise IngestError(str(e), line=line, path=path) from None
    logger.info(f"Loaded {len(rows)} valuation rows from {path}")
    return rows


def load_pu_points(path: str) -> List[PuPoint]:
    return [row.point for row in load_valuation_csv(path)]


def write_signals_csv(signals: Sequence, path: str) -> None:
    """Writes ``(date, signal)`` or ``(date, signal, pu)`` tuples as ``date,pu,signal``."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(SIGNAL_HEADER)
        for entry in signals:
            day, signal = entry[0], entry[1]
            pu = entry[2] if len(entry) > 2 else None
            writer.writerow([day.isoformat(), format_float(pu), Signal(signal).value])


def load_signals_csv(path: str) -> list:
    """Returns ``(date, Signal)`` pairs in file order."""
    signals = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, (raw_day, _raw_pu, raw_signal) in open_csv_rows(handle, SIGNAL_HEADER, path):
            try:
                signals.append((parse_day(raw_day), Signal(raw_signal.strip())))
            except ValueError as e:
                raise IngestError(str(e), line=line, path=path) from None
    return signals


def write_trades_csv(trades: Iterable[Trade], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(TRADE_HEADER)
        for trade in trades:
            writer.writerow([
                trade.date.isoformat(),
                trade.side.value,
                format_decimal(trade.units),
                format_decimal(trade.price_usd),
                format_decimal(trade.fee_usd),
                format_decimal(trade.cash_after),
                format_decimal(trade.holdings_after),
            ])


def read_trades_csv(path: str) -> List[Trade]:
    trades = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line, fields in open_csv_rows(handle, TRADE_HEADER, path):
            try:
                amounts = [parse_decimal(f, column) for f, column in zip(fields[2:], TRADE_HEADER[2:])]
                trades.append(Trade(parse_day(fields[0]), Side(fields[1]), *amounts))
            except ValueError as e:
                raise IngestError(str(e), line=line, path=path) from None
    return trades


def write_equity_csv(equity: Sequence, path: str) -> None:
    """Writes ``(date, Decimal)`` marks as ``date,equity_usd``."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_writer(handle)
        writer.writerow(EQUITY_HEADER)
        for day, value in equity:
            writer.writerow([day.isoformat(), format_decimal(Decimal(value))])


def read_equity_csv(path: str) -> MetricSeries:
    return read_series_csv(path, name="equity", unit="usd", value_column="equity_usd")
