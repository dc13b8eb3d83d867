"""Ledger replay: resolves spends and walks the chain day by day.

Replay is one sequential pass. Memory stays proportional to the live outputs that
still have a pending spend plus one day of activity; the full UTXO membership is
never materialized per day.
"""

import heapq
from datetime import date
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from models.errors import InvariantViolation, LedgerError
from models.records import (SECONDS_PER_DAY, CreationBucket, DailySnapshot, MetricSeries, OutputRecord, SpendEvent,
                            TransactionRecord, day_end, day_index, day_of, day_start, to_coins)
from util.log_config import setup_logging

logger = setup_logging("ledger_replay")

DayRange = Tuple[date, date]


def match_spends(transactions: Sequence[TransactionRecord]) -> List[OutputRecord]:
    """Turns raw transactions into output records with their spend time filled in.

    Args:
        transactions (Sequence[TransactionRecord]): sorted by timestamp

    Raises:
        LedgerError: dangling input, double spend, or an input created after its spender

    Returns:
        List[OutputRecord]: one record per output, sorted by (created_at, tx_id, output_index)
    """
    outputs = {}
    spent_at = {}
    last_timestamp = None
    for tx in transactions:
        if last_timestamp is not None and tx.timestamp < last_timestamp:
            raise LedgerError("transactions are not sorted by timestamp", tx.tx_id)
        last_timestamp = tx.timestamp

        for source in tx.inputs:
            key = (source.tx_id, source.output_index)
            created = outputs.get(key)
            if created is None:
                logger.error("Dangling input %s:%d in tx %s", source.tx_id, source.output_index, tx.tx_id)
                raise LedgerError(f"input {source.tx_id}:{source.output_index} references an unknown output",
                                  tx.tx_id)
            if key in spent_at:
                logger.error("Double spend of %s:%d in tx %s", source.tx_id, source.output_index, tx.tx_id)
                raise LedgerError(f"output {source.tx_id}:{source.output_index} is already spent", tx.tx_id)
            if created[1] > tx.timestamp:
                raise LedgerError(f"input {source.tx_id}:{source.output_index} is created after its spender",
                                  tx.tx_id)
            spent_at[key] = tx.timestamp

        for index, value in enumerate(tx.outputs):
            key = (tx.tx_id, index)
            if key in outputs:
                raise LedgerError("duplicate transaction id", tx.tx_id)
            outputs[key] = (value, tx.timestamp, tx.is_coinbase)

    records = [
        OutputRecord(tx_id, index, value, created_at, spent_at.get((tx_id, index)), is_coinbase)
        for (tx_id, index), (value, created_at, is_coinbase) in outputs.items()
    ]
    records.sort(key=lambda r: r.sort_key)
    logger.info(f"Matched {len(spent_at)} spends across {len(records)} outputs")
    return records


def record_span(records: Iterable[OutputRecord]) -> Optional[DayRange]:
    """First creation day and last activity (creation or spend) day, None if empty."""
    first = last = None
    for record in records:
        created = record.created_at
        latest = record.spent_at if record.spent_at is not None else created
        first = created if first is None else min(first, created)
        last = latest if last is None else max(last, latest)
    if first is None:
        return None
    return day_of(first), day_of(last)


def iter_snapshots(records: Iterable[OutputRecord], day_range: DayRange) -> Iterator[DailySnapshot]:
    """Replays the records over an inclusive day range, yielding one snapshot per day.

    Args:
        records (Iterable[OutputRecord]): sorted by created_at
        day_range (DayRange): inclusive (first, last) day

    Yields:
        DailySnapshot: end-of-day aggregates, that day's spends and its creation bucket
    """
    start, end = day_range
    if start > end:
        raise ValueError(f"empty day range {start.isoformat()}..{end.isoformat()}")

    stream = iter(records)
    lookahead = next(stream, None)
    last_created = None

    def advance():
        nonlocal lookahead, last_created
        record = lookahead
        if last_created is not None and record.created_at < last_created:
            raise ValueError(f"records not sorted by created_at at {record.tx_id}:{record.output_index}")
        last_created = record.created_at
        lookahead = next(stream, None)
        return record

    utxo_total = 0
    utxo_count = 0
    issuance = 0
    pending = []  # (spent_at, tx_id, output_index, record)

    range_start = day_start(start)
    opening = {}  # epoch day -> [value, midnight value, count]
    while lookahead is not None and lookahead.created_at < range_start:
        record = advance()
        if record.is_coinbase:
            issuance += record.value
        if record.spent_at is not None and record.spent_at < range_start:
            continue
        utxo_total += record.value
        utxo_count += 1
        bucket = opening.setdefault(day_index(record.created_at), [0, 0, 0])
        bucket[0] += record.value
        bucket[1] += record.value if record.created_at % SECONDS_PER_DAY == 0 else 0
        bucket[2] += 1
        if record.spent_at is not None:
            heapq.heappush(pending, (record.spent_at, record.tx_id, record.output_index, record))
    opening_profile = tuple(CreationBucket(day, *totals) for day, totals in sorted(opening.items()))
    if opening:
        logger.debug("Carried %d live outputs into %s", utxo_count, start.isoformat())

    for ordinal in range(start.toordinal(), end.toordinal() + 1):
        day = date.fromordinal(ordinal)
        boundary = day_end(day)

        created_value = 0
        created_midnight = 0
        created_count = 0
        while lookahead is not None and lookahead.created_at < boundary:
            record = advance()
            created_value += record.value
            created_count += 1
            if record.created_at % SECONDS_PER_DAY == 0:
                created_midnight += record.value
            if record.is_coinbase:
                issuance += record.value
            if record.spent_at is not None:
                heapq.heappush(pending, (record.spent_at, record.tx_id, record.output_index, record))
        utxo_total += created_value
        utxo_count += created_count

        spent = []
        while pending and pending[0][0] < boundary:
            spent_at, _, _, record = heapq.heappop(pending)
            spent.append(SpendEvent(record, day, spent_at - record.created_at))
            utxo_total -= record.value
            utxo_count -= 1

        yield DailySnapshot(
            date=day,
            utxo_total_value=utxo_total,
            utxo_count=utxo_count,
            cumulative_issuance=issuance,
            spent_today=tuple(spent),
            created_today=CreationBucket(day_index(day_start(day)), created_value, created_midnight, created_count),
            opening_profile=opening_profile if ordinal == start.toordinal() else (),
        )


def daily_snapshots(records: Iterable[OutputRecord], day_range: DayRange) -> List[DailySnapshot]:
    """Materialized form of ``iter_snapshots``: one snapshot per calendar day in range."""
    snapshots = list(iter_snapshots(records, day_range))
    logger.info(f"Replayed {len(snapshots)} days "
                f"({day_range[0].isoformat()}..{day_range[1].isoformat()})")
    return snapshots


def ensure_contiguous(snapshots: Sequence[DailySnapshot]) -> None:
    for previous, current in zip(snapshots, snapshots[1:]):
        if current.date.toordinal() != previous.date.toordinal() + 1:
            raise ValueError(f"snapshots not contiguous between {previous.date} and {current.date}")


def supply_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    """Cumulative coinbase issuance at the end of each day, in coins."""
    ensure_contiguous(snapshots)
    return MetricSeries.from_pairs("supply", "coins",
                                   [(s.date, to_coins(s.cumulative_issuance)) for s in snapshots])


def utxo_value_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    ensure_contiguous(snapshots)
    return MetricSeries.from_pairs("utxo_value", "coins",
                                   [(s.date, to_coins(s.utxo_total_value)) for s in snapshots])


def utxo_count_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    ensure_contiguous(snapshots)
    return MetricSeries.from_pairs("utxo_count", "outputs", [(s.date, float(s.utxo_count)) for s in snapshots])


def check_conservation(snapshots: Sequence[DailySnapshot], fee_free: bool = False) -> None:
    """Verifies the day-over-day UTXO balance identity in exact integers.

    Args:
        snapshots (Sequence[DailySnapshot]): contiguous replay output
        fee_free (bool): additionally require utxo total == cumulative issuance
            (holds for fee-free chains replayed from their genesis)

    Raises:
        InvariantViolation: first day where an identity breaks
    """
    if not snapshots:
        return
    previous = snapshots[0].opening_value
    for snapshot in snapshots:
        expected = previous + snapshot.created_today_value - snapshot.spent_today_value
        if snapshot.utxo_total_value != expected or snapshot.utxo_total_value < 0 or snapshot.utxo_count < 0:
            logger.error("Conservation broken on %s: %d != %d", snapshot.date, snapshot.utxo_total_value, expected)
            raise InvariantViolation(f"UTXO balance identity broken on {snapshot.date.isoformat()}")
        if fee_free and snapshot.utxo_total_value != snapshot.cumulative_issuance:
            raise InvariantViolation(f"UTXO total differs from issuance on {snapshot.date.isoformat()}")
        previous = snapshot.utxo_total_value
