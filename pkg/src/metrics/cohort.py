"""Age cohorts, Weighted Average Lifespan and CoinDaysDestroyed over replayed snapshots."""

from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from ledger.replay import ensure_contiguous
from models.errors import InvariantViolation
from models.records import (BASE_UNITS_PER_COIN, DEFAULT_BINNING, SECONDS_PER_DAY, SECONDS_PER_YEAR, AgeBinning,
                            CreationBucket, DailyAgeDistribution, DailySnapshot, DistributionKind, MetricSeries,
                            OutputRecord, day_index, day_start)
from util.log_config import setup_logging

logger = setup_logging("cohort_metrics")

SHARE_TOLERANCE = 1e-9


class AgeIndex:
    """Live UTXO value bucketed by creation day.

    Two int64 arrays indexed by epoch day: all live value created on that day, and the
    part of it created exactly at 00:00:00. Together they answer ``age >= n days`` and
    ``age > n days`` at any day end without touching individual outputs.
    """

    def __init__(self):
        self._origin = None
        self._by_day = np.zeros(0, dtype=np.int64)
        self._at_midnight = np.zeros(0, dtype=np.int64)
        self.total = 0
        self.count = 0

    def _slot(self, day: int) -> int:
        if self._origin is None:
            self._origin = day
        if day < self._origin:
            pad = np.zeros(self._origin - day, dtype=np.int64)
            self._by_day = np.concatenate([pad, self._by_day])
            self._at_midnight = np.concatenate([pad, self._at_midnight])
            self._origin = day
        position = day - self._origin
        if position >= len(self._by_day):
            grow = max(position + 1, 2 * len(self._by_day)) - len(self._by_day)
            self._by_day = np.concatenate([self._by_day, np.zeros(grow, dtype=np.int64)])
            self._at_midnight = np.concatenate([self._at_midnight, np.zeros(grow, dtype=np.int64)])
        return position

    def _shift(self, day: int, value: int, midnight_value: int, count: int):
        position = self._slot(day)
        self._by_day[position] += value
        self._at_midnight[position] += midnight_value
        self.total += value
        self.count += count

    def add_bucket(self, bucket: CreationBucket):
        if bucket.count:
            self._shift(bucket.day, bucket.value, bucket.midnight_value, bucket.count)

    def _shift_record(self, record: OutputRecord, sign: int):
        day = day_index(record.created_at)
        midnight = record.value if record.created_at == day * SECONDS_PER_DAY else 0
        self._shift(day, sign * record.value, sign * midnight, sign)

    def add(self, record: OutputRecord):
        self._shift_record(record, 1)

    def remove(self, record: OutputRecord):
        self._shift_record(record, -1)

    def created_before(self, day: int) -> int:
        """Live value whose creation day is strictly before epoch day ``day``."""
        if self._origin is None or day <= self._origin:
            return 0
        return int(self._by_day[:day - self._origin].sum())

    def _midnight_value(self, day: int) -> int:
        if self._origin is None:
            return 0
        position = day - self._origin
        if position < 0 or position >= len(self._at_midnight):
            return 0
        return int(self._at_midnight[position])

    def aged_at_least(self, day: int, age_days: int) -> int:
        """Value with ``day_end - created_at >= age_days`` days, measured at the end of ``day``."""
        cutoff = day + 1 - age_days
        return self.created_before(cutoff) + self._midnight_value(cutoff)

    def aged_over(self, day: int, age_days: int) -> int:
        """Value with ``day_end - created_at > age_days`` days, measured at the end of ``day``."""
        return self.created_before(day + 1 - age_days)

    def bin_values(self, day: int, binning: AgeBinning) -> List[int]:
        at_least = [self.total] + [self.aged_at_least(day, b) for b in binning.boundaries_days] + [0]
        return [lower - upper for lower, upper in zip(at_least, at_least[1:])]


def replay_age_index(snapshots: Iterable[DailySnapshot]) -> Iterator[Tuple[DailySnapshot, AgeIndex]]:
    """Applies each day's creations and spends to a shared AgeIndex.

    The index is mutated in place; consume each yielded pair before advancing.

    Raises:
        InvariantViolation: index total drifts from the snapshot's UTXO total
    """
    index = AgeIndex()
    for position, snapshot in enumerate(snapshots):
        if position == 0:
            for bucket in snapshot.opening_profile:
                index.add_bucket(bucket)
        index.add_bucket(snapshot.created_today)
        for event in snapshot.spent_today:
            index.remove(event.record)
        if index.total != snapshot.utxo_total_value or index.count != snapshot.utxo_count:
            logger.error("Age index holds %d in %d outputs, snapshot %s says %d in %d", index.total, index.count,
                         snapshot.date, snapshot.utxo_total_value, snapshot.utxo_count)
            raise InvariantViolation(f"age index out of sync with replay on {snapshot.date.isoformat()}")
        yield snapshot, index


def _shares(values: Sequence[int], total: int) -> tuple:
    if total == 0:
        return tuple(0.0 for _ in values)
    shares = tuple(v / total for v in values)
    if abs(sum(shares) - 1.0) > SHARE_TOLERANCE or any(s < 0 for s in shares):
        raise InvariantViolation(f"distribution shares do not normalize: {shares}")
    return shares


def utxo_age_distribution(snapshots: Sequence[DailySnapshot],
                          binning: AgeBinning = DEFAULT_BINNING) -> List[DailyAgeDistribution]:
    """Value-weighted age shares of the live UTXO set at each day end.

    Args:
        snapshots (Sequence[DailySnapshot]): contiguous replay output
        binning (AgeBinning): age bins, ``lower <= age < upper``

    Returns:
        List[DailyAgeDistribution]: one per snapshot, all-zero shares on an empty set
    """
    ensure_contiguous(snapshots)
    distributions = []
    for snapshot, index in replay_age_index(snapshots):
        today = day_index(day_start(snapshot.date))
        values = index.bin_values(today, binning)
        distributions.append(DailyAgeDistribution(snapshot.date, DistributionKind.UTXO_AGE,
                                                  _shares(values, index.total), index.total))
    logger.info(f"Computed {len(distributions)} UTXO age distributions")
    return distributions


def stxo_lifespan_distribution(snapshots: Sequence[DailySnapshot],
                               binning: AgeBinning = DEFAULT_BINNING) -> List[DailyAgeDistribution]:
    """Value-weighted lifespan shares of each day's spent outputs."""
    ensure_contiguous(snapshots)
    distributions = []
    for snapshot in snapshots:
        values = [0] * binning.bin_count
        for event in snapshot.spent_today:
            values[binning.bin_of(event.lifespan_seconds)] += event.record.value
        total = sum(values)
        distributions.append(DailyAgeDistribution(snapshot.date, DistributionKind.STXO_LIFESPAN,
                                                  _shares(values, total), total))
    return distributions


def wal_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    """Weighted Average Lifespan in years of 365 days; absent on days without spends."""
    ensure_contiguous(snapshots)
    pairs = []
    for snapshot in snapshots:
        if not snapshot.spent_today:
            pairs.append((snapshot.date, None))
            continue
        weighted = sum(e.record.value * e.lifespan_seconds for e in snapshot.spent_today)
        weight = sum(e.record.value for e in snapshot.spent_today)
        pairs.append((snapshot.date, weighted / (weight * SECONDS_PER_YEAR)))
    return MetricSeries.from_pairs("wal", "years", pairs)


def cdd_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    """Coin-days destroyed by each day's spends; 0 on days without spends."""
    ensure_contiguous(snapshots)
    pairs = []
    for snapshot in snapshots:
        weighted = sum(e.record.value * e.lifespan_seconds for e in snapshot.spent_today)
        pairs.append((snapshot.date, weighted / (BASE_UNITS_PER_COIN * SECONDS_PER_DAY)))
    return MetricSeries.from_pairs("cdd", "coin-days", pairs)
