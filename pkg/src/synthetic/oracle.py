"""Brute-force reference computations.

Every day is recomputed by a full scan over all records, with nothing carried from the
previous day. Slow on purpose; agreement with the incremental engine is the evidence
that the engine is right.
"""

from dataclasses import dataclass, field
from datetime import date
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.records import (BASE_UNITS_PER_COIN, DAYS_PER_YEAR, DEFAULT_BINNING, SECONDS_PER_DAY, SECONDS_PER_YEAR,
                            AgeBinning, OutputRecord, day_end, iter_days)
from util.log_config import setup_logging

logger = setup_logging("oracle")

UNSPENT = np.iinfo(np.int64).max


@dataclass
class OracleMetrics:
    """Per-day reference values, aligned with ``dates``."""

    dates: List[date] = field(default_factory=list)
    utxo_total_value: List[int] = field(default_factory=list)
    utxo_count: List[int] = field(default_factory=list)
    cumulative_issuance: List[int] = field(default_factory=list)
    spent_value: List[int] = field(default_factory=list)
    spend_count: List[int] = field(default_factory=list)
    utxo_age: List[Tuple[float, ...]] = field(default_factory=list)
    stxo_lifespan: List[Tuple[float, ...]] = field(default_factory=list)
    wal: List[Optional[float]] = field(default_factory=list)
    cdd: List[float] = field(default_factory=list)
    velocity: List[Optional[float]] = field(default_factory=list)
    staking_ratio: List[Optional[float]] = field(default_factory=list)


def _binned_shares(values: np.ndarray, ages: np.ndarray, binning: AgeBinning) -> Tuple[float, ...]:
    bins = np.searchsorted(np.asarray(binning.boundaries_seconds, dtype=np.int64), ages, side="right")
    totals = [int(values[bins == b].sum()) for b in range(binning.bin_count)]
    grand_total = sum(totals)
    if grand_total == 0:
        return tuple(0.0 for _ in totals)
    return tuple(t / grand_total for t in totals)


def oracle_metrics(records: Sequence[OutputRecord], day_range: Tuple[date, date],
                   binning: AgeBinning = DEFAULT_BINNING) -> OracleMetrics:
    """Recomputes snapshots, distributions, WAL, CDD, velocity and staking ratio per day.

    Args:
        records (Sequence[OutputRecord]): any order
        day_range (Tuple[date, date]): inclusive
        binning (AgeBinning): age bins for both distributions

    Returns:
        OracleMetrics: one entry per day in range
    """
    created = np.asarray([r.created_at for r in records], dtype=np.int64)
    spent = np.asarray([UNSPENT if r.spent_at is None else r.spent_at for r in records], dtype=np.int64)
    values = np.asarray([r.value for r in records], dtype=np.int64)
    coinbase = np.asarray([r.is_coinbase for r in records], dtype=bool)

    result = OracleMetrics()
    for day in iter_days(*day_range):
        end = day_end(day)
        start = end - SECONDS_PER_DAY

        live = (created < end) & (spent >= end)
        live_values = values[live]
        ages = end - created[live]
        total = int(live_values.sum())
        issuance = int(values[coinbase & (created < end)].sum())

        spent_today = (spent >= start) & (spent < end)
        spent_values = values[spent_today]
        lifespans = spent[spent_today] - created[spent_today]
        spent_total = int(spent_values.sum())
        weighted = sum(int(v) * int(s) for v, s in zip(spent_values, lifespans))

        result.dates.append(day)
        result.utxo_total_value.append(total)
        result.utxo_count.append(int(live.sum()))
        result.cumulative_issuance.append(issuance)
        result.spent_value.append(spent_total)
        result.spend_count.append(int(spent_today.sum()))
        result.utxo_age.append(_binned_shares(live_values, ages, binning))
        result.stxo_lifespan.append(_binned_shares(spent_values, lifespans, binning))
        result.wal.append(weighted / (spent_total * SECONDS_PER_YEAR) if spent_total else None)
        result.cdd.append(weighted / (BASE_UNITS_PER_COIN * SECONDS_PER_DAY))
        result.velocity.append(spent_total / issuance if issuance else None)
        old = int(live_values[ages > DAYS_PER_YEAR * SECONDS_PER_DAY].sum())
        result.staking_ratio.append(old / total if total else None)

    logger.info(f"Oracle scanned {len(records)} records over {len(result.dates)} days")
    return result
