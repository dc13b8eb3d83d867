"""Token Utility inputs, Token Utility, the PU ratio and its valuation zones."""

from datetime import date, timedelta
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from ledger.replay import ensure_contiguous, supply_series
from metrics.cohort import replay_age_index
from models.configs import ZoneThresholds
from models.records import (DAYS_PER_YEAR, DEFAULT_BINNING, AgeBinning, DailySnapshot, MarketSeries, MetricSeries, PuPoint, UtilityInputs,
                            ValuationRow, Zone, day_index, day_start, to_coins)
from util.log_config import setup_logging

logger = setup_logging("utility_valuation")

VOLATILITY_FLOOR = 1e-6
DILUTION_FLOOR = 1e-6
DEFAULT_VOL_WINDOW = 30

DEFAULT_THRESHOLDS = ZoneThresholds()


def _snapshot_on(snapshots: Sequence[DailySnapshot], day: date) -> Optional[DailySnapshot]:
    if not snapshots:
        return None
    position = day.toordinal() - snapshots[0].date.toordinal()
    if 0 <= position < len(snapshots) and snapshots[position].date == day:
        return snapshots[position]
    return None


def token_velocity(snapshots: Sequence[DailySnapshot], supply: MetricSeries, day: date) -> Optional[float]:
    """Coins spent on ``day`` divided by the supply at ``day``; None on zero supply."""
    ensure_contiguous(snapshots)
    snapshot = _snapshot_on(snapshots, day)
    current = supply.get(day)
    if snapshot is None or not current:
        return None
    return to_coins(snapshot.spent_today_value) / current


def velocity_series(snapshots: Sequence[DailySnapshot]) -> MetricSeries:
    """Daily velocity against cumulative issuance, as one int/int division per day."""
    ensure_contiguous(snapshots)
    pairs = []
    for snapshot in snapshots:
        issuance = snapshot.cumulative_issuance
        pairs.append((snapshot.date, snapshot.spent_today_value / issuance if issuance else None))
    return MetricSeries.from_pairs("velocity", "fraction/day", pairs)


def staking_boundary(binning: AgeBinning) -> int:
    """The one-year edge of ``binning``; staking counts the value strictly older than it."""
    if DAYS_PER_YEAR not in binning.boundaries_days:
        raise ValueError(f"age binning has no {DAYS_PER_YEAR}-day boundary to measure staking against")
    return DAYS_PER_YEAR


def staking_ratio_series(snapshots: Sequence[DailySnapshot], binning: AgeBinning = DEFAULT_BINNING) -> MetricSeries:
    """Value share of the live UTXO set in the bins past the one-year edge at each day end.

    An output aged exactly one year sits on the edge and is not counted.
    """
    threshold_days = staking_boundary(binning)
    ensure_contiguous(snapshots)
    pairs = []
    for snapshot, index in replay_age_index(snapshots):
        if index.total == 0:
            pairs.append((snapshot.date, None))
            continue
        aged = index.aged_over(day_index(day_start(snapshot.date)), threshold_days)
        pairs.append((snapshot.date, aged / index.total))
    return MetricSeries.from_pairs("staking_ratio", "fraction", pairs)


def staking_ratio(snapshots: Sequence[DailySnapshot], day: date,
                  binning: AgeBinning = DEFAULT_BINNING) -> Optional[float]:
    """Staking ratio at the end of ``day``; None on an empty UTXO set or a day outside the replay."""
    staking_boundary(binning)
    if _snapshot_on(snapshots, day) is None:
        return None
    prefix = snapshots[:day.toordinal() - snapshots[0].date.toordinal() + 1]
    return staking_ratio_series(prefix, binning).get(day)


def dilution_rate(supply: MetricSeries, day: date) -> Optional[float]:
    """Trailing one-year supply growth, None without a full year of history."""
    current = supply.get(day)
    base = supply.get(day - timedelta(days=DAYS_PER_YEAR))
    if current is None or base is None or base <= 0:
        return None
    return current / base - 1


def dilution_series(supply: MetricSeries) -> MetricSeries:
    return MetricSeries.from_pairs("dilution", "fraction/year",
                                   [(day, dilution_rate(supply, day)) for day in supply.dates])


def _window_std(closes: Sequence) -> float:
    returns = np.diff(np.log(np.asarray([float(c) for c in closes], dtype=np.float64)))
    return float(np.std(returns, ddof=1))


def price_volatility(market: MarketSeries, day: date, window_days: int = DEFAULT_VOL_WINDOW) -> Optional[float]:
    """Sample std of the ``window_days`` log returns ending at ``day``.

    Prices are taken consecutive in the series; calendar gaps are not filled.
    """
    if window_days < 2:
        raise ValueError("volatility window needs at least 2 returns")
    position = market.position_of(day)
    if position is None or position < window_days:
        return None
    return _window_std([p.close_usd for p in market.points[position - window_days:position + 1]])


def volatility_series(market: MarketSeries, window_days: int = DEFAULT_VOL_WINDOW) -> MetricSeries:
    if window_days < 2:
        raise ValueError("volatility window needs at least 2 returns")
    closes = [p.close_usd for p in market.points]
    pairs = []
    for position, point in enumerate(market.points):
        value = None
        if position >= window_days:
            value = _window_std(closes[position - window_days:position + 1])
        pairs.append((point.date, value))
    return MetricSeries.from_pairs("volatility", "log-return std", pairs)


def history_start(start: date) -> date:
    """First day to replay so that dilution is defined from ``start`` on."""
    return start - timedelta(days=DAYS_PER_YEAR)


def is_floored(inputs: UtilityInputs) -> bool:
    """True when the volatility or the dilution floor replaces the measured value."""
    return ((inputs.volatility is not None and inputs.volatility < VOLATILITY_FLOOR)
            or (inputs.dilution is not None and inputs.dilution < DILUTION_FLOOR))


def token_utility(inputs: UtilityInputs) -> Optional[float]:
    """(velocity * staking) / (volatility * dilution), denominators floored at 1e-6.

    Returns:
        Optional[float]: None when any of the four inputs is absent
    """
    if None in (inputs.velocity, inputs.staking_ratio, inputs.volatility, inputs.dilution):
        return None
    denominator = max(inputs.volatility, VOLATILITY_FLOOR) * max(inputs.dilution, DILUTION_FLOOR)
    return (inputs.velocity * inputs.staking_ratio) / denominator


def valuation_zone(pu: float, thresholds: ZoneThresholds = DEFAULT_THRESHOLDS) -> Zone:
    """Both thresholds are inclusive to Normal."""
    if pu > thresholds.overvalued_above:
        return Zone.OVERVALUED
    if pu < thresholds.undervalued_below:
        return Zone.UNDERVALUED
    return Zone.NORMAL


def pu_series(market: MarketSeries, utility: MetricSeries,
              thresholds: ZoneThresholds = DEFAULT_THRESHOLDS) -> List[PuPoint]:
    """Price over utility on every day both exist and utility is positive."""
    points = []
    skipped = 0
    for day, value in utility.items():
        price = market.price_on(day)
        if price is None or value is None or value <= 0:
            skipped += 1
            continue
        pu = float(price) / value
        points.append(PuPoint(day, price, value, pu, valuation_zone(pu, thresholds)))
    if skipped:
        logger.debug("No PU value on %d days (price or utility absent)", skipped)
    return points


def utility_inputs(snapshots: Sequence[DailySnapshot], market: MarketSeries,
                   window_days: int = DEFAULT_VOL_WINDOW) -> List[UtilityInputs]:
    """The four utility inputs for every replayed day."""
    supply = supply_series(snapshots)
    velocity = velocity_series(snapshots)
    staking = staking_ratio_series(snapshots)
    dilution = dilution_series(supply)
    volatility = volatility_series(market, window_days)
    return [
        UtilityInputs(s.date, velocity.get(s.date), staking.get(s.date), volatility.get(s.date), dilution.get(s.date))
        for s in snapshots
    ]


def valuation_table(snapshots: Sequence[DailySnapshot], market: MarketSeries,
                    window_days: int = DEFAULT_VOL_WINDOW,
                    thresholds: ZoneThresholds = DEFAULT_THRESHOLDS,
                    start: Optional[date] = None) -> List[ValuationRow]:
    """Assembles the exported valuation rows: only days that carry a PU value.

    Args:
        snapshots (Sequence[DailySnapshot]): contiguous replay output
        market (MarketSeries): daily closes
        window_days (int): volatility window
        thresholds (ZoneThresholds): zone boundaries
        start (date, optional): first exported day; earlier snapshots only feed the
            trailing-year dilution (see ``history_start``)

    Returns:
        List[ValuationRow]: sorted by date
    """
    inputs = {row.date: row for row in utility_inputs(snapshots, market, window_days)}
    utility = MetricSeries.from_pairs("token_utility", "", [(d, token_utility(i)) for d, i in inputs.items()])
    rows = [ValuationRow(inputs[p.date], p, is_floored(inputs[p.date])) for p in pu_series(market, utility, thresholds)
            if start is None or p.date >= start]
    logger.info(f"Valuation table holds {len(rows)} of {len(inputs)} days "
                f"({sum(r.floored for r in rows)} floored)")
    return rows


def zone_occupancy(points: Iterable[PuPoint]) -> Dict[str, float]:
    """Share of PU days spent in each zone, all zeros when there is no PU day."""
    counts = {zone.value: 0 for zone in Zone}
    for point in points:
        counts[point.zone.value] += 1
    total = sum(counts.values())
    return {zone: (count / total if total else 0.0) for zone, count in counts.items()}
