"""Domain records of the UTXO/STXO model and the series derived from it.

Records are frozen slotted dataclasses: the replay engine creates millions of them,
so they stay cheap. Timestamps are UNIX seconds (UTC), values are integer base units.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from decimal import Decimal
from enum import Enum
from typing import Iterator, Optional, Sequence


BASE_UNITS_PER_COIN = 100_000_000
SECONDS_PER_DAY = 86_400
DAYS_PER_MONTH = 30
DAYS_PER_YEAR = 365
SECONDS_PER_YEAR = DAYS_PER_YEAR * SECONDS_PER_DAY

EPOCH = date(1970, 1, 1)


def day_index(ts: int) -> int:
    """Number of whole UTC days between the epoch and ``ts``."""
    return ts // SECONDS_PER_DAY


def day_of(ts: int) -> date:
    return EPOCH + timedelta(days=ts // SECONDS_PER_DAY)


def day_start(day: date) -> int:
    """UNIX second of 00:00:00 UTC on ``day``."""
    return (day - EPOCH).days * SECONDS_PER_DAY


def day_end(day: date) -> int:
    """UNIX second of the following midnight; ages are measured against it."""
    return day_start(day) + SECONDS_PER_DAY


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def to_coins(base_units: int) -> float:
    return base_units / BASE_UNITS_PER_COIN


def iter_days(start: date, end: date) -> Iterator[date]:
    """Inclusive day range."""
    current = start
    while current <= end:
        yield current
        current += timedelta(days=1)


@dataclass(frozen=True, slots=True)
class OutPoint:
    tx_id: str
    output_index: int


@dataclass(frozen=True, slots=True)
class OutputRecord:
    tx_id: str
    output_index: int
    value: int
    created_at: int
    spent_at: Optional[int]
    is_coinbase: bool

    @property
    def key(self) -> tuple[str, int]:
        return (self.tx_id, self.output_index)

    @property
    def sort_key(self) -> tuple[int, str, int]:
        return (self.created_at, self.tx_id, self.output_index)

    @property
    def lifespan_seconds(self) -> Optional[int]:
        if self.spent_at is None:
            return None
        return self.spent_at - self.created_at


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    tx_id: str
    timestamp: int
    inputs: tuple[OutPoint, ...]
    outputs: tuple[int, ...]
    is_coinbase: bool


@dataclass(frozen=True, slots=True)
class PricePoint:
    date: date
    close_usd: Decimal


@dataclass(frozen=True)
class MarketSeries:
    """Daily close prices; dates strictly increasing, gaps allowed."""

    points: tuple[PricePoint, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for previous, current in zip(self.points, self.points[1:]):
            if current.date <= previous.date:
                raise ValueError(f"price dates not strictly increasing at {current.date.isoformat()}")
        for point in self.points:
            if point.close_usd <= 0:
                raise ValueError(f"non-positive close on {point.date.isoformat()}")
        object.__setattr__(self, "_index", {p.date: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> list[date]:
        return [p.date for p in self.points]

    def price_on(self, day: date) -> Optional[Decimal]:
        position = self._index.get(day)
        return None if position is None else self.points[position].close_usd

    def position_of(self, day: date) -> Optional[int]:
        return self._index.get(day)

    def between(self, start: Optional[date], end: Optional[date]) -> "MarketSeries":
        return MarketSeries(tuple(
            p for p in self.points
            if (start is None or p.date >= start) and (end is None or p.date <= end)
        ))


@dataclass(frozen=True, slots=True)
class SpendEvent:
    record: OutputRecord
    death_day: date
    lifespan_seconds: int


@dataclass(frozen=True, slots=True)
class CreationBucket:
    """Value created on one epoch day; ``midnight_value`` is the part created at exactly 00:00:00."""

    day: int
    value: int = 0
    midnight_value: int = 0
    count: int = 0


@dataclass(frozen=True, slots=True)
class DailySnapshot:
    """Aggregates at the end of ``date`` plus the day's spends.

    Creations are kept as one bucket per creation day, never as records, so a snapshot
    only holds the outputs spent that day. ``opening_profile`` is only filled on the
    first snapshot of a replay: the outputs already live when the range starts, bucketed
    by creation day.
    """

    date: date
    utxo_total_value: int
    utxo_count: int
    cumulative_issuance: int
    spent_today: tuple[SpendEvent, ...]
    created_today: CreationBucket
    opening_profile: tuple[CreationBucket, ...] = ()

    @property
    def created_today_value(self) -> int:
        return self.created_today.value

    @property
    def opening_value(self) -> int:
        return sum(bucket.value for bucket in self.opening_profile)

    @property
    def spent_today_value(self) -> int:
        return sum(event.record.value for event in self.spent_today)


@dataclass(frozen=True)
class MetricSeries:
    """Named, dated scalar series. ``None`` marks an absent value."""

    name: str
    unit: str
    dates: tuple[date, ...]
    values: tuple[Optional[float], ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError(f"series {self.name}: {len(self.dates)} dates but {len(self.values)} values")
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(self.dates)})

    @classmethod
    def from_pairs(cls, name: str, unit: str, pairs: Sequence[tuple[date, Optional[float]]]) -> "MetricSeries":
        return cls(name, unit, tuple(d for d, _ in pairs), tuple(v for _, v in pairs))

    def __len__(self) -> int:
        return len(self.dates)

    def get(self, day: date) -> Optional[float]:
        position = self._index.get(day)
        return None if position is None else self.values[position]

    def __contains__(self, day: date) -> bool:
        return day in self._index

    def items(self) -> Iterator[tuple[date, Optional[float]]]:
        return zip(self.dates, self.values)

    def defined(self) -> list[tuple[date, float]]:
        return [(d, v) for d, v in self.items() if v is not None]


@dataclass(frozen=True)
class AgeBinning:
    """Ordered day boundaries; ``n`` boundaries delimit ``n + 1`` bins over [0, inf)."""

    boundaries_days: tuple[int, ...] = (1, DAYS_PER_MONTH, DAYS_PER_YEAR, 2 * DAYS_PER_YEAR,
                                        5 * DAYS_PER_YEAR, 10 * DAYS_PER_YEAR)
    labels: tuple[str, ...] = ("lt1d", "1d_1mo", "1mo_1y", "1y_2y", "2y_5y", "5y_10y", "gt10y")

    def __post_init__(self):
        if any(b <= 0 for b in self.boundaries_days):
            raise ValueError("age boundaries must be positive")
        if any(later <= earlier for earlier, later in zip(self.boundaries_days, self.boundaries_days[1:])):
            raise ValueError("age boundaries must be strictly increasing")
        if len(self.labels) != len(self.boundaries_days) + 1:
            raise ValueError("need exactly one label per bin")

    @property
    def bin_count(self) -> int:
        return len(self.boundaries_days) + 1

    @property
    def boundaries_seconds(self) -> tuple[int, ...]:
        return tuple(b * SECONDS_PER_DAY for b in self.boundaries_days)

    def bin_of(self, age_seconds: int) -> int:
        """Bin index for an age, bins are ``lower <= age < upper``."""
        return bisect_right(self.boundaries_seconds, age_seconds)


DEFAULT_BINNING = AgeBinning()


class DistributionKind(str, Enum):
    UTXO_AGE = "utxo-age"
    STXO_LIFESPAN = "stxo-lifespan"


@dataclass(frozen=True, slots=True)
class DailyAgeDistribution:
    date: date
    kind: DistributionKind
    shares: tuple[float, ...]
    total_value: int


@dataclass(frozen=True, slots=True)
class UtilityInputs:
    date: date
    velocity: Optional[float]
    staking_ratio: Optional[float]
    volatility: Optional[float]
    dilution: Optional[float]


class Zone(str, Enum):
    UNDERVALUED = "Undervalued"
    NORMAL = "Normal"
    OVERVALUED = "Overvalued"


@dataclass(frozen=True, slots=True)
class PuPoint:
    date: date
    price_usd: Decimal
    token_utility: float
    pu: float
    zone: Zone


@dataclass(frozen=True, slots=True)
class ValuationRow:
    """One exported valuation line: the inputs, the utility and the resulting PU point."""

    inputs: UtilityInputs
    point: PuPoint
    floored: bool


class Signal(str, Enum):
    BUY = "Buy"
    SELL = "Sell"
    HOLD = "Hold"


class Side(str, Enum):
    BUY = "Buy"
    SELL = "Sell"


@dataclass(frozen=True, slots=True)
class Trade:
    date: date
    side: Side
    units: Decimal
    price_usd: Decimal
    fee_usd: Decimal
    cash_after: Decimal
    holdings_after: Decimal


@dataclass(frozen=True)
class BacktestResult:
    strategy: str
    trades: tuple[Trade, ...]
    equity: MetricSeries
    equity_marks: tuple[tuple[date, Decimal], ...]
    initial_capital: Decimal
    final_equity: Decimal
    roi_percent: float
    sharpe_annualized: Optional[float]
    max_drawdown_percent: float
