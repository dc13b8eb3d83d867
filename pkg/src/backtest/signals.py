"""Quantile-triggered trading signals over a PU series."""

from datetime import date
from typing import List, Sequence, Tuple

import pandas as pd

from models.configs import BacktestConfig
from models.records import PuPoint, Signal
from util.log_config import setup_logging

logger = setup_logging("signals")


def generate_signals(points: Sequence[PuPoint], config: BacktestConfig) -> List[Tuple[date, Signal]]:
    """Compares each PU value to the quantiles of all strictly earlier PU values.

    Quantiles are linear-interpolated over the expanding window of prior observations.
    A day with fewer than ``warmup_days`` prior observations is always Hold, and so is
    a day that satisfies both the buy and the sell test.

    Args:
        points (Sequence[PuPoint]): sorted by date
        config (BacktestConfig): quantiles and warmup

    Returns:
        List[Tuple[date, Signal]]: one signal per PU point
    """
    for previous, current in zip(points, points[1:]):
        if current.date <= previous.date:
            raise ValueError(f"PU points not sorted by date at {current.date.isoformat()}")
    if not points:
        return []

    pu = pd.Series([p.pu for p in points], dtype="float64")
    expanding = pu.expanding(min_periods=1)
    lower = expanding.quantile(config.buy_quantile, interpolation="linear").shift(1)
    upper = expanding.quantile(config.sell_quantile, interpolation="linear").shift(1)

    signals = []
    for position, point in enumerate(points):
        signal = Signal.HOLD
        if position >= max(config.warmup_days, 1):
            buy = point.pu <= lower.iloc[position]
            sell = point.pu >= upper.iloc[position]
            if buy and not sell:
                signal = Signal.BUY
            elif sell and not buy:
                signal = Signal.SELL
        signals.append((point.date, signal))

    buys = sum(1 for _, s in signals if s is Signal.BUY)
    sells = sum(1 for _, s in signals if s is Signal.SELL)
    logger.info(f"Generated {len(signals)} signals ({buys} buy, {sells} sell)")
    return signals
