"""Reference strategies the PU strategy is compared against."""

from datetime import date
from typing import List, Tuple

import pandas as pd

from backtest.engine import run_backtest
from models.configs import BacktestConfig
from models.records import BacktestResult, MarketSeries, Signal
from util.log_config import setup_logging

logger = setup_logging("baselines")

DEFAULT_SHORT_WINDOW = 20
DEFAULT_LONG_WINDOW = 50


def _market_in_range(market: MarketSeries, config: BacktestConfig) -> MarketSeries:
    return market.between(config.start, config.end)


def buy_and_hold(market: MarketSeries, config: BacktestConfig) -> BacktestResult:
    """One Buy on the first day of the range, held to its last day."""
    window = _market_in_range(market, config)
    if len(window) == 0:
        raise ValueError("no prices inside the backtest range")
    signals = [(day, Signal.BUY if position == 0 else Signal.HOLD) for position, day in enumerate(window.dates)]
    return run_backtest(signals, window, config, strategy="buy-and-hold")


def crossover_signals(market: MarketSeries, short_window: int = DEFAULT_SHORT_WINDOW,
                      long_window: int = DEFAULT_LONG_WINDOW) -> List[Tuple[date, Signal]]:
    """Buy when the short moving average moves above the long one, Sell when it falls back.

    Until the long window is filled the short average counts as not above.
    """
    if not 0 < short_window < long_window:
        raise ValueError("moving average windows must satisfy 0 < short < long")
    closes = pd.Series([float(p.close_usd) for p in market.points], dtype="float64")
    short = closes.rolling(short_window).mean()
    long = closes.rolling(long_window).mean()
    above = (short > long).fillna(False).astype(bool)
    was_above = above.shift(1, fill_value=False).astype(bool)

    signals = []
    for position, day in enumerate(market.dates):
        if above.iloc[position] and not was_above.iloc[position]:
            signals.append((day, Signal.BUY))
        elif was_above.iloc[position] and not above.iloc[position]:
            signals.append((day, Signal.SELL))
        else:
            signals.append((day, Signal.HOLD))
    return signals


def ma_crossover(market: MarketSeries, config: BacktestConfig, short_window: int = DEFAULT_SHORT_WINDOW,
                 long_window: int = DEFAULT_LONG_WINDOW) -> BacktestResult:
    """Moving-average crossover under the same cap and fee mechanics."""
    window = _market_in_range(market, config)
    if len(window) <= long_window:
        logger.warning("Range of %d days does not exceed the long window %d, no crossing possible",
                       len(window), long_window)
    return run_backtest(crossover_signals(window, short_window, long_window), window, config,
                        strategy="ma-crossover")
