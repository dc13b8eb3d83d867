from datetime import date, timedelta
from decimal import Decimal

import numpy as np
import pytest

from backtest.signals import generate_signals
from metrics.valuation import valuation_zone
from models.configs import BacktestConfig
from models.records import PuPoint, Signal

START = date(2015, 1, 1)


def _points(values):
    return [PuPoint(START + timedelta(days=i), Decimal(100), 1.0, float(v), valuation_zone(float(v)))
            for i, v in enumerate(values)]


def test_low_pu_after_history_buys():
    signals = generate_signals(_points(list(range(1, 11)) + [0.5]), BacktestConfig(warmup_days=10))
    assert signals[-1] == (START + timedelta(days=10), Signal.BUY)


def test_high_pu_after_history_sells():
    signals = generate_signals(_points(list(range(1, 11)) + [20]), BacktestConfig(warmup_days=10))
    assert signals[-1][1] is Signal.SELL


def test_value_between_quantiles_holds():
    signals = generate_signals(_points(list(range(1, 11)) + [5]), BacktestConfig(warmup_days=10))
    assert signals[-1][1] is Signal.HOLD


def test_warmup_holds():
    signals = generate_signals(_points([5, 4, 3, 2, 1, 0.5]), BacktestConfig(warmup_days=30))
    assert {s for _, s in signals} == {Signal.HOLD}


def test_first_day_never_trades():
    signals = generate_signals(_points([5, 1]), BacktestConfig(warmup_days=0))
    assert signals[0][1] is Signal.HOLD
    assert signals[1][1] is Signal.BUY


def test_overlapping_tests_hold():
    signals = generate_signals(_points([3, 3, 3]), BacktestConfig(warmup_days=1))
    assert [s for _, s in signals] == [Signal.HOLD] * 3


def test_thresholds_follow_the_interpolated_quantiles():
    rng = np.random.default_rng(11)
    values = rng.lognormal(4, 0.5, size=120)
    config = BacktestConfig(warmup_days=20)
    signals = generate_signals(_points(values), config)
    for position in range(20, len(values)):
        history = values[:position]
        buy = values[position] <= np.quantile(history, config.buy_quantile)
        sell = values[position] >= np.quantile(history, config.sell_quantile)
        expected = Signal.BUY if buy and not sell else Signal.SELL if sell and not buy else Signal.HOLD
        assert signals[position][1] is expected


def test_empty_and_unsorted_input():
    assert generate_signals([], BacktestConfig()) == []
    points = _points([1, 2])
    with pytest.raises(ValueError):
        generate_signals(list(reversed(points)), BacktestConfig())
