"""Trading simulation: executes signals at the close under fee and cap rules.

Cash, units and fees are Decimal. Units are truncated to 1e-8 coin so a buy never
spends more cash than is available.
"""

from datetime import date
from decimal import ROUND_DOWN, Decimal, localcontext
from typing import Optional, Sequence, Tuple

import numpy as np

from models.configs import BacktestConfig
from models.errors import InvariantViolation, MissingPriceError
from models.records import BacktestResult, MarketSeries, MetricSeries, Side, Signal, Trade
from parsers.common import format_decimal
from util.log_config import setup_logging

logger = setup_logging("backtest_engine")

DUST_UNITS = Decimal("0.00000001")
DECIMAL_PRECISION = 50
TRADING_DAYS_PER_YEAR = 365


def _in_range(day: date, config: BacktestConfig) -> bool:
    return (config.start is None or day >= config.start) and (config.end is None or day <= config.end)


def run_backtest(signals: Sequence[Tuple[date, Signal]], market: MarketSeries, config: BacktestConfig,
                 strategy: str = "pu-ratio") -> BacktestResult:
    """Runs the signals through the trading protocol.

    Every market day inside the configured range is a trading day and gets an equity mark
    at its close; a day without a signal is a Hold.

    Args:
        signals (Sequence[Tuple[date, Signal]]): at most one signal per day, sorted by date
        market (MarketSeries): close prices
        config (BacktestConfig): capital, fee, cap and the trading range
        strategy (str): name the result is reported under

    Raises:
        MissingPriceError: a signal date inside the range has no close price

    Returns:
        BacktestResult: trades, the equity curve marked at each close, ROI and Sharpe
    """
    days = [(day, Signal(signal)) for day, signal in signals if _in_range(day, config)]
    for (previous, _), (current, _) in zip(days, days[1:]):
        if current <= previous:
            raise ValueError(f"signals not strictly increasing in date at {current.isoformat()}")
    for day, _ in days:
        if market.price_on(day) is None:
            logger.error("No close price for signal date %s", day)
            raise MissingPriceError(day)
    by_day = dict(days)
    trading_days = market.between(config.start, config.end).dates

    with localcontext() as ctx:
        ctx.prec = DECIMAL_PRECISION
        fee_rate = Decimal(config.fee_rate)
        cap = Decimal(config.trade_cap_units)
        initial = Decimal(config.initial_capital_usd)
        cash = initial
        holdings = Decimal(0)
        trades = []
        marks = []

        for day in trading_days:
            price = market.price_on(day)
            match by_day.get(day, Signal.HOLD):
                case Signal.BUY:
                    unit_cost = price * (1 + fee_rate)
                    units = min(cap, cash / unit_cost).quantize(DUST_UNITS, rounding=ROUND_DOWN)
                    if units * unit_cost > cash:
                        units -= DUST_UNITS
                    if units > DUST_UNITS:
                        fee = units * price * fee_rate
                        cash -= units * price + fee
                        holdings += units
                        trades.append(Trade(day, Side.BUY, units, price, fee, cash, holdings))
                case Signal.SELL:
                    units = min(cap, holdings).quantize(DUST_UNITS, rounding=ROUND_DOWN)
                    if units > DUST_UNITS:
                        proceeds = units * price
                        fee = proceeds * fee_rate
                        cash += proceeds - fee
                        holdings -= units
                        trades.append(Trade(day, Side.SELL, units, price, fee, cash, holdings))
                case Signal.HOLD:
                    pass
            if cash < 0 or holdings < 0:
                raise InvariantViolation(f"negative position on {day.isoformat()}: cash {cash}, holdings {holdings}")
            marks.append((day, cash + holdings * price))

    final = marks[-1][1] if marks else initial
    equity = MetricSeries.from_pairs("equity", "usd", [(day, float(value)) for day, value in marks])
    result = BacktestResult(
        strategy=strategy,
        trades=tuple(trades),
        equity=equity,
        equity_marks=tuple(marks),
        initial_capital=initial,
        final_equity=final,
        roi_percent=float((final - initial) / initial * 100),
        sharpe_annualized=sharpe_annualized(equity),
        max_drawdown_percent=max_drawdown(equity),
    )
    logger.info(f"{strategy}: {len(trades)} trades over {len(marks)} days, "
                f"ROI {result.roi_percent:.4f}%, Sharpe {result.sharpe_annualized}")
    return result


def roi(result: BacktestResult) -> float:
    """Percentage change of the final equity over the initial capital."""
    return float((result.final_equity - result.initial_capital) / result.initial_capital * 100)


def _daily_returns(equity: MetricSeries) -> np.ndarray:
    values = np.asarray([v for _, v in equity.defined()], dtype=np.float64)
    return values[1:] / values[:-1] - 1.0


def sharpe_annualized(equity: MetricSeries) -> Optional[float]:
    """Mean over sample std of daily simple returns, times sqrt(365); None when the std is 0."""
    returns = _daily_returns(equity)
    if len(returns) < 2:
        return None
    deviation = float(np.std(returns, ddof=1))
    if deviation == 0 or not np.isfinite(deviation):
        return None
    return float(np.mean(returns)) / deviation * float(np.sqrt(TRADING_DAYS_PER_YEAR))


def max_drawdown(equity: MetricSeries) -> float:
    """Largest peak-to-trough fall of the equity curve, in percent of the peak."""
    values = np.asarray([v for _, v in equity.defined()], dtype=np.float64)
    if len(values) == 0:
        return 0.0
    peaks = np.maximum.accumulate(values)
    return float(np.max((peaks - values) / peaks) * 100)


def summarize(result: BacktestResult) -> dict:
    """JSON-ready summary line of one strategy run."""
    return {
        "strategy": result.strategy,
        "initial_capital_usd": format_decimal(result.initial_capital),
        "final_equity_usd": format_decimal(result.final_equity),
        "roi_percent": result.roi_percent,
        "sharpe_annualized": result.sharpe_annualized,
        "max_drawdown_percent": result.max_drawdown_percent,
        "trade_count": len(result.trades),
        "trading_days": len(result.equity),
    }
