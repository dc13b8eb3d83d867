"""Main command line module. Contains the click group and every pipeline command:
ingest, metrics, valuation, backtest and synth.

Library errors are turned into exit codes here and nowhere else.
"""

import functools
import os
import sys
from datetime import date
from typing import List, Optional

import click

from backtest.baselines import DEFAULT_LONG_WINDOW, DEFAULT_SHORT_WINDOW, buy_and_hold, ma_crossover
from backtest.engine import run_backtest, summarize
from backtest.signals import generate_signals
from cli.cli_config import (ARTIFACT_VERSION, BASELINE_CHOICES, EXIT_INPUT_ERROR, EXIT_INVARIANT, INGEST_MODES,
                            default_out_dir)
from cli.file_processing import setup_directories, write_json, write_manifest
from ledger.replay import check_conservation, daily_snapshots, match_spends, record_span
from metrics.common import DISTRIBUTION_METRICS, METRIC_NAMES, compute_metric
from metrics.valuation import DEFAULT_VOL_WINDOW, history_start, valuation_table, zone_occupancy
from models.configs import (BacktestConfig, BimodalHolding, ExponentialHolding, FixedHolding, SyntheticChainConfig,
                            ZoneThresholds)
from models.errors import IngestError, InvariantViolation
from models.records import DEFAULT_BINNING, BacktestResult, day_of
from parsers.common import parse_day
from parsers.output_parser import load_output_records
from parsers.price_parser import load_price_series
from parsers.transaction_parser import load_transactions
from parsers.writers import (load_pu_points, load_signals_csv, write_distribution_csv, write_equity_csv,
                             write_output_records, write_price_series, write_series_csv, write_signals_csv,
                             write_trades_csv, write_transactions, write_valuation_csv)
from synthetic.generator import generate_prices, simulate_chain
from util.log_config import setup_logging
from util.report_workbook import create_report_workbook

logger = setup_logging("cli")


class DayParam(click.ParamType):
    name = "YYYY-MM-DD"

    def convert(self, value, param, ctx):
        if isinstance(value, date):
            return value
        try:
            return parse_day(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


DAY = DayParam()


def handle_errors(command):
    """Maps input problems to exit code 2 and broken invariants to exit code 3."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except InvariantViolation as e:
            logger.error("Invariant violated: %s", e)
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INVARIANT)
        except (ValueError, FileNotFoundError) as e:
            logger.error("Input error: %s", e)
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INPUT_ERROR)

    return wrapper


def out_dir_option(command):
    return click.option("--out-dir", type=click.Path(file_okay=False), default=default_out_dir,
                        show_default="$COINLENS_OUT or ./out",
                        help="Directory the outputs are written to.")(command)


def range_options(command):
    command = click.option("--to", "end", type=DAY, default=None, help="Last day (inclusive).")(command)
    return click.option("--from", "start", type=DAY, default=None, help="First day (inclusive).")(command)


def resolve_range(records, start: Optional[date], end: Optional[date]):
    """Explicit bounds win; missing ones come from the record span. None when nothing to replay."""
    if start and end and start > end:
        raise click.UsageError(f"--from {start.isoformat()} is after --to {end.isoformat()}")
    span = record_span(records)
    if span is None and (start is None or end is None):
        return None
    first = start or span[0]
    last = end or span[1]
    if first > last:
        return None
    return first, last


@click.group()
@click.version_option(ARTIFACT_VERSION, prog_name="coinlens")
def cli():
    """On-chain UTXO analytics and PU-ratio backtesting."""


@cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True,
              help="Pre-joined output records or raw transactions.")
@click.option("--mode", type=click.Choice(INGEST_MODES), default="pre-joined", show_default=True)
@click.option("--skip-invalid", is_flag=True, help="Reject malformed rows instead of aborting.")
@out_dir_option
@handle_errors
def ingest(input_path: str, mode: str, skip_invalid: bool, out_dir: str):
    """Normalize an input file into the canonical pre-joined record CSV."""
    setup_directories(out_dir)
    rejected = [] if skip_invalid else None
    report = {"mode": mode, "input": input_path}
    match mode:
        case "raw":
            transactions = load_transactions(input_path, rejected)
            records = match_spends(transactions)
            report["transactions"] = len(transactions)
        case _:
            records = load_output_records(input_path, rejected=rejected)

    records_path = os.path.join(out_dir, "records.csv")
    write_output_records(records, records_path)
    span = record_span(records)
    report.update({
        "records": len(records),
        "spent": sum(1 for r in records if r.spent_at is not None),
        "coinbase": sum(1 for r in records if r.is_coinbase),
        "first_day": span[0].isoformat() if span else None,
        "last_day": span[1].isoformat() if span else None,
        "rejected_count": len(rejected or []),
        "rejected": [{"line": r.line, "reason": r.reason} for r in rejected or []],
    })
    report_path = write_json(report, os.path.join(out_dir, "ingest_report.json"))
    write_manifest("ingest", out_dir, [input_path], {"mode": mode, "skip_invalid": skip_invalid},
                   [records_path, report_path])
    click.echo(f"{len(records)} records written to {records_path}")


@cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True,
              help="Canonical pre-joined record CSV.")
@range_options
@click.option("--metric", "metric_names", type=click.Choice(METRIC_NAMES), multiple=True,
              help="Metric to compute, repeatable; all when omitted.")
@out_dir_option
@handle_errors
def metrics(input_path: str, start: Optional[date], end: Optional[date], metric_names: tuple, out_dir: str):
    """Cohort distributions, WAL, CDD and supply-side series, one CSV per metric."""
    setup_directories(out_dir)
    records = load_output_records(input_path)
    day_range = resolve_range(records, start, end)
    snapshots = daily_snapshots(records, day_range) if day_range else []
    check_conservation(snapshots)

    outputs = []
    for name in metric_names or METRIC_NAMES:
        path = os.path.join(out_dir, f"{name}.csv")
        result = compute_metric(name, snapshots, DEFAULT_BINNING)
        if name in DISTRIBUTION_METRICS:
            write_distribution_csv(result, path, DEFAULT_BINNING)
        else:
            write_series_csv(result, path)
        outputs.append(path)

    config = {
        "from": day_range[0].isoformat() if day_range else None,
        "to": day_range[1].isoformat() if day_range else None,
        "metrics": list(metric_names or METRIC_NAMES),
        "age_boundaries_days": list(DEFAULT_BINNING.boundaries_days),
    }
    write_manifest("metrics", out_dir, [input_path], config, outputs)
    click.echo(f"{len(outputs)} metric files over {len(snapshots)} days written to {out_dir}")


@cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True,
              help="Canonical pre-joined record CSV.")
@click.option("--prices", "prices_path", type=click.Path(dir_okay=False), required=True, help="date,close_usd CSV.")
@range_options
@click.option("--vol-window", type=click.IntRange(min=2), default=DEFAULT_VOL_WINDOW, show_default=True,
              help="Log returns per volatility window.")
@click.option("--undervalued-below", type=float, default=ZoneThresholds().undervalued_below, show_default=True)
@click.option("--overvalued-above", type=float, default=ZoneThresholds().overvalued_above, show_default=True)
@click.option("--xlsx", is_flag=True, help="Also write a colored report.xlsx.")
@out_dir_option
@handle_errors
def valuation(input_path: str, prices_path: str, start: Optional[date], end: Optional[date], vol_window: int,
              undervalued_below: float, overvalued_above: float, xlsx: bool, out_dir: str):
    """Token Utility inputs, PU ratio and valuation zones."""
    setup_directories(out_dir)
    thresholds = ZoneThresholds(undervalued_below=undervalued_below, overvalued_above=overvalued_above)
    records = load_output_records(input_path)
    market = load_price_series(prices_path)
    day_range = resolve_range(records, start, end)
    if day_range is None or len(market.between(*day_range)) == 0:
        raise IngestError(f"price dates of {prices_path} do not overlap the record days of {input_path}")

    snapshots = daily_snapshots(records, (history_start(day_range[0]), day_range[1]))
    check_conservation(snapshots)
    rows = valuation_table(snapshots, market, vol_window, thresholds, start=day_range[0])
    occupancy = zone_occupancy(row.point for row in rows)

    valuation_path = os.path.join(out_dir, "valuation.csv")
    write_valuation_csv(rows, valuation_path)
    summary = {
        "days": (day_range[1] - day_range[0]).days + 1,
        "pu_days": len(rows),
        "floored_days": sum(1 for row in rows if row.floored),
        "zone_occupancy": occupancy,
    }
    summary_path = write_json(summary, os.path.join(out_dir, "valuation_summary.json"))
    outputs = [valuation_path, summary_path]
    if xlsx:
        report_path = os.path.join(out_dir, "report.xlsx")
        create_report_workbook(report_path, valuation_rows=rows, occupancy=occupancy)
        outputs.append(report_path)

    config = {
        "from": day_range[0].isoformat(),
        "to": day_range[1].isoformat(),
        "vol_window": vol_window,
        "thresholds": thresholds.model_dump(mode="json"),
    }
    write_manifest("valuation", out_dir, [input_path, prices_path], config, outputs)
    click.echo(f"{len(rows)} PU rows written to {valuation_path}")


def _signal_range(signals, config: BacktestConfig) -> BacktestConfig:
    """Clips the trading range to the days the signals cover, so the baselines trade the same days."""
    if not signals:
        return config
    first = min(day for day, _ in signals)
    last = max(day for day, _ in signals)
    start = max(first, config.start) if config.start else first
    end = min(last, config.end) if config.end else last
    if start > end:
        raise ValueError(f"no signal between {start.isoformat()} and {end.isoformat()}")
    return config.model_copy(update={"start": start, "end": end})


def _write_strategy(result: BacktestResult, out_dir: str) -> List[str]:
    strategy_dir = setup_directories(os.path.join(out_dir, result.strategy))
    trades_path = os.path.join(strategy_dir, "trades.csv")
    equity_path = os.path.join(strategy_dir, "equity.csv")
    write_trades_csv(result.trades, trades_path)
    write_equity_csv(result.equity_marks, equity_path)
    return [trades_path, equity_path]


@cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), default=None,
              help="Valuation CSV carrying the PU series.")
@click.option("--signals", "signals_path", type=click.Path(dir_okay=False), default=None,
              help="Replay a date,pu,signal file instead of deriving signals from --input.")
@click.option("--prices", "prices_path", type=click.Path(dir_okay=False), required=True, help="date,close_usd CSV.")
@range_options
@click.option("--warmup", type=click.IntRange(min=0), default=BacktestConfig().warmup_days, show_default=True)
@click.option("--buy-q", type=float, default=BacktestConfig().buy_quantile, show_default=True)
@click.option("--sell-q", type=float, default=BacktestConfig().sell_quantile, show_default=True)
@click.option("--cap", type=str, default=str(BacktestConfig().trade_cap_units), show_default=True,
              help="Maximum coins per trade.")
@click.option("--fee", type=str, default=str(BacktestConfig().fee_rate), show_default=True)
@click.option("--capital", type=str, default=str(BacktestConfig().initial_capital_usd), show_default=True)
@click.option("--baseline", type=click.Choice(BASELINE_CHOICES), default="none", show_default=True)
@click.option("--short-window", type=click.IntRange(min=1), default=DEFAULT_SHORT_WINDOW, show_default=True)
@click.option("--long-window", type=click.IntRange(min=2), default=DEFAULT_LONG_WINDOW, show_default=True)
@click.option("--xlsx", is_flag=True, help="Also write a strategy comparison report.xlsx.")
@out_dir_option
@handle_errors
def backtest(input_path: Optional[str], signals_path: Optional[str], prices_path: str, start: Optional[date],
             end: Optional[date], warmup: int, buy_q: float, sell_q: float, cap: str, fee: str, capital: str,
             baseline: str, short_window: int, long_window: int, xlsx: bool, out_dir: str):
    """PU-ratio strategy and baselines: trades, equity curves and a summary."""
    if input_path and signals_path:
        raise click.UsageError("--input and --signals are mutually exclusive")
    if not input_path and not signals_path and baseline == "none":
        raise click.UsageError("nothing to run: give --input, --signals or a --baseline")

    config = BacktestConfig(initial_capital_usd=capital, fee_rate=fee, trade_cap_units=cap, buy_quantile=buy_q,
                            sell_quantile=sell_q, warmup_days=warmup, start=start, end=end)
    setup_directories(out_dir)
    market = load_price_series(prices_path)
    outputs = []
    results = []

    if signals_path:
        signals = load_signals_csv(signals_path)
        config = _signal_range(signals, config)
        results.append(run_backtest(signals, market, config, strategy="signals"))
    elif input_path:
        points = load_pu_points(input_path)
        signals = generate_signals(points, config)
        signals_out = os.path.join(out_dir, "signals.csv")
        write_signals_csv([(day, signal, point.pu) for (day, signal), point in zip(signals, points)], signals_out)
        outputs.append(signals_out)
        config = _signal_range(signals, config)
        results.append(run_backtest(signals, market, config, strategy="pu-ratio"))

    if baseline in ("buy-and-hold", "all"):
        results.append(buy_and_hold(market, config))
    if baseline in ("ma-crossover", "all"):
        results.append(ma_crossover(market, config, short_window, long_window))

    for result in results:
        outputs.extend(_write_strategy(result, out_dir))

    summaries = [summarize(result) for result in results]
    primary = summaries[0]
    summary = {
        "strategy": primary["strategy"],
        "roi_percent": primary["roi_percent"],
        "sharpe_annualized": primary["sharpe_annualized"],
        "trade_count": primary["trade_count"],
        "strategies": summaries,
        "config": config.model_dump(mode="json"),
    }
    outputs.append(write_json(summary, os.path.join(out_dir, "summary.json")))
    if xlsx:
        report_path = os.path.join(out_dir, "report.xlsx")
        create_report_workbook(report_path, backtest_summaries=summaries)
        outputs.append(report_path)

    manifest_config = {**config.model_dump(mode="json"), "baseline": baseline, "short_window": short_window,
                       "long_window": long_window}
    write_manifest("backtest", out_dir, [input_path, signals_path, prices_path], manifest_config, outputs)
    for entry in summaries:
        click.echo(f"{entry['strategy']}: ROI {entry['roi_percent']:.4f}%, Sharpe {entry['sharpe_annualized']}, "
                   f"{entry['trade_count']} trades")


@cli.command()
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--days", type=click.IntRange(min=1), default=SyntheticChainConfig().days, show_default=True)
@click.option("--start-date", type=DAY, default=SyntheticChainConfig().start_date.isoformat(), show_default=True)
@click.option("--coinbase-per-day", type=str, default="50", show_default=True, help="Coins minted per day.")
@click.option("--coinbase-outputs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--spender-fraction", type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option("--split-probability", type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option("--holding", type=click.Choice(("exponential", "fixed", "bimodal")), default="exponential",
              show_default=True)
@click.option("--mean-days", type=float, default=30.0, show_default=True,
              help="Mean (exponential), holding days (fixed) or short-holder mean (bimodal).")
@click.option("--long-mean-days", type=float, default=800.0, show_default=True)
@click.option("--long-mix", type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option("--initial-price", type=float, default=100.0, show_default=True)
@click.option("--price-volatility", type=float, default=0.03, show_default=True)
@click.option("--price-drift", type=float, default=0.0, show_default=True)
@out_dir_option
@handle_errors
def synth(seed: int, days: int, start_date: date, coinbase_per_day: str, coinbase_outputs: int,
          spender_fraction: float, split_probability: float, holding: str, mean_days: float, long_mean_days: float,
          long_mix: float, initial_price: float, price_volatility: float, price_drift: float, out_dir: str):
    """Generate a deterministic synthetic chain (raw transactions) and a price path."""
    match holding:
        case "fixed":
            holding_time = FixedHolding(days=mean_days)
        case "bimodal":
            holding_time = BimodalHolding(short_mean_days=mean_days, long_mean_days=long_mean_days, long_mix=long_mix)
        case _:
            holding_time = ExponentialHolding(mean_days=mean_days)
    config = SyntheticChainConfig(seed=seed, days=days, start_date=start_date, coinbase_per_day=coinbase_per_day,
                                  coinbase_outputs=coinbase_outputs, spender_fraction=spender_fraction,
                                  split_probability=split_probability, holding_time=holding_time)
    setup_directories(out_dir)
    transactions, records = simulate_chain(config)
    market = generate_prices(seed, start_date, days, initial_price, price_drift, price_volatility)

    transactions_path = os.path.join(out_dir, "transactions.csv")
    prices_path = os.path.join(out_dir, "prices.csv")
    write_transactions(transactions, transactions_path)
    write_price_series(market, prices_path)
    manifest_config = {
        **config.model_dump(mode="json"),
        "initial_price": initial_price,
        "price_volatility": price_volatility,
        "price_drift": price_drift,
    }
    write_manifest("synth", out_dir, [], manifest_config, [transactions_path, prices_path])
    last_day = day_of(transactions[-1].timestamp).isoformat() if transactions else start_date.isoformat()
    click.echo(f"{len(transactions)} transactions ({len(records)} outputs) up to {last_day} "
               f"written to {transactions_path}")
