"""Deterministic synthetic chains and price paths for offline runs and property tests.

A chain gets one coinbase transaction per day. Coinbase outputs, and the payment output
of every spend, are spent again with probability ``spender_fraction`` after a holding
time drawn from the configured distribution. A spend either forwards the full value or,
with probability ``split_probability``, splits it into a payment and a change output;
change is never spent. No fees are taken, so the UTXO total always equals cumulative
issuance.

Under the bimodal distribution every coinbase output is assigned to a long-term or a
short-term holder once, and all outputs descending from it keep that holder type.
"""

import hashlib
import heapq
from datetime import date, timedelta
from decimal import Decimal
from typing import List, Tuple

import numpy as np

from models.configs import SyntheticChainConfig
from models.records import (BASE_UNITS_PER_COIN, SECONDS_PER_DAY, MarketSeries, OutPoint, OutputRecord,
                            PricePoint, TransactionRecord, day_start)
from util.log_config import setup_logging

logger = setup_logging("synthetic_generator")

PRICE_QUANTUM = Decimal("0.00000001")


def _tx_id(seed: int, sequence: int) -> str:
    return hashlib.sha256(f"coinlens:{seed}:{sequence}".encode()).hexdigest()[:32]


def _draw_long_holder(rng: np.random.Generator, config: SyntheticChainConfig) -> bool:
    holding = config.holding_time
    return holding.kind == "bimodal" and bool(rng.random() < holding.long_mix)


def _holding_seconds(rng: np.random.Generator, config: SyntheticChainConfig, long_holder: bool) -> int:
    holding = config.holding_time
    match holding.kind:
        case "exponential":
            days = rng.exponential(holding.mean_days)
        case "fixed":
            days = holding.days
        case "bimodal":
            days = rng.exponential(holding.long_mean_days if long_holder else holding.short_mean_days)
        case _:
            raise ValueError(f"unknown holding time distribution {holding.kind!r}")
    return max(1, int(round(days * SECONDS_PER_DAY)))


def _split_coinbase(total: int, parts: int) -> List[int]:
    share, remainder = divmod(total, parts)
    return [share] * (parts - 1) + [share + remainder]


def simulate_chain(config: SyntheticChainConfig) -> Tuple[List[TransactionRecord], List[OutputRecord]]:
    """Generates the chain together with its ground-truth output records.

    Returns:
        Tuple[List[TransactionRecord], List[OutputRecord]]: transactions by timestamp,
            records sorted by (created_at, tx_id, output_index)
    """
    rng = np.random.default_rng(config.seed)
    reward = int(config.coinbase_per_day * BASE_UNITS_PER_COIN)
    if reward < config.coinbase_outputs:
        raise ValueError("coinbase reward too small to split into the requested outputs")
    horizon = day_start(config.start_date + timedelta(days=config.days))

    # (timestamp, sequence, payload); payload None marks a coinbase
    events = []
    sequence = 0
    for offset in range(config.days):
        timestamp = day_start(config.start_date + timedelta(days=offset)) + int(rng.integers(0, SECONDS_PER_DAY))
        heapq.heappush(events, (timestamp, sequence, None))
        sequence += 1

    transactions = []
    created = {}
    spent_at = {}
    tx_count = 0
    while events:
        timestamp, _, payload = heapq.heappop(events)
        tx_id = _tx_id(config.seed, tx_count)
        tx_count += 1
        if payload is None:
            outputs = _split_coinbase(reward, config.coinbase_outputs)
            tx = TransactionRecord(tx_id, timestamp, (), tuple(outputs), True)
            lineages = [(index, _draw_long_holder(rng, config)) for index in range(len(outputs))]
        else:
            source, value, long_holder = payload
            spent_at[(source.tx_id, source.output_index)] = timestamp
            if value >= 2 and rng.random() < config.split_probability:
                payment = int(rng.integers(1, value))
                outputs = [payment, value - payment]
            else:
                outputs = [value]
            tx = TransactionRecord(tx_id, timestamp, (source,), tuple(outputs), False)
            lineages = [(0, long_holder)]
        transactions.append(tx)
        for index, value in enumerate(outputs):
            created[(tx_id, index)] = (value, timestamp, tx.is_coinbase)

        for index, long_holder in lineages:
            if rng.random() >= config.spender_fraction:
                continue
            spend_time = timestamp + _holding_seconds(rng, config, long_holder)
            if spend_time < horizon:
                heapq.heappush(events, (spend_time, sequence, (OutPoint(tx_id, index), outputs[index], long_holder)))
                sequence += 1

    records = sorted(
        (OutputRecord(tx_id, index, value, timestamp, spent_at.get((tx_id, index)), is_coinbase)
         for (tx_id, index), (value, timestamp, is_coinbase) in created.items()),
        key=lambda r: r.sort_key,
    )
    logger.info(f"Generated {len(transactions)} transactions with {len(records)} outputs "
                f"over {config.days} days (seed {config.seed})")
    return transactions, records


def generate_chain(config: SyntheticChainConfig) -> List[TransactionRecord]:
    return simulate_chain(config)[0]


def generate_records(config: SyntheticChainConfig) -> List[OutputRecord]:
    return simulate_chain(config)[1]


def generate_prices(seed: int, start: date, days: int, initial_usd: float = 100.0, drift: float = 0.0,
                    volatility: float = 0.03) -> MarketSeries:
    """Seeded geometric random walk of daily closes, one per calendar day.

    Args:
        seed (int): generator seed
        start (date): first day
        days (int): number of closes
        initial_usd (float): first close
        drift (float): mean daily log return
        volatility (float): std of daily log returns
    """
    if days < 1:
        raise ValueError("need at least one price day")
    if initial_usd <= 0:
        raise ValueError("initial price must be positive")
    rng = np.random.default_rng(seed)
    steps = rng.normal(drift, volatility, size=days - 1)
    path = initial_usd * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))
    points = []
    for offset, close in enumerate(path):
        value = max(Decimal(repr(float(close))).quantize(PRICE_QUANTUM), PRICE_QUANTUM)
        points.append(PricePoint(start + timedelta(days=offset), value))
    return MarketSeries(tuple(points))
