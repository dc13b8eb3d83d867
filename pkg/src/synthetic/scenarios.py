"""Qualitative scenarios on synthetic chains."""

from datetime import timedelta
from typing import Dict

import numpy as np

from ledger.replay import daily_snapshots
from metrics.cohort import wal_series
from metrics.valuation import staking_ratio_series
from models.configs import BimodalHolding, SyntheticChainConfig
from synthetic.generator import generate_records
from util.log_config import setup_logging

logger = setup_logging("scenarios")


def _mean_defined(series) -> float:
    defined = [value for _, value in series.defined()]
    return float(np.mean(defined)) if defined else 0.0


def hoarder_comparison(seed: int, days: int = 900, low_mix: float = 0.1, high_mix: float = 0.9,
                       short_mean_days: float = 20.0, long_mean_days: float = 800.0) -> Dict[str, Dict[str, float]]:
    """Replays two bimodal chains that differ only in their share of long-term holders.

    Both chains use every output's full value (no change outputs) so value can only sit
    still through the holding times.

    Returns:
        Dict[str, Dict[str, float]]: ``{"low": {...}, "high": {...}}`` with the mix, the
            mean staking ratio and the mean WAL in years
    """
    if not low_mix < high_mix:
        raise ValueError("low_mix must be below high_mix")
    report = {}
    for label, mix in (("low", low_mix), ("high", high_mix)):
        config = SyntheticChainConfig(
            seed=seed, days=days, spender_fraction=1.0, split_probability=0.0,
            holding_time=BimodalHolding(short_mean_days=short_mean_days, long_mean_days=long_mean_days,
                                        long_mix=mix),
        )
        records = generate_records(config)
        snapshots = daily_snapshots(records, (config.start_date, config.start_date + timedelta(days=days - 1)))
        report[label] = {
            "mix": mix,
            "staking_ratio": _mean_defined(staking_ratio_series(snapshots)),
            "wal": _mean_defined(wal_series(snapshots)),
        }
        logger.info("Long-holder mix %.2f: mean staking ratio %.4f, mean WAL %.4f years", mix,
                    report[label]["staking_ratio"], report[label]["wal"])
    return report
