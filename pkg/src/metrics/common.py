from typing import List, Sequence, Union

from ledger.replay import supply_series, utxo_count_series, utxo_value_series
from metrics.cohort import cdd_series, stxo_lifespan_distribution, utxo_age_distribution, wal_series
from metrics.valuation import staking_ratio_series, velocity_series
from models.records import DEFAULT_BINNING, AgeBinning, DailyAgeDistribution, DailySnapshot, MetricSeries
from util.log_config import setup_logging

logger = setup_logging("metrics_common")

DISTRIBUTION_METRICS = ("utxo_age", "stxo_lifespan")
SERIES_METRICS = ("wal", "cdd", "supply", "utxo_set", "utxo_count", "velocity", "staking_ratio")
METRIC_NAMES = DISTRIBUTION_METRICS + SERIES_METRICS


def compute_metric(name: str, snapshots: Sequence[DailySnapshot],
                   binning: AgeBinning = DEFAULT_BINNING) -> Union[MetricSeries, List[DailyAgeDistribution]]:
    """Passes the snapshots to the metric named ``name``.

    Args:
        name (str): one of METRIC_NAMES
        snapshots (Sequence[DailySnapshot]): contiguous replay output
        binning (AgeBinning): bins of the two distribution metrics and the staking edge

    Raises:
        ValueError: unknown metric name

    Returns:
        MetricSeries for scalar metrics, a list of DailyAgeDistribution otherwise
    """
    match name:
        case "utxo_age":
            result = utxo_age_distribution(snapshots, binning)
        case "stxo_lifespan":
            result = stxo_lifespan_distribution(snapshots, binning)
        case "wal":
            result = wal_series(snapshots)
        case "cdd":
            result = cdd_series(snapshots)
        case "supply":
            result = supply_series(snapshots)
        case "utxo_set":
            result = utxo_value_series(snapshots)
        case "utxo_count":
            result = utxo_count_series(snapshots)
        case "velocity":
            result = velocity_series(snapshots)
        case "staking_ratio":
            result = staking_ratio_series(snapshots, binning)
        case _:
            logger.warning("Unsupported metric: %s", name)
            raise ValueError(f"unknown metric {name!r}, expected one of {', '.join(METRIC_NAMES)}")
    logger.debug("Computed %s over %d days", name, len(snapshots))
    return result
