from datetime import date, timedelta

import pytest

from ledger.replay import daily_snapshots, supply_series
from metrics.cohort import cdd_series, stxo_lifespan_distribution, utxo_age_distribution, wal_series
from metrics.valuation import staking_ratio_series, velocity_series
from models.configs import BimodalHolding, ExponentialHolding, SyntheticChainConfig
from models.records import BASE_UNITS_PER_COIN, DEFAULT_BINNING
from synthetic.generator import generate_records
from synthetic.oracle import oracle_metrics

SPEND_DAY = date(2021, 1, 1)


def _same(engine, oracle):
    assert len(engine) == len(oracle)
    for ours, reference in zip(engine, oracle):
        if reference is None:
            assert ours is None
        else:
            assert ours == pytest.approx(reference, rel=1e-9, abs=1e-12)


def _assert_matches_oracle(records, day_range):
    snapshots = daily_snapshots(records, day_range)
    oracle = oracle_metrics(records, day_range, DEFAULT_BINNING)

    assert [s.date for s in snapshots] == oracle.dates
    assert [s.utxo_total_value for s in snapshots] == oracle.utxo_total_value
    assert [s.utxo_count for s in snapshots] == oracle.utxo_count
    assert [s.cumulative_issuance for s in snapshots] == oracle.cumulative_issuance
    assert [s.spent_today_value for s in snapshots] == oracle.spent_value
    assert [len(s.spent_today) for s in snapshots] == oracle.spend_count

    for ours, reference in zip(utxo_age_distribution(snapshots), oracle.utxo_age):
        _same(ours.shares, reference)
    for ours, reference in zip(stxo_lifespan_distribution(snapshots), oracle.stxo_lifespan):
        _same(ours.shares, reference)
    _same(wal_series(snapshots).values, oracle.wal)
    _same(cdd_series(snapshots).values, oracle.cdd)
    _same(velocity_series(snapshots).values, oracle.velocity)
    _same(staking_ratio_series(snapshots).values, oracle.staking_ratio)
    _same(supply_series(snapshots).values, [i / BASE_UNITS_PER_COIN for i in oracle.cumulative_issuance])


def _full_range(config):
    return config.start_date, config.start_date + timedelta(days=config.days - 1)


@pytest.mark.parametrize("seed", range(20))
def test_engine_matches_full_scan(seed):
    days = 100 + 20 * seed
    config = SyntheticChainConfig(seed=seed, days=days, coinbase_outputs=-(-10_000 // (days * 8)),
                                  spender_fraction=0.85, holding_time=ExponentialHolding(mean_days=5 + seed % 3))
    records = generate_records(config)
    assert len(records) >= 8_000
    _assert_matches_oracle(records, _full_range(config))


@pytest.mark.parametrize("seed", [101, 202])
def test_engine_matches_full_scan_past_a_year(seed):
    config = SyntheticChainConfig(seed=seed, days=420, spender_fraction=0.9,
                                  holding_time=BimodalHolding(short_mean_days=10, long_mean_days=300, long_mix=0.3))
    records = generate_records(config)
    first, last = _full_range(config)
    _assert_matches_oracle(records, (first + timedelta(days=100), last))


def test_oracle_on_hand_built_fixtures(three_spend_records, half_day_record):
    oracle = oracle_metrics(three_spend_records, (SPEND_DAY, SPEND_DAY))
    assert oracle.wal == [7.0]
    assert oracle_metrics([half_day_record], (SPEND_DAY, SPEND_DAY)).cdd == [5.0]


@pytest.mark.slow
def test_engine_matches_full_scan_on_a_large_chain():
    config = SyntheticChainConfig(seed=2024, days=700, spender_fraction=1.0,
                                  holding_time=ExponentialHolding(mean_days=30))
    records = generate_records(config)
    assert len(records) >= 8_000
    _assert_matches_oracle(records, _full_range(config))
