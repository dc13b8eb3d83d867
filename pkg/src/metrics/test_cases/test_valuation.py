import math
from datetime import date, timedelta
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ledger.replay import daily_snapshots, supply_series
from metrics.valuation import (VOLATILITY_FLOOR, dilution_rate, dilution_series, history_start, is_floored,
                               price_volatility, pu_series, staking_ratio, staking_ratio_series, token_utility,
                               token_velocity, valuation_table, valuation_zone, velocity_series, volatility_series,
                               zone_occupancy)
from models.configs import ExponentialHolding, SyntheticChainConfig, ZoneThresholds
from models.records import (SECONDS_PER_DAY, AgeBinning, MarketSeries, MetricSeries, OutputRecord, PricePoint,
                            PuPoint, UtilityInputs, Zone, day_end, day_start)
from synthetic.generator import generate_records

START = date(2020, 1, 1)
QUERY_DAY = date(2021, 6, 30)


def _inputs(velocity=0.02, staking=0.5, volatility=0.04, dilution=0.05):
    return UtilityInputs(START, velocity, staking, volatility, dilution)


def _day(offset):
    return START + timedelta(days=offset)


@pytest.fixture
def ten_day_chain(coinbase_chain, to_units):
    """Ten daily 50-coin coinbases; 5 coins of the first one are paid on day ten."""
    records = coinbase_chain(START, 10)
    first = records[0]
    paid_at = day_start(_day(9)) + 60
    records[0] = OutputRecord(first.tx_id, 0, to_units(45), first.created_at, None, True)
    records.insert(1, OutputRecord(first.tx_id, 1, to_units(5), first.created_at, paid_at, True))
    records.append(OutputRecord("payment", 0, to_units(5), paid_at, None, False))
    return sorted(records, key=lambda r: r.sort_key)


def test_velocity_of_a_payment_day(ten_day_chain):
    snapshots = daily_snapshots(ten_day_chain, (START, _day(9)))
    supply = supply_series(snapshots)
    assert supply.get(_day(9)) == 500.0
    assert token_velocity(snapshots, supply, _day(9)) == pytest.approx(0.01)
    assert velocity_series(snapshots).get(_day(9)) == pytest.approx(0.01)


def test_velocity_of_an_idle_day(ten_day_chain):
    snapshots = daily_snapshots(ten_day_chain, (START, _day(9)))
    assert velocity_series(snapshots).get(_day(4)) == 0.0


def test_full_turnover(coinbase_chain):
    records = coinbase_chain(START, 1)
    spent = OutputRecord(records[0].tx_id, 0, records[0].value, records[0].created_at,
                         day_start(_day(1)) + 10, True)
    snapshots = daily_snapshots([spent, OutputRecord("next", 0, spent.value, spent.spent_at, None, False)],
                                (START, _day(1)))
    assert velocity_series(snapshots).get(_day(1)) == 1.0


def test_velocity_without_supply():
    snapshots = daily_snapshots([], (START, START))
    assert velocity_series(snapshots).values == (None,)
    assert token_velocity(snapshots, supply_series(snapshots), START) is None


def test_staking_ratio_bounds(to_units):
    end = day_end(QUERY_DAY)
    old = [OutputRecord(f"o{i}", 0, to_units(1), end - (400 + i) * SECONDS_PER_DAY, None, True) for i in range(3)]
    old.sort(key=lambda r: r.sort_key)
    snapshots = daily_snapshots(old, (QUERY_DAY, QUERY_DAY))
    assert staking_ratio(snapshots, QUERY_DAY) == 1.0

    fresh = [OutputRecord("f", 0, to_units(1), end - 10 * SECONDS_PER_DAY, None, True)]
    assert staking_ratio(daily_snapshots(fresh, (QUERY_DAY, QUERY_DAY)), QUERY_DAY) == 0.0


def test_staking_ratio_mixed(to_units):
    end = day_end(QUERY_DAY)
    records = sorted([
        OutputRecord("old", 0, to_units(30), end - 500 * SECONDS_PER_DAY, None, True),
        OutputRecord("young", 0, to_units(10), end - 2 * SECONDS_PER_DAY, None, True),
    ], key=lambda r: r.sort_key)
    snapshots = daily_snapshots(records, (QUERY_DAY - timedelta(days=3), QUERY_DAY))
    assert staking_ratio(snapshots, QUERY_DAY) == pytest.approx(0.75)
    assert staking_ratio(snapshots, QUERY_DAY + timedelta(days=1)) is None


def test_exactly_one_year_is_not_staked(to_units):
    created = day_end(QUERY_DAY) - 365 * SECONDS_PER_DAY
    snapshots = daily_snapshots([OutputRecord("edge", 0, to_units(1), created, None, True)],
                                (QUERY_DAY, QUERY_DAY + timedelta(days=1)))
    series = staking_ratio_series(snapshots)
    assert series.values == (0.0, 1.0)


def _supply(values_by_offset, days=366):
    pairs = [(_day(i), values_by_offset.get(i, values_by_offset[0])) for i in range(days)]
    return MetricSeries.from_pairs("supply", "coins", pairs)


def test_dilution():
    assert dilution_rate(_supply({0: 100.0}), _day(365)) == 0.0
    assert dilution_rate(_supply({0: 100.0, 365: 150.0}), _day(365)) == pytest.approx(0.5)
    assert dilution_rate(_supply({0: 100.0}), _day(100)) is None
    series = dilution_series(_supply({0: 100.0, 365: 150.0}))
    assert [d for d, _ in series.defined()] == [_day(365)]


def test_dilution_on_zero_base_supply():
    assert dilution_rate(_supply({0: 0.0, 365: 50.0}), _day(365)) is None


def test_constant_price_volatility(make_market):
    market = make_market([100] * 31, START)
    assert price_volatility(market, _day(30), 30) == 0.0


def test_alternating_price_volatility(make_market):
    market = make_market([100 if i % 2 == 0 else 110 for i in range(31)], START)
    expected = math.log(1.1) * math.sqrt(30 / 29)
    assert price_volatility(market, _day(30), 30) == pytest.approx(expected, rel=1e-9)
    assert volatility_series(market, 30).get(_day(30)) == pytest.approx(expected, rel=1e-9)


def test_short_price_history(make_market):
    market = make_market([100 + i for i in range(10)], START)
    assert price_volatility(market, _day(9), 30) is None
    assert volatility_series(market, 30).defined() == []
    with pytest.raises(ValueError):
        price_volatility(market, _day(9), 1)


def test_token_utility():
    assert token_utility(_inputs()) == pytest.approx(5.0)
    assert token_utility(_inputs(velocity=0.0)) == 0.0
    assert token_utility(_inputs(dilution=None)) is None


def test_degenerate_denominator_is_floored():
    inputs = _inputs(volatility=0.0, dilution=0.0)
    utility = token_utility(inputs)
    assert math.isfinite(utility)
    assert utility == pytest.approx(0.02 * 0.5 / (VOLATILITY_FLOOR * 1e-6))
    assert is_floored(inputs)
    assert not is_floored(_inputs())


@pytest.mark.parametrize("pu, zone", [
    (110.0, Zone.OVERVALUED),
    (50.0, Zone.UNDERVALUED),
    (100.0, Zone.NORMAL),
    (60.0, Zone.NORMAL),
    (80.0, Zone.NORMAL),
])
def test_zones(pu, zone):
    assert valuation_zone(pu) is zone


def test_custom_thresholds():
    thresholds = ZoneThresholds(undervalued_below=10, overvalued_above=20)
    assert valuation_zone(50.0, thresholds) is Zone.OVERVALUED
    with pytest.raises(ValueError):
        ZoneThresholds(undervalued_below=120, overvalued_above=100)


def test_pu_points(make_market):
    market = make_market([100, 100, 100], START)
    utility = MetricSeries.from_pairs("token_utility", "", [(_day(0), 2.0), (_day(1), None), (_day(2), 1.0)])
    points = pu_series(market, utility)
    assert [(p.date, p.pu, p.zone) for p in points] == [(_day(0), 50.0, Zone.UNDERVALUED),
                                                        (_day(2), 100.0, Zone.NORMAL)]


def test_pu_of_known_inputs(make_market):
    utility = MetricSeries.from_pairs("token_utility", "", [(START, token_utility(_inputs()))])
    (point,) = pu_series(make_market([100], START), utility)
    assert point.pu == pytest.approx(20.0)
    assert point.zone is Zone.UNDERVALUED


@settings(max_examples=50, deadline=None)
@given(price=st.decimals(min_value=Decimal("0.01"), max_value=Decimal("100000"), places=2),
       factor=st.integers(min_value=2, max_value=100),
       utility=st.floats(min_value=1e-3, max_value=1e6))
def test_pu_scales_with_price(price, factor, utility):
    series = MetricSeries.from_pairs("token_utility", "", [(START, utility)])
    base = pu_series(MarketSeries((PricePoint(START, price),)), series)[0].pu
    scaled = pu_series(MarketSeries((PricePoint(START, price * factor),)), series)[0].pu
    assert scaled > base
    assert scaled == pytest.approx(base * factor, rel=1e-12)


def test_zone_occupancy():
    points = [PuPoint(_day(i), Decimal(100), 1.0, pu, valuation_zone(pu)) for i, pu in enumerate([50, 80, 90, 120])]
    assert zone_occupancy(points) == {"Undervalued": 0.25, "Normal": 0.5, "Overvalued": 0.25}
    assert zone_occupancy([]) == {"Undervalued": 0.0, "Normal": 0.0, "Overvalued": 0.0}


def test_valuation_table_skips_the_first_year(make_market):
    config = SyntheticChainConfig(seed=7, days=500, spender_fraction=1.0,
                                  holding_time=ExponentialHolding(mean_days=30))
    snapshots = daily_snapshots(generate_records(config), (config.start_date, config.start_date + timedelta(days=499)))
    market = make_market([250] * 500, config.start_date)
    rows = valuation_table(snapshots, market)
    assert rows
    assert all(row.point.date >= config.start_date + timedelta(days=365) for row in rows)
    assert all(row.floored and row.inputs.volatility == 0.0 for row in rows)
    assert all(row.point.pu == pytest.approx(250 / row.point.token_utility) for row in rows)


def test_sub_range_keeps_the_trailing_year(make_market):
    config = SyntheticChainConfig(seed=3, days=800, spender_fraction=1.0,
                                  holding_time=ExponentialHolding(mean_days=30))
    records = generate_records(config)
    first, last = config.start_date, config.start_date + timedelta(days=799)
    market = make_market([250] * 800, first)
    sub_start = first + timedelta(days=400)
    full = valuation_table(daily_snapshots(records, (first, last)), market, start=sub_start)
    sub = valuation_table(daily_snapshots(records, (history_start(sub_start), last)), market, start=sub_start)
    assert full
    assert full[0].point.date >= sub_start
    assert sub == full


def test_staking_follows_the_binning_year_edge(to_units):
    end = day_end(QUERY_DAY)
    records = sorted([
        OutputRecord("old", 0, to_units(30), end - 500 * SECONDS_PER_DAY, None, True),
        OutputRecord("young", 0, to_units(10), end - 2 * SECONDS_PER_DAY, None, True),
    ], key=lambda r: r.sort_key)
    snapshots = daily_snapshots(records, (QUERY_DAY, QUERY_DAY))
    coarse = AgeBinning((30, 365), ("young", "mid", "old"))
    assert staking_ratio(snapshots, QUERY_DAY, coarse) == pytest.approx(0.75)
    assert staking_ratio_series(snapshots, coarse).values == staking_ratio_series(snapshots).values
    with pytest.raises(ValueError, match="365"):
        staking_ratio(snapshots, QUERY_DAY, AgeBinning((30, 400), ("a", "b", "c")))


def test_staked_and_young_shares_add_up():
    config = SyntheticChainConfig(seed=11, days=600, spender_fraction=0.6, split_probability=0.7,
                                  holding_time=ExponentialHolding(mean_days=200))
    records = generate_records(config)
    days = [config.start_date + timedelta(days=offset) for offset in range(0, 600, 37)]
    snapshots = daily_snapshots(records, (config.start_date, config.start_date + timedelta(days=599)))
    staking = staking_ratio_series(snapshots)
    for day in days:
        end = day_end(day)
        live = [r for r in records if r.created_at < end and (r.spent_at is None or r.spent_at >= end)]
        total = sum(r.value for r in live)
        young = sum(r.value for r in live if end - r.created_at <= 365 * SECONDS_PER_DAY)
        assert total > 0
        assert staking.get(day) + young / total == pytest.approx(1.0, abs=1e-12)


_POSITIVE = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(velocity=_POSITIVE, staking=st.floats(min_value=1e-3, max_value=0.9),
       volatility=_POSITIVE, dilution=_POSITIVE,
       field=st.sampled_from(["velocity", "staking", "volatility", "dilution"]))
def test_utility_moves_with_each_input(velocity, staking, volatility, dilution, field):
    base = dict(velocity=velocity, staking=staking, volatility=volatility, dilution=dilution)
    bumped = dict(base, **{field: base[field] * 1.1})
    before = token_utility(_inputs(**base))
    after = token_utility(_inputs(**bumped))
    if field in ("velocity", "staking"):
        assert after > before
    else:
        assert after < before
