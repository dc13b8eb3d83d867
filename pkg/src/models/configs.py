"""Pydantic models for everything a run is configured with or reports about itself."""

from datetime import date, datetime
from decimal import Decimal
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ZoneThresholds(BaseModel):
    model_config = ConfigDict(frozen=True)

    undervalued_below: float = 60.0
    overvalued_above: float = 100.0

    @model_validator(mode="after")
    def _ordered(self):
        if not 0 < self.undervalued_below <= self.overvalued_above:
            raise ValueError("zone thresholds must satisfy 0 < undervalued_below <= overvalued_above")
        return self


class BacktestConfig(BaseModel):
    """Trading protocol parameters, defaults follow the published backtest."""

    model_config = ConfigDict(frozen=True)

    initial_capital_usd: Decimal = Decimal("100000")
    fee_rate: Decimal = Decimal("0.001")
    trade_cap_units: Decimal = Decimal("100")
    buy_quantile: float = 0.1
    sell_quantile: float = 0.9
    warmup_days: int = Field(default=30, ge=0)
    start: Optional[date] = None
    end: Optional[date] = None

    @model_validator(mode="after")
    def _check_invariants(self):
        if not 0 <= self.buy_quantile < self.sell_quantile <= 1:
            raise ValueError("quantiles must satisfy 0 <= buy_quantile < sell_quantile <= 1")
        if not Decimal(0) <= self.fee_rate < Decimal(1):
            raise ValueError("fee_rate must lie in [0, 1)")
        if self.initial_capital_usd <= 0:
            raise ValueError("initial capital must be positive")
        if self.trade_cap_units <= 0:
            raise ValueError("trade cap must be positive")
        if self.start and self.end and self.start > self.end:
            raise ValueError("backtest range start is after its end")
        return self


class ExponentialHolding(BaseModel):
    kind: Literal["exponential"] = "exponential"
    mean_days: float = Field(gt=0)


class FixedHolding(BaseModel):
    kind: Literal["fixed"] = "fixed"
    days: float = Field(ge=0)


class BimodalHolding(BaseModel):
    """Mixture of short-term spenders and long-term hoarders."""

    kind: Literal["bimodal"] = "bimodal"
    short_mean_days: float = Field(gt=0)
    long_mean_days: float = Field(gt=0)
    long_mix: float = Field(ge=0, le=1)


HoldingTime = Annotated[Union[ExponentialHolding, FixedHolding, BimodalHolding], Field(discriminator="kind")]


class SyntheticChainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    days: int = Field(default=100, ge=1)
    coinbase_per_day: Decimal = Field(default=Decimal("50"), gt=0)
    coinbase_outputs: int = Field(default=1, ge=1)
    spender_fraction: float = Field(default=0.5, ge=0, le=1)
    split_probability: float = Field(default=0.5, ge=0, le=1)
    holding_time: HoldingTime = Field(default_factory=lambda: ExponentialHolding(mean_days=30))
    start_date: date = date(2013, 1, 1)


class InputDigest(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    """Written next to every command's outputs; ``created_at`` is excluded from ``digest``."""

    command: str
    version: str
    inputs: list[InputDigest] = Field(default_factory=list)
    config: dict = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
    created_at: Optional[datetime] = None
    digest: Optional[str] = None
