from dataclasses import dataclass

SECONDS_PER_HOUR = 3600
HOURS_PER_YEAR = 24 * 365
DEFAULT_LIFETIME_YEARS = 3.0
# $/kWh
DEFAULT_ELECTRICITY_PRICE = 0.139


@dataclass(frozen=True)
class PriceModel:
    """
    Total cost of ownership of one serving node.

    capex_usd is the one-time purchase cost; power_w is the static power draw
    used for both OPEX and energy efficiency.
    """
    capex_usd: float
    power_w: float
    lifetime_years: float = DEFAULT_LIFETIME_YEARS
    electricity_usd_per_kwh: float = DEFAULT_ELECTRICITY_PRICE

    def __post_init__(self):
        if self.capex_usd < 0 or self.power_w < 0:
            raise ValueError("capex and power must be non-negative")
        if self.lifetime_years <= 0:
            raise ValueError(f"lifetime must be > 0, got {self.lifetime_years}")
        if self.electricity_usd_per_kwh < 0:
            raise ValueError("electricity price must be non-negative")

    @property
    def lifetime_hours(self) -> float:
        return self.lifetime_years * HOURS_PER_YEAR

    @property
    def lifetime_seconds(self) -> float:
        return self.lifetime_hours * SECONDS_PER_HOUR

    @property
    def opex_usd(self) -> float:
        return self.power_w / 1000 * self.lifetime_hours * self.electricity_usd_per_kwh

    @property
    def tco_usd(self) -> float:
        return self.capex_usd + self.opex_usd


def cost_efficiency(qps: float, price: PriceModel) -> float:
    """Queries served over the lifetime per dollar of CAPEX + OPEX."""
    if price.tco_usd <= 0:
        raise ValueError("total cost of ownership must be > 0")
    return qps * price.lifetime_seconds / price.tco_usd


def energy_efficiency(qps: float, price: PriceModel) -> float:
    """Queries per joule at the static power draw."""
    if price.power_w <= 0:
        raise ValueError("power must be > 0 for energy efficiency")
    return qps / price.power_w
