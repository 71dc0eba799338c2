"""Behavioral formulas of the five-sector economy, plus the contract memory.

All functions are pure; the simulation engines call them in a fixed order
each period.  Parameter defaults are the reference scenario the golden
tests are frozen against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

_FRACTION_FIELDS = (
    "lam",
    "rho_r",
    "rho_l",
    "rho_c",
    "delta_c",
    "delta_b",
    "gamma",
    "beta_l",
    "beta_r",
    "beta_c",
)


@dataclass(frozen=True)
class Parameters:
    """The 22 behavioral constants plus initial endowments and the horizon."""

    tau: int = 10  # payment contracts run for tau periods
    lam: float = 0.2  # labor share of each investment
    sig_a: float = 20.0  # investment sigmoid floor
    sig_b: float = 480.0  # investment sigmoid range
    sig_c: float = 200.0  # investment sigmoid surplus scale
    rho_r: float = 0.8  # resource owner's propensity to consume
    rho_l: float = 0.95  # labor owner's propensity to consume
    rho_c: float = 0.6  # dividend owner's propensity to consume
    mu: float = 0.5  # markup on contractual costs
    omega: float = 0.5  # windfall price response to excess demand
    delta_c: float = 0.15  # dividend rate on the period surplus
    delta_b: float = 0.4  # dividend rate on the cash position
    p_r: float = 25.0  # resource price
    p_l: float = 12.0  # labor price
    p_0: float = 30.0  # initial good price
    gamma: float = 0.75  # output elasticity of labor
    alpha: float = 0.42  # productivity factor
    beta_l: float = 0.95  # carry-over factor for Lab's goods
    beta_r: float = 0.7  # carry-over factor for Res's goods
    beta_c: float = 0.6  # carry-over factor for Cap's goods
    nu_l: float = 100.0  # new labor hours per period
    nu_r: float = 100.0  # new resource kg per period
    com_lab_0: float = 110.0  # company's initial labor stock
    com_res_0: float = 20.0  # company's initial resource stock
    horizon: int = 100

    def validate(self) -> None:
        """Raise ValueError on the first out-of-range field."""
        if not isinstance(self.tau, int) or self.tau < 1:
            raise ValueError("tau must be an integer >= 1")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError("horizon must be an integer >= 1")
        for name in _FRACTION_FIELDS:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for name in ("sig_b", "sig_c", "p_r", "p_l", "p_0", "alpha"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("nu_l", "nu_r", "com_lab_0", "com_res_0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    def with_overrides(self, **overrides: float | int) -> "Parameters":
        return replace(self, **overrides)

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return tuple(f.name for f in fields(Parameters))


@dataclass(frozen=True)
class ContractMemory:
    """Two fixed-length stacks of future wage and repayment obligations."""

    wage: tuple[float, ...]
    repay: tuple[float, ...]

    @staticmethod
    def empty(tau: int) -> "ContractMemory":
        return ContractMemory(wage=(0.0,) * tau, repay=(0.0,) * tau)

    def __post_init__(self) -> None:
        if len(self.wage) != len(self.repay):
            raise ValueError("wage and repay stacks must have equal length")
        if any(x < 0.0 for x in self.wage + self.repay):
            raise ValueError("memory entries must be non-negative")


def memory_due(memory: ContractMemory) -> tuple[float, float]:
    """Total wage and repayment obligations falling due this period."""
    return math.fsum(memory.wage), math.fsum(memory.repay)


def memory_push(history: Sequence[float], value: float) -> tuple[float, ...]:
    """Prepend `value`, forgetting the oldest entry; length is preserved."""
    if value < 0.0:
        raise ValueError("memory entries must be non-negative")
    return (value,) + tuple(history[:-1])


@dataclass(frozen=True)
class PeriodMetrics:
    """The derived variables of one period, in trace column order."""

    wages_payment: float
    repays_payment: float
    consum_lab: float
    consum_res: float
    consum_cap: float
    demand: float
    demand_plan: float
    demand_surplus: float
    good_production: float
    good_price: float
    investment: float
    investment_res: float
    investment_lab: float
    repayment: float
    diff: float
    dividend_decision: float
    dividend_payment: float


METRIC_COLUMNS: tuple[str, ...] = (
    "WagesPayment",
    "RepaysPayment",
    "ConsumLab",
    "ConsumRes",
    "ConsumCap",
    "Demand",
    "DemandPlan",
    "DemandSurplus",
    "GoodProduction",
    "GoodPrice",
    "Investment",
    "InvestmentRes",
    "InvestmentLab",
    "Repayment",
    "Diff",
    "DividendDecision",
    "DividendPayment",
)

_METRIC_FIELDS: tuple[str, ...] = tuple(f.name for f in fields(PeriodMetrics))


def metrics_as_row(metrics: PeriodMetrics) -> dict[str, float]:
    return {col: getattr(metrics, name) for col, name in zip(METRIC_COLUMNS, _METRIC_FIELDS)}


def consumption(
    balances: tuple[float, float, float], rho_l: float, rho_r: float, rho_c: float
) -> tuple[float, float, float, float]:
    """Consumption budgets as fixed fractions of (Lab, Res, Cap) bank balances."""
    lab, res, cap = balances
    c_lab = rho_l * lab
    c_res = rho_r * res
    c_cap = rho_c * cap
    return c_lab, c_res, c_cap, c_lab + c_res + c_cap


def demand_plan(wages_payment: float, repays_payment: float, mu: float) -> float:
    """Revenue the company plans for: contractual costs plus markup."""
    return (wages_payment + repays_payment) * (1.0 + mu)


def production(labor: float, resources: float, alpha: float, gamma: float) -> float:
    """Cobb-Douglas output 1 + alpha * L^gamma * R^(1-gamma); 0^gamma is 0."""
    if labor < 0.0 or resources < 0.0:
        raise ValueError("production inputs must be non-negative")
    return 1.0 + alpha * labor**gamma * resources ** (1.0 - gamma)


def good_price(
    plan: float,
    output: float,
    surplus: float,
    omega: float,
    period: int,
    p_0: float,
) -> float:
    """Unit price: planned revenue per unit, plus a windfall on excess demand.

    The initial price p_0 enters only in the very first period, before any
    plan exists to anchor the ratio.
    """
    price = plan / output + omega * max(0.0, surplus)
    if period == 0:
        price += p_0
    return price


def investment_sigmoid(surplus: float, sig_a: float, sig_b: float, sig_c: float) -> float:
    """Sigmoid response of investment to the demand surplus.

    Strictly increasing, bounded in (sig_a, sig_a + sig_b), and exactly
    sig_a + sig_b/2 at zero surplus.  The negative branch uses the
    overflow-free form of the logistic.
    """
    z = surplus / sig_c
    if z >= 0.0:
        return sig_a + sig_b / (1.0 + math.exp(-z))
    scaled = math.exp(z)
    return sig_a + sig_b * scaled / (1.0 + scaled)


def allocate_investment(investment: float, lam: float, tau: int) -> tuple[float, float, float]:
    """Split an investment into resource and labor shares plus the installment.

    The resource share is the exact complement of the labor share, so the
    two always reassemble to the full investment.
    """
    investment_lab = investment * lam
    investment_res = investment - investment_lab
    repayment = investment / tau
    return investment_res, investment_lab, repayment


def dividend_decision(
    diff: float, start_com_bank: float, delta_c: float, delta_b: float
) -> float:
    """Dividend declared from the period surplus and the opening cash position."""
    declared = max(0.0, diff * delta_c)
    if start_com_bank > 0.0:
        declared += start_com_bank * delta_b
    return declared
