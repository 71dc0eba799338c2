"""Period evolution: two interchangeable engines over the same yearly cycle.

The recursive engine executes the cycle as plain balance arithmetic on the
typed ledger.  The categorical engine keeps the economy as a finite
category whose objects are the accounts: every booking is gated through a
finite-set pullback over its per-leg checks, applied through a finite-set
pushout that groups flows onto their accounts, and each period closes with
functor and naturality law checks on the time step just performed.  Both
engines run the identical canonical order with identical float operations,
so their traces agree bit for bit.

Canonical order inside period t:
 1. carried consumer goods decay (Lab/Res/Cap goods stocks scale by beta)
 2. fresh endowments arrive (Lab hours, Res kg)
 3. contractual dues are read from memory (wages, repayments)
 4. consumption budgets from current bank balances; total demand
 5. demand plan and demand surplus
 6. production consumes the company's entire input stocks
 7. the good price forms (p_0 enters only at t = 0)
 8. goods sales: bookings 2, 4, 8
 9. investment decision and allocation
10. booking 5 (loan), gated by the investment validation
11. booking 3 (resource purchase, immediate delivery)
12. booking 1 (wage payment, contracted hours delivered)
13. booking 7 (loan repayment)
14. booking 6 (dividend payout and fresh declaration)
15. memory push (labor share and installment of the new investment)

A trace row t holds the account snapshot at the START of period t together
with the metrics decided during period t, so a run over horizon H yields
H + 1 rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .catcore import (
    FiniteCategory,
    FinSetMap,
    Functor,
    NaturalTransformation,
    check_functor_laws,
    check_naturality,
    finset_pullback,
    finset_pushout,
)
from .decisions import (
    ContractMemory,
    Parameters,
    PeriodMetrics,
    allocate_investment,
    consumption,
    demand_plan,
    dividend_decision,
    good_price,
    investment_sigmoid,
    memory_due,
    memory_push,
    production,
)
from .ledger import (
    ACCOUNT_NAMES,
    ACCOUNT_SPECS,
    Agent,
    Booking,
    Direction,
    Invariances,
    LedgerState,
    ValidationFailure,
    conservation_status,
    init_ledger,
    invariances,
    investment_validation,
    leg_statuses,
    make_dividend,
    make_goods_sale,
    make_loan,
    make_repayment,
    make_resource_purchase,
    make_wage_payment,
    post_booking,
)


class EngineKind(Enum):
    RECURSIVE = "recursive"
    CATEGORICAL = "categorical"


class EngineConsistencyError(RuntimeError):
    """The categorical engine violated one of its own structural laws."""

    def __init__(self, message: str, failures: list[str] | None = None) -> None:
        super().__init__(message)
        self.failures = failures or []


@dataclass
class SimulationState:
    ledger: LedgerState
    memory: ContractMemory
    declared_dividend: float
    period: int
    params: Parameters


def initial_state(params: Parameters) -> SimulationState:
    return SimulationState(
        ledger=init_ledger(params.com_lab_0, params.com_res_0),
        memory=ContractMemory.empty(params.tau),
        declared_dividend=0.0,
        period=0,
        params=params,
    )


@dataclass(frozen=True)
class TraceRow:
    period: int
    metrics: PeriodMetrics
    accounts: dict[str, float]
    invariances: Invariances


@dataclass(frozen=True)
class Trace:
    params: Parameters
    engine: EngineKind
    rows: tuple[TraceRow, ...]
    bookings: tuple[tuple[Booking, ...], ...]

    def flat_values(self) -> Iterator[float]:
        """Every numeric cell of the trace, in a fixed deterministic order."""
        for row in self.rows:
            yield float(row.period)
            metrics = row.metrics
            for name in metrics.__dataclass_fields__:
                yield getattr(metrics, name)
            for account in ACCOUNT_NAMES:
                yield row.accounts[account]
            yield from row.invariances.as_tuple()


def _com_bank_diff(
    c_lab: float,
    c_res: float,
    c_cap: float,
    invest: float,
    invest_res: float,
    wages: float,
    repays: float,
    paid_dividend: float,
) -> float:
    """Net EU flow through the company's bank account during one period."""
    inflows = c_lab + c_res + c_cap + invest
    outflows = invest_res + wages + repays + paid_dividend
    return inflows - outflows


# ---------------------------------------------------------------------------
# Recursive engine: the period as plain arithmetic on the typed ledger.
# ---------------------------------------------------------------------------


def _step_recursive(
    state: SimulationState, params: Parameters
) -> tuple[SimulationState, PeriodMetrics, tuple[Booking, ...]]:
    led = state.ledger.copy()
    p = params
    start_com_bank = led.balance("AccComBank")

    # 1. decay of carried consumer goods (producer inventory carries in full)
    led.set_balance("AccLabGood", led.balance("AccLabGood") * p.beta_l)
    led.set_balance("AccResGood", led.balance("AccResGood") * p.beta_r)
    led.set_balance("AccCapGood", led.balance("AccCapGood") * p.beta_c)

    # 2. fresh endowments
    led.set_balance("AccLabLab", led.balance("AccLabLab") + p.nu_l)
    led.set_balance("AccResRes", led.balance("AccResRes") + p.nu_r)

    # 3. contractual dues
    wages_due, repays_due = memory_due(state.memory)

    # 4. consumption budgets
    c_lab, c_res, c_cap, demand = consumption(
        (led.balance("AccLabBank"), led.balance("AccResBank"), led.balance("AccCapBank")),
        p.rho_l,
        p.rho_r,
        p.rho_c,
    )

    # 5. plan and surplus
    plan = demand_plan(wages_due, repays_due, p.mu)
    surplus = demand - plan

    # 6. production uses up the entire input stocks
    output = production(led.balance("AccComLab"), led.balance("AccComRes"), p.alpha, p.gamma)
    led.set_balance("AccComLab", 0.0)
    led.set_balance("AccComRes", 0.0)
    led.set_balance("AccComGood", led.balance("AccComGood") + output)

    # 7. price formation
    price = good_price(plan, output, surplus, p.omega, state.period, p.p_0)

    executed: list[Booking] = []

    def post(booking: Booking) -> None:
        post_booking(led, booking)
        executed.append(booking)

    # 8. goods sales
    post(make_goods_sale(Agent.LAB, c_lab, c_lab / price))
    post(make_goods_sale(Agent.RES, c_res, c_res / price))
    post(make_goods_sale(Agent.CAP, c_cap, c_cap / price))

    # 9. investment decision
    invest = investment_sigmoid(surplus, p.sig_a, p.sig_b, p.sig_c)
    invest_res, invest_lab, installment = allocate_investment(invest, p.lam, p.tau)

    # 10. loan creation, gated
    if not investment_validation(invest, led.balance("AccComBank")):
        raise ValidationFailure(
            "investment validation rejected the loan", [f"investment={invest}"]
        )
    post(make_loan(invest))

    # 11-13. factor purchases and repayment
    post(make_resource_purchase(invest_res, invest_res / p.p_r))
    post(make_wage_payment(wages_due, wages_due / p.p_l))
    post(make_repayment(repays_due))

    # 14. dividend: pay out last period's declaration, then declare anew
    paid = state.declared_dividend
    diff = _com_bank_diff(c_lab, c_res, c_cap, invest, invest_res, wages_due, repays_due, paid)
    declared = dividend_decision(diff, start_com_bank, p.delta_c, p.delta_b)
    post(make_dividend(paid, declared))

    # 15. remember the new obligations
    memory = ContractMemory(
        wage=memory_push(state.memory.wage, invest_lab),
        repay=memory_push(state.memory.repay, installment),
    )

    metrics = PeriodMetrics(
        wages_payment=wages_due,
        repays_payment=repays_due,
        consum_lab=c_lab,
        consum_res=c_res,
        consum_cap=c_cap,
        demand=demand,
        demand_plan=plan,
        demand_surplus=surplus,
        good_production=output,
        good_price=price,
        investment=invest,
        investment_res=invest_res,
        investment_lab=invest_lab,
        repayment=installment,
        diff=diff,
        dividend_decision=declared,
        dividend_payment=paid,
    )
    new_state = SimulationState(led, memory, declared, state.period + 1, params)
    return new_state, metrics, tuple(executed)


# ---------------------------------------------------------------------------
# Categorical engine: the category of accounts is the state.
# ---------------------------------------------------------------------------


def build_economy_category(ledger: LedgerState) -> FiniteCategory:
    """The account category: one payloaded object per account, no flows yet."""
    cat = FiniteCategory("economy")
    for spec in ACCOUNT_SPECS:
        cat.add_object(spec.name, (spec.unit.value, ledger.balance(spec.name)))
    return cat


def booking_to_morphisms(cat: FiniteCategory, booking: Booking) -> tuple[int, ...]:
    """Record a booking's value channels as weighted morphisms in the category."""
    ids = []
    for channel in booking.channels:
        ids.append(
            cat.add_morphism(
                cat.get_object(channel.src),
                cat.get_object(channel.dst),
                weight=channel.amount,
                label=f"b{booking.id}:{channel.label}",
            )
        )
    return tuple(ids)


def validate_via_pullback(
    balances: dict[str, float], booking: Booking
) -> tuple[bool, list[str]]:
    """Gate a booking by pulling its per-leg checks back against 'all ok'.

    The apex of the pullback of (leg -> status) against ('ok' -> status)
    collects exactly the legs whose checks pass; the booking validates when
    the apex covers every leg and the booking conserves value.
    """
    statuses = leg_statuses(balances, booking)
    legs = tuple(range(len(booking.legs)))
    outcomes = tuple(sorted(set(statuses) | {"ok"}))
    leg_check = FinSetMap(legs, outcomes, dict(zip(legs, statuses)))
    spec_cone = FinSetMap(("all",), outcomes, {"all": "ok"})
    apex, _, _ = finset_pullback(leg_check, spec_cone)

    diagnostics = [s for s in statuses if s != "ok"]
    cons = conservation_status(booking)
    if cons != "ok":
        diagnostics.append(cons)
    return len(apex) == len(legs) and cons == "ok", diagnostics


def apply_via_pushout(cat: FiniteCategory, booking: Booking) -> tuple[frozenset, ...]:
    """Apply a validated booking by folding its flows over the pushout classes.

    The pushout of (leg -> account) against (leg -> leg) glues every leg
    onto the account it touches, one class per account; each class is then
    folded onto the balance in leg order.  Returns the classes.
    """
    legs = booking.legs
    leg_tokens = tuple(range(len(legs)))
    accounts = tuple(dict.fromkeys(leg.account for leg in legs))
    to_account = FinSetMap(leg_tokens, accounts, {i: legs[i].account for i in leg_tokens})
    to_slot = FinSetMap(leg_tokens, leg_tokens, {i: i for i in leg_tokens})
    classes, _, _ = finset_pushout(to_account, to_slot)

    for cls in classes:
        names = [label for tag, label in cls if tag == "A"]
        if len(names) != 1:
            raise EngineConsistencyError(f"pushout glued {len(names)} accounts into one class")
        (name,) = names
        for index in sorted(label for tag, label in cls if tag == "B"):
            leg = legs[index]
            amount = cat.amount(name)
            if leg.direction is Direction.INFLOW:
                cat.update_object(name, amount + leg.amount)
            else:
                cat.update_object(name, amount - leg.amount)
    return classes


def build_time_step(
    flows: FiniteCategory, old: dict[str, float], new: dict[str, float]
) -> tuple[FiniteCategory, Functor, Functor, NaturalTransformation]:
    """The period as a natural transformation between two snapshot functors.

    `flows` is the account category carrying the period's flow morphisms.
    The target category holds both snapshots; F_t and F_t1 embed the flows
    at the two levels, and each component of the transformation is the
    evolution edge of one account, weighted by its net flow.
    """
    step = FiniteCategory("time-step")
    at_t: dict[str, int] = {}
    at_t1: dict[str, int] = {}
    for spec in ACCOUNT_SPECS:
        at_t[spec.name] = step.add_object(f"{spec.name}@t", (spec.unit.value, old[spec.name]))
    for spec in ACCOUNT_SPECS:
        at_t1[spec.name] = step.add_object(
            f"{spec.name}@t+1", (spec.unit.value, new[spec.name])
        )

    components: dict[int, int] = {}
    for obj in flows.objects:
        components[obj.id] = step.add_morphism(
            at_t[obj.name],
            at_t1[obj.name],
            weight=new[obj.name] - old[obj.name],
            label=f"evolve:{obj.name}",
        )

    object_map_t = {obj.id: at_t[obj.name] for obj in flows.objects}
    object_map_t1 = {obj.id: at_t1[obj.name] for obj in flows.objects}
    morphism_map_t: dict[int, int] = {}
    morphism_map_t1: dict[int, int] = {}
    for mor in flows.morphisms:
        src_name = flows.object_by_id(mor.src).name
        dst_name = flows.object_by_id(mor.dst).name
        morphism_map_t[mor.id] = step.add_morphism(
            at_t[src_name], at_t[dst_name], mor.weight, mor.label
        )
        morphism_map_t1[mor.id] = step.add_morphism(
            at_t1[src_name], at_t1[dst_name], mor.weight, mor.label
        )

    f_t = Functor(flows, step, object_map_t, morphism_map_t)
    f_t1 = Functor(flows, step, object_map_t1, morphism_map_t1)
    eta = NaturalTransformation(f_t, f_t1, components)
    return step, f_t, f_t1, eta


def verify_time_step(
    flows: FiniteCategory,
    eta: NaturalTransformation,
    old: dict[str, float],
    new: dict[str, float],
) -> None:
    """Raise EngineConsistencyError unless the period's laws all hold.

    Checks the two snapshot functors, the naturality of the evolution
    transformation, and that every component's weight equals the account's
    realised net flow.
    """
    failures: list[str] = []
    for functor, tag in ((eta.F, "F_t"), (eta.G, "F_t+1")):
        report = check_functor_laws(functor)
        if not report.ok:
            failures.extend(f"{tag}: {msg}" for msg in report.failures)
    nat = check_naturality(eta)
    if not nat.ok:
        failures.extend(f"naturality: {msg}" for msg in nat.failures)
    step = eta.F.target
    for obj in flows.objects:
        component = step.morphism_by_id(eta.components[obj.id])
        expected = new[obj.name] - old[obj.name]
        if component.weight != expected:
            failures.append(
                f"component weight for {obj.name}: {component.weight} != net flow {expected}"
            )
    if failures:
        raise EngineConsistencyError("period law check failed", failures)


def _step_categorical(
    state: SimulationState, params: Parameters
) -> tuple[SimulationState, PeriodMetrics, tuple[Booking, ...]]:
    p = params
    cat = build_economy_category(state.ledger)
    old_balances = {name: cat.amount(name) for name in ACCOUNT_NAMES}
    start_com_bank = old_balances["AccComBank"]

    # 1-2. decay and endowments, as endo-updates of the account objects
    cat.update_object("AccLabGood", cat.amount("AccLabGood") * p.beta_l)
    cat.update_object("AccResGood", cat.amount("AccResGood") * p.beta_r)
    cat.update_object("AccCapGood", cat.amount("AccCapGood") * p.beta_c)
    cat.update_object("AccLabLab", cat.amount("AccLabLab") + p.nu_l)
    cat.update_object("AccResRes", cat.amount("AccResRes") + p.nu_r)

    # 3-5. dues, budgets, plan
    wages_due, repays_due = memory_due(state.memory)
    c_lab, c_res, c_cap, demand = consumption(
        (cat.amount("AccLabBank"), cat.amount("AccResBank"), cat.amount("AccCapBank")),
        p.rho_l,
        p.rho_r,
        p.rho_c,
    )
    plan = demand_plan(wages_due, repays_due, p.mu)
    surplus = demand - plan

    # 6. production
    output = production(cat.amount("AccComLab"), cat.amount("AccComRes"), p.alpha, p.gamma)
    cat.update_object("AccComLab", 0.0)
    cat.update_object("AccComRes", 0.0)
    cat.update_object("AccComGood", cat.amount("AccComGood") + output)

    # 7. price
    price = good_price(plan, output, surplus, p.omega, state.period, p.p_0)

    executed: list[Booking] = []

    def post(booking: Booking) -> None:
        balances = {name: cat.amount(name) for name in ACCOUNT_NAMES}
        ok, diagnostics = validate_via_pullback(balances, booking)
        if not ok:
            raise ValidationFailure(
                f"booking {booking.id} ({booking.description}) rejected", diagnostics
            )
        booking_to_morphisms(cat, booking)
        apply_via_pushout(cat, booking)
        executed.append(booking)

    # 8. goods sales
    post(make_goods_sale(Agent.LAB, c_lab, c_lab / price))
    post(make_goods_sale(Agent.RES, c_res, c_res / price))
    post(make_goods_sale(Agent.CAP, c_cap, c_cap / price))

    # 9-10. investment and loan
    invest = investment_sigmoid(surplus, p.sig_a, p.sig_b, p.sig_c)
    invest_res, invest_lab, installment = allocate_investment(invest, p.lam, p.tau)
    if not investment_validation(invest, cat.amount("AccComBank")):
        raise ValidationFailure(
            "investment validation rejected the loan", [f"investment={invest}"]
        )
    post(make_loan(invest))

    # 11-13. factor purchases and repayment
    post(make_resource_purchase(invest_res, invest_res / p.p_r))
    post(make_wage_payment(wages_due, wages_due / p.p_l))
    post(make_repayment(repays_due))

    # 14. dividend
    paid = state.declared_dividend
    diff = _com_bank_diff(c_lab, c_res, c_cap, invest, invest_res, wages_due, repays_due, paid)
    declared = dividend_decision(diff, start_com_bank, p.delta_c, p.delta_b)
    post(make_dividend(paid, declared))

    # close the period: law checks on the realised time step
    new_balances = {name: cat.amount(name) for name in ACCOUNT_NAMES}
    *_, eta = build_time_step(cat, old_balances, new_balances)
    verify_time_step(cat, eta, old_balances, new_balances)

    # 15. memory
    memory = ContractMemory(
        wage=memory_push(state.memory.wage, invest_lab),
        repay=memory_push(state.memory.repay, installment),
    )

    led = LedgerState()
    for name, value in new_balances.items():
        led.account(name).balance = value

    metrics = PeriodMetrics(
        wages_payment=wages_due,
        repays_payment=repays_due,
        consum_lab=c_lab,
        consum_res=c_res,
        consum_cap=c_cap,
        demand=demand,
        demand_plan=plan,
        demand_surplus=surplus,
        good_production=output,
        good_price=price,
        investment=invest,
        investment_res=invest_res,
        investment_lab=invest_lab,
        repayment=installment,
        diff=diff,
        dividend_decision=declared,
        dividend_payment=paid,
    )
    new_state = SimulationState(led, memory, declared, state.period + 1, params)
    return new_state, metrics, tuple(executed)


_STEPPERS = {
    EngineKind.RECURSIVE: _step_recursive,
    EngineKind.CATEGORICAL: _step_categorical,
}


def period_step(
    state: SimulationState,
    params: Parameters | None = None,
    engine: EngineKind = EngineKind.RECURSIVE,
) -> tuple[SimulationState, PeriodMetrics, tuple[Booking, ...]]:
    """Execute one period; atomic, the input state is never touched."""
    return _STEPPERS[engine](state, params if params is not None else state.params)


def run(
    params: Parameters,
    horizon: int | None = None,
    engine: EngineKind = EngineKind.RECURSIVE,
) -> Trace:
    """Deterministic trace of `horizon` periods (rows 0..horizon inclusive)."""
    params.validate()
    span = params.horizon if horizon is None else horizon
    if span < 1:
        raise ValueError("horizon must be >= 1")
    state = initial_state(params)
    rows: list[TraceRow] = []
    logs: list[tuple[Booking, ...]] = []
    for period in range(span + 1):
        snapshot = state.ledger.balances()
        checks = invariances(state.ledger)
        state, metrics, executed = period_step(state, params, engine)
        rows.append(TraceRow(period, metrics, snapshot, checks))
        logs.append(executed)
    return Trace(params, engine, tuple(rows), tuple(logs))


# ---------------------------------------------------------------------------
# Stability reporting.
# ---------------------------------------------------------------------------

STABILITY_SERIES: tuple[str, ...] = (
    "GoodPrice",
    "Investment",
    "AccLabBank",
    "AccResBank",
    "AccCapBank",
    "AccComBank",
    "AccBankComBank",
    "AccBankLabBank",
    "AccBankResBank",
    "AccBankCapBank",
)

BOUNDED_LIMIT = 1e9
DRIFT_WINDOW = 10


@dataclass(frozen=True)
class StabilityReport:
    bounded: bool
    drift: dict[str, float]

    def max_drift(self) -> float:
        return max(self.drift.values())


def _series(trace: Trace, key: str) -> list[float]:
    if key == "GoodPrice":
        return [row.metrics.good_price for row in trace.rows]
    if key == "Investment":
        return [row.metrics.investment for row in trace.rows]
    return [row.accounts[key] for row in trace.rows]


def stability_report(trace: Trace) -> StabilityReport:
    """Boundedness plus last-window relative drift of the key series.

    Drift of a series is max over the final DRIFT_WINDOW steps of
    |x_t - x_{t-1}| / max(1, |x_t|); bounded means every trace cell is
    finite and below BOUNDED_LIMIT in magnitude.
    """
    if len(trace.rows) < 20:
        raise ValueError("stability report needs a trace of at least 20 rows")
    bounded = all(math.isfinite(v) and abs(v) <= BOUNDED_LIMIT for v in trace.flat_values())
    drift: dict[str, float] = {}
    for key in STABILITY_SERIES:
        values = _series(trace, key)
        window = values[-(DRIFT_WINDOW + 1) :]
        drift[key] = max(
            abs(b - a) / max(1.0, abs(b)) for a, b in zip(window, window[1:])
        )
    return StabilityReport(bounded=bounded, drift=drift)
