"""Five-sector monetary economy: typed macro ledger plus a categorical engine.

The package simulates a closed economy of labor and resource owners, one
producing company, one dividend owner and one bank, interacting through
eight yearly bookings over 20 typed double-entry T-accounts.  The same
period cycle runs on two interchangeable engines -- a plain recursive one
and a categorical one built from finite categories, functors, natural
transformations, pullback validation and pushout computation -- and both
keep six cross-system accounting invariances at exactly zero.
"""

from .catcore import (
    FiniteCategory,
    FinSetMap,
    Functor,
    LawReport,
    NaturalTransformation,
    Path,
    check_functor_laws,
    check_naturality,
    finset_pullback,
    finset_pushout,
    verify_pullback_universal,
    verify_pushout_universal,
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
from .evolution import (
    EngineConsistencyError,
    EngineKind,
    SimulationState,
    StabilityReport,
    Trace,
    initial_state,
    period_step,
    run,
    stability_report,
)
from .ledger import (
    ACCOUNT_NAMES,
    Account,
    Agent,
    AccountKind,
    Booking,
    BookingLeg,
    Direction,
    Invariances,
    LedgerState,
    Unit,
    ValidationFailure,
    init_ledger,
    invariances,
    investment_validation,
    post_booking,
    validate_booking,
)

__version__ = "0.1.0"

__all__ = [
    "ACCOUNT_NAMES",
    "Account",
    "AccountKind",
    "Agent",
    "Booking",
    "BookingLeg",
    "ContractMemory",
    "Direction",
    "EngineConsistencyError",
    "EngineKind",
    "FinSetMap",
    "FiniteCategory",
    "Functor",
    "Invariances",
    "LawReport",
    "LedgerState",
    "NaturalTransformation",
    "Parameters",
    "Path",
    "PeriodMetrics",
    "SimulationState",
    "StabilityReport",
    "Trace",
    "Unit",
    "ValidationFailure",
    "allocate_investment",
    "check_functor_laws",
    "check_naturality",
    "consumption",
    "demand_plan",
    "dividend_decision",
    "finset_pullback",
    "finset_pushout",
    "good_price",
    "init_ledger",
    "initial_state",
    "invariances",
    "investment_sigmoid",
    "investment_validation",
    "memory_due",
    "memory_push",
    "period_step",
    "post_booking",
    "production",
    "run",
    "stability_report",
    "validate_booking",
    "verify_pullback_universal",
    "verify_pushout_universal",
]
