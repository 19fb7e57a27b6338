"""Simulation and verification lab for proportional review rewards."""

from .core import (
    CapExceededError,
    DEFAULT_CAP,
    EXCELLENT,
    GOOD,
    GameError,
    Instance,
    NO_REVIEW,
    PaymentResult,
    agent_utility,
    coverage_objective,
    effort_cost,
    effort_costs,
    instance_from_dict,
    instance_to_dict,
    is_max_effort_feasible,
    is_ns_feasible,
    load_instance,
    profile_from_lists,
    profile_to_lists,
    proportional_payments,
    quality_objective,
    save_instance,
    validate_profile,
    zero_profile,
)
from .equilibria import (
    Deviation,
    DynamicsDefectError,
    EquilibriumReport,
    FixpointState,
    TraceStep,
    best_response,
    best_response_dynamics,
    enumerate_pne,
    fixpoint_construct,
    potential,
    trace_to_csv,
    verify_pne,
)
from .solvers import (
    CoverageOptResult,
    OptimalQualityResult,
    brute_quality_opt,
    coverage_opt,
    greedy_quality_opt,
    greedy_set_construction,
    opt_upper_bound,
)
from .experiments import (
    NAMED_FAMILIES,
    PoAExperiment,
    campaign_csv,
    gen_paper_instance,
    gen_random_instance,
    known_equilibria,
    measure_poa,
    ratio_histogram_svg,
    run_campaign,
)
from .data_io import (
    DatasetSummary,
    ReviewRecord,
    compute_payouts,
    ingest_reviews,
    payouts_to_csv,
    records_to_csv,
)

__version__ = "0.1.0"
