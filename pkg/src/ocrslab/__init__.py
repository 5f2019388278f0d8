"""Contention-resolution laboratory.

Priced matching instances and their fractional relaxation, attenuated online
schemes under random edge or vertex arrivals, exact small-instance baselines,
and numerically certified balancedness constants.
"""

from .attenuation import AttenuationSpec, attenuation_profile, attenuation_value
from .bounds import (
    BoundCertificate,
    FactCheck,
    five_var_minimize,
    h,
    h1,
    lemma_r0_bound,
    lemma_r1_bound,
    one_sided_r0_bound,
    one_sided_r1_bound,
    patience_r0_bound,
    patience_r1_bound,
    phi,
    quadrature,
    verify_facts,
    z,
)
from .graphcore import (
    Edge,
    EdgeStats,
    FractionalPoint,
    GeneratedInstance,
    MenuEntry,
    PricingInstance,
    Vertex,
    check_polytope,
    edge_stats,
    fractional_point_violations,
    generate_family,
    validate_instance,
)
from .lp import (
    LinearProgram,
    LpSolution,
    build_lp_pricing,
    marginals,
    objective_coefficients,
    single_weight_selection,
    solve_lp,
    two_weight_reduction,
)
from .simulate import (
    EdgeReport,
    RoOcrsEngine,
    SequentialPricingEngine,
    SimulationReport,
    StochasticOcrsEngine,
    TrialOutcome,
    VertexArrivalEngine,
    exact_trivial_oracle,
    greedy_baseline,
    monte_carlo,
    optimal_policy_dp,
    run_ro_ocrs_trial,
    run_sequential_pricing_trial,
    run_stochastic_ocrs_trial,
    run_vertex_arrival_trial,
    wilson_interval,
)
from .suite import CriterionResult, SuiteEntry, build_suite, run_criteria

__all__ = [
    "AttenuationSpec",
    "attenuation_profile",
    "attenuation_value",
    "BoundCertificate",
    "FactCheck",
    "five_var_minimize",
    "h",
    "h1",
    "lemma_r0_bound",
    "lemma_r1_bound",
    "one_sided_r0_bound",
    "one_sided_r1_bound",
    "patience_r0_bound",
    "patience_r1_bound",
    "phi",
    "quadrature",
    "verify_facts",
    "z",
    "Edge",
    "EdgeStats",
    "FractionalPoint",
    "GeneratedInstance",
    "MenuEntry",
    "PricingInstance",
    "Vertex",
    "check_polytope",
    "edge_stats",
    "fractional_point_violations",
    "generate_family",
    "validate_instance",
    "LinearProgram",
    "LpSolution",
    "build_lp_pricing",
    "marginals",
    "objective_coefficients",
    "single_weight_selection",
    "solve_lp",
    "two_weight_reduction",
    "EdgeReport",
    "RoOcrsEngine",
    "SequentialPricingEngine",
    "SimulationReport",
    "StochasticOcrsEngine",
    "TrialOutcome",
    "VertexArrivalEngine",
    "exact_trivial_oracle",
    "greedy_baseline",
    "monte_carlo",
    "optimal_policy_dp",
    "run_ro_ocrs_trial",
    "run_sequential_pricing_trial",
    "run_stochastic_ocrs_trial",
    "run_vertex_arrival_trial",
    "wilson_interval",
    "CriterionResult",
    "SuiteEntry",
    "build_suite",
    "run_criteria",
    "__version__",
]

__version__ = "0.1.0"
