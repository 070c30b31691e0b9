"""Cournot duopoly with network externalities, R&D, and policy competition.

Library layout:

- model: parameters, policy vectors, demand, profits, surplus, welfare
- stage2: closed-form and fixed-point equilibrium solvers with feasibility
- comparative_statics: analytic sensitivities, FD oracle, sign suites
- policy_game: best responses, Nash equilibrium, laissez-faire benchmark
- sweep: b-grid sweeps, admissible bound, crossing detection
- config / csvio / charts / checks / cli: run plumbing
"""

from .comparative_statics import (
    InteriorSampler,
    Jacobian4,
    SignReport,
    analytic_jacobian,
    finite_difference_jacobian,
    network_jacobian_process,
    network_jacobian_product,
    policy_jacobian_process,
    policy_jacobian_product,
    verify_sign_propositions,
)
from .config import RunConfig, parse_config
from .csvio import read_sweep_csv, write_sweep_csv
from .exceptions import (
    BoundaryError,
    ConfigError,
    NetCournotError,
    NeverFeasibleError,
    NoConvergenceError,
    NoInteriorPointError,
    NonInteriorError,
    ParseError,
    SocViolationError,
    TaxDegenerateError,
    ValidationError,
)
from .model import (
    MarketState,
    ModelParams,
    PolicyVector,
    RDMode,
    WelfareBreakdown,
    consumer_surplus,
    consumer_surplus_long_form,
    inverse_demand,
    profits,
    welfare,
)
from .policy_game import (
    NashResult,
    closed_form_home_subsidy_m0,
    foreign_best_response,
    foreign_best_response_numeric,
    foreign_best_response_process,
    foreign_best_response_product,
    home_best_response,
    home_welfare_gradient,
    laissez_faire,
    solve_nash,
)
from .stage2 import (
    FeasibilityReport,
    GammaPair,
    Stage2Equilibrium,
    check_feasibility,
    foc_residuals,
    gamma_coefficients,
    solve_stage2,
    solve_stage2_fixed_point,
    solve_stage2_general,
    solve_stage2_process,
    solve_stage2_product,
)
from .sweep import (
    AdmissibleBound,
    CrossingReport,
    SweepRow,
    detect_crossings,
    find_admissible_bound,
    sweep_b,
)

__version__ = "0.1.0"
