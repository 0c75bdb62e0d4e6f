"""Ordinary least squares for VAR models under general linear restrictions,
with finite-time error-bound evaluation and a Monte Carlo replication harness.
"""

from .restrictions import (
    Banded,
    CompanionVarP,
    ConstraintForm,
    Custom,
    Grouped,
    Network,
    RestrictionBasis,
    RestrictionError,
    ScaledIdentity,
    Unrestricted,
    basis_from_constraints,
    build_basis,
    constraints_from_basis,
    nest_check,
    pattern_from_json,
    pattern_to_json,
)
from .var_core import (
    NormalLaw,
    SamplePath,
    ScaledStudentTLaw,
    SimulationOverflowError,
    SpectralStats,
    VarModel,
    companion_embed,
    load_path_csv,
    make_dgp,
    save_path_csv,
    simulate,
    spectral_stats,
)
from .estimator import FitResult, estimation_error, fit, fit_dense_oracle
from .bounds import (
    BoundConfig,
    BoundReport,
    GramianCache,
    RegimeError,
    bmsb_threshold,
    bound_report,
    classify_phase,
    empirical_bmsb,
    feasible_k,
    gamma_Rk,
    geometric_gramian_scalar,
    gramian,
    kappa,
    kl_divergence,
    minimax_lower,
    mu_min_diagnostic,
    sigma_x_norm,
    sigma_x_norm_dense,
    thm1_bound,
    thm1_bound_for_model,
    thm2_bound,
    thm3_bound,
    upper_gram_choice,
    xi,
)
from .experiments import (
    ExperimentConfig,
    GridPoint,
    ReplicationSummary,
    check_fast_rate,
    check_slope_collapse,
    config_from_json,
    config_to_json,
    emit_bound_overlay,
    emit_csv,
    run_experiment,
)

__version__ = "0.1.0"
