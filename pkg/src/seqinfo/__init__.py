"""Information, MSE bounds, and estimator law for two-stage adaptive designs.

The package decomposes the Fisher information of a two-stage normal
experiment with a data-dependent interim decision, computes conditional and
unconditional Cramer-Rao style MSE lower bounds, evaluates the conditional
sampling density of the maximum-likelihood estimator, and cross-checks all
of it by quadrature and reproducible Monte Carlo. The `seqinfo` command line
tool exposes the same functionality as reports, CSV, and figures.
"""

from .bounds import (
    DecisionBound,
    MseBoundReport,
    classical_crlb,
    conditional_mse_bound,
    mle_conditional_bias,
    mle_conditional_bias_dtheta,
    mse_bound_report,
    unconditional_mse_bound,
)
from .density import (
    continue_mle_density,
    continue_mle_interval_mass,
    log_likelihood,
    stop_mle_density,
    stop_mle_interval_mass,
)
from .design import (
    CoinFlipRule,
    DecisionCell,
    DecisionRule,
    TwoStageDesign,
    always_continue_design,
    coinflip_design,
    decide,
    format_design_config,
    gsd_design,
    is_stop_decision,
    max_stage2_n,
    n_total,
    parse_design_config,
    stage1_mean_region,
    stage2_n,
)
from .errors import (
    DegenerateDecision,
    DegenerateTruncation,
    InvalidDesign,
    InvalidOutcome,
    MismatchedInputs,
    NonConvergence,
    SeqinfoError,
    ZeroInformation,
)
from .information import (
    NEGLIGIBLE_PROBABILITY,
    DecisionInformation,
    InformationBreakdown,
    conditional_stage1_information,
    conditional_stage2_information,
    conditional_total_information,
    decision_probability,
    decision_probability_dtheta,
    design_information,
    information_breakdown,
    total_information,
)
from .mathcore import (
    DEFAULT_QUADRATURE,
    FULL_LINE,
    Interval,
    QuadratureResult,
    QuadratureSettings,
    central_diff,
    hazard_upper,
    integrate,
    std_normal_cdf,
    std_normal_interval_mass,
    std_normal_pdf,
    std_normal_sf,
)
from .montecarlo import (
    DecisionSimStats,
    SimConfig,
    SimDump,
    SimResult,
    chi_square_gof,
    expected_histogram_masses,
    pooled_mle,
    raw_words,
    simulate,
    stream_normals,
    stream_uniforms,
)
from .truncnorm import (
    TruncatedNormal,
    mass,
    trunc_fisher_info,
    trunc_mean,
    trunc_mean_dmu,
    trunc_var,
)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # mathcore
    "Interval",
    "FULL_LINE",
    "QuadratureSettings",
    "QuadratureResult",
    "DEFAULT_QUADRATURE",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_interval_mass",
    "hazard_upper",
    "integrate",
    "central_diff",
    # truncnorm
    "TruncatedNormal",
    "mass",
    "trunc_mean",
    "trunc_var",
    "trunc_fisher_info",
    "trunc_mean_dmu",
    # design
    "DecisionCell",
    "DecisionRule",
    "CoinFlipRule",
    "TwoStageDesign",
    "gsd_design",
    "coinflip_design",
    "always_continue_design",
    "decide",
    "is_stop_decision",
    "stage2_n",
    "n_total",
    "max_stage2_n",
    "stage1_mean_region",
    "parse_design_config",
    "format_design_config",
    # information
    "NEGLIGIBLE_PROBABILITY",
    "DecisionInformation",
    "InformationBreakdown",
    "decision_probability",
    "decision_probability_dtheta",
    "design_information",
    "conditional_stage1_information",
    "conditional_stage2_information",
    "conditional_total_information",
    "total_information",
    "information_breakdown",
    # bounds
    "DecisionBound",
    "MseBoundReport",
    "classical_crlb",
    "mle_conditional_bias",
    "mle_conditional_bias_dtheta",
    "conditional_mse_bound",
    "unconditional_mse_bound",
    "mse_bound_report",
    # density
    "stop_mle_density",
    "continue_mle_density",
    "stop_mle_interval_mass",
    "continue_mle_interval_mass",
    "log_likelihood",
    # montecarlo
    "SimConfig",
    "SimResult",
    "SimDump",
    "DecisionSimStats",
    "simulate",
    "pooled_mle",
    "raw_words",
    "stream_uniforms",
    "stream_normals",
    "chi_square_gof",
    "expected_histogram_masses",
    # verify
    "CheckResult",
    "run_checks",
    # errors
    "SeqinfoError",
    "NonConvergence",
    "DegenerateTruncation",
    "InvalidDesign",
    "DegenerateDecision",
    "ZeroInformation",
    "InvalidOutcome",
    "MismatchedInputs",
]
