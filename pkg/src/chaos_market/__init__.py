"""Deterministic price-map simulator and analysis toolkit.

A piecewise-linear excess-demand rule drives an order-n price map whose
long-run behavior sweeps from convergence through chaos to oscillation as
the trader-strength parameter grows.  The package simulates the map,
certifies equilibrium (in)stability, measures Lyapunov exponents and
Monte-Carlo volatility/drift statistics, and exports the data behind every
analysis as CSV/JSON via the ``chaos-market`` command line.
"""

__version__ = "0.1.0"

from .chaos import (
    CHAOTIC,
    CONVERGENT,
    DIVERGENT,
    OSCILLATING,
    UNDETERMINED,
    IndependenceReport,
    InsufficientGrowthError,
    LyapunovCandidates,
    LyapunovFit,
    RegimeCriteria,
    RegimeSweep,
    Zone,
    analytic_lyapunov,
    autocorrelation,
    candidate_gap_closed_form,
    classify_regime,
    distance_to_independence,
    empirical_lyapunov,
    independence_locus,
    independence_report,
    lyapunov_candidates,
    oscillation_volatility,
    sweep_regimes,
    v_infinity_formula,
)
from .demand import (
    CENTER_SLOPE,
    CONTRARIAN,
    PEAK_VALUE,
    SATURATED,
    SATURATION_LEVEL,
    SIGN_CHANGE_RATIO,
    TREND_FOLLOWING,
    DemandShape,
    ed1,
    excess_demand,
    origin_slope,
    zone_of,
)
from .distribution import (
    Histogram,
    exceeds_overlay_in_tails,
    excess_kurtosis,
    phase_portrait,
    return_histogram,
)
from .engine import (
    LN_DIVERGENCE_BOUND,
    ModelParams,
    PriceState,
    ShockSpec,
    Trajectory,
    log_ratio_x,
    moving_average,
    returns,
    simulate,
    step,
    trajectory_to_csv,
)
from .ensemble import (
    ConvergenceWarning,
    Ensemble,
    EnsembleConfig,
    RandomWalkConfig,
    VolatilityCurve,
    converged_volatility,
    drift_curve,
    ensemble_metadata,
    random_walk_ensemble,
    run_ensemble,
    volatility_curve,
)
from .equilibrium import (
    DEFAULT_SET_STABILITY_SHOCKS,
    InstabilityCertificate,
    Linearization,
    bottom_right_gain_chain_rule,
    bottom_right_gain_price_scaled,
    bottom_row_chain_rule,
    certificate_record,
    finite_difference_matrix,
    instability_certificate,
    is_equilibrium,
    jacobian_fd,
    linear_model_limit,
    linear_model_simulate,
    set_stability_probe,
)
