"""Local Yule-Walker estimation for time-varying autoregressions.

The package simulates time-varying AR(p) processes, estimates their
coefficient paths from tapered local covariance windows, removes the
leading bandwidth bias terms by ladder extrapolation, and benchmarks the
estimators against their frozen-coefficient population targets.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateRegression,
    DimensionMismatch,
    InvalidPacf,
    NonFiniteSample,
    NumericalError,
    NumericalSingularity,
    OddBandwidth,
    TvywError,
    WindowOutOfRange,
    ZeroTaper,
)
from .estimator import (
    Alignment,
    CoefficientEstimate,
    CovarianceWindow,
    bias_reduced_estimate,
    empirical_yule_walker,
    estimation_loss,
    extrapolation_order,
    minimax_bandwidth,
    romberg_weights,
    romberg_weights_exact,
    solve_yule_walker,
    tapered_autocovariance,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    RateFit,
    ensemble_covariance,
    rate_regression,
    run_experiment,
    write_results,
)
from .predict import (
    EstimatorKind,
    PredictionRecord,
    linear_predict,
    mean_squared_error,
    oracle_forecast,
    rolling_forecast,
)
from .series import Series, read_series_csv, write_series_csv
from .spectral import (
    ArSnapshot,
    CovarianceSequence,
    ar_autocovariance,
    ar_roots,
    local_spectral_density,
    local_yule_walker,
    min_root_modulus,
    toeplitz_matrix,
)
from .taper import Taper, moment, normalize, weight_sum
from .tvar import (
    PacfPathSpec,
    TvarModel,
    companion_matrix,
    companion_product_norm,
    derive_rng,
    make_model,
    pacf_to_ar,
    random_model,
    replicate_seed,
    simulate,
    simulate_many,
)

__all__ = [name for name in dir() if not name.startswith("_")]
