"""Gated trend-following return simulator and distributional diagnostics.

A return process that averages its own recent past is multiplied by a
three-valued gate derived from the direction of implied-volatility
term-structure moves, switching it between trend-following (+1), flat (0)
and contrarian (-1) behavior. The package simulates the process
deterministically, estimates the gate's flip probability analytically and
by Monte Carlo, and computes the tail and clustering diagnostics used to
compare simulated and market return series.
"""

__version__ = "0.1.0"

from .timeseries import (
    IncrementSeries,
    ReturnSeries,
    VolTermPath,
    increments,
    load_returns_csv,
    load_vols_csv,
    prices_to_returns,
    save_returns_csv,
    save_vols_csv,
)
from .volprocess import (
    RNG_ALGORITHM,
    CholeskyFactor,
    CovarianceMatrix,
    NotPositiveDefiniteError,
    RngState,
    cholesky,
    equicorrelated,
    estimate_covariance,
    load_covariance_json,
    regularize,
    sample_covariance,
    sample_increments,
    save_covariance_json,
)
from .symbolic import (
    DEFAULT_RULE,
    FlipProbability,
    SignSumMeasure,
    ThresholdRule,
    bivariate_flip_probability,
    empirical_flip_frequency,
    flip_probability,
    flip_probability_from_measure,
    majority_signal,
    majority_signals,
    sign_sum_distribution,
    threshold_sign,
)
from .simulator import SimConfig, SimOutput, simulate, simulate_batch, worker_count
from .stats import (
    CcdfTable,
    DecayFit,
    FlipTimes,
    StatsBundle,
    analyze,
    ccdf,
    decay_rate,
    excess_kurtosis,
    flip_times,
    geometric_tail,
    lag1_corr,
    negbinom_tail,
    normal_prob_plot,
    phase_plot,
    q_from_decay,
    realized_vol,
)

__all__ = [
    "__version__",
    # timeseries
    "ReturnSeries", "VolTermPath", "IncrementSeries",
    "load_returns_csv", "save_returns_csv", "load_vols_csv", "save_vols_csv",
    "prices_to_returns", "increments",
    # volprocess
    "RNG_ALGORITHM", "RngState", "NotPositiveDefiniteError",
    "CovarianceMatrix", "CholeskyFactor", "cholesky",
    "sample_covariance", "estimate_covariance", "regularize", "equicorrelated",
    "sample_increments", "save_covariance_json", "load_covariance_json",
    # symbolic
    "threshold_sign", "ThresholdRule", "DEFAULT_RULE",
    "majority_signal", "majority_signals",
    "SignSumMeasure", "FlipProbability",
    "sign_sum_distribution", "flip_probability", "flip_probability_from_measure",
    "bivariate_flip_probability", "empirical_flip_frequency",
    # simulator
    "SimConfig", "SimOutput", "simulate", "simulate_batch", "worker_count",
    # stats
    "FlipTimes", "CcdfTable", "DecayFit", "StatsBundle",
    "flip_times", "ccdf", "decay_rate",
    "geometric_tail", "negbinom_tail", "q_from_decay",
    "normal_prob_plot", "phase_plot", "realized_vol", "lag1_corr",
    "excess_kurtosis", "analyze",
]
