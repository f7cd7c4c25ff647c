"""Improper Gaussian signaling for the two-user interference channel."""

__version__ = "0.1.0"

from .signal_model import (
    MimoIcInstance, SisoIcInstance, SignalStrategy, validate_strategy,
    received_stats, complex_to_real, real_to_complex, interference_ratio,
)
from .rates import (
    RateBreakdown, mimo_rate, siso_rate, siso_rate_arrays, rate_pair,
    single_user_rate, profile_value, lemma3_residuals, LN2,
)
from .widely_linear import augmented_sqrt, precode, sample_improper, empirical_stats
from .pareto import RateProfile, ParetoPoint
from .joint import build_sdr, solve_sdr, randomize, joint_pareto_point, is_rank1
from .separate import proper_point, improper_pareto_point
from .baselines import GridSpec, grid_oracle, maxmin_point, tdma_maxmin

__all__ = [
    "__version__",
    "MimoIcInstance", "SisoIcInstance", "SignalStrategy", "validate_strategy",
    "received_stats", "complex_to_real", "real_to_complex", "interference_ratio",
    "RateBreakdown", "mimo_rate", "siso_rate", "siso_rate_arrays", "rate_pair",
    "single_user_rate", "profile_value", "lemma3_residuals", "LN2",
    "augmented_sqrt", "precode", "sample_improper", "empirical_stats",
    "RateProfile", "ParetoPoint",
    "build_sdr", "solve_sdr", "randomize", "joint_pareto_point", "is_rank1",
    "proper_point", "improper_pareto_point",
    "GridSpec", "grid_oracle", "maxmin_point", "tdma_maxmin",
]
