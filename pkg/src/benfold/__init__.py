"""benfold: exact values and rigorous bounds for folded densities vs uniform.

The library answers one question in several certified ways: how far is
n*X mod 1 from the uniform distribution on [0, 1) (equivalently, how far is
the significand of X**n from its logarithmic limit)?  `density` represents
piecewise-smooth densities and their variation, `bounds` computes upper
bounds and the closed-form exact distance for the log-uniform family, and
`oracle` provides the independent numerical ground truth used to validate
every bound.
"""

__version__ = "0.1.0"

from .density import (
    DensityError,
    FoldedDensity,
    PiecewiseDensity,
    Segment,
    const_segment,
    exp_segment,
    fold_mod1,
    grid_variation,
    linear_segment,
    normalized,
    scale_density,
    significand,
    triangular_density,
    tv_full_line,
    tv_integer_delineated,
    uniform_density,
    uniform_log_density,
)
from .bounds import (
    BoundReport,
    ExactUniformParams,
    VacuousBoundError,
    bound_convex_eighth,
    bound_fourier_closed,
    bound_fourier_parseval,
    bound_step_density,
    bound_tv_quarter,
    bound_tv_scaled,
    bound_uniform_log_tv,
    exact_delta_uniform,
    folded_cdf_uniform,
    fourier_coeff_uniform_log,
    uniform_log_coeffs,
    uniform_log_tail_bound,
)
from .oracle import (
    OracleResult,
    QuadratureConfig,
    QuadratureError,
    adaptive_simpson,
    averaging_residual,
    check_averaging_inequality,
    delta_crossing_unimodal,
    delta_monte_carlo,
    delta_numeric,
    integrate,
    inverse_cdf_sampler,
    uniform_log_sampler,
    uniform_sampler,
)

__all__ = [
    "__version__",
    "BoundReport",
    "DensityError",
    "ExactUniformParams",
    "FoldedDensity",
    "OracleResult",
    "PiecewiseDensity",
    "QuadratureConfig",
    "QuadratureError",
    "Segment",
    "VacuousBoundError",
    "adaptive_simpson",
    "averaging_residual",
    "bound_convex_eighth",
    "bound_fourier_closed",
    "bound_fourier_parseval",
    "bound_step_density",
    "bound_tv_quarter",
    "bound_tv_scaled",
    "bound_uniform_log_tv",
    "check_averaging_inequality",
    "const_segment",
    "delta_crossing_unimodal",
    "delta_monte_carlo",
    "delta_numeric",
    "exact_delta_uniform",
    "exp_segment",
    "fold_mod1",
    "folded_cdf_uniform",
    "fourier_coeff_uniform_log",
    "grid_variation",
    "integrate",
    "inverse_cdf_sampler",
    "linear_segment",
    "normalized",
    "scale_density",
    "significand",
    "triangular_density",
    "tv_full_line",
    "tv_integer_delineated",
    "uniform_density",
    "uniform_log_coeffs",
    "uniform_log_density",
    "uniform_log_sampler",
    "uniform_log_tail_bound",
    "uniform_sampler",
]
