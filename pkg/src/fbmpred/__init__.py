"""Conditional (prediction) law of fractional Brownian motion.

The package computes, for a fractional Brownian motion observed on [0, u],
the Gaussian law of its future values: the Volterra kernel linking the
process to an ordinary Brownian motion, the prediction weight entering the
conditional mean, the deterministic conditional covariance, exact sampling
from the assembled law, the asymptotic constants of the conditional
covariance, and an independent brute-force oracle (exact grid simulation +
Schur-complement conditioning) that every analytic formula is tested against.
"""

from .asymptotics import (
    AsymptoticReport,
    c_full_info,
    c_no_info_large,
    c_no_info_small,
    cond_cov_expansion_gap,
    f_diagnostic,
    fit_power_law,
    fit_power_law_refined,
    full_info_diag_constant,
    full_info_sweep,
    g_diagnostic,
    no_info_sweep,
)
from .exceptions import (
    ConsistencyWarning,
    DegeneracyError,
    DomainError,
    FitError,
    QuadratureError,
    RegimeError,
)
from .fbm import (
    Hurst,
    KernelConstants,
    as_hurst,
    beta_h,
    beta_h_many,
    fbm_cov,
    isometry_gap,
    kernel_constants,
    kernel_k,
    kernel_k_hypergeom,
)
from .numerics import QuadratureSpec, beta_fn, gauss_2f1, integrate_weighted, ln_gamma
from .oracle import (
    GridGaussian,
    MCConfig,
    RefinementStudy,
    build_grid_gaussian,
    refinement_study,
    sample_fbm,
    sample_fbm_volterra,
    schur_condition,
    volterra_implied_cov,
)
from .prediction import (
    ConditionalLaw,
    ObservedPath,
    bracket_density,
    build_conditional_law,
    cond_cov,
    cond_mean,
    psi,
    sample_conditional_paths,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticReport",
    "ConditionalLaw",
    "ConsistencyWarning",
    "DegeneracyError",
    "DomainError",
    "FitError",
    "GridGaussian",
    "Hurst",
    "KernelConstants",
    "MCConfig",
    "ObservedPath",
    "QuadratureError",
    "QuadratureSpec",
    "RefinementStudy",
    "RegimeError",
    "as_hurst",
    "beta_fn",
    "beta_h",
    "beta_h_many",
    "bracket_density",
    "build_conditional_law",
    "build_grid_gaussian",
    "c_full_info",
    "c_no_info_large",
    "c_no_info_small",
    "cond_cov",
    "cond_cov_expansion_gap",
    "cond_mean",
    "f_diagnostic",
    "fbm_cov",
    "fit_power_law",
    "fit_power_law_refined",
    "full_info_diag_constant",
    "full_info_sweep",
    "g_diagnostic",
    "gauss_2f1",
    "integrate_weighted",
    "isometry_gap",
    "kernel_constants",
    "kernel_k",
    "kernel_k_hypergeom",
    "ln_gamma",
    "no_info_sweep",
    "psi",
    "refinement_study",
    "sample_conditional_paths",
    "sample_fbm",
    "sample_fbm_volterra",
    "schur_condition",
    "volterra_implied_cov",
]
