"""Asymptotic constants of the conditional covariance and power-law fitting.

Two regimes are covered.  As the observation window shrinks (u -> 0) the
remaining covariance r(t,s) - rhat(t,s|u) decays like

    C * u^{2H}                          for H < 1/2  (C independent of t, s)
    d^2 (t s)^{2H-1} / (8-8H) * u^{2-2H} for H > 1/2,

and as the window absorbs the prediction time (u -> s <= t) the conditional
covariance itself decays like

    d^2/(2H) * (s-u)^{2H}                           on the diagonal t = s
    C(t, s) * (s-u)^{H+1/2}                         off the diagonal,

with the constants implemented below.  The sweep helpers evaluate the
conditional covariance on geometric grids, clean the leading correction term
with a Richardson pair combination (the next-order term in the u -> 0
expansions is exactly linear in u, so 2 y(u) - y(2u) cancels it), and fit the
principal power law, reporting fitted against target exponents/constants.

The diagnostic normalizations g and f divide out the predicted principal
term so both regimes target the limit 1 (for H > 1/2 the denominator
exponent is 2-2H, the one consistent with the expansion; with u^{2H} the
ratio could not converge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, FitError, RegimeError
from .fbm import as_hurst, beta_h, fbm_cov, kernel_constants, kernel_k, beta_h_many
from .numerics import QuadratureSpec, integrate_weighted
from .prediction import cond_cov

REGIMES = ("no-info-smallH", "no-info-largeH", "full-info-diag", "full-info-offdiag")

R2_REQUIRED = 0.99


@dataclass(frozen=True)
class AsymptoticReport:
    """Outcome of one sweep: diagnostic values plus fitted vs target power law."""

    regime: str
    u_grid: np.ndarray
    diagnostic: np.ndarray
    fitted_exponent: float
    fitted_constant: float
    target_exponent: float
    target_constant: float

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if not np.all(np.isfinite(self.diagnostic)):
            raise DomainError("diagnostic values must be finite on the whole grid")


def c_no_info_small(H) -> float:
    """Remaining-covariance constant for H < 1/2 as u -> 0 (t, s independent)."""
    hurst = as_hurst(H)
    if not hurst.h < 0.5:
        raise RegimeError("c_no_info_small applies to H < 1/2 only")
    d = kernel_constants(hurst).d
    tail = beta_h(math.inf, hurst)
    return d * d / (2.0 * hurst.h) * (hurst.h - 0.5) ** 2 * tail ** 2


def c_no_info_large(H, t: float, s: float) -> float:
    """Remaining-covariance constant d^2 (ts)^{2H-1} / (8-8H) for H > 1/2."""
    hurst = as_hurst(H)
    if not hurst.h > 0.5:
        raise RegimeError("c_no_info_large applies to H > 1/2 only")
    if not (t > 0.0 and s > 0.0):
        raise DomainError("c_no_info_large requires positive times")
    d = kernel_constants(hurst).d
    return d * d * (t * s) ** (2.0 * hurst.h - 1.0) / (8.0 - 8.0 * hurst.h)


def c_full_info(H, t: float, s: float) -> float:
    """Off-diagonal constant of rhat(t, s | u) ~ C (s-u)^{H+1/2} as u -> s < t."""
    hurst = as_hurst(H)
    if hurst.near_half:
        raise RegimeError("c_full_info is stated for H != 1/2")
    if not 0.0 < s < t:
        raise RegimeError("c_full_info covers t > s > 0; the diagonal has its own constant")
    h = hurst.h
    d = kernel_constants(hurst).d
    bracket = (t / s) ** (h - 0.5) * (t - s) ** (h - 0.5) + (0.5 - h) * s ** (h - 0.5) * beta_h(t / s, hurst)
    return d * d / (h + 0.5) * bracket


def full_info_diag_constant(H) -> float:
    """Diagonal constant d^2 / (2H); equals 1 at H = 1/2 and is < 1 elsewhere."""
    hurst = as_hurst(H)
    d = kernel_constants(hurst).d
    return d * d / (2.0 * hurst.h)


def g_diagnostic(u: float, H, *, rel_tol: float = 1e-9) -> float:
    """Normalized remaining covariance at t = s = 1; tends to 1 as u -> 0.

    For H > 1/2: (8-8H)/d^2 * (1 - rhat(1,1|u)) / u^{2-2H}.  For H < 1/2 the
    principal exponent is 2H and the normalization is the small-H constant.
    """
    hurst = as_hurst(H)
    if not 0.0 < u < 1.0:
        raise DomainError("g_diagnostic requires u in (0, 1)")
    remaining = 1.0 - cond_cov(1.0, 1.0, u, hurst, rel_tol=rel_tol, check=False)
    if hurst.near_half:
        return remaining / u   # Brownian: 1 - (1 - u) = u exactly
    h = hurst.h
    if h > 0.5:
        d = kernel_constants(hurst).d
        return (8.0 - 8.0 * h) / d ** 2 * remaining / u ** (2.0 - 2.0 * h)
    return remaining / u ** (2.0 * h) / c_no_info_small(hurst)


def f_diagnostic(u: float, H, *, rel_tol: float = 1e-9) -> float:
    """(2H/d^2) rhat(1,1|u) / (1-u)^{2H}; tends to 1 as u -> 1, exactly 1 at H=1/2."""
    hurst = as_hurst(H)
    if not 0.0 < u < 1.0:
        raise DomainError("f_diagnostic requires u in (0, 1)")
    d = kernel_constants(hurst).d
    value = cond_cov(1.0, 1.0, u, hurst, rel_tol=rel_tol, check=False)
    return 2.0 * hurst.h / d ** 2 * value / (1.0 - u) ** (2.0 * hurst.h)


def fit_power_law(u_values, residuals) -> tuple[float, float]:
    """Least-squares fit of log(residual) = exponent*log(u) + log(constant).

    Requires at least 4 points, positive residuals and R^2 >= 0.99; returns
    (exponent, constant).
    """
    u_values = np.asarray(u_values, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    if u_values.size < 4:
        raise DomainError("fit_power_law needs at least 4 points")
    if np.any(residuals <= 0.0) or np.any(u_values <= 0.0):
        raise DomainError("fit_power_law needs positive u values and residuals")
    lx, ly = np.log(u_values), np.log(residuals)
    if np.ptp(lx) == 0.0:
        raise FitError("degenerate fit: all abscissae coincide")
    exponent, intercept = np.polyfit(lx, ly, 1)
    fitted = exponent * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    if r2 < R2_REQUIRED:
        raise FitError(f"power-law fit rejected: R^2 = {r2:.4f} < {R2_REQUIRED}")
    return float(exponent), float(math.exp(intercept))


def fit_power_law_refined(u_base, y_base, y_doubled, correction_exponent: float) -> tuple[float, float]:
    """Power-law fit with the known next-order term removed pairwise.

    For data y(u) = C u^p + D u^m (+ higher order) the combination
    K(u) = 2^m y(u) - y(2u) equals C (2^m - 2^p) u^p exactly in D, so fitting
    K recovers p cleanly and C = K-constant / (2^m - 2^p).
    """
    u_base = np.asarray(u_base, dtype=float)
    m = float(correction_exponent)
    cleaned = 2.0 ** m * np.asarray(y_base, dtype=float) - np.asarray(y_doubled, dtype=float)
    if np.any(cleaned <= 0.0):
        raise FitError("Richardson-cleaned data not positive; correction exponent likely wrong")
    exponent, constant = fit_power_law(u_base, cleaned)
    gap = 2.0 ** m - 2.0 ** exponent
    if gap <= 0.0:
        raise FitError("fitted exponent not separated from the correction exponent")
    return exponent, constant / gap


def _remaining_cov(u: float, hurst, rel_tol: float) -> float:
    """r(1,1) - rhat(1,1|u) as one positive integral (no cancellation)."""
    left = -abs(2.0 * hurst.h - 1.0)
    spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, alpha=left, beta=0.0, rel_tol=rel_tol)
    value, _ = integrate_weighted(
        lambda v: kernel_k(1.0, v, hurst) ** 2 * v ** (-left), 0.0, u, spec
    )
    return value


def no_info_sweep(
    H,
    *,
    u_min: float = 1e-3,
    u_max: float = 1e-2,
    n_points: int = 8,
    rel_tol: float = 1e-10,
) -> AsymptoticReport:
    """Shrinking-window sweep at t = s = 1 with Richardson-cleaned fit.

    Evaluates the remaining covariance on a geometric ladder in
    [u_min, u_max]; the first correction beyond the principal power is linear
    in u in both regimes, so pairs (u, 2u) clean it exactly.
    """
    hurst = as_hurst(H)
    if hurst.near_half:
        raise RegimeError("the no-information expansion is stated for H != 1/2")
    base = np.geomspace(u_min, 0.5 * u_max, n_points)
    y_base = np.array([_remaining_cov(float(u), hurst, rel_tol) for u in base])
    y_doubled = np.array([_remaining_cov(float(2.0 * u), hurst, rel_tol) for u in base])
    exponent, constant = fit_power_law_refined(base, y_base, y_doubled, 1.0)
    if hurst.h < 0.5:
        regime = "no-info-smallH"
        target_p = 2.0 * hurst.h
        target_c = c_no_info_small(hurst)
    else:
        regime = "no-info-largeH"
        target_p = 2.0 - 2.0 * hurst.h
        target_c = c_no_info_large(hurst, 1.0, 1.0)
    grid = np.unique(np.concatenate([base, 2.0 * base]))[::-1]   # decreasing toward 0
    diagnostic = np.array([g_diagnostic(float(u), hurst, rel_tol=rel_tol) for u in grid])
    return AsymptoticReport(
        regime=regime,
        u_grid=grid,
        diagnostic=diagnostic,
        fitted_exponent=exponent,
        fitted_constant=constant,
        target_exponent=target_p,
        target_constant=target_c,
    )


def full_info_sweep(
    H,
    t: float = 1.0,
    s: float = 1.0,
    *,
    delta_min: float = 1e-4,
    delta_max: float = 1e-3,
    n_points: int = 8,
    rel_tol: float = 1e-10,
) -> AsymptoticReport:
    """Absorbing-window sweep: rhat(t, s | s - delta) on a geometric delta grid.

    Corrections die fast enough at these deltas that a plain log-log fit
    recovers exponent and constant; the diagnostic column is f (diagonal
    case) or the ratio to the predicted principal term (off-diagonal).
    """
    hurst = as_hurst(H)
    if hurst.near_half:
        raise RegimeError("the full-information expansion is stated for H != 1/2")
    if t < s or s <= 0.0:
        raise DomainError("full_info_sweep requires t >= s > 0")
    deltas = np.geomspace(delta_min, delta_max, n_points)
    y = np.array([
        cond_cov(t, s, float(s - dd), hurst, rel_tol=rel_tol, check=False) for dd in deltas
    ])
    exponent, constant = fit_power_law(deltas, y)
    if t == s:
        regime = "full-info-diag"
        target_p = 2.0 * hurst.h
        target_c = full_info_diag_constant(hurst)   # s-free on the diagonal
        if s == 1.0:
            diagnostic = np.array([
                f_diagnostic(float(1.0 - dd), hurst, rel_tol=rel_tol) for dd in deltas
            ])
        else:
            diagnostic = y / (target_c * deltas ** target_p)
    else:
        regime = "full-info-offdiag"
        target_p = hurst.h + 0.5
        target_c = c_full_info(hurst, t, s)
        diagnostic = y / (target_c * deltas ** target_p)
    grid = s - deltas   # increasing toward the limit point s
    return AsymptoticReport(
        regime=regime,
        u_grid=grid,
        diagnostic=diagnostic,
        fitted_exponent=exponent,
        fitted_constant=constant,
        target_exponent=target_p,
        target_constant=target_c,
    )


def cond_cov_expansion_gap(t: float, s: float, u: float, H, *, rel_tol: float = 1e-9) -> float:
    """Structural check of the kernel-product expansion.

    Expanding k(t,v) k(s,v) via the ratio form splits the integrand into four
    algebraic terms (pure power product, two single side integrals, and the
    product of side integrals).  Integrating the expanded sum over [0, u]
    must reproduce rhat(t,s|u) - r(t,s); the return value is the relative
    defect, which only reflects quadrature noise.
    """
    hurst = as_hurst(H)
    if hurst.near_half:
        raise RegimeError("the expansion check is for H != 1/2")
    if not (0.0 < u < min(t, s)):
        raise DomainError("requires 0 < u < min(t, s)")
    h = hurst.h
    d2 = kernel_constants(hurst).d ** 2

    def expanded_sum(v):
        side_t = beta_h_many(t / v, hurst)
        side_s = beta_h_many(s / v, hurst)
        pure = (t / v) ** (h - 0.5) * (s / v) ** (h - 0.5) * ((t - v) * (s - v)) ** (h - 0.5)
        cross_t = (0.5 - h) * t ** (h - 0.5) * (t - v) ** (h - 0.5) * side_s
        cross_s = (0.5 - h) * s ** (h - 0.5) * (s - v) ** (h - 0.5) * side_t
        both = (h - 0.5) ** 2 * v ** (2.0 * h - 1.0) * side_s * side_t
        return pure + cross_t + cross_s + both

    left = -abs(2.0 * h - 1.0)
    spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, alpha=left, beta=0.0, rel_tol=rel_tol)
    integral, _ = integrate_weighted(lambda v: expanded_sum(v) * v ** (-left), 0.0, u, spec)
    lhs = -d2 * integral
    rhs = cond_cov(t, s, u, hurst, rel_tol=rel_tol, check=False) - fbm_cov(t, s, hurst)
    return abs(lhs - rhs) / abs(rhs)
