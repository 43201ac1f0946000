"""Fractional Brownian motion covariance and its Volterra kernel.

Fractional Brownian motion with Hurst index H in (0,1) is the centered
Gaussian process with covariance

    r(t, s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.

It can be generated from an ordinary Brownian motion W through a Volterra
kernel, B_t = integral_0^t k(t, s) dW_s, with

    k(t, s) = d * [ (t/s)^{H-1/2} (t-s)^{H-1/2}
                    - (H-1/2) s^{1/2-H} * integral_s^t z^{H-3/2} (z-s)^{H-1/2} dz ],

    d = sqrt( 2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H)) ).

Substituting w = z/s turns the z-integral into s^{2H-1} * beta_h(t/s) with

    beta_h(tau) = integral_1^tau w^{H-3/2} (w-1)^{H-1/2} dw,

so the kernel only ever needs beta_h on the ratio t/s; that is the form
evaluated here.  The generation identity makes two exact statements that
serve as ground truth for every numerical test in this package:

    integral_0^t k(t,v)^2 dv          = t^{2H}            (variance)
    integral_0^s k(t,v) k(s,v) dv     = r(t, s), s <= t   (covariance)

For H = 1/2 the kernel degenerates to the indicator of [0, t); all operations
switch to that exact branch inside a +-1e-6 window around 1/2, where the
general constants are 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .exceptions import DomainError
from .numerics import (
    DEFAULT_REL_TOL_SINGULAR,
    QuadratureSpec,
    beta_fn,
    integrate_weighted,
)

NEAR_HALF_WINDOW = 1e-6

# beta_h switches from a direct Gauss-Jacobi panel to the incomplete-Beta
# closed form at this ratio; below it the closed form loses digits to
# cancellation, above it the single panel converges poorly.
_TAU_SPLIT = 2.0


@dataclass(frozen=True)
class Hurst:
    """Validated Hurst index with the near-1/2 handling policy attached."""

    h: float

    def __post_init__(self):
        if not (0.0 < self.h < 1.0):
            raise DomainError(f"Hurst index must lie in (0, 1), got {self.h}")

    @property
    def near_half(self) -> bool:
        return abs(self.h - 0.5) < NEAR_HALF_WINDOW


def as_hurst(value) -> Hurst:
    """Coerce a float (or pass through a Hurst) with validation."""
    if isinstance(value, Hurst):
        return value
    return Hurst(float(value))


@dataclass(frozen=True)
class KernelConstants:
    """The kernel normalization d and the operator normalization sigma."""

    d: float
    sigma: float


def fbm_cov(t, s, H) -> float | np.ndarray:
    """Covariance r(t, s) of fractional Brownian motion; symmetric in (t, s)."""
    hurst = as_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0.0) or np.any(s < 0.0):
        raise DomainError("fbm_cov requires nonnegative times")
    two_h = 2.0 * hurst.h
    out = 0.5 * (t ** two_h + s ** two_h - np.abs(t - s) ** two_h)
    return float(out) if out.ndim == 0 else out


def kernel_constants(H) -> KernelConstants:
    """Normalization constants of the Volterra kernel; both 1 at H = 1/2.

    sigma's formula is 0/0 at H = 1/2 with analytic limit 1, so the near-half
    branch returns the limit exactly.
    """
    hurst = as_hurst(H)
    if hurst.near_half:
        return KernelConstants(d=1.0, sigma=1.0)
    h = hurst.h
    d = math.sqrt(2.0 * h * math.gamma(1.5 - h) / (math.gamma(h + 0.5) * math.gamma(2.0 - 2.0 * h)))
    sigma = math.sqrt(
        math.pi * (h - 0.5) * 2.0 * h / (math.gamma(2.0 - 2.0 * h) * math.sin(math.pi * (h - 0.5)))
    )
    return KernelConstants(d=d, sigma=sigma)


def beta_h(tau: float, H, *, rel_tol: float = 1e-11) -> float:
    """The kernel's auxiliary integral of w^{H-3/2} (w-1)^{H-1/2} over [1, tau].

    Evaluated by weighted quadrature with the left-endpoint exponent H - 1/2.
    For tau > 2 the tail is mapped by w -> 1/w onto a finite interval and
    integrated adaptively; tau = inf is finite only for H < 1/2, where the
    substitution gives the closed form B(1-2H, H+1/2).
    """
    hurst = as_hurst(H)
    h = hurst.h
    if not tau >= 1.0:
        raise DomainError(f"beta_h requires tau >= 1, got {tau}")
    if tau == 1.0:
        return 0.0
    if hurst.near_half:
        return math.log(tau)
    if math.isinf(tau):
        if h >= 0.5:
            raise DomainError("beta_h diverges at tau = inf for H >= 1/2")
        return beta_fn(1.0 - 2.0 * h, h + 0.5)
    head_spec = QuadratureSpec(rule="jacobi-weighted", nodes=48, alpha=h - 0.5, beta=0.0, rel_tol=rel_tol)
    if tau <= _TAU_SPLIT:
        value, _ = integrate_weighted(lambda w: w ** (h - 1.5), 1.0, tau, head_spec)
        return value
    head, _ = integrate_weighted(lambda w: w ** (h - 1.5), 1.0, _TAU_SPLIT, head_spec)
    # tail integral_2^tau w^{H-3/2}(w-1)^{H-1/2} dw under w -> 1/y becomes
    # integral_{1/tau}^{1/2} y^{-2H} (1-y)^{H-1/2} dy, smooth on its domain.
    tail_spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, rel_tol=rel_tol)
    tail, _ = integrate_weighted(
        lambda y: y ** (-2.0 * h) * (1.0 - y) ** (h - 0.5), 1.0 / tau, 0.5, tail_spec
    )
    return head + tail


def _beta_h_small(tau: np.ndarray, h: float) -> np.ndarray:
    """Fixed Gauss-Jacobi panel on [1, tau], vectorized over tau <= 2."""
    from .numerics import _jacobi_rule

    x, w = _jacobi_rule(48, h - 0.5, 0.0)
    half = 0.5 * (tau - 1.0)
    nodes = 1.0 + half[..., None] * (1.0 + x)
    vals = nodes ** (h - 1.5)
    return half ** (h + 0.5) * (vals @ w)


def _beta_h_large(tau: np.ndarray, h: float) -> np.ndarray:
    """Incomplete-Beta closed form under w -> 1/w, vectorized over tau > 2.

    beta_h(tau) = integral_{1/tau}^1 y^{-2H} (1-y)^{H-1/2} dy.  For H < 1/2
    this is a complemented regularized incomplete Beta; for H > 1/2 the first
    parameter 1-2H is negative, so one integration by parts lifts it into
    scipy's (a, b > 0) domain.
    """
    x = 1.0 / tau
    if h < 0.5:
        a, b = 1.0 - 2.0 * h, h + 0.5
        return beta_fn(a, b) * betainc(b, a, 1.0 - x)
    a, b = 2.0 - 2.0 * h, h - 0.5
    lead = x ** (1.0 - 2.0 * h) * (1.0 - x) ** (h - 0.5) / (2.0 * h - 1.0)
    rest = beta_fn(a, b) * (1.0 - betainc(a, b, x))
    return lead - (h - 0.5) / (2.0 * h - 1.0) * rest


def beta_h_many(tau, H) -> np.ndarray:
    """Vectorized beta_h used by kernel tables and covariance integrands.

    Agrees with :func:`beta_h` to ~1e-12 relative; kept separate because the
    inner quadrature loops evaluate it at thousands of ratios per integral.
    """
    hurst = as_hurst(H)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 1.0):
        raise DomainError("beta_h_many requires tau >= 1")
    if hurst.near_half:
        return np.log(tau)
    out = np.empty_like(tau)
    small = tau <= _TAU_SPLIT
    if np.any(small):
        out[small] = _beta_h_small(tau[small], hurst.h)
    if np.any(~small):
        out[~small] = _beta_h_large(tau[~small], hurst.h)
    return out


def kernel_k(t: float, s, H) -> float | np.ndarray:
    """Volterra kernel k(t, s) for 0 < s < t, vectorized over s.

    Uses the ratio form k = d [ (t/s)^{H-1/2}(t-s)^{H-1/2}
    - (H-1/2) s^{H-1/2} beta_h(t/s) ]; identically 1 on the near-half branch.
    For H != 1/2 the kernel is positive and diverges at s -> 0 and (for
    H < 1/2) at s -> t, so it is never evaluated at those endpoints; weighted
    quadrature absorbs them.
    """
    hurst = as_hurst(H)
    s_arr = np.asarray(s, dtype=float)
    t = float(t)
    if np.any(s_arr <= 0.0) or np.any(s_arr >= t):
        raise DomainError("kernel_k requires 0 < s < t")
    if hurst.near_half:
        out = np.ones_like(s_arr)
        return float(out) if out.ndim == 0 else out
    h = hurst.h
    d = kernel_constants(hurst).d
    ratio = t / s_arr
    out = d * (
        ratio ** (h - 0.5) * (t - s_arr) ** (h - 0.5)
        - (h - 0.5) * s_arr ** (h - 0.5) * beta_h_many(ratio, hurst)
    )
    return float(out) if out.ndim == 0 else out


def kernel_k_hypergeom(t: float, s: float, H) -> float:
    """Alternative kernel route through the hypergeometric function, H > 1/2.

    Returns (t-s)^{H-1/2} * F(1/2-H, H-1/2, H+1/2; (s-t)/s) with the overall
    multiplicative constant normalized to 1, so it matches :func:`kernel_k`
    only up to a single s-independent factor (fixed empirically in tests).
    """
    from .numerics import gauss_2f1

    hurst = as_hurst(H)
    h = hurst.h
    if not h > 0.5:
        raise DomainError("the hypergeometric kernel route is defined for H > 1/2 only")
    if not 0.0 < s < t:
        raise DomainError("kernel_k_hypergeom requires 0 < s < t")
    x = (s - t) / s
    return (t - s) ** (h - 0.5) * gauss_2f1(0.5 - h, h - 0.5, h + 0.5, x)


def isometry_gap(t: float, s: float, H, quad: QuadratureSpec | None = None) -> float:
    """Defect of the increment isometry: the squared kernel-difference integral
    over [0, t] minus |t-s|^{2H} (with k(s, .) vanishing beyond s).

    Near zero whenever the kernel and its constant are correct, which makes it
    the primary numerical ground-truth check of the generation identity.
    """
    hurst = as_hurst(H)
    if not 0.0 < s <= t:
        raise DomainError("isometry_gap requires 0 < s <= t")
    if s == t or hurst.near_half:
        # the integrand is identically 0 on [0, s) and 1 on (s, t) at H = 1/2
        return 0.0 if s == t else ((t - s) - (t - s) ** (2.0 * hurst.h))
    rel_tol = quad.rel_tol if quad is not None else DEFAULT_REL_TOL_SINGULAR
    nodes = quad.nodes if quad is not None else 24
    h = hurst.h
    left = -abs(2.0 * h - 1.0)
    # over [0, s): both kernels; the difference squared keeps the left-edge
    # exponent of k^2 and gains (s-v)^{2H-1} at the right edge for H < 1/2
    right = 2.0 * h - 1.0 if h < 0.5 else 0.0
    spec1 = QuadratureSpec(rule="adaptive-subdivision", nodes=nodes, alpha=left, beta=right, rel_tol=rel_tol)

    def diff_sq(v):
        return (kernel_k(t, v, hurst) - kernel_k(s, v, hurst)) ** 2 * v ** (-left) * (s - v) ** (-right)

    part1, _ = integrate_weighted(diff_sq, 0.0, s, spec1)
    # over (s, t): only k(t, .), right edge carries (t-v)^{2H-1}
    spec2 = QuadratureSpec(
        rule="adaptive-subdivision", nodes=nodes, alpha=0.0, beta=2.0 * h - 1.0, rel_tol=rel_tol
    )
    part2, _ = integrate_weighted(
        lambda v: kernel_k(t, v, hurst) ** 2 * (t - v) ** (1.0 - 2.0 * h), s, t, spec2
    )
    return part1 + part2 - (t - s) ** (2.0 * h)
