"""Conditional (prediction) law of fractional Brownian motion.

Given the path of the process on [0, u], the future values (B_t)_{t >= u}
remain Gaussian.  The conditional mean is the observed endpoint corrected by
an integral of the past increments against a prediction weight,

    m(t | u) = B_u - integral_0^u psi(t, s | u) dB_s,

    psi(t, s | u) = - sin(pi (H-1/2)) / pi * s^{1/2-H} (u-s)^{1/2-H}
                    * integral_u^t z^{H-1/2} (z-u)^{H-1/2} / (z - s) dz,

and the conditional covariance is deterministic,

    rhat(t, s | u) = r(t, s) - integral_0^u k(t, v) k(s, v) dv
                   = integral_u^{min(t,s)} k(t, v) k(s, v) dv.

The second (positive-integrand) form is the one evaluated here; the first is
recomputed as an optional consistency diagnostic.  At H = 1/2 everything
collapses to the Markov answers m = B_u and rhat = min(t, s) - u, returned
exactly by the near-half branch.

Observed paths are discrete, so the dB integral is discretized by midpoint
evaluation per observation cell.  For H away from 1/2 the weight behaves like
(u-s)^{1/2-H} at the observation horizon which diverges for H > 1/2; the last
observation cell is therefore refined geometrically toward u (factor 0.5,
at least 16 cells) with the path linearly interpolated, whenever
|H - 1/2| > 0.05.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyWarning, DegeneracyError, DomainError
from .fbm import Hurst, as_hurst, fbm_cov, kernel_k
from .linalg import cholesky_with_jitter
from .numerics import QuadratureSpec, integrate_weighted

GRADING_ACTIVATION = 0.05   # |H - 1/2| beyond which the last cell is refined
MIN_GRADED_CELLS = 16
PSD_SLACK = 1e-10           # eigenvalues may undershoot 0 by this times trace
TWO_FORM_TOL = 1e-4


@dataclass(frozen=True)
class ObservedPath:
    """A path observed on a strictly increasing grid over [0, u].

    The grid starts at time 0 with value 0 (the process is pinned there);
    the last grid time is the conditioning horizon u.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times and values must be 1-d arrays of equal length")
        if times.size < 2:
            raise DomainError("an observed path needs at least 2 points")
        if times[0] != 0.0 or values[0] != 0.0:
            raise DomainError("an observed path must start at time 0 with value 0")
        if np.any(np.diff(times) <= 0.0):
            raise DomainError("observation times must be strictly increasing")

    @property
    def u(self) -> float:
        return float(self.times[-1])

    @property
    def final_value(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class ConditionalLaw:
    """Gaussian law of the future values on a grid: mean vector + covariance."""

    u: float
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        n = grid.size
        if np.any(np.diff(grid) <= 0.0):
            raise DomainError("the future grid must be strictly increasing")
        if np.any(grid < self.u):
            raise DomainError("future grid points must not precede the horizon u")
        if mean.shape != (n,) or cov.shape != (n, n):
            raise DomainError("mean/cov shapes must match the grid")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(cov).max(initial=0.0)))):
            raise DomainError("covariance must be symmetric")
        trace = float(np.trace(cov))
        if n and np.linalg.eigvalsh(cov).min() < -PSD_SLACK * max(trace, 1e-300):
            raise DegeneracyError("conditional covariance is indefinite beyond jitter tolerance")

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


def psi(t: float, s: float, u: float, H) -> float:
    """Prediction weight of a past increment at s for forecasting time t >= u.

    Identically 0 at H = 1/2 (the sine prefactor vanishes: Brownian motion is
    Markov) and at t = u (empty integral).
    """
    hurst = as_hurst(H)
    if not 0.0 < s < u:
        raise DomainError("psi requires 0 < s < u")
    if not t >= u:
        raise DomainError("psi requires t >= u")
    if t == u or hurst.near_half:
        return 0.0
    h = hurst.h
    prefactor = -math.sin(math.pi * (h - 0.5)) / math.pi * s ** (0.5 - h) * (u - s) ** (0.5 - h)
    spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, alpha=h - 0.5, beta=0.0, rel_tol=1e-10)
    integral, _ = integrate_weighted(lambda z: z ** (h - 0.5) / (z - s), u, t, spec)
    return prefactor * integral


def _psi_matrix(ts: np.ndarray, mids: np.ndarray, u: float, hurst: Hurst, nodes: int = 32) -> np.ndarray:
    """psi(ts[j], mids[i] | u) for all j, i at once.

    Shares one graded set of z-panels over [u, max(ts)] across every future
    time: panel edges include each ts so per-time integrals are cumulative
    panel sums.  Panels grow geometrically away from u starting at the gap
    between u and the closest mid, which keeps the pole of 1/(z - s) at least
    two panel half-lengths away from every node.
    """
    from .numerics import _jacobi_rule

    h = hurst.h
    ts = np.asarray(ts, dtype=float)
    t_max = float(ts.max())
    out = np.zeros((ts.size, mids.size))
    if t_max == u or mids.size == 0:
        return out
    gap = u - float(mids.max())
    span = t_max - u
    edges = {u, t_max}
    edges.update(float(t) for t in ts if t > u)
    step = min(gap, span)
    while step < span:
        edges.add(u + step)
        step *= 2.0
    edge_list = sorted(edges)

    x_j, w_j = _jacobi_rule(nodes, h - 0.5, 0.0)   # first panel absorbs (z-u)^{H-1/2}
    x_g, w_g = _jacobi_rule(nodes, 0.0, 0.0)

    cumulative = np.zeros(mids.size)
    per_edge = {u: cumulative.copy()}
    for lo, hi in zip(edge_list[:-1], edge_list[1:]):
        half = 0.5 * (hi - lo)
        if lo == u:
            z = lo + half * (1.0 + x_j)
            w_eff = half ** (h + 0.5) * w_j
        else:
            z = lo + half * (1.0 + x_g)
            w_eff = half * w_g * (z - u) ** (h - 0.5)
        g = w_eff * z ** (h - 0.5)
        cumulative = cumulative + (1.0 / (z[None, :] - mids[:, None])) @ g
        per_edge[hi] = cumulative.copy()
    prefactor = -math.sin(math.pi * (h - 0.5)) / math.pi * mids ** (0.5 - h) * (u - mids) ** (0.5 - h)
    for j, t in enumerate(ts):
        if t > u:
            out[j] = prefactor * per_edge[float(t)]
    return out


def _integration_cells(path: ObservedPath, hurst: Hurst, n_graded: int = MIN_GRADED_CELLS):
    """Midpoints and path increments of the dB-integration cells.

    Away from the near-half window the Markov property fails and the weight
    blows up at the horizon, so the final observation cell is split into
    geometrically shrinking subcells toward u with the increment divided
    proportionally (linear interpolation of the path).
    """
    times = path.times
    values = path.values
    mids = 0.5 * (times[1:] + times[:-1])
    increments = np.diff(values)
    if abs(hurst.h - 0.5) <= GRADING_ACTIVATION or times.size < 2:
        return mids, increments
    lo, hi = float(times[-2]), float(times[-1])
    length = hi - lo
    cuts = np.empty(n_graded + 1)
    cuts[0] = lo
    cuts[1:-1] = hi - length * 0.5 ** np.arange(1, n_graded)
    cuts[-1] = hi
    sub_mids = 0.5 * (cuts[1:] + cuts[:-1])
    sub_incr = increments[-1] * np.diff(cuts) / length
    mids = np.concatenate([mids[:-1], sub_mids])
    increments = np.concatenate([increments[:-1], sub_incr])
    return mids, increments


def cond_mean(path: ObservedPath, t: float, H, *, n_graded: int = MIN_GRADED_CELLS) -> float:
    """Conditional mean at time t >= u given the observed path.

    Midpoint Riemann-Stieltjes discretization of the dB integral; exactly the
    final observed value for near-half H or t = u.
    """
    hurst = as_hurst(H)
    if not t >= path.u:
        raise DomainError("cond_mean requires t >= the observation horizon")
    if hurst.near_half or t == path.u:
        return path.final_value
    mids, increments = _integration_cells(path, hurst, n_graded)
    weights = _psi_matrix(np.array([t]), mids, path.u, hurst)[0]
    return path.final_value - float(np.dot(weights, increments))


def _weighted_kernel_product(t: float, s: float, u: float, hurst: Hurst, rel_tol: float) -> float:
    """integral_u^{min(t,s)} k(t,v) k(s,v) dv with the right-edge weight split off."""
    upper = min(t, s)
    if t == s:
        right = 2.0 * hurst.h - 1.0

        def f(v):
            return kernel_k(t, v, hurst) ** 2 * (upper - v) ** (-right)
    else:
        hi, lo_t = max(t, s), min(t, s)
        right = hurst.h - 0.5

        def f(v):
            return kernel_k(hi, v, hurst) * kernel_k(lo_t, v, hurst) * (upper - v) ** (-right)

    spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, alpha=0.0, beta=right, rel_tol=rel_tol)
    value, _ = integrate_weighted(f, u, upper, spec)
    return value


def _historical_kernel_product(t: float, s: float, u: float, hurst: Hurst, rel_tol: float) -> float:
    """integral_0^u k(t,v) k(s,v) dv; both kernels stay interior at v = u."""
    left = -abs(2.0 * hurst.h - 1.0)
    spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24, alpha=left, beta=0.0, rel_tol=rel_tol)
    value, _ = integrate_weighted(
        lambda v: kernel_k(t, v, hurst) * kernel_k(s, v, hurst) * v ** (-left), 0.0, u, spec
    )
    return value


def cond_cov(t: float, s: float, u: float, H, *, rel_tol: float = 1e-8, check: bool = True) -> float:
    """Conditional covariance rhat(t, s | u) for t, s >= u > 0.

    Evaluates the positive-integrand form over [u, min(t, s)].  With
    ``check=True`` the complementary form r(t,s) minus the historical kernel
    product is recomputed and a :class:`ConsistencyWarning` is emitted if the
    two disagree beyond 1e-4 relative to max(1, r).
    """
    hurst = as_hurst(H)
    if not u > 0.0:
        raise DomainError("cond_cov requires u > 0")
    if min(t, s) < u:
        raise DomainError("cond_cov requires t, s >= u")
    if hurst.near_half:
        return min(t, s) - u
    if min(t, s) == u:
        return 0.0
    value = _weighted_kernel_product(t, s, u, hurst, rel_tol)
    if check:
        alternative = fbm_cov(t, s, hurst) - _historical_kernel_product(t, s, u, hurst, rel_tol)
        scale = max(1.0, fbm_cov(t, s, hurst))
        if abs(value - alternative) > TWO_FORM_TOL * scale:
            warnings.warn(
                f"conditional covariance forms disagree at (t={t}, s={s}, u={u}): "
                f"{value!r} vs {alternative!r}",
                ConsistencyWarning,
                stacklevel=2,
            )
    return value


def build_conditional_law(
    path: ObservedPath,
    grid,
    H,
    *,
    rel_tol: float = 1e-8,
    n_graded: int = MIN_GRADED_CELLS,
) -> ConditionalLaw:
    """Assemble the full Gaussian prediction law on a future grid.

    Grid points equal to u get exact zeros (mean pinned to the observed
    endpoint), never quadrature.  The covariance is symmetrized by averaging
    and validated positive semidefinite up to jitter tolerance.
    """
    hurst = as_hurst(H)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    u = path.u
    if np.any(grid < u):
        raise DomainError("future grid points must be >= the observation horizon")
    n = grid.size
    mean = np.full(n, path.final_value)
    if not hurst.near_half:
        mids, increments = _integration_cells(path, hurst, n_graded)
        mean = mean - _psi_matrix(grid, mids, u, hurst) @ increments
    cov = np.zeros((n, n))
    if hurst.near_half:
        cov = np.minimum.outer(grid, grid) - u
        cov[np.minimum.outer(grid, grid) == u] = 0.0
    else:
        for i in range(n):
            for j in range(i, n):
                if min(grid[i], grid[j]) == u:
                    continue
                cov[i, j] = cov[j, i] = cond_cov(
                    float(grid[i]), float(grid[j]), u, hurst, rel_tol=rel_tol, check=False
                )
    cov = 0.5 * (cov + cov.T)
    return ConditionalLaw(u=u, grid=grid, mean=mean, cov=cov)


def sample_conditional_paths(law: ConditionalLaw, n_paths: int, seed: int) -> np.ndarray:
    """Exact samples from the law: rows are mean + L z with seeded normals.

    Each path draws from its own generator stream derived from
    (seed, path index), so parallel and serial execution agree and identical
    (seed, law) inputs reproduce identical output bit for bit.  Zero-variance
    grid points (e.g. the horizon itself) stay exactly at the mean.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be positive")
    active = np.diag(law.cov) > 0.0
    lower, _ = cholesky_with_jitter(law.cov[np.ix_(active, active)])
    out = np.tile(law.mean, (n_paths, 1))
    k = int(active.sum())
    if k == 0:
        return out
    for i in range(n_paths):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        out[i, active] += lower @ rng.standard_normal(k)
    return out


def bracket_density(t: float, u: float, H) -> float:
    """Quadratic-variation density k(t, u)^2 of the prediction martingale.

    For fixed t the conditional mean, viewed as a process in the horizon u,
    is a Gaussian martingale whose bracket grows at this rate.
    """
    if not 0.0 < u < t:
        raise DomainError("bracket_density requires 0 < u < t")
    return float(kernel_k(t, u, H)) ** 2
