"""Brute-force ground truth: exact grid simulation and discrete conditioning.

Nothing here touches the prediction formulas.  Paths are drawn from the exact
finite-dimensional law via Cholesky, conditioning is plain Gaussian linear
algebra (Schur complement through triangular solves, never an explicit
inverse), and an alternative simulator drives Brownian increments through the
Volterra kernel.  The analytic route in :mod:`fbmpred.prediction` must agree
with this module in the appropriate refinement limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DomainError
from .fbm import as_hurst, fbm_cov, kernel_k
from .linalg import cholesky_with_jitter
from .prediction import ObservedPath, cond_cov, cond_mean


@dataclass
class GridGaussian:
    """Exact fBm law restricted to a positive time grid."""

    grid: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray | None = field(default=None, repr=False)

    @property
    def chol(self) -> np.ndarray:
        if self._chol is None:
            self._chol, _ = cholesky_with_jitter(self.cov)
        return self._chol


@dataclass(frozen=True)
class MCConfig:
    n_paths: int
    seed: int
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 2:
            raise DomainError("n_paths must be >= 2")


def build_grid_gaussian(grid, H) -> GridGaussian:
    """Covariance matrix of fBm on a strictly increasing positive grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a nonempty 1-d array")
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("grid must be strictly increasing and positive")
    cov = fbm_cov(grid[:, None], grid[None, :], H)
    return GridGaussian(grid=grid, cov=np.atleast_2d(cov))


def _path_rng(seed: int, index: int) -> np.random.Generator:
    # one deterministic stream per path so parallel and serial runs agree
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def sample_fbm(gg: GridGaussian, cfg: MCConfig) -> np.ndarray:
    """Exact fBm samples, one row per path."""
    n = gg.grid.size
    lower = gg.chol
    out = np.empty((cfg.n_paths, n))
    for i in range(cfg.n_paths):
        if cfg.antithetic and i % 2 == 1:
            out[i] = -out[i - 1]
            continue
        out[i] = lower @ _path_rng(cfg.seed, i).standard_normal(n)
    return out


def _refined_edges(grid: np.ndarray, n_internal: int) -> np.ndarray:
    """Subdivide [0, max(grid)] so every grid time is an edge, ~n_internal cells.

    The first segment [0, grid[0]] is graded quadratically toward 0: the
    kernel diverges like an inverse power there, and uniform cells would
    dominate the covariance error of the midpoint scheme.
    """
    total = grid[-1]
    first_cells = max(1, int(round(n_internal * grid[0] / total)))
    edges = [float(grid[0]) * (i / first_cells) ** 2 for i in range(first_cells + 1)]
    prev = float(grid[0])
    for t in grid[1:]:
        cells = max(1, int(round(n_internal * (t - prev) / total)))
        edges.extend(np.linspace(prev, t, cells + 1)[1:])
        prev = float(t)
    return np.asarray(edges)


def sample_fbm_volterra(grid, H, cfg: MCConfig, n_internal: int = 1024) -> np.ndarray:
    """Alternative generator: Brownian increments pushed through the kernel.

    B_t is approximated by the sum of k(t, mid_i) dW_i over internal cells
    left of t (midpoint kernel evaluation).  Its law converges to the exact
    one as the internal grid refines; at H = 1/2 it reduces to partial sums
    of the Brownian increments exactly.
    """
    hurst = as_hurst(H)
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("grid must be strictly increasing and positive")
    edges = _refined_edges(grid, n_internal)
    mids = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    kmat = np.zeros((grid.size, mids.size))
    for j, t in enumerate(grid):
        mask = mids < t
        kmat[j, mask] = kernel_k(float(t), mids[mask], hurst)
    out = np.empty((cfg.n_paths, grid.size))
    sqrt_w = np.sqrt(widths)
    for i in range(cfg.n_paths):
        if cfg.antithetic and i % 2 == 1:
            out[i] = -out[i - 1]
            continue
        dw = sqrt_w * _path_rng(cfg.seed, i).standard_normal(mids.size)
        out[i] = kmat @ dw
    return out


def volterra_implied_cov(grid, H, n_internal: int = 1024) -> np.ndarray:
    """Deterministic covariance implied by the Volterra midpoint scheme.

    Useful for refinement studies without Monte Carlo noise: the distance to
    the exact covariance must shrink as n_internal grows.
    """
    hurst = as_hurst(H)
    grid = np.asarray(grid, dtype=float)
    edges = _refined_edges(grid, n_internal)
    mids = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    kmat = np.zeros((grid.size, mids.size))
    for j, t in enumerate(grid):
        mask = mids < t
        kmat[j, mask] = kernel_k(float(t), mids[mask], hurst)
    return (kmat * widths) @ kmat.T


def schur_condition(gg: GridGaussian, past_indices, past_values) -> tuple[np.ndarray, np.ndarray]:
    """Finite-dimensional Gaussian conditioning of the grid law.

    Returns the conditional mean and covariance of the complementary (future)
    indices given observed values at ``past_indices``.  Solves through the
    Cholesky factor of the past block under the shared jitter policy.
    """
    past_indices = np.asarray(past_indices, dtype=int)
    past_values = np.asarray(past_values, dtype=float)
    if past_indices.size == 0:
        raise DomainError("past_indices must be nonempty")
    if past_indices.size != past_values.size:
        raise DomainError("past_indices and past_values must have equal length")
    n = gg.grid.size
    mask = np.zeros(n, dtype=bool)
    mask[past_indices] = True
    future = np.flatnonzero(~mask)
    spp = gg.cov[np.ix_(past_indices, past_indices)]
    spf = gg.cov[np.ix_(past_indices, future)]
    sff = gg.cov[np.ix_(future, future)]
    lower, _ = cholesky_with_jitter(spp)
    z = solve_triangular(lower, spf, lower=True)
    ly = solve_triangular(lower, past_values, lower=True)
    mean = z.T @ ly
    cov = sff - z.T @ z
    return mean, 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class RefinementStudy:
    """Sup-norm gaps between the analytic law and the kriging oracle per mesh."""

    meshes: np.ndarray
    mean_gap: np.ndarray
    cov_gap: np.ndarray


def refinement_study(
    H,
    u: float,
    future_grid,
    meshes,
    *,
    seed: int = 20240,
    rel_tol: float = 1e-8,
    path_values: np.ndarray | None = None,
) -> RefinementStudy:
    """Convergence of discrete conditioning toward the analytic formulas.

    A single reference path is drawn exactly on the finest mesh (or supplied);
    coarser meshes observe its restriction.  For each mesh the discrepancy
    columns are the sup over the future grid of |oracle mean - analytic mean|
    and of |oracle cov - analytic cov| entries.
    """
    hurst = as_hurst(H)
    future_grid = np.asarray(future_grid, dtype=float)
    meshes = np.asarray(sorted(int(m) for m in meshes), dtype=int)
    finest = int(meshes[-1])
    if any(finest % int(m) for m in meshes):
        raise DomainError("meshes must divide the finest mesh so paths restrict exactly")
    fine_times = np.linspace(0.0, u, finest + 1)
    if path_values is None:
        gg_fine = build_grid_gaussian(fine_times[1:], hurst)
        values = gg_fine.chol @ _path_rng(seed, 0).standard_normal(finest)
        sup = float(np.abs(values).max())
        if sup > 2.0:   # comparisons are quoted for paths of sup-norm <= 2
            values = values * (2.0 / sup)
    else:
        values = np.asarray(path_values, dtype=float)
        if values.shape != (finest,):
            raise DomainError("path_values must match the finest mesh (without time 0)")
    analytic_cov = np.zeros((future_grid.size, future_grid.size))
    for i in range(future_grid.size):
        for j in range(i, future_grid.size):
            if min(future_grid[i], future_grid[j]) > u:
                analytic_cov[i, j] = analytic_cov[j, i] = cond_cov(
                    float(future_grid[i]), float(future_grid[j]), u, hurst,
                    rel_tol=rel_tol, check=False,
                )
    # a future point at the horizon itself is pinned exactly on both sides,
    # so only strictly-future points enter the joint grid
    strictly_future = future_grid > u
    mean_gap = np.empty(meshes.size)
    cov_gap = np.empty(meshes.size)
    for k, mesh in enumerate(meshes):
        stride = finest // int(mesh)
        times = fine_times[::stride]
        vals = np.concatenate([[0.0], values[stride - 1 :: stride]])
        joint = np.concatenate([times[1:], future_grid[strictly_future]])
        gg = build_grid_gaussian(joint, hurst)
        s_mean_f, s_cov_f = schur_condition(gg, np.arange(int(mesh)), vals[1:])
        s_mean = np.full(future_grid.size, vals[-1])
        s_mean[strictly_future] = s_mean_f
        s_cov = np.zeros_like(analytic_cov)
        s_cov[np.ix_(strictly_future, strictly_future)] = s_cov_f
        path = ObservedPath(times=times, values=vals)
        a_mean = np.array([cond_mean(path, float(t), hurst) for t in future_grid])
        mean_gap[k] = float(np.abs(s_mean - a_mean).max())
        cov_gap[k] = float(np.abs(s_cov - analytic_cov).max())
    return RefinementStudy(meshes=meshes, mean_gap=mean_gap, cov_gap=cov_gap)
