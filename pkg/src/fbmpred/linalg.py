"""Shared dense-covariance helpers.

The same escalating-jitter policy is used for every Cholesky factorization in
the package (conditional-law sampling, exact path simulation, kriging solves)
so that both sides of every analytic-vs-oracle comparison are conditioned
identically.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DegeneracyError

# jitter escalates in decades relative to the mean diagonal magnitude
JITTER_START = 1e-14
JITTER_STOP = 1e-8


def cholesky_with_jitter(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of a symmetric PSD matrix, with jitter escalation.

    Tries the bare matrix first, then adds diagonal jitter growing in decades
    from ``1e-14`` to ``1e-8`` times ``trace/n``.  Returns ``(L, jitter)``;
    raises :class:`DegeneracyError` if even the largest jitter fails.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    scale = float(np.trace(matrix)) / n
    if scale == 0.0 and not matrix.any():
        # identically-zero covariance: the factor is the zero matrix
        return np.zeros_like(matrix), 0.0
    jitters = [0.0] + [scale * 10.0 ** e for e in range(-14, -7)]
    for jitter in jitters:
        try:
            lower = np.linalg.cholesky(matrix + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            continue
        return lower, jitter
    raise DegeneracyError(
        f"covariance stayed indefinite after jitter escalation up to {jitters[-1]:.3e}"
    )
