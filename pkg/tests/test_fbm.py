import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbmpred.exceptions import DomainError
from fbmpred.fbm import (
    NEAR_HALF_WINDOW,
    Hurst,
    as_hurst,
    beta_h,
    beta_h_many,
    fbm_cov,
    isometry_gap,
    kernel_constants,
    kernel_k,
    kernel_k_hypergeom,
)
from fbmpred.numerics import QuadratureSpec, integrate_weighted

H_GRID = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9]


class TestHurst:
    def test_validation(self):
        with pytest.raises(DomainError):
            Hurst(0.0)
        with pytest.raises(DomainError):
            Hurst(1.0)
        with pytest.raises(DomainError):
            Hurst(-0.3)

    def test_near_half_window(self):
        assert Hurst(0.5).near_half
        assert Hurst(0.5 + 0.5 * NEAR_HALF_WINDOW).near_half
        assert not Hurst(0.5 + 2.0 * NEAR_HALF_WINDOW).near_half

    def test_coercion(self):
        h = as_hurst(0.3)
        assert isinstance(h, Hurst)
        assert as_hurst(h) is h


class TestFbmCov:
    @pytest.mark.parametrize("h", H_GRID)
    def test_variance(self, h):
        t = 1.7
        assert fbm_cov(t, t, h) == pytest.approx(t ** (2 * h), rel=1e-14)

    def test_brownian_is_min(self):
        assert fbm_cov(0.3, 0.8, 0.5) == pytest.approx(0.3, rel=1e-14)
        assert fbm_cov(2.0, 1.1, 0.5) == pytest.approx(1.1, rel=1e-14)

    def test_zero_time(self):
        assert fbm_cov(0.0, 0.9, 0.33) == 0.0

    def test_symmetry(self):
        assert fbm_cov(1.2, 0.4, 0.7) == fbm_cov(0.4, 1.2, 0.7)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            fbm_cov(-0.1, 1.0, 0.5)


class TestKernelConstants:
    def test_half_is_unit(self):
        c = kernel_constants(0.5)
        assert c.d == 1.0 and c.sigma == 1.0

    def test_d_against_high_precision_gamma(self):
        # independent high-precision evaluation of the same Gamma expression
        mp.mp.dps = 50
        for h in (0.25, 0.75):
            ref = mp.sqrt(2 * mp.mpf(h) * mp.gamma(mp.mpf(3) / 2 - h)
                          / (mp.gamma(h + mp.mpf(1) / 2) * mp.gamma(2 - 2 * mp.mpf(h))))
            assert kernel_constants(h).d == pytest.approx(float(ref), rel=1e-13)

    def test_sigma_against_high_precision(self):
        mp.mp.dps = 50
        for h in (0.1, 0.75):
            hh = mp.mpf(h)
            ref = mp.sqrt(mp.pi * (hh - 0.5) * 2 * hh
                          / (mp.gamma(2 - 2 * hh) * mp.sin(mp.pi * (hh - 0.5))))
            assert kernel_constants(h).sigma == pytest.approx(float(ref), rel=1e-12)

    def test_normalized_square_below_one(self):
        # d^2/(2H) < 1 for every H != 1/2
        for h in np.linspace(0.05, 0.95, 17):
            if abs(h - 0.5) < 1e-9:
                continue
            c = kernel_constants(float(h))
            assert c.d ** 2 / (2 * h) < 1.0

    def test_continuity_across_the_switch(self):
        # the near-half branch creates no jump beyond ~the window size
        # (|d-1| ~ |H-1/2| analytically), and the exact formulas stay within
        # 5e-4 of 1 throughout |H - 1/2| <= 1e-4
        for side in (+1.0, -1.0):
            at_switch = kernel_constants(0.5 + side * NEAR_HALF_WINDOW * 1.0000001)
            assert abs(at_switch.d - 1.0) < 2.0 * NEAR_HALF_WINDOW
            assert abs(at_switch.sigma - 1.0) < 2.0 * NEAR_HALF_WINDOW
            near = kernel_constants(0.5 + side * 1e-4)
            assert abs(near.d - 1.0) < 5e-4
            assert abs(near.sigma - 1.0) < 5e-4


def _beta_h_brute(w_max, h, cells=10**6):
    """Composite midpoint over [1, w_max], singularity removed by substitution.

    On [1, 2] the change of variable z = (w-1)^{H+1/2} regularizes the
    (w-1)^{H-1/2} factor exactly; on [2, w_max] the integrand is smooth and a
    log-graded midpoint rule suffices.
    """
    z = (np.arange(cells) + 0.5) / cells
    w_head = 1.0 + z ** (1.0 / (h + 0.5))
    head = float(np.mean(w_head ** (h - 1.5))) / (h + 0.5)
    edges = np.geomspace(2.0, w_max, cells + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    tail = float(np.sum(mids ** (h - 1.5) * (mids - 1.0) ** (h - 0.5) * np.diff(edges)))
    return head + tail


class TestBetaH:
    def test_empty_integral(self):
        assert beta_h(1.0, 0.3) == 0.0

    def test_near_half_is_log(self):
        assert beta_h(5.0, 0.5) == pytest.approx(math.log(5.0), rel=1e-14)

    def test_infinite_endpoint_against_tail_bounded_oracle(self):
        h = 0.25
        w_max = 1e6
        partial = _beta_h_brute(w_max, h)
        # positive integrand: partial <= beta_h(inf) <= partial + tail bound
        tail_bound = (w_max - 1.0) ** (2 * h - 1.0) / (1.0 - 2 * h)
        value = beta_h(math.inf, h)
        assert partial - 1e-6 <= value <= partial + tail_bound + 1e-6

    def test_infinite_endpoint_rejects_large_h(self):
        with pytest.raises(DomainError):
            beta_h(math.inf, 0.75)

    def test_domain(self):
        with pytest.raises(DomainError):
            beta_h(0.99, 0.3)

    @pytest.mark.parametrize("h", H_GRID)
    @pytest.mark.parametrize("tau", [1.0001, 1.5, 2.0, 7.0, 1e3, 1e6])
    def test_vectorized_matches_quadrature_route(self, h, tau):
        assert beta_h_many(tau, h) == pytest.approx(beta_h(tau, h), rel=5e-11)

    def test_small_h_asymptotic_expansion(self):
        # beta(t/v) approaches its limit at rate v^{1-2H} for H < 1/2
        h, t = 0.25, 1.0
        limit = beta_h(math.inf, h)
        for v in (1e-2, 1e-3, 1e-4):
            remainder = limit - beta_h(t / v, h)
            assert remainder == pytest.approx(2.0 * v ** (1 - 2 * h), rel=0.1)

    def test_large_h_leading_term(self):
        # beta(t/v) = t^{2H-1}/(2H-1) v^{1-2H} + O(v^{1/2-H}); the remainder
        # over v^{1/2-H} must stay bounded as v -> 0
        h, t = 0.75, 2.0
        bounds = []
        for v in (1e-2, 1e-3, 1e-4, 1e-5):
            lead = t ** (2 * h - 1.0) / (2 * h - 1.0) * v ** (1.0 - 2 * h)
            bounds.append(abs(beta_h(t / v, h) - lead) / v ** (0.5 - h))
        assert max(bounds) < 10.0 * min(bounds)


class TestKernel:
    def test_brownian_kernel_is_one(self):
        assert kernel_k(1.0, 0.3, 0.5) == 1.0
        assert np.all(kernel_k(2.0, np.array([0.2, 1.0, 1.9]), 0.5) == 1.0)

    @settings(max_examples=40, deadline=None)
    @given(
        h=st.floats(0.05, 0.95),
        t=st.floats(0.1, 3.0),
        frac=st.floats(0.01, 0.99),
    )
    def test_positive(self, h, t, frac):
        assert kernel_k(t, frac * t, h) > 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            kernel_k(1.0, 0.0, 0.7)
        with pytest.raises(DomainError):
            kernel_k(1.0, 1.0, 0.7)

    @pytest.mark.parametrize("h", [0.25, 0.75])
    def test_matches_raw_integral_form(self, h):
        # same kernel from the raw z-integral, evaluated independently
        t = 1.3
        for s in (0.2, 0.65, 1.1):
            spec = QuadratureSpec(rule="adaptive-subdivision", alpha=h - 0.5, rel_tol=1e-11)
            z_int, _ = integrate_weighted(lambda z: z ** (h - 1.5), s, t, spec)
            d = kernel_constants(h).d
            raw = d * ((t / s) ** (h - 0.5) * (t - s) ** (h - 0.5)
                       - (h - 0.5) * s ** (0.5 - h) * z_int)
            assert kernel_k(t, s, h) == pytest.approx(raw, rel=1e-9)

    def test_hypergeometric_route_vanishes_at_t(self):
        # (t-s)^{H-1/2} -> 0 and F -> 1 as s -> t
        h, t = 0.75, 2.0
        values = [kernel_k_hypergeom(t, s, h) for s in (1.9, 1.99, 1.9999)]
        assert values[0] > values[1] > values[2] > 0.0
        assert values[2] == pytest.approx((t - 1.9999) ** (h - 0.5), rel=1e-2)

    def test_hypergeometric_ratio_constant_in_s(self):
        # the two routes agree up to one s-independent constant
        for h in (0.6, 0.75, 0.9):
            t = 2.0
            s_grid = np.linspace(0.05 * t, 0.95 * t, 19)
            ratios = np.array([
                kernel_k(t, float(s), h) / kernel_k_hypergeom(t, float(s), h) for s in s_grid
            ])
            anchor = kernel_k(t, t / 2, h) / kernel_k_hypergeom(t, t / 2, h)
            assert np.max(np.abs(ratios / anchor - 1.0)) < 1e-6

    def test_hypergeometric_decreasing_in_s(self):
        h, t = 0.75, 1.0
        s_grid = np.linspace(0.05, 0.95, 30)
        vals = np.array([kernel_k_hypergeom(t, float(s), h) for s in s_grid])
        assert np.all(np.diff(vals) < 0.0)

    def test_hypergeometric_requires_large_h(self):
        with pytest.raises(DomainError):
            kernel_k_hypergeom(1.0, 0.5, 0.25)

    @pytest.mark.parametrize("h", [0.6, 0.75, 0.9])
    def test_decreasing_in_s_for_large_h(self, h):
        # equivalently v -> k(t, t(1-v)) increasing on (0, 1)
        t = 1.4
        v = np.linspace(0.02, 0.98, 40)
        vals = kernel_k(t, t * (1.0 - v), h)
        assert np.all(np.diff(vals) > 0.0)


class TestIsometry:
    def test_equal_times(self):
        assert isometry_gap(1.0, 1.0, 0.7) == 0.0

    def test_brownian_exact(self):
        assert isometry_gap(1.0, 0.4, 0.5) == 0.0

    def test_small_gap_each_regime(self):
        assert abs(isometry_gap(1.0, 0.5, 0.7)) < 1e-4

    @pytest.mark.parametrize("h", H_GRID)
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_variance_isometry(self, h, t):
        # int_0^t k(t,v)^2 dv = t^{2H}
        left = -abs(2 * h - 1.0)
        spec = QuadratureSpec(rule="adaptive-subdivision", alpha=left, beta=2 * h - 1.0, rel_tol=1e-9)
        value, _ = integrate_weighted(
            lambda v: kernel_k(t, v, h) ** 2 * v ** (-left) * (t - v) ** (1.0 - 2 * h),
            0.0, t, spec,
        )
        assert abs(value - t ** (2 * h)) / t ** (2 * h) < 1e-4

    @pytest.mark.parametrize("h", [0.25, 0.75])
    @pytest.mark.parametrize("t,s", [(1.0, 0.5), (2.0, 0.4), (1.5, 1.4)])
    def test_covariance_reproduction(self, h, t, s):
        left = -abs(2 * h - 1.0)
        spec = QuadratureSpec(rule="adaptive-subdivision", alpha=left, beta=h - 0.5, rel_tol=1e-9)
        value, _ = integrate_weighted(
            lambda v: kernel_k(t, v, h) * kernel_k(s, v, h) * v ** (-left) * (s - v) ** (0.5 - h),
            0.0, s, spec,
        )
        target = fbm_cov(t, s, h)
        assert abs(value - target) / target < 1e-4
