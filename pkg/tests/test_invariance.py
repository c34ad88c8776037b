"""Smooth thresholds, exact CDFs, Berry-Esseen and invariance gaps."""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr

from bfa.gaussian import MultilinearPoly
from bfa.invariance import (
    B4,
    HybridGapReport,
    WeightedSum,
    berry_esseen_gap,
    carbery_wright_mc,
    equal_weights,
    hybrid_smooth_gap,
    invariance_gap,
    rademacher_cdf_exact,
    rademacher_sums,
    reasonable_constant,
    smooth_threshold,
    sup_cdf_distance,
)
from bfa.rng import substream


def quadratic_family(n):
    """Var-normalized sum of all pair products; every influence is 2/n."""
    c = math.sqrt(2.0 / (n * (n - 1)))
    coeffs = {}
    for i in range(n):
        for j in range(i + 1, n):
            coeffs[(1 << i) | (1 << j)] = c
    return MultilinearPoly(n, coeffs)


class TestReasonable:
    def test_rademacher(self):
        assert reasonable_constant(1.0, 1.0) == 1.0

    def test_gaussian(self):
        assert reasonable_constant(1.0, 3.0) == 3.0

    def test_scale_invariance(self):
        sigma2 = 0.37
        assert abs(reasonable_constant(sigma2, sigma2**2) - 1.0) <= 1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            reasonable_constant(0.0, 1.0)


class TestSmoothThreshold:
    def test_plateau_values(self):
        psi = smooth_threshold(0.0, 0.5)
        assert psi.value(-1.5) == 1.0  # t - 3 lambda
        assert psi.value(1.5) == 0.0  # t + 3 lambda

    def test_range_properties_dense_grid(self):
        psi = smooth_threshold(0.4, 0.3)
        xs = np.linspace(0.4 - 2.0, 0.4 + 2.0, 100000)
        vals = psi.value(xs)
        assert np.all(vals[xs <= 0.4 - 0.6] == 1.0)
        assert np.all(vals[xs >= 0.4 + 0.6] == 0.0)
        window = (xs > 0.4 - 0.6) & (xs < 0.4 + 0.6)
        assert np.all((vals[window] >= 0.0) & (vals[window] <= 1.0))

    def test_fourth_derivative_certified(self):
        psi = smooth_threshold(0.0, 0.5)
        xs = np.linspace(-1.2, 1.2, 40001)
        analytic = np.abs(psi.derivative(xs, 4))
        assert analytic.max() <= psi.m4 * (1 + 1e-9)
        # numerical-derivative oracle: central 5-point stencil, h wide
        # enough that float64 cancellation stays below one percent
        h = psi.lam / 50
        fd = (
            psi.value(xs + 2 * h)
            - 4 * psi.value(xs + h)
            + 6 * psi.value(xs)
            - 4 * psi.value(xs - h)
            + psi.value(xs - 2 * h)
        ) / h**4
        assert np.abs(fd).max() <= 1.01 * B4 / psi.lam**4
        assert np.abs(fd).max() >= 0.95 * B4 / psi.lam**4  # the bound is tight

    def test_scale_covariance(self):
        t = 0.7
        wide, narrow = smooth_threshold(t, 0.4), smooth_threshold(t, 0.2)
        xs = np.linspace(-2.0, 2.0, 1001)
        np.testing.assert_allclose(
            wide.value(t + xs), narrow.value(t + xs / 2), atol=1e-12
        )

    def test_lower_orders_continuous_at_knots(self):
        psi = smooth_threshold(0.0, 0.5)
        for order in range(5):
            for knot in (-1.0, 1.0):
                inner = psi.derivative(np.array([knot - 1e-9, knot + 1e-9]), order)
                assert abs(inner[0] - inner[1]) <= 1e-4

    def test_gaussian_mean_quadrature(self):
        psi = smooth_threshold(0.0, 0.5)
        assert abs(psi.gaussian_mean() - 0.5) <= 1e-10  # symmetry
        shifted = smooth_threshold(1.3, 0.2)
        brute, _ = integrate.quad(
            lambda x: shifted.value(x) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
            -10,
            10,
            limit=400,
        )
        assert abs(shifted.gaussian_mean() - brute) <= 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            smooth_threshold(0.0, 0.0)
        with pytest.raises(ValueError):
            smooth_threshold(0.0, 0.5).derivative(0.0, 5)


class TestRademacherCdf:
    def test_single_fair_bit(self):
        assert rademacher_cdf_exact(equal_weights(1), 0.0) == 0.5

    def test_equal_four_at_zero(self):
        assert rademacher_cdf_exact(equal_weights(4), 0.0) == 11 / 16

    def test_single_weight_step(self):
        w = WeightedSum(np.array([1.0, 0.0, 0.0]))
        assert rademacher_cdf_exact(w, -1.001) == 0.0
        assert rademacher_cdf_exact(w, -1.0) == 0.5
        assert rademacher_cdf_exact(w, 0.999) == 0.5
        assert rademacher_cdf_exact(w, 1.0) == 1.0

    def test_enumeration_matches_binomial(self):
        w = equal_weights(10)
        forced = WeightedSum(np.full(10, 1.0) + np.arange(10) * 1e-13)  # not detected equal
        for t in (-0.9, 0.0, 0.31, 2.0):
            assert abs(rademacher_cdf_exact(w, t) - rademacher_cdf_exact(forced, t)) <= 1e-9

    def test_mc_cdf_close_to_exact(self):
        rng = substream(19, 0)
        w = WeightedSum(rng.standard_normal(16))
        m = 100000
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(m, 16))
        samples = signs @ w.weights
        gap = sup_cdf_distance(rademacher_sums(w), samples)
        assert gap <= 4 * 0.5 / math.sqrt(m)

    def test_normalization_invariant(self):
        w = WeightedSum(np.array([3.0, 4.0]))
        assert abs(np.sum(w.weights**2) - 1.0) <= 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            WeightedSum(np.zeros(3))
        with pytest.raises(ValueError):
            rademacher_sums(WeightedSum(np.arange(1.0, 27.0)))


class TestBerryEsseen:
    def test_equal_weight_scaling(self):
        gap100, ratio100 = berry_esseen_gap(equal_weights(100))
        gap400, _ = berry_esseen_gap(equal_weights(400))
        assert 0.4 <= gap400 / gap100 <= 0.6
        assert ratio100 == pytest.approx(gap100 / math.sqrt(100 * (0.1) ** 4))

    def test_quarter_scaling_small(self):
        gap25, _ = berry_esseen_gap(equal_weights(25))
        gap100, _ = berry_esseen_gap(equal_weights(100))
        assert 0.4 <= gap100 / gap25 <= 0.6

    def test_dominant_weight_gap_is_large(self):
        gap, _ = berry_esseen_gap(WeightedSum(np.array([1.0, 0.0, 0.0, 0.0])))
        assert abs(gap - (0.5 - ndtr(-1.0))) <= 1e-12

    def test_large_binomial_gap_small(self):
        gap, _ = berry_esseen_gap(equal_weights(10000))
        assert gap <= 0.01

    def test_atom_sup_beats_grid(self):
        # the two-sided atom sweep finds the true sup even off-grid
        w = WeightedSum(np.array([0.9, 0.1, 0.05]))
        gap_fine, _ = berry_esseen_gap(w, grid_step=1e-3)
        gap_coarse, _ = berry_esseen_gap(w, grid_step=0.5)
        assert abs(gap_fine - gap_coarse) <= 1e-12


class TestHybridGap:
    def test_equal_sixteen_within_bound(self):
        psi = smooth_threshold(0.0, 0.5)
        rep = hybrid_smooth_gap(equal_weights(16), psi)
        assert isinstance(rep, HybridGapReport)
        assert rep.mode == "exact"
        assert abs(rep.bound - psi.m4 / 16) <= 1e-12
        assert rep.gap <= rep.bound

    def test_asymmetric_threshold_still_bounded(self):
        psi = smooth_threshold(0.3, 0.5)
        rep = hybrid_smooth_gap(equal_weights(16), psi)
        assert 0 < rep.gap <= rep.bound

    def test_faraway_threshold_gap_vanishes(self):
        psi = smooth_threshold(10.0, 0.5)
        rep = hybrid_smooth_gap(equal_weights(12), psi)
        assert rep.gap <= 1e-12

    def test_single_weight_gap_large(self):
        rep = hybrid_smooth_gap(WeightedSum(np.array([1.0])), smooth_threshold(0.7, 0.25))
        assert rep.gap > 0.05  # no averaging at n = 1

    def test_mc_requires_samples_for_large_n(self):
        w = WeightedSum(np.ones(25))
        with pytest.raises(ValueError):
            hybrid_smooth_gap(w, smooth_threshold(0.0, 0.5))
        rep = hybrid_smooth_gap(w, smooth_threshold(0.0, 0.5), samples=20000, seed=3)
        assert rep.mode == "mc"
        assert rep.gap <= max(rep.bound, 4 * 0.5 / math.sqrt(20000))


class TestInvarianceGap:
    def test_single_variable_matches_two_point_gap(self):
        rep = invariance_gap(MultilinearPoly(1, {0b1: 1.0}), samples=100000, seed=1)
        assert abs(rep.sup_cdf_gap - (ndtr(1.0) - 0.5)) <= 0.02
        assert rep.tau == 1.0 and rep.degree == 1

    def test_quadratic_family_gap_decreases(self):
        gaps = []
        for n in (8, 16, 32):
            rep = invariance_gap(quadratic_family(n), samples=200000, seed=42)
            assert abs(rep.tau - 2.0 / n) <= 1e-12
            gaps.append(rep.sup_cdf_gap)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_pair_parity_gap_large(self):
        rep = invariance_gap(MultilinearPoly(2, {0b11: 1.0}), samples=100000, seed=2)
        assert rep.sup_cdf_gap >= 0.3

    def test_guards(self):
        with pytest.raises(ValueError):
            invariance_gap(MultilinearPoly(2, {0b11: 2.0}), samples=100, seed=0)
        five = MultilinearPoly(5, {0b11111: 1.0})
        with pytest.raises(ValueError):
            invariance_gap(five, samples=100, seed=0)


class TestCarberyWright:
    def test_linear_against_gaussian_density_oracle(self):
        rep = carbery_wright_mc(MultilinearPoly(1, {0b1: 1.0}), [0.05, 0.2], 400000, 3)
        for row in rep.rows:
            oracle = 2 * ndtr(row.eps) - 1.0
            assert abs(row.estimate - oracle) <= 4 * row.stderr
            assert oracle / row.eps < 0.8  # the density bound itself

    def test_pair_product_against_quadrature_oracle(self):
        rep = carbery_wright_mc(MultilinearPoly(2, {0b11: 1.0}), [0.01, 0.1], 400000, 4)
        for row in rep.rows:
            oracle, _ = integrate.quad(
                lambda x: 2
                * math.exp(-x * x / 2)
                / math.sqrt(2 * math.pi)
                * (2 * ndtr(row.eps / x) - 1),
                0,
                np.inf,
                limit=300,
            )
            assert abs(row.estimate - oracle) <= 4 * row.stderr

    def test_monotone_in_eps(self):
        rep = carbery_wright_mc(quadratic_family(6), [0.3, 0.05, 0.9, 0.15], 50000, 5)
        estimates = [row.estimate for row in rep.rows]
        assert estimates == sorted(estimates)
        assert rep.fitted_c == max(row.ratio for row in rep.rows)

    def test_wide_ball_trivial(self):
        rep = carbery_wright_mc(MultilinearPoly(1, {0b1: 1.0}), [0.99], 20000, 6)
        assert rep.rows[0].estimate <= 1.0

    def test_guards(self):
        q = MultilinearPoly(1, {0b1: 1.0})
        with pytest.raises(ValueError):
            carbery_wright_mc(q, [1.5], 100, 0)
        with pytest.raises(ValueError):
            carbery_wright_mc(q, [], 100, 0)
