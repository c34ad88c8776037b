"""Correlated Gaussians, Sheppard, stability limits, rotation sensitivity."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from bfa.core import make_family, maj_stability, wht
from bfa.gaussian import (
    GaussianSampler,
    MultilinearPoly,
    gstab,
    gstab_mc,
    rotation_bound_check,
    maj_stab_limit,
    ornstein_uhlenbeck_exact,
    ornstein_uhlenbeck_mc,
    rotation_sensitivity_mc,
    sheppard,
    sheppard_mc,
    sign_predicate,
    wk_maj_limit,
)
from bfa.operators import stability


def maj3_poly():
    return MultilinearPoly.from_spectrum(wht(make_family("maj:3")))


class TestSheppard:
    def test_independent(self):
        assert sheppard(0.0) == 0.5

    def test_identical(self):
        assert sheppard(1.0) == 0.0

    def test_half(self):
        assert abs(sheppard(0.5) - 1 / 3) <= 1e-15

    @pytest.mark.parametrize("rho", [-0.9, -0.5, 0.0, 0.5, 0.9])
    def test_mc_agrees(self, rho):
        rep = sheppard_mc(rho, samples=200000, seed=11)
        assert abs(rep.estimate - sheppard(rho)) <= 4 * max(rep.stderr, 1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            sheppard(1.5)


class TestMajLimits:
    def test_level_one(self):
        assert abs(wk_maj_limit(1) - 2 / math.pi) <= 1e-15

    def test_stab_at_one(self):
        assert maj_stab_limit(1.0) == 1.0

    def test_finite_majority_near_limit(self):
        assert abs(maj_stability(101, 1 / 3) - maj_stab_limit(1 / 3)) <= 0.02

    def test_level_weights_converge(self):
        # exact W^k(MAJ_n) approaches the limit as n grows
        from bfa.core import maj_level_weights

        for k in (1, 3, 5):
            w_small = maj_level_weights(11)[k]
            w_big = maj_level_weights(101)[k]
            limit = wk_maj_limit(k)
            assert abs(w_big - limit) < abs(w_small - limit)
            assert abs(w_big - limit) <= 0.01

    def test_even_level_rejected(self):
        with pytest.raises(ValueError):
            wk_maj_limit(2)


class TestMultilinearPoly:
    def test_cube_values_match_pointwise(self):
        q = maj3_poly()
        pts = 1.0 - 2.0 * ((np.arange(8)[:, None] >> np.arange(3)) & 1)
        np.testing.assert_allclose(q.cube_values(), q.evaluate(pts), atol=1e-12)

    def test_high_degree_eval(self):
        q = MultilinearPoly(4, {0b1111: 2.0, 0b0011: -1.0, 0: 0.5})
        pts = np.array([[1.0, 2.0, 3.0, 4.0], [0.5, -1.0, 2.0, 1.0]])
        expected = 2.0 * pts.prod(axis=1) - pts[:, 0] * pts[:, 1] + 0.5
        np.testing.assert_allclose(q.evaluate(pts), expected, atol=1e-12)

    def test_influences(self):
        q = MultilinearPoly(3, {0b001: 0.6, 0b110: 0.8})
        np.testing.assert_allclose(q.influences(), [0.36, 0.64, 0.64], atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            MultilinearPoly(2, {0b100: 1.0})
        with pytest.raises(ValueError):
            MultilinearPoly(2, {0b01: math.inf})


class TestGStab:
    def test_single_variable(self):
        q = MultilinearPoly(2, {0b01: 1.0})
        for rho in (-0.3, 0.0, 0.8):
            assert abs(gstab(q, rho) - rho) <= 1e-15

    def test_pair_product(self):
        q = MultilinearPoly(2, {0b11: 1.0})
        assert abs(gstab(q, 0.6) - 0.36) <= 1e-15

    def test_maj3_form(self):
        q = maj3_poly()
        rho = 0.4
        assert abs(gstab(q, rho) - (3 * rho / 4 + rho**3 / 4)) <= 1e-12

    def test_matches_cube_stability(self):
        # same spectral formula on and off the cube
        q = maj3_poly()
        for rho in (-0.5, 0.2, 0.9):
            assert abs(gstab(q, rho) - stability(wht(make_family("maj:3")), rho)) <= 1e-12

    def test_mc_agrees(self):
        q = maj3_poly()
        rho = 0.5
        rep = gstab_mc(q, rho, samples=200000, seed=3)
        assert abs(rep.estimate - gstab(q, rho)) <= 4 * rep.stderr


class TestSampler:
    def test_normality_ks(self):
        g = GaussianSampler(13, 1).standard(100000)[:, 0]
        g = np.sort(g)
        grid = norm.cdf(g)
        m = len(g)
        ks = max(
            np.max(np.arange(1, m + 1) / m - grid),
            np.max(grid - np.arange(0, m) / m),
        )
        assert ks < 0.01

    def test_correlation(self):
        g, h = GaussianSampler(4, 3).correlated(0.7, 100000)
        for i in range(3):
            prods = g[:, i] * h[:, i]
            assert abs(prods.mean() - 0.7) <= 4 * prods.std(ddof=1) / np.sqrt(len(prods))

    def test_deterministic(self):
        a = GaussianSampler(9, 2).standard(10)
        b = GaussianSampler(9, 2).standard(10)
        np.testing.assert_array_equal(a, b)


class TestRotationSensitivity:
    def test_halfspace_linear_in_angle(self):
        q = MultilinearPoly(3, {0b001: 0.5, 0b010: 1.0, 0b100: -0.25})
        for delta in (0.3, 1.0, 2.0):
            rep = rotation_sensitivity_mc(q, delta, samples=200000, seed=5)
            assert abs(rep.estimate - delta / math.pi) <= 4 * rep.stderr

    def test_orthogonal_inputs(self):
        q = MultilinearPoly(2, {0b01: 1.0})
        rep = rotation_sensitivity_mc(q, math.pi / 2, samples=100000, seed=6)
        assert abs(rep.estimate - 0.5) <= 4 * rep.stderr

    def test_quarter_turn_bound(self):
        # balanced sign predicates have RS(pi/4) >= 1/4
        preds = [
            MultilinearPoly(2, {0b01: 1.0, 0b10: 2.0}),
            MultilinearPoly(2, {0b11: 1.0}),
            MultilinearPoly(3, {0b111: 1.0}),
        ]
        for q in preds:
            rep = rotation_sensitivity_mc(q, math.pi / 4, samples=100000, seed=8)
            assert rep.estimate >= 0.25 - 4 * rep.stderr

    def test_callable_needs_dimension(self):
        with pytest.raises(ValueError):
            rotation_sensitivity_mc(lambda p: np.sign(p[:, 0]), 0.5, 100, 0)


class TestRotationBound:
    def test_halfspace_tightness(self):
        q = MultilinearPoly(2, {0b01: 0.8, 0b10: 0.6})
        rep = rotation_bound_check(q, ell=4, samples=400000, seed=2)
        assert rep.balanced
        assert abs(rep.rs.estimate - 1 / 8) <= 4 * rep.rs.stderr
        assert rep.rs.estimate >= rep.bound - 4 * rep.rs.stderr

    def test_ell_two_balanced_predicates(self):
        for q in (
            MultilinearPoly(2, {0b11: 1.0}),
            MultilinearPoly(3, {0b001: 1.0, 0b110: 0.5}),
        ):
            rep = rotation_bound_check(q, ell=2, samples=200000, seed=4)
            assert rep.balanced
            assert rep.rs.estimate >= 0.25 - 4 * rep.rs.stderr

    def test_product_sign_ell_three(self):
        q = MultilinearPoly(3, {0b111: 1.0})
        rep = rotation_bound_check(q, ell=3, samples=200000, seed=9)
        assert rep.rs.estimate >= 1 / 6 - 4 * rep.rs.stderr

    def test_unbalanced_flagged(self):
        q = MultilinearPoly(2, {0: 5.0, 0b01: 1.0})
        rep = rotation_bound_check(q, ell=2, samples=50000, seed=1)
        assert not rep.balanced

    def test_borell_upper_bound(self):
        # MC sanity for the stability side: GStab of balanced signs stays
        # below the majority limit
        rho = 0.5
        for q in (
            MultilinearPoly(2, {0b01: 1.0, 0b10: 1.0}),
            MultilinearPoly(2, {0b11: 1.0}),
        ):
            g, h = GaussianSampler(12, q.n).correlated(rho, 200000)
            pred = sign_predicate(q)
            prods = pred(g) * pred(h)
            stderr = prods.std(ddof=1) / np.sqrt(len(prods))
            assert prods.mean() <= maj_stab_limit(rho) + 4 * stderr


class TestOrnsteinUhlenbeck:
    def test_identity(self):
        q = maj3_poly()
        x = np.array([0.3, -0.8, 0.5])
        assert abs(ornstein_uhlenbeck_exact(q, 1.0, x) - q.evaluate(x.reshape(1, -1))[0]) <= 1e-12

    def test_total_smoothing(self):
        q = MultilinearPoly(2, {0: 0.7, 0b01: 1.0, 0b11: -2.0})
        assert abs(ornstein_uhlenbeck_exact(q, 0.0, np.array([3.0, -1.0])) - 0.7) <= 1e-12

    def test_pair_product_value(self):
        q = MultilinearPoly(2, {0b11: 1.0})
        rep = ornstein_uhlenbeck_mc(q, 0.5, np.array([1.0, 1.0]), samples=200000, seed=5)
        assert abs(rep.estimate - 0.25) <= 4 * rep.stderr

    def test_mc_matches_exact(self):
        q = maj3_poly()
        x = np.array([0.2, 0.9, -0.4])
        rep = ornstein_uhlenbeck_mc(q, 0.6, x, samples=200000, seed=7)
        assert abs(rep.estimate - ornstein_uhlenbeck_exact(q, 0.6, x)) <= 4 * rep.stderr

    def test_gstab_identity(self):
        # GStab_rho(Q) = E[Q(G) (U_rho Q)(G)]
        q = maj3_poly()
        rho = 0.4
        g = GaussianSampler(21, 3).standard(200000)
        damped = MultilinearPoly(
            3, {m: c * rho ** bin(m).count("1") for m, c in q.coeffs.items()}
        )
        prods = q.evaluate(g) * damped.evaluate(g)
        stderr = prods.std(ddof=1) / np.sqrt(len(prods))
        assert abs(prods.mean() - gstab(q, rho)) <= 4 * stderr
