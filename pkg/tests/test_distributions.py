import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadichist import (
    BetaSym,
    Product,
    Split,
    Uniform,
    discretize_ground_truth,
    parse_ground_truth,
    split_density,
)
from dyadichist.distributions import beta_quantile, betainc, cdf, quantile, sample

FIGURE_PAIRS = [(a, e) for a in (0.5, 2.0, 13.0) for e in (0.1, 0.27)]


class TestBetainc:
    def test_uniform_case_is_identity(self):
        x = np.linspace(0, 1, 21)
        assert np.allclose(betainc(1, 1, x), x, atol=1e-14)

    def test_beta22_closed_form(self):
        # I_x(2,2) = 3x^2 - 2x^3
        x = np.linspace(0, 1, 41)
        assert np.allclose(betainc(2, 2, x), 3 * x**2 - 2 * x**3, atol=1e-13)

    def test_arcsine_closed_form(self):
        # I_x(1/2,1/2) = (2/pi) arcsin(sqrt(x))
        x = np.linspace(0.001, 0.999, 37)
        assert np.allclose(betainc(0.5, 0.5, x), 2 / np.pi * np.arcsin(np.sqrt(x)), atol=1e-12)

    def test_symmetry(self):
        x = np.linspace(0, 1, 25)
        assert np.allclose(betainc(0.9, 0.9, x) + betainc(0.9, 0.9, 1 - x), 1.0, atol=1e-12)

    def test_quantile_roundtrip(self):
        z = np.linspace(0.0005, 0.9995, 101)
        for a in (0.3, 0.9, 1.1, 4.0):
            x = beta_quantile(a, a, z)
            # near the endpoints a shape below 1 has an unbounded density, so
            # x-tolerance 1e-12 amplifies; 1e-9 holds across the whole range
            assert np.abs(betainc(a, a, x) - z).max() < 1e-9


class TestSplit:
    def test_b_value(self):
        s = Split(2.0, 0.27)
        assert s.b == pytest.approx((1 - 2 * 0.0729) / 0.54, abs=1e-12)
        assert s.b == pytest.approx(1.58185, abs=1e-5)

    def test_gap_density_zero(self):
        for a, e in FIGURE_PAIRS:
            assert split_density(a, e, 0.5) == 0.0

    @pytest.mark.parametrize("a,e", FIGURE_PAIRS)
    def test_density_integrates_to_one(self, a, e):
        # integrate each support piece separately (the density jumps at the
        # piece boundaries, so pieces are where smooth quadrature is valid)
        nodes, weights = np.polynomial.legendre.leggauss(40)
        total = 0.0
        for lo, hi in ((0.0, e), (1 - e, 1.0)):
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            total += half * np.dot(weights, split_density(a, e, mid + half * nodes))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_cdf_at_e_is_half(self):
        for a, e in FIGURE_PAIRS:
            s = Split(a, e)
            assert cdf(s, e) == pytest.approx(0.5, abs=1e-12)

    def test_quantile_cdf_roundtrip_on_support(self):
        s = Split(2.0, 0.27)
        xs = np.concatenate([np.linspace(0, 0.269, 40), np.linspace(0.731, 0.999, 40)])
        assert np.abs(quantile(s, cdf(s, xs)) - xs).max() < 1e-9

    def test_parameter_constraints(self):
        with pytest.raises(ValueError):
            Split(2.0, 0.6)
        with pytest.raises(ValueError):
            Split(200.0, 0.27)  # a >= 1/e^2
        with pytest.raises(ValueError):
            split_density(-1.0, 0.1, 0.05)

    def test_support_of_samples(self):
        s = Split(13.0, 0.1)
        pts = sample(s, np.random.default_rng(0), 100_000)[:, 0]
        assert not np.any((pts >= 0.1) & (pts < 0.9))


class TestCdfQuantile:
    def test_uniform_quantile(self):
        assert quantile(Uniform(1), 0.3) == pytest.approx(0.3)

    def test_beta11_is_uniform(self):
        z = np.linspace(0, 1, 9)
        assert np.allclose(quantile(BetaSym(1.0), z), z, atol=1e-10)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            cdf(Uniform(1), 1.5)
        with pytest.raises(ValueError):
            quantile(BetaSym(2.0), -0.1)

    def test_generalized_inverse_relations(self):
        grid = np.linspace(1e-4, 1 - 1e-4, 2000)
        for gt in (BetaSym(0.9), BetaSym(1.1), Split(2.0, 0.27)):
            assert np.all(cdf(gt, quantile(gt, grid)) >= grid - 1e-9)
            assert np.all(quantile(gt, cdf(gt, grid)) <= grid + 1e-9)

    def test_multidim_rejected(self):
        with pytest.raises(ValueError):
            cdf(Uniform(2), 0.5)


class TestSample:
    def test_uniform_2d_lln(self):
        pts = sample(Uniform(2), np.random.default_rng(1), 100_000)
        assert np.abs(pts.mean(axis=0) - 0.5).max() < 0.005

    def test_beta_symmetric_mean(self):
        pts = sample(BetaSym(0.7), np.random.default_rng(2), 100_000)
        assert abs(pts.mean() - 0.5) < 0.01

    def test_zero_draws(self):
        assert sample(Uniform(3), np.random.default_rng(0), 0).shape == (0, 3)

    def test_product_shape_and_independence(self):
        gt = Product((Split(2.0, 0.27), BetaSym(2.0)))
        pts = sample(gt, np.random.default_rng(3), 50_000)
        assert pts.shape == (50_000, 2)
        corr = np.corrcoef(pts[:, 0], pts[:, 1])[0, 1]
        assert abs(corr) < 0.02

    @pytest.mark.parametrize("gt", [BetaSym(0.9), BetaSym(1.1), Split(2.0, 0.27), Uniform(1)])
    def test_ks_statistic(self, gt):
        n = 10_000
        passes = 0
        # critical value at level 0.001 for the one-sample KS statistic
        crit = 1.949 / math.sqrt(n)
        for seed in range(20):
            pts = np.sort(sample(gt, np.random.default_rng(seed), n)[:, 0])
            F = cdf(gt, pts)
            ks = max(
                np.abs(F - np.arange(1, n + 1) / n).max(),
                np.abs(F - np.arange(0, n) / n).max(),
            )
            passes += ks < crit
        assert passes >= 19


class TestDiscretizeGroundTruth:
    def test_single_atom(self):
        m = discretize_ground_truth(Uniform(1), 1, np.random.default_rng(0))
        assert m.atoms.shape == (1, 1)
        assert m.weights[0] == 1.0

    def test_thousand_atoms_2d(self):
        m = discretize_ground_truth(Uniform(2), 1000, np.random.default_rng(1))
        assert m.atoms.shape == (1000, 2)
        assert np.all(m.weights == 0.001)

    def test_weights_sum_exactly(self):
        m = discretize_ground_truth(BetaSym(2.0), 777, np.random.default_rng(2))
        assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)


class TestParseGroundTruth:
    def test_uniform(self):
        gt = parse_ground_truth("uniform:2")
        assert isinstance(gt, Uniform) and gt.d == 2

    def test_beta(self):
        gt = parse_ground_truth("beta:0.9")
        assert isinstance(gt, BetaSym) and gt.x == 0.9

    def test_split(self):
        gt = parse_ground_truth("split:2,0.27")
        assert isinstance(gt, Split) and (gt.a, gt.e) == (2.0, 0.27)

    def test_product(self):
        gt = parse_ground_truth("product:split:2,0.27|beta:1.1")
        assert isinstance(gt, Product) and gt.dim == 2

    def test_bad_specs(self):
        for text in ("gaussian:1", "beta:", "split:2", "uniform:0"):
            with pytest.raises(ValueError):
                parse_ground_truth(text)


@given(st.floats(0.3, 5.0), st.floats(0, 1))
@settings(max_examples=60, deadline=None)
def test_betainc_monotone_and_bounded(a, x):
    val = betainc(a, a, x)
    assert 0.0 <= val <= 1.0
    assert betainc(a, a, min(1.0, x + 0.01)) >= val - 1e-12
