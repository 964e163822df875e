import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadichist import (
    ConsistencyError,
    DiscreteMassOracle,
    DiscreteMeasure,
    DyadicHistogram,
    HistogramMassOracle,
    PiecewiseQuantile,
    discretize,
    multires_bound,
    ot_discrete,
    quantile_of_discrete,
    quantile_of_histogram,
    wasserstein_1d,
    wv_hist_vs_discrete,
)
from dyadichist.errors import CapacityError
from dyadichist.wasserstein import identity_quantile, quantile_from_weights


def _hist_1d(counts, prior=0.0):
    counts = np.asarray(counts, dtype=np.int64)
    K = int(np.log2(counts.size))
    return DyadicHistogram(1, K, int(counts.sum()), counts, np.full(counts.size, prior))


def _rand_discrete(rng, n):
    w = rng.dirichlet(np.ones(n)) if n > 1 else np.ones(1)
    return DiscreteMeasure(rng.random((n, 1)), w)


class TestQuantileOfHistogram:
    def test_uniform_identity(self):
        q = quantile_of_histogram(_hist_1d([1, 1]))
        z = np.linspace(0, 1, 11)
        assert np.allclose(q(z), z)

    def test_left_half(self):
        q = quantile_of_histogram(_hist_1d([2, 0]))
        z = np.linspace(0, 1, 11)
        assert np.allclose(q(z), z / 2)

    def test_right_half_shifted(self):
        q = quantile_of_histogram(_hist_1d([0, 2]))
        z = np.linspace(0, 1, 11)
        assert np.allclose(q(z), 0.5 + z / 2)

    def test_zero_mass_gap_jumps(self):
        q = quantile_of_histogram(_hist_1d([1, 0, 0, 1]))
        assert q(0.25) == pytest.approx(0.125, abs=1e-12)
        # inf{x : F(x) >= z} jumps over the zero-mass cells to the last cell
        assert q(0.5) == pytest.approx(0.75, abs=1e-12)
        assert q(0.75) == pytest.approx(0.875, abs=1e-12)

    def test_rejects_2d(self):
        counts = np.ones(4, dtype=np.int64)
        h = DyadicHistogram(2, 1, 4, counts, np.zeros(4))
        with pytest.raises(ValueError):
            quantile_of_histogram(h)


class TestQuantileOfDiscrete:
    def test_point_mass(self):
        q = quantile_of_discrete(DiscreteMeasure(np.array([[0.3]]), np.array([1.0])))
        assert np.allclose(q(np.linspace(0, 1, 7)), 0.3)

    def test_two_atoms(self):
        m = DiscreteMeasure(np.array([[0.2], [0.8]]), np.array([0.5, 0.5]))
        q = quantile_of_discrete(m)
        assert q(0.25) == pytest.approx(0.2)
        assert q(0.75) == pytest.approx(0.8)

    def test_staircase_matches_identity_coarsely(self):
        b = 8
        centers = (np.arange(b) + 0.5) / b
        m = DiscreteMeasure(centers.reshape(-1, 1), np.full(b, 1 / b))
        q = quantile_of_discrete(m)
        z = np.linspace(0.01, 0.99, 50)
        assert np.abs(q(z) - z).max() <= 0.5 / b + 1e-12

    def test_empty(self):
        m = DiscreteMeasure(np.array([[0.2], [0.8]]), np.array([1.0, 0.0]))
        q = quantile_of_discrete(m)  # zero-weight atom dropped
        assert np.allclose(q(np.array([0.1, 0.9])), 0.2)


class TestWasserstein1d:
    def test_identity_of_indiscernibles(self):
        for counts in ([1, 1], [3, 1], [1, 0, 0, 1]):
            q = quantile_of_histogram(_hist_1d(counts))
            for v in (1.0, 2.0, 2.5):
                assert wasserstein_1d(q, q, v) == pytest.approx(0.0, abs=1e-15)

    def test_unit_translation_of_point_masses(self):
        d0 = quantile_of_discrete(DiscreteMeasure(np.array([[0.0]]), np.array([1.0])))
        d1 = quantile_of_discrete(
            DiscreteMeasure(np.array([[np.nextafter(1.0, 0.0)]]), np.array([1.0]))
        )
        assert wasserstein_1d(d0, d1, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_half_translation_any_v(self):
        q1 = quantile_of_histogram(_hist_1d([2, 0]))
        q2 = quantile_of_histogram(_hist_1d([0, 2]))
        for v in (1.0, 1.5, 2.0, 3.0, 7.0):
            assert wasserstein_1d(q1, q2, v) == pytest.approx(0.5, abs=1e-12)

    def test_uniform_vs_center_point_mass(self):
        dm = quantile_of_discrete(DiscreteMeasure(np.array([[0.5]]), np.array([1.0])))
        got = wasserstein_1d(identity_quantile(), dm, 2.0)
        assert got == pytest.approx(np.sqrt(1 / 12), abs=1e-12)

    def test_noninteger_v_against_quadrature(self):
        # |z - 0.5|^v integrated on [0,1]: closed form 2 (0.5)^{v+1} / (v+1)
        dm = quantile_of_discrete(DiscreteMeasure(np.array([[0.5]]), np.array([1.0])))
        for v in (1.3, 2.6, 4.9):
            expect = (2 * 0.5 ** (v + 1) / (v + 1)) ** (1 / v)
            assert wasserstein_1d(identity_quantile(), dm, v) == pytest.approx(expect, abs=1e-12)

    def test_rejects_v_below_1(self):
        q = identity_quantile()
        with pytest.raises(ValueError):
            wasserstein_1d(q, q, 0.5)

    @given(st.integers(0, 2**31), st.sampled_from([1.0, 2.0, 3.0]))
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, seed, v):
        rng = np.random.default_rng(seed)
        q1 = quantile_from_weights(rng.dirichlet(np.ones(8)))
        q2 = quantile_from_weights(rng.dirichlet(np.ones(4)))
        assert wasserstein_1d(q1, q2, v) == pytest.approx(wasserstein_1d(q2, q1, v), abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_in_v(self, seed):
        rng = np.random.default_rng(seed)
        q1 = quantile_from_weights(rng.dirichlet(np.ones(8)))
        q2 = quantile_from_weights(rng.dirichlet(np.ones(16)))
        vals = [wasserstein_1d(q1, q2, v) for v in (1.0, 1.5, 2.0, 3.0, 4.0)]
        for lo, hi in zip(vals, vals[1:]):
            assert lo <= hi + 1e-9

    def test_translation_exactness(self):
        # shifting the mass pattern by t cells moves W_v by exactly t/b
        base = np.array([3, 1, 0, 0, 0, 0, 0, 0], dtype=np.int64)
        for t in (1, 2, 4):
            shifted = np.roll(base, t)
            q1 = quantile_of_histogram(_hist_1d(base))
            q2 = quantile_of_histogram(_hist_1d(shifted))
            for v in (1.0, 2.0):
                assert wasserstein_1d(q1, q2, v) == pytest.approx(t / 8, abs=1e-12)


class TestMultiresBound:
    def test_equal_measures_resolution_only(self):
        h = _hist_1d([1, 2, 3, 4])
        mu = HistogramMassOracle(h)
        for K, v, p in ((1, 1.0, 1.0), (2, 2.0, 2.0), (5, 3.0, 1.0)):
            assert multires_bound(mu, mu, K, v, p, 1) == pytest.approx(2.0**-K)

    def test_worked_example(self):
        mu = HistogramMassOracle(_hist_1d([2, 0]))
        nu = HistogramMassOracle(_hist_1d([0, 2]))
        assert multires_bound(mu, nu, 1, 1.0, 1.0, 1) == pytest.approx(2.5)

    def test_dominates_exact_1d(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            c1 = rng.multinomial(20, rng.dirichlet(np.ones(8)))
            c2 = rng.multinomial(20, rng.dirichlet(np.ones(8)))
            h1, h2 = _hist_1d(c1), _hist_1d(c2)
            v = float(rng.integers(1, 4))
            exact = wasserstein_1d(quantile_of_histogram(h1), quantile_of_histogram(h2), v)
            bound = multires_bound(
                HistogramMassOracle(h1), HistogramMassOracle(h2), 5, v, 2.0, 1
            )
            assert bound >= exact - 1e-12

    def test_inconsistent_oracle_rejected(self):
        class Bad:
            def masses(self, k):
                return np.full(2**k, 0.7 / 2**k)

        with pytest.raises(ConsistencyError):
            multires_bound(Bad(), Bad(), 2, 1.0, 1.0, 1)

    def test_discrete_oracle_depth_refinement(self):
        m = DiscreteMeasure(np.array([[0.1], [0.6]]), np.array([0.5, 0.5]))
        o = DiscreteMassOracle(m)
        for k in (1, 2, 3):
            masses = o.masses(k)
            assert masses.sum() == pytest.approx(1.0)
            # children sum to parents
            assert np.allclose(masses.reshape(-1, 2).sum(axis=1), o.masses(k - 1))


class TestOtDiscrete:
    def test_identical(self):
        rng = np.random.default_rng(0)
        m = _rand_discrete(rng, 10)
        assert ot_discrete(m, m, 2.0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_two_corner_points(self):
        a = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))
        b_atom = np.nextafter(1.0, 0.0)
        b = DiscreteMeasure(np.array([[b_atom, b_atom]]), np.array([1.0]))
        assert ot_discrete(a, b, 2.0, 2.0) == pytest.approx(np.sqrt(2), abs=1e-9)

    def test_matches_quantile_formula(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for t in range(100):
            v = 1.0 if t % 2 else 2.0
            mu = _rand_discrete(rng, int(rng.integers(1, 65)))
            nu = _rand_discrete(rng, int(rng.integers(1, 65)))
            got = ot_discrete(mu, nu, v, 2.0)
            want = wasserstein_1d(quantile_of_discrete(mu), quantile_of_discrete(nu), v)
            worst = max(worst, abs(got - want))
        assert worst <= 1e-9

    def test_triangle_inequality(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            ms = [_rand_discrete(rng, int(rng.integers(2, 12))) for _ in range(3)]
            for v in (1.0, 2.0):
                d01 = ot_discrete(ms[0], ms[1], v, 2.0)
                d12 = ot_discrete(ms[1], ms[2], v, 2.0)
                d02 = ot_discrete(ms[0], ms[2], v, 2.0)
                assert d02 <= d01 + d12 + 1e-9

    def test_atom_cap(self):
        rng = np.random.default_rng(1)
        big = DiscreteMeasure(rng.random((5001, 1)), np.full(5001, 1 / 5001))
        small = _rand_discrete(rng, 2)
        with pytest.raises(CapacityError):
            ot_discrete(big, small, 1.0, 1.0)

    def test_dimension_mismatch(self):
        a = DiscreteMeasure(np.array([[0.5]]), np.array([1.0]))
        b = DiscreteMeasure(np.array([[0.5, 0.5]]), np.array([1.0]))
        with pytest.raises(ValueError):
            ot_discrete(a, b, 1.0, 1.0)


class TestWvHistVsDiscrete:
    def test_single_bin_vs_center(self):
        counts = np.array([1], dtype=np.int64).reshape(1)
        h = DyadicHistogram(2, 0, 1, np.array([1]), np.zeros(1))
        nu = DiscreteMeasure(np.array([[0.5, 0.5]]), np.array([1.0]))
        assert wv_hist_vs_discrete(h, nu, 2.0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_1d_equals_quantile_route(self):
        h = _hist_1d([1, 3])
        nu = DiscreteMeasure(np.array([[0.2], [0.9]]), np.array([0.5, 0.5]))
        got = wv_hist_vs_discrete(h, nu, 2.0, 2.0)
        want = wasserstein_1d(quantile_of_histogram(h), quantile_of_discrete(nu), 2.0)
        assert got == pytest.approx(want, abs=1e-15)

    def test_2d_hist_vs_own_discretization(self):
        h = DyadicHistogram(2, 1, 4, np.ones(4, dtype=np.int64), np.zeros(4))
        assert wv_hist_vs_discrete(h, discretize(h), 2.0, 2.0) == pytest.approx(0.0, abs=1e-12)


class TestPiecewiseQuantileInvariants:
    def test_rejects_uncovered_domain(self):
        with pytest.raises(ValueError):
            PiecewiseQuantile(np.array([0.0]), np.array([0.5]), np.array([0.0]), np.array([1.0]))

    def test_rejects_decreasing_values(self):
        with pytest.raises(ValueError):
            PiecewiseQuantile(
                np.array([0.0, 0.5]),
                np.array([0.5, 1.0]),
                np.array([0.8, 0.0]),
                np.array([0.0, 0.0]),
            )

    def test_rejects_values_outside_unit(self):
        with pytest.raises(ValueError):
            PiecewiseQuantile(np.array([0.0]), np.array([1.0]), np.array([0.5]), np.array([1.0]))
