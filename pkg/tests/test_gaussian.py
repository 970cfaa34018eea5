import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from improper_pp.conditional import posterior_for_event
from improper_pp.errors import DegenerateSSQError, DomainError
from improper_pp.gaussian import (
    ExtensionState,
    GaussianImproperModel,
    gaussian_intensity,
    gaussian_posterior_density,
    gosset_extend,
    gosset_factor,
    gosset_limit,
    student_innovations,
    student_predictive_density,
)
from improper_pp.measure import quadrature_intensity
from improper_pp.rng import stream
from improper_pp.verify import ks_test

# 30-digit adaptive quadrature of the defining double integral
ORACLE = [
    ((3, 1), (0.0, 1.0, 3.0), 0.0196903176936354303396901435479),
    ((3, 2), (0.5, -1.0, 2.0), 0.012064259553158516582379867238),
    ((4, 2), (0.0, 1.0, 3.0, -2.0), 0.000375701987776573785714575768785),
]


class TestIntensity:
    def test_two_point_value(self):
        assert gaussian_intensity(GaussianImproperModel(2, 1), [0.0, 1.0]) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("np_, y, expected", ORACLE)
    def test_against_oracle(self, np_, y, expected):
        assert gaussian_intensity(GaussianImproperModel(*np_), y) == pytest.approx(expected, rel=1e-12)

    def test_against_quadrature(self):
        m = GaussianImproperModel(3, 1)
        y = np.array([0.0, 1.0, 2.0])
        assert gaussian_intensity(m, y) == pytest.approx(quadrature_intensity(m, y), rel=1e-3)

    def test_constant_infinite(self):
        assert gaussian_intensity(GaussianImproperModel(3, 1), [2.0, 2.0, 2.0]) == math.inf

    @pytest.mark.parametrize("n, p", [(1, 2), (2, 0), (2, -1), (3, -1)])
    def test_window(self, n, p):
        with pytest.raises(DomainError):
            GaussianImproperModel(n, p)

    @settings(max_examples=30)
    @given(st.lists(st.floats(-100, 100), min_size=3, max_size=3), st.floats(-50, 50),
           st.floats(0.1, 10))
    def test_location_scale(self, y, shift, scale):
        m = GaussianImproperModel(3, 1.5)
        y = np.array(y)
        if np.ptp(y) < 1e-3:
            return
        lhs = gaussian_intensity(m, scale * y + shift)
        rhs = gaussian_intensity(m, y) * scale ** -(3 + 1.5 - 2)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_scale_hook(self):
        m = GaussianImproperModel(2, 1, intensity_scale=1.01)
        assert gaussian_intensity(m, [0.0, 1.0]) == pytest.approx(0.505)


class TestPosterior:
    def test_density_integrates_to_one(self):
        m = GaussianImproperModel(2, 1)

        def f(log_sigma, theta):
            s = math.exp(log_sigma)
            return float(gaussian_posterior_density(m, [0.0, 1.0], theta, s)) * s

        total, _ = integrate.dblquad(f, -np.inf, np.inf, -30, 30, epsrel=1e-8)
        assert total == pytest.approx(1.0, rel=1e-3)

    def test_symmetry(self):
        m = GaussianImproperModel(2, 1)
        a = gaussian_posterior_density(m, [0.0, 1.0], 0.5 + 0.3, 0.7)
        b = gaussian_posterior_density(m, [0.0, 1.0], 0.5 - 0.3, 0.7)
        assert a == pytest.approx(b, rel=1e-14)

    def test_theta_marginal_is_student_t1(self):
        law = posterior_for_event(GaussianImproperModel(2, 1), np.array([0.0, 1.0]))
        grid = np.linspace(-5, 6, 23)
        np.testing.assert_allclose(law.marginal_density(0, grid),
                                   stats.t(1, loc=0.5, scale=0.5).pdf(grid), rtol=1e-8)
        draws = law.sample(5000, 3)[:, 0]
        assert ks_test(draws, stats.t(1, loc=0.5, scale=0.5).cdf).passed


class TestPredictive:
    def test_symmetric_and_normalized(self):
        m = GaussianImproperModel(2, 1)
        x = np.linspace(-3000, 3000, 600_001)
        d = student_predictive_density(m, [0.0, 1.0], x[:, None])
        # tails beyond |x| = 3000 carry about 2 / (pi * 3000) of the mass
        assert np.trapezoid(d, x) + 2 / (math.pi * 3000) == pytest.approx(1.0, abs=1e-4)
        a = student_predictive_density(m, [0.0, 1.0], np.array([[0.5 + 1.7]]))
        b = student_predictive_density(m, [0.0, 1.0], np.array([[0.5 - 1.7]]))
        assert a[0] == pytest.approx(b[0], rel=1e-14)

    def test_permutation_exact(self):
        m = GaussianImproperModel(2, 1)
        assert (student_predictive_density(m, [0.0, 1.0], [0.3, 2.5])
                == student_predictive_density(m, [0.0, 1.0], [2.5, 0.3]))

    def test_one_step_is_student_t(self):
        m = GaussianImproperModel(2, 1)
        x = np.linspace(-10, 10, 41)
        ref = stats.t(1, loc=0.5, scale=math.sqrt(0.75)).pdf(x)
        np.testing.assert_allclose(student_predictive_density(m, [0.0, 1.0], x[:, None]), ref,
                                   rtol=1e-12)


class TestExtensionState:
    @settings(max_examples=40)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=20), st.floats(-1e3, 1e3))
    def test_update_matches_recompute(self, y, v):
        s = ExtensionState.from_values(y).update(v)
        r = ExtensionState.from_values(y + [v])
        assert s.length == r.length
        assert s.mean == pytest.approx(r.mean, abs=1e-10)
        assert s.ssq == pytest.approx(r.ssq, abs=1e-10 * max(1.0, r.ssq))


class TestGosset:
    def test_zero_innovation_gives_mean(self):
        out, _ = gosset_extend(GaussianImproperModel(2, 1), [0.0, 3.0], 1, innovations=[0.0])
        assert out[-1] == 1.5

    def test_forced_unit_innovation(self):
        out, _ = gosset_extend(GaussianImproperModel(2, 2), [0.0, 1.0], 1, innovations=[1.0])
        assert out[-1] == pytest.approx(0.5 + math.sqrt(0.5) * math.sqrt(0.75), abs=1e-15)
        assert out[-1] == pytest.approx(1.1124, abs=1e-4)

    def test_factor(self):
        assert gosset_factor(2, 2) == pytest.approx(math.sqrt(0.75))

    def test_degenerate(self):
        with pytest.raises(DegenerateSSQError):
            gosset_extend(GaussianImproperModel(2, 1), [1.0, 1.0], 5, seed=0)

    def test_innovations_heavy_tailed(self):
        x = student_innovations(np.random.default_rng(0), np.full(5000, 3.0))
        assert ks_test(x, stats.t(3).cdf).passed

    def test_first_step_distribution(self):
        m = GaussianImproperModel(2, 1)
        first = [gosset_extend(m, [0.0, 1.0], 1, seed=stream(11, i))[0][-1] for i in range(5000)]
        assert ks_test(first, stats.t(1, loc=0.5, scale=math.sqrt(0.75)).cdf).passed

    def test_limit_matches_single_paths(self):
        m = GaussianImproperModel(2, 1)
        lim = gosset_limit(m, [0.0, 1.0], steps=50, paths=3, seed=4)
        for i in range(3):
            out, state = gosset_extend(m, [0.0, 1.0], 50, seed=stream(4, i))
            assert lim.ybar[i] == pytest.approx(state.mean, rel=1e-9, abs=1e-12)
            assert lim.s[i] == pytest.approx(state.s, rel=1e-9)

    def test_limit_positivity_and_median(self):
        lim = gosset_limit(GaussianImproperModel(2, 1), [0.0, 1.0], steps=2000, paths=2000, seed=1)
        assert np.all(lim.s > 0)
        assert abs(np.median(lim.ybar) - 0.5) < 0.05
        assert lim.to_csv().splitlines()[0] == "path_index,ybar_final,s_final"
        assert len(lim.pairs()) == 2000
