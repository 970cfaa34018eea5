import math

import numpy as np
import pytest
from scipy import integrate, stats

from improper_pp.bernoulli import BernoulliImproperModel, nonconstant_region
from improper_pp.conditional import (
    JointPosterior,
    joint_posterior,
    marginal_cdf,
    posterior_draws_csv,
    posterior_for_event,
    sample_posterior,
)
from improper_pp.errors import DivergentIntensityError
from improper_pp.gaussian import GaussianImproperModel
from improper_pp.measure import PointPattern, SamplingRegion
from improper_pp.paradox import ParadoxModel
from improper_pp.verify import ks_test


class TestPosteriorForEvent:
    def test_bernoulli_beta_density(self):
        law = posterior_for_event(BernoulliImproperModel(3), np.array([1, 0, 0]))
        th = np.linspace(0.01, 0.99, 50)
        np.testing.assert_allclose(law.density(th[:, None]), 2 * (1 - th), rtol=1e-12)

    def test_constant_event_divergent(self):
        with pytest.raises(DivergentIntensityError):
            posterior_for_event(BernoulliImproperModel(3), np.array([1, 1, 1]))

    def test_paradox_theta_marginal(self):
        law = posterior_for_event(ParadoxModel(), np.array([1.0, 1.0]))
        th = np.array([0.2, 1.0, 3.0, 10.0])
        np.testing.assert_allclose(law.marginal_density(0, th), 2 * th / (th + 1) ** 3, rtol=1e-9)
        assert law.marginal_density(0, [1.0])[0] == pytest.approx(0.25, rel=1e-10)

    def test_density_is_bayes_ratio(self):
        m = GaussianImproperModel(2, 1)
        y = np.array([0.0, 1.0])
        law = posterior_for_event(m, y)
        pts = np.array([[0.1, 0.4], [1.3, 2.0], [-2.0, 0.2]])
        expected = m.likelihood_density(pts, y) * m.prior_density(pts) / m.marginal_intensity(y)
        np.testing.assert_allclose(law.density(pts), expected, rtol=1e-12)

    def test_density_normalized(self):
        law = posterior_for_event(GaussianImproperModel(3, 2), np.array([0.0, 1.0, 3.0]))
        val, _ = integrate.dblquad(lambda ls, t: law.density(np.array([[t, math.exp(ls)]]))[0]
                                   * math.exp(ls), -np.inf, np.inf, -30, 30, epsrel=1e-8)
        assert val == pytest.approx(1.0, rel=1e-3)


class TestSampling:
    def test_zero_draws(self):
        law = posterior_for_event(BernoulliImproperModel(3), np.array([1, 0, 0]))
        assert sample_posterior(law, 0, 1).shape[0] == 0

    def test_beta12_draws(self):
        law = posterior_for_event(BernoulliImproperModel(3), np.array([1, 0, 0]))
        assert ks_test(sample_posterior(law, 5000, 2)[:, 0], stats.beta(1, 2).cdf).passed

    def test_gaussian_median(self):
        law = posterior_for_event(GaussianImproperModel(2, 1), np.array([0.0, 1.0]))
        draws = sample_posterior(law, 5000, 3)
        assert abs(np.median(draws[:, 0]) - 0.5) < 0.05
        assert np.all(draws[:, 1] > 0)

    def test_seed_determinism(self):
        law = posterior_for_event(GaussianImproperModel(2, 1), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(law.sample(10, 4), law.sample(10, 4))

    def test_marginal_cdf(self):
        law = posterior_for_event(GaussianImproperModel(2, 1), np.array([0.0, 1.0]))
        cdf = marginal_cdf(law, 0)
        x = np.array([-3.0, 0.0, 0.5, 2.0, 10.0])
        np.testing.assert_allclose(cdf(x), stats.cauchy(0.5, 0.5).cdf(x), atol=3e-5)


class TestJoint:
    def test_empty(self):
        p = PointPattern(np.empty((0, 3)), nonconstant_region(3))
        j = joint_posterior(BernoulliImproperModel(3), p)
        assert len(j) == 0 and isinstance(j, JointPosterior)
        csv = posterior_draws_csv(j, 10, 0, ("theta",))
        assert csv == "event_index,draw_index,theta\n"

    def test_three_events_beta_laws(self):
        m = BernoulliImproperModel(3)
        p = PointPattern(np.array([[1, 0, 0], [1, 1, 0], [0, 1, 0]]), nonconstant_region(3))
        j = joint_posterior(m, p)
        th = np.array([[0.3]])
        for law, (a, b) in zip(j.laws, [(1, 2), (2, 1), (1, 2)]):
            assert law.density(th)[0] == pytest.approx(stats.beta(a, b).pdf(0.3), rel=1e-12)
        rows = posterior_draws_csv(j, 4, 1, m.param_names).splitlines()
        assert len(rows) == 1 + 3 * 4
        assert {r.split(",")[0] for r in rows[1:]} == {"0", "1", "2"}

    def test_coincident_events_independent(self):
        m = GaussianImproperModel(2, 1)
        p = PointPattern(np.array([[0.0, 1.0], [0.0, 1.0]]), SamplingRegion([[-1, 2], [-1, 2]]))
        draws = joint_posterior(m, p).sample(10_000, 5)
        r = np.corrcoef(stats.rankdata(draws[:, 0, 0]), stats.rankdata(draws[:, 1, 0]))[0, 1]
        assert abs(r) < 0.05

    def test_lack_of_interference(self):
        m = GaussianImproperModel(2, 1)
        region = SamplingRegion([[-5, 5], [-5, 5]])
        alone = joint_posterior(m, PointPattern(np.array([[0.0, 1.0]]), region))
        crowd = joint_posterior(m, PointPattern(np.array([[0.0, 1.0], [3.0, -2.0]]), region))
        pts = np.array([[0.2, 0.9], [1.0, 3.0]])
        np.testing.assert_array_equal(alone.laws[0].density(pts), crowd.laws[0].density(pts))

    def test_joint_density_is_product(self):
        m = BernoulliImproperModel(3)
        p = PointPattern(np.array([[1, 0, 0], [0, 1, 1]]), nonconstant_region(3))
        j = joint_posterior(m, p)
        xs = np.array([[0.2], [0.7]])
        expected = math.log(stats.beta(1, 2).pdf(0.2)) + math.log(stats.beta(2, 1).pdf(0.7))
        assert j.log_density(xs) == pytest.approx(expected, rel=1e-12)

    def test_divergent_event_named(self):
        m = BernoulliImproperModel(3)
        p = PointPattern(np.array([[1, 0, 0], [1, 1, 1]]), SamplingRegion([[0, 1]] * 3))
        with pytest.raises(DivergentIntensityError, match="event 1"):
            joint_posterior(m, p)
