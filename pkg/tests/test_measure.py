import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from improper_pp.bernoulli import BernoulliImproperModel, nonconstant_region
from improper_pp.errors import DomainError, NotObservableError, OverlappingRegionsError
from improper_pp.gaussian import GaussianImproperModel
from improper_pp.measure import (
    NOT_OBSERVABLE_INFINITE,
    NOT_OBSERVABLE_ZERO,
    OBSERVABLE,
    PatternSampler,
    PointPattern,
    SamplingRegion,
    check_observable,
    integrate_intensity,
    intersect_region,
    model_from_spec,
    quadrature_intensity,
    restrict,
    sample_point_pattern,
    superpose,
    to_natural,
    to_unconstrained,
)
from improper_pp.verify import chi_square_homogeneity

GAP_REGION = {"bounds": [[0, 1], [0, 1]], "predicate": "diagonal-gap", "params": {"delta": 0.1}}
# integral of 1/(2|y1-y2|) over the unit square with |y1-y2| >= 0.1
GAP_MASS = math.log(10.0) - 0.9


class TestModelBasics:
    def test_registry_roundtrip(self):
        m = model_from_spec({"id": "gaussian", "n": 3, "p": 2})
        assert isinstance(m, GaussianImproperModel) and m.n == 3
        assert model_from_spec(m.to_spec()).p == 2

    def test_unknown_model(self):
        with pytest.raises(DomainError):
            model_from_spec({"id": "nope"})

    def test_likelihood_normalized(self):
        m = GaussianImproperModel(2, 1)
        theta = np.array([0.3, 0.7])
        t = np.linspace(-8, 8, 801)
        yy = np.stack(np.meshgrid(t, t, indexing="ij"), -1).reshape(-1, 2)
        dens = m.likelihood_density(theta, yy).reshape(801, 801)
        mass = np.trapezoid(np.trapezoid(dens, t, axis=1), t)
        assert mass == pytest.approx(1.0, rel=1e-3)

    @given(st.sampled_from(["real", "positive", "unit"]), st.floats(-15, 15))
    def test_coordinate_transform_inverse(self, support, u):
        x, _ = to_natural(support, np.array([u]), 0.5 if support == "unit" else 1.3, 2.0)
        if support != "real" and not (0 < x[0] < math.inf):
            return
        back = to_unconstrained(support, x, 0.5 if support == "unit" else 1.3, 2.0)
        assert back[0] == pytest.approx(u, abs=1e-6)


class TestRegion:
    @settings(max_examples=50)
    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    def test_contains_false_outside_bounds(self, point):
        r = SamplingRegion([[0, 1], [0, 1]])
        p = np.array(point)
        if np.any(p < 0) or np.any(p > 1):
            assert not r.contains(p)

    def test_dict_roundtrip(self):
        r = SamplingRegion.from_dict(GAP_REGION)
        assert SamplingRegion.from_dict(r.to_dict()) == r

    def test_unknown_predicate(self):
        with pytest.raises(DomainError):
            SamplingRegion([[0, 1]], "bogus")

    def test_intersect(self):
        r = intersect_region(SamplingRegion([[0, 1], [0, 1]]), "diagonal-gap", {"delta": 0.5})
        assert r.contains([0.0, 0.9]) and not r.contains([0.2, 0.3])


class TestIntegrateIntensity:
    def test_bernoulli_nonconstant_is_three(self):
        assert integrate_intensity(BernoulliImproperModel(3), nonconstant_region(3)) == 3.0

    def test_bernoulli_full_cube_infinite(self):
        r = SamplingRegion([[0, 1]] * 3)
        assert integrate_intensity(BernoulliImproperModel(3), r) == math.inf

    def test_empty_region_zero(self):
        r = SamplingRegion([[1, 0], [0, 1]])
        assert integrate_intensity(GaussianImproperModel(2, 1), r) == 0.0

    def test_gaussian_gap_region_value(self):
        val = integrate_intensity(GaussianImproperModel(2, 1), SamplingRegion.from_dict(GAP_REGION),
                                  tol=1e-8)
        assert val == pytest.approx(GAP_MASS, rel=1e-5)

    def test_singular_mass_knob(self):
        r = SamplingRegion.from_dict({**GAP_REGION, "singular_mass": 2.0})
        val = integrate_intensity(GaussianImproperModel(2, 1), r, tol=1e-8)
        assert val == pytest.approx(GAP_MASS + 2.0, rel=1e-5)


class TestObservability:
    def test_gap_region_observable(self):
        v = check_observable(GaussianImproperModel(2, 1), SamplingRegion.from_dict(GAP_REGION))
        assert v.status == OBSERVABLE and v.observable

    def test_full_square_infinite(self):
        v = check_observable(GaussianImproperModel(2, 1), SamplingRegion([[0, 1], [0, 1]]))
        assert v.status == NOT_OBSERVABLE_INFINITE

    def test_zero_mass(self):
        r = SamplingRegion([[0, 1]] * 3, "sequences", {"members": [[0, 0, 0]]})
        r2 = SamplingRegion([[0, 1]] * 3, "and", {"parts": [
            {"predicate": "nonconstant"}, {"predicate": "sequences", "params": {"members": []}}]})
        assert check_observable(BernoulliImproperModel(3), r2).status == NOT_OBSERVABLE_ZERO
        assert check_observable(BernoulliImproperModel(3), r).status == NOT_OBSERVABLE_INFINITE


class TestSampling:
    def test_zero_region_needs_bypass(self):
        r = SamplingRegion([[0, 1]] * 3, "sequences", {"members": []})
        with pytest.raises(NotObservableError):
            sample_point_pattern(BernoulliImproperModel(3), r, 0)
        p = sample_point_pattern(BernoulliImproperModel(3), r, 0, allow_zero=True)
        assert len(p) == 0

    def test_not_observable_carries_verdict(self):
        with pytest.raises(NotObservableError) as exc:
            sample_point_pattern(GaussianImproperModel(2, 1), SamplingRegion([[0, 1], [0, 1]]), 0)
        assert exc.value.verdict == NOT_OBSERVABLE_INFINITE

    def test_mean_count_bernoulli(self):
        pats = PatternSampler(BernoulliImproperModel(3), nonconstant_region(3)).replicates(1, 10_000)
        mean = np.mean([len(p) for p in pats])
        assert abs(mean - 3.0) <= 3 * math.sqrt(3 / 10_000)

    def test_events_respect_region(self):
        region = SamplingRegion.from_dict(GAP_REGION)
        sampler = PatternSampler(GaussianImproperModel(2, 1), region)
        ev = np.concatenate([p.events for p in sampler.replicates(2, 200)])
        assert len(ev) > 0
        assert np.all(np.abs(ev[:, 0] - ev[:, 1]) >= 0.1)
        assert sampler.envelope_violations == 0

    def test_event_distribution_gaussian(self):
        # |y1 - y2| on the gap region has density (1/d - 1) / GAP_MASS on [0.1, 1]
        sampler = PatternSampler(GaussianImproperModel(2, 1), SamplingRegion.from_dict(GAP_REGION))
        ev = np.concatenate([p.events for p in sampler.replicates(3, 3000)])
        d = np.abs(ev[:, 0] - ev[:, 1])
        from improper_pp.verify import ks_test

        def cdf(x):
            x = np.clip(x, 0.1, 1.0)
            return (np.log(x / 0.1) - (x - 0.1)) / GAP_MASS
        assert ks_test(d, cdf).passed

    def test_seed_determinism(self):
        s = PatternSampler(BernoulliImproperModel(3), nonconstant_region(3))
        np.testing.assert_array_equal(s.sample(9).events, s.sample(9).events)


class TestPatterns:
    def test_json_roundtrip_keeps_multiplicity(self):
        r = nonconstant_region(3)
        p = PointPattern(np.array([[1, 0, 0], [1, 0, 0]]), r, 5)
        q = PointPattern.from_json(p.to_json())
        assert len(q) == 2
        np.testing.assert_array_equal(q.events, p.events)

    def test_superpose_sizes(self):
        a = PointPattern(np.array([[0.1], [0.2]]), SamplingRegion([[0, 0.5]]))
        b = PointPattern(np.array([[0.7], [0.8], [0.9]]), SamplingRegion([[0.6, 1.0]]))
        assert len(superpose(a, b)) == 5
        e = PointPattern(np.empty((0, 1)), SamplingRegion([[0, 0.5]]))
        f = PointPattern(np.empty((0, 1)), SamplingRegion([[0.6, 1.0]]))
        assert len(superpose(e, f)) == 0

    def test_superpose_overlap_rejected(self):
        a = PointPattern(np.empty((0, 1)), SamplingRegion([[0, 0.7]]))
        b = PointPattern(np.empty((0, 1)), SamplingRegion([[0.6, 1.0]]))
        with pytest.raises(OverlappingRegionsError):
            superpose(a, b)

    def test_restrict(self):
        p = PointPattern(np.array([[0.1], [0.9]]), SamplingRegion([[0, 1]]))
        assert len(restrict(p, SamplingRegion([[0, 0.5]]))) == 1

    def test_partition_matches_direct_sampling(self):
        model = BernoulliImproperModel(3)
        halves = [SamplingRegion([[0, 1]] * 3, "and", {"parts": [
            {"predicate": "nonconstant"},
            {"predicate": "halfspace", "params": {"axis": 0, "threshold": 0.5, "side": s}}]})
            for s in ("below", "above")]
        a = PatternSampler(model, halves[0]).replicates(8, 3000)
        b = PatternSampler(model, halves[1]).replicates(8, 3000, start=3000)
        merged = [len(superpose(x, y)) for x, y in zip(a, b)]
        direct = [len(p) for p in PatternSampler(model, nonconstant_region(3)).replicates(9, 3000)]
        table = [np.bincount(merged, minlength=20)[:20], np.bincount(direct, minlength=20)[:20]]
        assert chi_square_homogeneity(table).passed


def test_quadrature_intensity_gaussian():
    m = GaussianImproperModel(3, 1)
    assert quadrature_intensity(m, np.array([0.0, 1.0, 3.0])) == pytest.approx(
        0.0196903176936354303, rel=1e-8)
