import json
import math

import numpy as np
import pytest
from scipy import stats

from improper_pp.errors import InconclusiveError, TooFewSamplesError
from improper_pp.verify import (
    VerificationReport,
    chi_square_counts,
    chi_square_frequencies,
    chi_square_homogeneity,
    divergence_certificate,
    doubling_ladder,
    halving_ladder,
    ks_critical_value,
    ks_test,
    ks_two_sample,
    write_jsonl,
)


class TestReport:
    def test_direction(self):
        assert VerificationReport.compare("a", 1.0, 2.0).passed
        assert not VerificationReport.compare("a", 3.0, 2.0).passed
        assert VerificationReport.compare("a", 3.0, 2.0, direction="above").passed
        with pytest.raises(ValueError):
            VerificationReport.compare("a", 1.0, 2.0, direction="sideways")

    def test_json_roundtrip_fields(self, tmp_path):
        r = VerificationReport.compare("x", 0.1, 0.2, seed=4, sample_sizes=[10])
        d = json.loads(r.to_json())
        assert d["check_id"] == "x" and d["passed"] is True and d["sample_sizes"] == [10]
        inf = VerificationReport.compare("y", math.inf, 1.0)
        assert json.loads(inf.to_json())["statistic"] == "inf"
        path = tmp_path / "r.jsonl"
        write_jsonl([inf, r], path)
        lines = path.read_text().splitlines()
        assert [json.loads(s)["check_id"] for s in lines] == ["x", "y"]


class TestKS:
    def test_critical_value(self):
        assert ks_critical_value(0.05, 100) == pytest.approx(0.1358, abs=1e-4)

    def test_uniform_passes(self):
        x = np.random.default_rng(0).random(5000)
        assert ks_test(x, lambda v: np.clip(v, 0, 1)).passed

    def test_degenerate_fails(self):
        assert not ks_test(np.zeros(5000), lambda v: np.clip(v, 0, 1)).passed

    def test_statistic_matches_scipy(self):
        x = np.random.default_rng(1).normal(size=300)
        r = ks_test(x, stats.norm.cdf)
        assert r.statistic == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewSamplesError):
            ks_test(np.zeros(10), lambda v: v)

    def test_two_sample(self):
        g = np.random.default_rng(2)
        assert ks_two_sample(g.random(2000), g.random(2000)).passed
        assert not ks_two_sample(g.random(2000), g.random(2000) + 0.2).passed


class TestChiSquare:
    def test_poisson_null_passes(self):
        c = np.random.default_rng(3).poisson(3.0, 10_000)
        assert chi_square_counts(c, 3.0).passed

    def test_constant_zero_fails(self):
        assert not chi_square_counts(np.zeros(10_000, dtype=int), 3.0).passed

    def test_power_against_poisson6(self):
        c = np.random.default_rng(4).poisson(6.0, 10_000)
        assert not chi_square_counts(c, 3.0).passed

    def test_frequencies(self):
        g = np.random.default_rng(5)
        obs = np.bincount(g.choice(3, 6000, p=[0.2, 0.3, 0.5]), minlength=3)
        assert chi_square_frequencies(obs, [0.2, 0.3, 0.5]).passed
        assert not chi_square_frequencies(obs, [0.5, 0.3, 0.2]).passed

    def test_homogeneity_matches_scipy_without_pooling(self):
        table = np.array([[50, 60, 70], [55, 58, 80]])
        r = chi_square_homogeneity(table)
        assert r.statistic == pytest.approx(
            stats.chi2_contingency(table, correction=False)[0], rel=1e-12)

    def test_homogeneity_pools_sparse_columns(self):
        table = np.array([[100, 100, 1, 0, 1], [100, 100, 0, 1, 0]])
        r = chi_square_homogeneity(table)
        assert r.passed and r.notes == "df=1"


class TestCertificates:
    def test_harmonic_diverges(self):
        cert = divergence_certificate(lambda u: 1 / u, [(e, 1.0) for e in halving_ladder(0.5)])
        assert not cert.finite

    def test_inverse_square_converges(self):
        cert = divergence_certificate(lambda u: 1 / u**2, [(1.0, t) for t in doubling_ladder(2.0)])
        assert cert.finite
        assert cert.value == pytest.approx(1.0, rel=1e-3)

    def test_all_zero_is_finite_zero(self):
        cert = divergence_certificate(None, list(range(8)), integrate=lambda d: 0.0)
        assert cert.finite and cert.value == 0.0

    def test_inconclusive(self):
        with pytest.raises(InconclusiveError):
            divergence_certificate(None, list(range(8)),
                                   integrate=lambda d: 1.0 + 0.1 * (-1) ** d)

    def test_short_ladder_rejected(self):
        with pytest.raises(ValueError):
            divergence_certificate(lambda u: u, [(0, 1)] * 3)
