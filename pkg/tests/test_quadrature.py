import math

import numpy as np
import pytest

from improper_pp.errors import NonConvergedError
from improper_pp.quadrature import EvalBudget, gauss_kronrod, inside_runs, integrate_region


class TestGaussKronrod:
    def test_polynomial_exact(self):
        val, err = gauss_kronrod(lambda x: 3 * x**2, 0.0, 2.0, epsabs=0, epsrel=1e-14)
        assert val == pytest.approx(8.0, rel=1e-14)

    def test_reversed_limits_flip_sign(self):
        val, _ = gauss_kronrod(np.exp, 1.0, 0.0, epsabs=0, epsrel=1e-12)
        assert val == pytest.approx(-(math.e - 1), rel=1e-12)

    def test_breakpoint_kink(self):
        val, _ = gauss_kronrod(np.abs, -1.0, 2.0, epsabs=0, epsrel=1e-12, points=(0.0,))
        assert val == pytest.approx(2.5, rel=1e-13)

    def test_vector_valued(self):
        val, _ = gauss_kronrod(lambda x: np.stack([x, x**2], axis=1), 0.0, 1.0,
                               epsabs=0, epsrel=1e-13)
        np.testing.assert_allclose(val, [0.5, 1 / 3], rtol=1e-13)

    def test_endpoint_singularity(self):
        val, _ = gauss_kronrod(lambda x: 1 / np.sqrt(x), 0.0, 1.0, epsabs=0, epsrel=1e-8,
                               limit=5000)
        assert val == pytest.approx(2.0, rel=1e-7)

    def test_budget_exhaustion_raises(self):
        with pytest.raises(NonConvergedError):
            gauss_kronrod(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0,
                          epsabs=0, epsrel=1e-14, budget=EvalBudget(300))

    def test_infinite_limits_rejected(self):
        with pytest.raises(ValueError):
            gauss_kronrod(np.exp, -math.inf, 0.0)


class TestRegions:
    def test_inside_runs_interval(self):
        runs = inside_runs(lambda t: (t > 0.25) & (t < 0.6), 0.0, 1.0)
        assert len(runs) == 1
        assert runs[0][0] == pytest.approx(0.25, abs=1e-12)
        assert runs[0][1] == pytest.approx(0.6, abs=1e-12)

    def test_inside_runs_empty(self):
        assert inside_runs(lambda t: t > 2, 0.0, 1.0) == []

    def test_disk_area(self):
        def f(p):
            return np.ones(len(p))

        def disk(p):
            return np.sum(p**2, axis=1) <= 1.0

        val = integrate_region(f, np.array([[-1.0, 1.0], [-1.0, 1.0]]), disk,
                               epsabs=0, epsrel=1e-9)
        assert val == pytest.approx(math.pi, rel=1e-7)
