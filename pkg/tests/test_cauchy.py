import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from improper_pp.cauchy import (
    CauchyImproperModel,
    cauchy_intensity_closed,
    cauchy_intensity_quadrature,
    closed_form_condition,
    lambda_2_1,
    lambda_3_2,
    recurrence_check,
)
from improper_pp.errors import CoincidentCoordinatesError, DomainError

# 30-digit adaptive quadrature of the defining double integral
ORACLE = [
    ((3, 2), (0.0, 1.0, 3.0), 0.0265258238486492226281472938918),
    ((4, 2), (0.0, 1.0, 3.0, 7.0), 0.000152534265342742567851878790157),
    ((5, 3), (-1.0, 0.0, 0.5, 2.0, 4.0), 0.000115114382604489138924527192354),
    ((4, 3), (0.0, 1.0, 3.0, 7.0), 0.000251292618160559949017558192483),
    ((3, 1), (0.0, 1.0, 3.0), 0.0161230922341871549709763385113),
]


class TestClosedForm:
    @pytest.mark.parametrize("np_, y, expected", ORACLE)
    def test_general_formula_against_oracle(self, np_, y, expected):
        m = CauchyImproperModel(*np_)
        assert cauchy_intensity_closed(m, y, use_special=False) == pytest.approx(expected, rel=1e-10)

    def test_three_two_value(self):
        assert lambda_3_2([0, 1, 3]) == pytest.approx(1 / (12 * math.pi), rel=1e-15)
        m = CauchyImproperModel(3, 2)
        assert cauchy_intensity_closed(m, [0, 1, 3]) == pytest.approx(0.026526, abs=1e-6)

    def test_two_one_value(self):
        assert lambda_2_1([0, 1]) == 0.5
        m = CauchyImproperModel(2, 1)
        assert cauchy_intensity_closed(m, [0, 1], use_special=False) == pytest.approx(0.5, abs=1e-14)

    def test_permutation_invariant(self):
        m = CauchyImproperModel(4, 2)
        y = (0.3, -1.2, 2.0, 5.5)
        vals = {cauchy_intensity_closed(m, p) for p in permutations(y)}
        assert max(vals) / min(vals) - 1 < 1e-12

    @pytest.mark.parametrize("n, p", [(1, 0.5), (3, 0), (3, 3), (2, 2.5)])
    def test_window(self, n, p):
        with pytest.raises(DomainError):
            CauchyImproperModel(n, p)

    def test_coincident(self):
        with pytest.raises(CoincidentCoordinatesError):
            cauchy_intensity_closed(CauchyImproperModel(3, 2), [0.0, 1.0, 1.0])
        assert CauchyImproperModel(3, 2).marginal_intensity(np.array([0.0, 1.0, 1.0])) == math.inf

    def test_non_integer_p_has_no_closed_form(self):
        m = CauchyImproperModel(3, 1.5)
        assert not m.has_closed_form
        with pytest.raises(DomainError):
            cauchy_intensity_closed(m, [0.0, 1.0, 3.0])

    def test_cancellation_falls_back_to_quadrature(self):
        m = CauchyImproperModel(5, 1)
        y = np.array([0.0, 1e-4, 1e-3, 1e3, 1e4])
        assert closed_form_condition((y - y.mean()) / np.ptp(y), 5, 1) < 1e-8
        value = cauchy_intensity_closed(m, y)
        assert value > 0
        assert value == pytest.approx(cauchy_intensity_quadrature(m, y), rel=1e-6)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0.2, 5), st.floats(-5, 5))
    def test_location_scale(self, y, c, shift):
        y = np.array(y)
        if np.min(np.diff(np.sort(y))) < 0.05 * max(np.ptp(y), 1e-9) or np.ptp(y) < 1e-3:
            return
        m = CauchyImproperModel(3, 1)
        assert cauchy_intensity_closed(m, c * y + shift) == pytest.approx(
            cauchy_intensity_closed(m, y) * c ** -(3 + 1 - 2), rel=1e-9)


class TestQuadrature:
    def test_agrees_with_closed(self):
        m = CauchyImproperModel(3, 2)
        assert cauchy_intensity_quadrature(m, [0, 1, 3]) == pytest.approx(1 / (12 * math.pi), rel=1e-3)

    def test_two_one(self):
        assert cauchy_intensity_quadrature(CauchyImproperModel(2, 1), [0, 1]) == pytest.approx(0.5, rel=1e-3)

    def test_scale(self):
        m = CauchyImproperModel(3, 1.5)
        y = np.array([0.0, 1.0, 3.0])
        a = cauchy_intensity_quadrature(m, 2.5 * y)
        b = cauchy_intensity_quadrature(m, y)
        assert a == pytest.approx(b * 2.5 ** -(3 + 1.5 - 2), rel=2e-3)


class TestRecurrence:
    def test_error_small_and_symmetric(self):
        m = CauchyImproperModel(3, 2)
        assert recurrence_check(m, [0, 1], 1e4) < 1e-3
        assert recurrence_check(m, [0, 1], -1e4) < 1e-3

    def test_monotone(self):
        m = CauchyImproperModel(3, 2)
        errs = [recurrence_check(m, [0, 1], v) for v in (1e2, 1e3, 1e4)]
        assert errs[0] > errs[1] > errs[2]

    def test_higher_order(self):
        m = CauchyImproperModel(4, 3)
        assert recurrence_check(m, [0, 1, 3], 1e4) < 1e-3

    def test_head_length(self):
        with pytest.raises(DomainError):
            recurrence_check(CauchyImproperModel(3, 2), [0, 1, 2], 10.0)
