"""Cauchy location-scale family with prior ``dtheta1 dtheta2 / theta2**p``.

For integer ``p`` (with ``0 < p < n``) the marginal intensity is an
alternating sum over ordered pairs ``r != s`` of coordinates, with
``d_r = prod_{t != r} (y_t - y_r)``::

    (n-p) odd:   (-1)**((n-p+1)/2) / (pi**(n-2) 2**(n-p+1)) * sum |y_s-y_r|**(n-p) / (d_r d_s)
    (n-p) even:  (-1)**((n-p)/2+1) / (pi**(n-1) 2**(n-p))   * sum (y_s-y_r)**(n-p) log|y_s-y_r| / (d_r d_s)

The even-case sign makes the intensity positive; without the extra ``-1``
the same expression is the negated density.  Both cases also hold for
``p = 1``.

The sum cancels heavily when coordinates are spread over many scales, so it
is accumulated with compensated summation and abandoned for quadrature when
the cancellation is too severe.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CoincidentCoordinatesError, DomainError
from .measure import IntensityModel, quadrature_intensity, register_model

# below this ratio |sum| / sum|terms| the closed form is not trusted
CONDITION_FLOOR = 1e-8
# pairwise gaps below this fraction of the spread count as coincident
COINCIDENCE_RATIO = 1e-8


def _check_window(n: int, p: float) -> None:
    if n < 2 or not 0 < p < n:
        raise DomainError(f"Cauchy intensity needs n >= 2 and 0 < p < n (got n={n}, p={p})")


@register_model("cauchy")
class CauchyImproperModel(IntensityModel):
    """i.i.d. Cauchy(theta1, theta2) sequences of length ``n``, prior ``theta2**-p``."""

    param_names = ("theta1", "theta2")
    param_support = ("real", "positive")
    param_dim = 2

    def __init__(self, n: int, p: float):
        _check_window(int(n), float(p))
        self.n = int(n)
        self.p = float(p)
        self.obs_dim = self.n

    def __repr__(self):
        return f"CauchyImproperModel(n={self.n}, p={self.p:g})"

    def to_spec(self) -> dict:
        return {"id": "cauchy", "n": self.n, "p": self.p}

    @property
    def integer_p(self) -> bool:
        return float(self.p).is_integer()

    @property
    def has_closed_form(self) -> bool:
        return self.integer_p

    def log_prior(self, theta):
        t2 = np.asarray(theta, dtype=float)[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t2 > 0, -self.p * np.log(t2), -np.inf)

    def log_likelihood(self, theta, y):
        theta = np.asarray(theta, dtype=float)
        y = np.asarray(y, dtype=float)
        t1, t2 = theta[..., 0:1], theta[..., 1:2]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.log(t2) - math.log(math.pi) - np.log(t2**2 + (y - t1) ** 2)
        return terms.sum(axis=-1)

    def marginal_intensity(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.n:
            raise DomainError(f"expected observations of length {self.n}")
        if y.ndim == 1:
            return self._intensity_one(y)
        flat = y.reshape(-1, self.n)
        out = np.array([self._intensity_one(row) for row in flat])
        return out.reshape(y.shape[:-1])

    def _intensity_one(self, y: np.ndarray) -> float:
        if _min_gap(y) == 0.0:
            return math.inf
        if self.has_closed_form:
            return cauchy_intensity_closed(self, y)
        return cauchy_intensity_quadrature(self, y)

    def singular_distance(self, y):
        y = np.asarray(y, dtype=float)
        s = np.sort(y, axis=-1)
        return np.min(np.diff(s, axis=-1), axis=-1) / math.sqrt(2.0)

    def param_hint(self, y):
        y = np.asarray(y, dtype=float)
        spread = float(np.median(np.abs(y - np.median(y)))) or float(np.ptp(y)) or 1.0
        return np.array([float(np.median(y)), spread]), np.array([spread, 1.0])

    def quadrature_breakpoints(self, y):
        y = np.asarray(y, dtype=float)
        gaps = np.diff(np.sort(y))
        return [sorted(set(y.tolist())),
                sorted({float(g) for g in gaps if g > 0} | {float(np.ptp(y))})]


def _min_gap(y: np.ndarray) -> float:
    return float(np.min(np.diff(np.sort(y)))) if len(y) > 1 else math.inf


def _check_distinct(y: np.ndarray) -> None:
    spread = float(np.ptp(y))
    gap = _min_gap(y)
    if gap == 0.0 or gap < COINCIDENCE_RATIO * spread:
        raise CoincidentCoordinatesError(
            f"coordinates closer than {COINCIDENCE_RATIO:g} of their spread", min_gap=gap
        )


def lambda_2_1(y) -> float:
    """``1 / (2 |y1 - y2|)``, the intensity at ``(n, p) = (2, 1)``."""
    y = np.asarray(y, dtype=float)
    return 1.0 / (2.0 * abs(y[0] - y[1]))


def lambda_3_2(y) -> float:
    """``1 / (2 pi |(y1-y2)(y2-y3)(y1-y3)|)``, the intensity at ``(n, p) = (3, 2)``."""
    y = np.asarray(y, dtype=float)
    return 1.0 / (2.0 * math.pi * abs((y[0] - y[1]) * (y[1] - y[2]) * (y[0] - y[2])))


SPECIAL_CASES = {(2, 1): lambda_2_1, (3, 2): lambda_3_2}


def pair_sum_terms(y, n: int, p: int) -> list[float]:
    """Terms of the ordered-pair sum in the closed form (without the prefactor)."""
    y = np.asarray(y, dtype=float)
    k = n - p
    diff = y[None, :] - y[:, None]  # diff[r, s] = y_s - y_r
    off = ~np.eye(n, dtype=bool)
    d = np.prod(np.where(off, diff, 1.0), axis=1)
    terms = []
    for r in range(n):
        for s in range(n):
            if r == s:
                continue
            g = diff[r, s]
            if k % 2:
                num = abs(g) ** k
            else:
                num = g**k * math.log(abs(g))
            terms.append(num / (d[r] * d[s]))
    return terms


def _prefactor(n: int, p: int) -> float:
    k = n - p
    if k % 2:
        return (-1) ** ((k + 1) // 2) / (math.pi ** (n - 2) * 2.0 ** (k + 1))
    return (-1) ** (k // 2 + 1) / (math.pi ** (n - 1) * 2.0**k)


def closed_form_condition(y, n: int, p: int) -> float:
    """``|sum| / sum |terms|`` of the pair sum; small values flag cancellation."""
    terms = pair_sum_terms(y, n, p)
    mag = math.fsum(abs(t) for t in terms)
    return abs(math.fsum(terms)) / mag if mag > 0 else 0.0


def cauchy_intensity_closed(model: CauchyImproperModel, y, use_special: bool = True) -> float:
    """Closed-form intensity for integer ``p``.

    ``(2, 1)`` and ``(3, 2)`` are evaluated from their short forms unless
    ``use_special`` is false.  Falls back to quadrature when the pair sum has
    cancelled below :data:`CONDITION_FLOOR`.

    Raises
    ------
    CoincidentCoordinatesError
        When two coordinates (nearly) coincide.
    DomainError
        For non-integer ``p``.
    """
    y = np.asarray(y, dtype=float)
    n, p = model.n, model.p
    if len(y) != n:
        raise DomainError(f"expected observations of length {n}")
    _check_distinct(y)
    key = (n, int(p)) if model.integer_p else None
    if use_special and key in SPECIAL_CASES:
        return SPECIAL_CASES[key](y)
    if not model.has_closed_form:
        raise DomainError(f"no closed form at (n, p) = ({n}, {p:g})")
    ip = int(p)
    # translation and scale invariance: centre and normalize before summing
    spread = float(np.ptp(y))
    z = (y - float(np.mean(y))) / spread
    terms = pair_sum_terms(z, n, ip)
    pos = math.fsum(t for t in terms if t > 0)
    neg = math.fsum(-t for t in terms if t < 0)
    total = pos - neg
    if (pos + neg) == 0 or abs(total) / (pos + neg) < CONDITION_FLOOR:
        return cauchy_intensity_quadrature(model, y)
    # for even n - p rescaling adds log(spread) * sum g**k / (d_r d_s), a sum
    # of divided differences of low-degree monomials, which vanishes
    value = _prefactor(n, ip) * total
    return value * spread ** (-(n + p - 2))


def cauchy_intensity_quadrature(model: CauchyImproperModel, y, tol: float = 1e-9) -> float:
    """Intensity by 2-D adaptive quadrature of the product-Cauchy likelihood times the prior."""
    y = np.asarray(y, dtype=float)
    if len(y) != model.n:
        raise DomainError(f"expected observations of length {model.n}")
    _check_distinct(y)
    return quadrature_intensity(model, y, epsrel=tol)


def recurrence_check(model: CauchyImproperModel, y_head, y_tail: float) -> float:
    """``|pi y_tail**2 lambda_{n,p}(y_head, y_tail) / lambda_{n-1,p-1}(y_head) - 1|``."""
    y_head = np.asarray(y_head, dtype=float)
    if len(y_head) != model.n - 1:
        raise DomainError(f"head must have length {model.n - 1}")
    reduced = CauchyImproperModel(model.n - 1, model.p - 1)
    full = model.marginal_intensity(np.append(y_head, y_tail))
    head = reduced.marginal_intensity(y_head)
    return abs(math.pi * y_tail**2 * full / head - 1.0)
