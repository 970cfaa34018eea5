"""Gaussian location-scale family with prior ``dtheta dsigma / sigma**p``.

Marginal intensity on R^n::

    lambda_n(y) = Gamma((n+p-2)/2) 2**((p-3)/2) pi**(-(n-1)/2) n**(-1/2)
                  / S(y)**((n+p-2)/2),        S(y) = sum (y_i - ybar)**2

finite off the diagonal.  Ratios of these intensities give exchangeable
Student-t predictive densities, sampled one coordinate at a time by the
Gosset recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateSSQError, DomainError
from .measure import IntensityModel, register_model, register_predicate
from .rng import make_rng, stream

_LOG_2PI = math.log(2.0 * math.pi)


def _check_window(n: int, p: float) -> None:
    if n < 2 or not n > 2 - p:
        raise DomainError(f"Gaussian intensity needs n >= 2 and n > 2 - p (got n={n}, p={p})")


def log_intensity(y, p: float) -> np.ndarray:
    """``log lambda_n(y)`` for any length ``n = y.shape[-1]``; ``+inf`` on the diagonal."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    if not n + p - 2 > 0:
        raise DomainError(f"need n + p - 2 > 0 (n={n}, p={p})")
    ssq = np.sum((y - y.mean(axis=-1, keepdims=True)) ** 2, axis=-1)
    a = 0.5 * (n + p - 2)
    const = (gammaln(a) + 0.5 * (p - 3) * math.log(2.0)
             - 0.5 * (n - 1) * math.log(math.pi) - 0.5 * math.log(n))
    with np.errstate(divide="ignore"):
        return const - a * np.log(ssq)


@register_model("gaussian")
class GaussianImproperModel(IntensityModel):
    """i.i.d. ``N(theta, sigma**2)`` sequences of length ``n``, prior ``sigma**-p``.

    ``intensity_scale`` multiplies the closed-form intensity; it exists only
    so verification can be shown to catch a perturbed formula.
    """

    param_names = ("theta", "sigma")
    param_support = ("real", "positive")
    param_dim = 2

    def __init__(self, n: int, p: float, intensity_scale: float = 1.0):
        _check_window(int(n), float(p))
        self.n = int(n)
        self.p = float(p)
        self.obs_dim = self.n
        self.intensity_scale = float(intensity_scale)

    def __repr__(self):
        return f"GaussianImproperModel(n={self.n}, p={self.p:g})"

    def to_spec(self) -> dict:
        d = {"id": "gaussian", "n": self.n, "p": self.p}
        if self.intensity_scale != 1.0:
            d["intensity_scale"] = self.intensity_scale
        return d

    def log_prior(self, theta):
        sigma = np.asarray(theta, dtype=float)[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(sigma > 0, -self.p * np.log(sigma), -np.inf)

    def log_likelihood(self, theta, y):
        theta = np.asarray(theta, dtype=float)
        y = np.asarray(y, dtype=float)
        mu, sigma = theta[..., 0], theta[..., 1]
        n = y.shape[-1]
        ybar = y.mean(axis=-1)
        ssq = np.sum((y - y.mean(axis=-1, keepdims=True)) ** 2, axis=-1)
        q = ssq + n * (mu - ybar) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            return -n * np.log(sigma) - 0.5 * n * _LOG_2PI - q / (2.0 * sigma**2)

    @property
    def has_closed_form(self) -> bool:
        return True

    def marginal_intensity(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.n:
            raise DomainError(f"expected observations of length {self.n}")
        return self.intensity_scale * np.exp(log_intensity(y, self.p))

    def singular_distance(self, y):
        y = np.asarray(y, dtype=float)
        return np.sqrt(np.sum((y - y.mean(axis=-1, keepdims=True)) ** 2, axis=-1))

    def param_hint(self, y):
        y = np.asarray(y, dtype=float)
        spread = math.sqrt(float(np.mean((y - y.mean()) ** 2))) or 1.0
        return np.array([y.mean(), spread]), np.array([spread, 1.0])

    def quadrature_breakpoints(self, y):
        c, _ = self.param_hint(y)
        return [[float(c[0])], [float(c[1])]]


@register_predicate("diagonal-gap")
def _diagonal_gap(points, delta: float):
    """Every pair of coordinates differs by at least ``delta``."""
    pts = np.asarray(points, dtype=float)
    s = np.sort(pts, axis=1)
    return np.min(np.diff(s, axis=1), axis=1) >= delta


def gaussian_intensity(model: GaussianImproperModel, y) -> float:
    """Closed-form marginal intensity at ``y``; ``math.inf`` on the diagonal."""
    return float(model.marginal_intensity(np.asarray(y, dtype=float)))


def gaussian_posterior_density(model: GaussianImproperModel, y, theta, sigma) -> np.ndarray:
    """``phi_n(y; theta, sigma) sigma**-p / lambda_n(y)``."""
    y = np.asarray(y, dtype=float)
    lam = gaussian_intensity(model, y)
    if not 0 < lam < math.inf:
        raise DomainError("posterior undefined where the intensity is zero or infinite")
    pts = np.stack(np.broadcast_arrays(np.asarray(theta, float), np.asarray(sigma, float)), -1)
    return np.exp(model.log_joint(pts, y) - math.log(lam))


def student_predictive_density(model: GaussianImproperModel, y, x) -> np.ndarray:
    """Joint density of the next ``k`` coordinates: ``lambda_{n+k}(y, x) / lambda_n(y)``.

    ``x`` has shape ``(..., k)``.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    base = log_intensity(y, model.p)
    if not np.isfinite(base):
        raise DomainError("predictive density undefined on the diagonal")
    full = np.concatenate([np.broadcast_to(y, x.shape[:-1] + y.shape), x], axis=-1)
    return np.exp(log_intensity(full, model.p) - base)


# ---------------------------------------------------------------------------
# Gosset extension


@dataclass
class ExtensionState:
    """Running length, mean and centred sum of squares of a sequence."""

    length: int
    mean: float
    ssq: float

    @classmethod
    def from_values(cls, y) -> "ExtensionState":
        y = np.asarray(y, dtype=float)
        m = float(y.mean())
        return cls(len(y), m, float(np.sum((y - m) ** 2)))

    def update(self, v: float) -> "ExtensionState":
        n = self.length + 1
        delta = v - self.mean
        mean = self.mean + delta / n
        return ExtensionState(n, mean, self.ssq + delta * (v - mean))

    @property
    def s(self) -> float:
        """Sample standard deviation (divisor ``length - 1``)."""
        return math.sqrt(self.ssq / (self.length - 1))


def gosset_factor(m, p: float):
    """``sqrt((m**2 - 1) / (m (m + p - 2)))`` for current length ``m``."""
    m = np.asarray(m, dtype=float)
    return np.sqrt((m * m - 1.0) / (m * (m + p - 2.0)))


def student_innovations(rng: np.random.Generator, dfs: np.ndarray) -> np.ndarray:
    """Student-t draws with per-entry (possibly fractional) degrees of freedom.

    Gamma-mixture form: ``Z / sqrt(G / df)`` with ``G ~ chi2(df) = 2 Gamma(df/2)``.
    """
    dfs = np.asarray(dfs, dtype=float)
    if np.any(dfs <= 0):
        raise DomainError("Student-t needs positive degrees of freedom")
    z = rng.standard_normal(dfs.shape)
    g = 2.0 * rng.standard_gamma(0.5 * dfs)
    return z / np.sqrt(g / dfs)


def _check_extendable(model: GaussianImproperModel, y: np.ndarray) -> ExtensionState:
    if y.ndim != 1 or len(y) < 2:
        raise DomainError("initial sequence needs at least two values")
    if not len(y) + model.p - 2 > 0:
        raise DomainError("need n + p - 2 > 0")
    state = ExtensionState.from_values(y)
    if state.ssq == 0.0:
        raise DegenerateSSQError("initial sequence is constant (s_n = 0)")
    return state


def gosset_extend(model: GaussianImproperModel, y, steps: int, seed=None,
                  innovations=None) -> tuple[np.ndarray, ExtensionState]:
    """Extend ``y`` by ``steps`` values with the recursive Gosset rule.

    ``y_{m+1} = ybar_m + s_m eps_m sqrt((m^2-1)/(m(m+p-2)))`` with
    ``eps_m ~ t_{m+p-2}``.  ``innovations`` replaces the random ``eps`` (a test
    hook); otherwise they come from :func:`student_innovations` with ``seed``.
    """
    y = np.asarray(y, dtype=float)
    state = _check_extendable(model, y)
    n = len(y)
    m = np.arange(n, n + steps)
    if innovations is None:
        eps = student_innovations(make_rng(seed), m + model.p - 2.0)
    else:
        eps = np.broadcast_to(np.asarray(innovations, dtype=float), (steps,))
    factor = gosset_factor(m, model.p)
    out = np.empty(n + steps)
    out[:n] = y
    for j in range(steps):
        v = state.mean + state.s * eps[j] * factor[j]
        out[n + j] = v
        state = state.update(v)
    return out, state


@dataclass
class GossetLimit:
    """Terminal (ybar, s) per path plus the drift ``|ybar_N - ybar_{N/2}|``."""

    ybar: np.ndarray
    s: np.ndarray
    drift: np.ndarray
    steps: int

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.ybar.tolist(), self.s.tolist()))

    def to_csv(self) -> str:
        lines = ["path_index,ybar_final,s_final"]
        for i, (a, b) in enumerate(zip(self.ybar, self.s)):
            lines.append(f"{i},{a:.17g},{b:.17g}")
        return "\n".join(lines) + "\n"


def gosset_limit(model: GaussianImproperModel, y, steps: int = 10_000, paths: int = 1,
                 seed: int = 0, block: int = 128) -> GossetLimit:
    """Run ``paths`` independent Gosset extensions and keep the terminal statistics.

    Path ``i`` draws its innovations from ``stream(seed, i)`` exactly as
    :func:`gosset_extend` would.  Each step multiplies the sum of squares by
    ``1 + eps^2 c^2 m / ((m+1)(m-1))`` and moves the mean by ``s eps c/(m+1)``,
    so a whole path reduces to a cumulative product and a sum.
    """
    y = np.asarray(y, dtype=float)
    state = _check_extendable(model, y)
    n = len(y)
    m = np.arange(n, n + steps, dtype=float)
    dfs = m + model.p - 2.0
    c = gosset_factor(m, model.p)
    growth_coef = c * c * m / ((m + 1.0) * (m - 1.0))
    half = steps // 2
    ybar = np.empty(paths)
    s_fin = np.empty(paths)
    drift = np.empty(paths)
    for b0 in range(0, paths, block):
        idx = range(b0, min(b0 + block, paths))
        eps = np.stack([student_innovations(stream(seed, i), dfs) for i in idx])
        log_ssq = math.log(state.ssq) + np.concatenate(
            [np.zeros((len(eps), 1)), np.cumsum(np.log1p(eps**2 * growth_coef), axis=1)], axis=1)
        # s_m for m = n .. n+steps-1
        s_m = np.exp(0.5 * (log_ssq[:, :-1] - np.log(m - 1.0)))
        moves = s_m * eps * c / (m + 1.0)
        csum = np.cumsum(moves, axis=1)
        ybar[b0:b0 + len(eps)] = state.mean + csum[:, -1]
        s_fin[b0:b0 + len(eps)] = np.exp(0.5 * (log_ssq[:, -1] - math.log(n + steps - 1)))
        mid = csum[:, half - 1] if half > 0 else 0.0
        drift[b0:b0 + len(eps)] = np.abs(csum[:, -1] - mid)
    return GossetLimit(ybar, s_fin, drift, steps)
