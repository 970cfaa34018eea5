"""The exponential-ratio example behind the marginalization paradox.

Observations ``(x, y)`` are independent exponentials with rates ``theta*phi``
and ``phi``; the joint density is ``theta phi^2 exp(-phi (theta x + y))``.
The prior is ``pi(theta) rho(phi)`` with both factors drawn from a small
registry.  With ``g(s) = integral phi^2 exp(-s phi) rho(phi) dphi`` the
bivariate intensity is ``lambda(x, y) = integral theta pi(theta) g(theta x + y) dtheta``.

Throughout, ``z = y / x``; the reciprocal ratio ``x / y`` describes the same
events with ``(a, b)`` replaced by ``(1/b, 1/a)``.  Given ``theta`` (whatever
``phi``), ``z / theta`` has CDF ``w / (1 + w)``, the F(2, 2) law.

Two formal posteriors for ``theta`` compete:

* the full-data one, ``pi(theta) theta g(theta x + y)``, which for flat
  ``rho`` is ``pi(theta) theta / (theta + z)^3`` up to a constant;
* the reduced one built from the law of ``z`` alone,
  ``pi(theta) theta / (theta + z)^2``.

The point process settles the matter: the first is the conditional law of
an event, while the second presumes that the process of ratios is
observable, which for flat ``rho`` it is not (every interval of ratios has
infinite mass).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaln

from .conditional import GridLaw, PosteriorLaw, posterior_for_event
from .errors import (
    DivergentIntensityError,
    DomainError,
    InconclusiveError,
    NonConvergedError,
    NonNormalizableError,
)
from .measure import (
    NOT_OBSERVABLE_INFINITE,
    NOT_OBSERVABLE_ZERO,
    OBSERVABLE,
    IntensityModel,
    register_model,
    register_predicate,
)
from .quadrature import gauss_kronrod
from .rng import make_rng
from .verify import Certificate, divergence_certificate, doubling_ladder, halving_ladder

NORMALIZABLE = "NORMALIZABLE"
NON_NORMALIZABLE = "NON_NORMALIZABLE"

# log-coordinate half-width for integrals over (0, inf)
_LOG_HALF_WIDTH = 60.0
_QUAD_EPSREL = 1e-11


# ---------------------------------------------------------------------------
# priors on (0, inf)

PRIOR_KINDS = ("flat", "power", "uniform", "exp")


@dataclass(frozen=True)
class Prior:
    """A named density on (0, inf) with a declared integrability hint.

    ``flat``: 1.  ``power(k)``: ``t**k``.  ``uniform(upper)``: 1 on
    (0, upper).  ``exp(rate)``: ``exp(-rate t)``.  The first two are locally
    finite with infinite total mass; the last two are totally finite.
    """

    kind: str = "flat"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise DomainError(f"unknown prior kind {self.kind!r}")
        p = self.params
        if self.kind == "uniform" and not float(p.get("upper", 0)) > 0:
            raise DomainError("uniform prior needs upper > 0")
        if self.kind == "exp" and not float(p.get("rate", 0)) > 0:
            raise DomainError("exp prior needs rate > 0")
        if self.kind == "power" and not float(p.get("k", 0)) > -1:
            raise DomainError("power prior needs k > -1 to be locally finite")

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    @property
    def hint(self) -> str:
        return "totally_finite" if self.kind in ("uniform", "exp") else "locally_finite"

    @property
    def upper(self) -> float:
        return float(self.params["upper"]) if self.kind == "uniform" else math.inf

    @property
    def total_mass(self) -> float:
        if self.kind == "uniform":
            return self.upper
        if self.kind == "exp":
            return 1.0 / float(self.params["rate"])
        return math.inf

    def log_density(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "flat":
                out = np.zeros_like(t)
            elif self.kind == "power":
                out = float(self.params["k"]) * np.log(t)
            elif self.kind == "uniform":
                out = np.where(t < self.upper, 0.0, -np.inf)
            else:
                out = -float(self.params["rate"]) * t
        return np.where(t > 0, out, -np.inf)

    def density(self, t) -> np.ndarray:
        return np.exp(self.log_density(t))

    def phi_moment(self, s) -> np.ndarray:
        """``integral phi^2 exp(-s phi) density(phi) dphi`` for ``s > 0``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "flat":
            return 2.0 / s**3
        if self.kind == "power":
            k = float(self.params["k"])
            return np.exp(gammaln(3.0 + k) - (3.0 + k) * np.log(s))
        if self.kind == "uniform":
            return 2.0 * gammainc(3.0, s * self.upper) / s**3
        return 2.0 / (s + float(self.params["rate"])) ** 3

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d) -> "Prior":
        if isinstance(d, str):
            return cls(d)
        d = dict(d)
        kind = d.pop("kind", "flat")
        return cls(kind, {k: float(v) for k, v in d.items()})


FLAT = Prior("flat")


def _as_prior(p) -> Prior:
    return p if isinstance(p, Prior) else Prior.from_dict(p)


# ---------------------------------------------------------------------------
# integrals over theta


class _NoDecay(Exception):
    pass


def _theta_integral(kernel, prior: Prior, scale, epsrel: float = _QUAD_EPSREL):
    """``integral_0^upper kernel(theta) dtheta`` in log coordinates.

    ``kernel`` maps an array of shape ``(15, m)`` of thetas to values of the
    same shape; ``scale`` (length ``m``) places the log window when the
    support is unbounded.  Raises ``_NoDecay`` when the integrand is not
    negligible at the upper edge of the window.
    """
    scale = np.atleast_1d(np.asarray(scale, dtype=float))
    if math.isfinite(prior.upper):
        base = np.full_like(scale, prior.upper)
        lo, hi = -2.0 * _LOG_HALF_WIDTH, 0.0
    else:
        base = scale
        lo, hi = -_LOG_HALF_WIDTH, _LOG_HALF_WIDTH

    def f(v):
        theta = base[None, :] * np.exp(v)[:, None]
        with np.errstate(all="ignore"):
            out = kernel(theta) * theta
        return np.where(np.isnan(out), 0.0, out)

    val, _ = gauss_kronrod(f, lo, hi, epsabs=0.0, epsrel=epsrel, limit=4000, points=(0.0,))
    val = np.atleast_1d(val)
    if not math.isfinite(prior.upper):
        edge = f(np.array([hi]))[0]
        if np.any(edge > 1e-3 * epsrel * np.abs(val)):
            raise _NoDecay()
    return val


def _theta_certificate(kernel_scalar, scale: float) -> Certificate:
    """Ladder of ``integral_0^T`` with ``T`` doubling from ``scale``."""
    def integrate(T):
        def f(v):
            theta = T * np.exp(v)
            with np.errstate(all="ignore"):
                out = kernel_scalar(theta) * theta
            return np.where(np.isnan(out), 0.0, out)
        return gauss_kronrod(f, -2.0 * _LOG_HALF_WIDTH, 0.0, epsabs=0.0, epsrel=1e-10,
                             limit=4000)[0]

    return divergence_certificate(None, doubling_ladder(scale, 48), integrate=integrate)


# ---------------------------------------------------------------------------
# model


@register_model("paradox")
class ParadoxModel(IntensityModel):
    """Exponential-ratio model with prior ``pi(theta) rho(phi)`` on (0, inf)^2."""

    param_names = ("theta", "phi")
    param_support = ("positive", "positive")
    param_dim = 2
    obs_dim = 2

    def __init__(self, theta_prior=FLAT, phi_prior=FLAT):
        self.theta_prior = _as_prior(theta_prior)
        self.phi_prior = _as_prior(phi_prior)

    def __repr__(self):
        return f"ParadoxModel(theta_prior={self.theta_prior.to_dict()}, phi_prior={self.phi_prior.to_dict()})"

    def to_spec(self) -> dict:
        return {"id": "paradox", "theta_prior": self.theta_prior.to_dict(),
                "phi_prior": self.phi_prior.to_dict()}

    @classmethod
    def from_spec(cls, spec: dict) -> "ParadoxModel":
        return cls(spec.get("theta_prior", "flat"), spec.get("phi_prior", "flat"))

    def log_prior(self, theta):
        t = np.asarray(theta, dtype=float)
        return self.theta_prior.log_density(t[..., 0]) + self.phi_prior.log_density(t[..., 1])

    def log_likelihood(self, theta, y):
        t = np.asarray(theta, dtype=float)
        obs = np.asarray(y, dtype=float)
        th, ph = t[..., 0], t[..., 1]
        x, yy = obs[..., 0], obs[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(th) + 2.0 * np.log(ph) - ph * (th * x + yy)
        return np.where((x > 0) & (yy > 0), out, -np.inf)

    @property
    def has_closed_form(self) -> bool:
        return self.theta_prior.kind in ("flat", "uniform") and self.phi_prior.kind in ("flat", "exp")

    def marginal_intensity(self, y):
        obs = np.asarray(y, dtype=float)
        flat = obs.reshape(-1, 2)
        out = bivariate_intensity(self, flat[:, 0], flat[:, 1])
        return float(out[0]) if obs.ndim == 1 else out.reshape(obs.shape[:-1])

    def singular_distance(self, y):
        obs = np.asarray(y, dtype=float)
        return np.minimum(obs[..., 0], obs[..., 1])

    def param_hint(self, y):
        x, yy = (float(v) for v in np.asarray(y, dtype=float))
        z = yy / x
        if math.isfinite(self.theta_prior.upper):
            z = min(z, 0.5 * self.theta_prior.upper)
        return np.array([z, 1.5 / yy]), np.array([1.0, 1.0])

    def quadrature_breakpoints(self, y):
        c, _ = self.param_hint(y)
        b0 = [float(c[0])] + ([self.theta_prior.upper] if math.isfinite(self.theta_prior.upper) else [])
        b1 = [float(c[1])] + ([self.phi_prior.upper] if math.isfinite(self.phi_prior.upper) else [])
        return [b0, b1]


@register_predicate("wedge")
def _wedge(points, a: float, b: float):
    """``a < y / x < b`` for points ``(x, y)`` with ``x > 0``."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = y / x
    return (x > 0) & (z > a) & (z < b)


def _closed_intensity(model: ParadoxModel, x, y):
    c = float(model.phi_prior.params.get("rate", 0.0)) if model.phi_prior.kind == "exp" else 0.0
    s = y + c
    if model.theta_prior.kind == "flat":
        return 1.0 / (x * x * s)
    T = model.theta_prior.upper
    return T * T / (s * (s + T * x) ** 2)


def bivariate_intensity(model: ParadoxModel, x, y, tol: float = _QUAD_EPSREL,
                        method: str = "auto") -> np.ndarray:
    """``lambda(x, y) = integral theta pi(theta) g(theta x + y) dtheta`` for ``x, y > 0``.

    ``method`` is ``"closed"`` (flat or uniform ``pi`` with flat or
    exponential ``rho``), ``"quadrature"``, or ``"auto"`` (closed form when
    available).  Returns an array matching the broadcast shape of ``x, y``.

    Raises
    ------
    DomainError
        For non-positive coordinates, or ``"closed"`` without a closed form.
    DivergentIntensityError
        When the prior makes the integral infinite.
    NonConvergedError
        When quadrature neither converges nor certifies divergence.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("bivariate intensity needs x, y > 0")
    if method == "closed" or (method == "auto" and model.has_closed_form):
        if not model.has_closed_form:
            raise DomainError("no closed form for this prior pair")
        return _closed_intensity(model, x, y)
    if method not in ("auto", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    xs, ys = x.ravel(), y.ravel()
    tp, pp = model.theta_prior, model.phi_prior

    def kernel(theta):
        return theta * tp.density(theta) * pp.phi_moment(theta * xs[None, :] + ys[None, :])

    try:
        vals = _theta_integral(kernel, tp, ys / xs, tol)
    except _NoDecay:
        i = 0
        cert = _theta_certificate(
            lambda th: th * tp.density(th) * pp.phi_moment(th * xs[i] + ys[i]), ys[i] / xs[i])
        if not cert.finite:
            raise DivergentIntensityError("prior makes the bivariate intensity infinite",
                                          certificate=cert.to_dict()) from None
        raise NonConvergedError("bivariate intensity decays too slowly for quadrature") from None
    return vals.reshape(x.shape)


# ---------------------------------------------------------------------------
# the two formal posteriors


def _method1_kernel(model: ParadoxModel, x: float, y: float):
    tp, pp = model.theta_prior, model.phi_prior
    return lambda th: th * tp.density(th) * pp.phi_moment(th * x + y)


class ThetaLaw(GridLaw):
    """A normalized density over ``theta`` built from a kernel and its integral."""

    def __init__(self, kernel, normalizer: float, centre: float):
        self.kernel = kernel
        self.normalizer = float(normalizer)
        self._log_norm = math.log(self.normalizer)
        super().__init__(self._log_q, ("positive",), [centre], [1.0])

    def _log_q(self, t):
        th = np.asarray(t, dtype=float)[..., 0]
        with np.errstate(divide="ignore"):
            return np.log(self.kernel(th)) - self._log_norm

    def pdf(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        return self.kernel(th) / self.normalizer


def method1_posterior(model: ParadoxModel, x: float, y: float) -> ThetaLaw:
    """Full-data formal posterior ``pi(theta) theta g(theta x + y)``, normalized over theta.

    For flat ``rho`` this is ``pi(theta) theta / (theta + z)^3`` normalized,
    and for flat ``pi`` as well it equals ``2 z theta / (theta + z)^3``.

    Raises
    ------
    DivergentIntensityError
        When the kernel is not integrable.
    """
    if not (x > 0 and y > 0):
        raise DomainError("method 1 needs x, y > 0")
    kernel = _method1_kernel(model, x, y)
    try:
        norm = float(_theta_integral(lambda th: kernel(th), model.theta_prior, [y / x])[0])
    except _NoDecay:
        raise DivergentIntensityError("full-data kernel is not integrable") from None
    if not norm > 0:
        raise DivergentIntensityError("full-data kernel integrates to zero")
    return ThetaLaw(kernel, norm, _centre(model, y / x))


def _centre(model: ParadoxModel, z: float) -> float:
    up = model.theta_prior.upper
    return min(z, 0.5 * up) if math.isfinite(up) else z


def method2_kernel(model: ParadoxModel, z, theta) -> np.ndarray:
    """Reduced-data kernel ``pi(theta) theta / (theta + z)^2`` (unnormalized)."""
    th = np.asarray(theta, dtype=float)
    with np.errstate(invalid="ignore"):
        out = model.theta_prior.density(th) * th / (th + z) ** 2
    return np.where(th > 0, out, 0.0)


@dataclass
class Method2Result:
    """Normalizability verdict for the reduced-data kernel at one ``z``."""

    z: float
    verdict: str
    certificate: Certificate
    law: ThetaLaw | None = None

    @property
    def normalizable(self) -> bool:
        return self.verdict == NORMALIZABLE

    def pdf(self, theta) -> np.ndarray:
        if self.law is None:
            raise NonNormalizableError(f"reduced-data kernel at z={self.z:g} is not normalizable")
        return self.law.pdf(theta)


def method2_verdict(model: ParadoxModel, z: float) -> Method2Result:
    """Decide whether ``integral method2_kernel dtheta`` is finite, by a doubling ladder in theta.

    When finite, the normalized law is attached (its constant recomputed by
    full-range quadrature).
    """
    if not z > 0:
        raise DomainError("z must be positive")

    def k(th):
        return method2_kernel(model, z, th)

    cert = _theta_certificate(k, z)
    if not cert.finite:
        return Method2Result(z, NON_NORMALIZABLE, cert)
    try:
        norm = float(_theta_integral(lambda th: k(th), model.theta_prior, [z])[0])
    except _NoDecay:
        norm = cert.value
    return Method2Result(z, NORMALIZABLE, cert, ThetaLaw(k, norm, _centre(model, z)))


# ---------------------------------------------------------------------------
# the process of ratios


def ratio_cdf(t, theta):
    """``P(Z <= t | theta) = t / (theta + t)``, whatever ``phi``."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, t / (theta + t), 0.0)


def ratio_interval_probability(theta, a: float, b: float):
    """``P(a < Z < b | theta)``."""
    theta = np.asarray(theta, dtype=float)
    return b / (theta + b) - a / (theta + a)


@dataclass
class ZMarginalResult:
    """Verdict for the ratio interval ``(a, b)``, with the wedge ladder behind it."""

    a: float
    b: float
    status: str
    measure: float
    certificate: Certificate | None

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "status": self.status,
            "measure": "inf" if math.isinf(self.measure) else float(f"{self.measure:.17g}"),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def _wedge_box_integral(model: ParadoxModel, a: float, b: float, lo: float, hi: float) -> float:
    """``integral_a^b integral_lo^hi lambda(x, z x) x dx dz`` (the wedge in (z, x) coordinates)."""
    def outer(z):
        if hi <= lo:
            return np.zeros(len(z))

        def inner(v):
            x = np.exp(v)[:, None]
            zz = z[None, :]
            return bivariate_intensity(model, x, zz * x) * x * x
        val, _ = gauss_kronrod(inner, math.log(lo), math.log(hi), epsabs=0.0, epsrel=1e-10,
                               limit=4000)
        return np.atleast_1d(val)

    val, _ = gauss_kronrod(outer, a, b, epsabs=0.0, epsrel=1e-9, limit=4000)
    return float(val)


def z_marginal_observability(model: ParadoxModel, a: float, b: float) -> ZMarginalResult:
    """Is the interval ``a < y/x < b`` of ratios observable?

    The wedge is integrated over boxes ``eps < x < 1/eps`` with ``eps``
    halving; the ladder certificate decides between a finite mass and
    divergence.

    Raises
    ------
    NonConvergedError
        When the ladder is inconclusive.
    """
    if not (0 < a <= b < math.inf):
        raise DomainError("need 0 < a <= b < inf")
    if a == b:
        return ZMarginalResult(a, b, NOT_OBSERVABLE_ZERO, 0.0, None)
    ladder = halving_ladder(0.5, 48)
    try:
        cert = divergence_certificate(
            None, ladder, integrate=lambda eps: _wedge_box_integral(model, a, b, eps, 1.0 / eps))
    except InconclusiveError as exc:
        raise NonConvergedError(f"ratio-interval mass inconclusive: {exc}") from exc
    if not cert.finite:
        return ZMarginalResult(a, b, NOT_OBSERVABLE_INFINITE, math.inf, cert)
    status = OBSERVABLE if cert.value > 0 else NOT_OBSERVABLE_ZERO
    return ZMarginalResult(a, b, status, cert.value, cert)


def z_marginal_mass_by_parameters(model: ParadoxModel, a: float, b: float) -> float:
    """The same mass by the parameter route: ``rho(R+) integral pi(theta) P(a<Z<b|theta) dtheta``.

    Returns ``math.inf`` when either factor is infinite.
    """
    if a == b:
        return 0.0
    rho_total = model.phi_prior.total_mass
    tp = model.theta_prior

    def k(th):
        return tp.density(th) * ratio_interval_probability(th, a, b)

    try:
        val = float(_theta_integral(lambda th: k(th), tp, [math.sqrt(a * b)])[0])
    except _NoDecay:
        cert = _theta_certificate(k, math.sqrt(a * b))
        if not cert.finite:
            return math.inf
        val = cert.value
    return math.inf if math.isinf(rho_total) else rho_total * val


@register_model("paradox-ratio")
class RatioModel(IntensityModel):
    """The process of ratios ``z = y/x``: parameters ``(theta, phi)``, one observation ``z``.

    Its likelihood is the ratio density ``theta / (theta + z)^2``; its mean
    measure is finite on bounded intervals only when ``rho`` is totally
    finite and ``pi`` integrates ``1/theta`` at infinity.
    """

    param_names = ("theta", "phi")
    param_support = ("positive", "positive")
    param_dim = 2
    obs_dim = 1

    def __init__(self, theta_prior=FLAT, phi_prior=FLAT):
        self.theta_prior = _as_prior(theta_prior)
        self.phi_prior = _as_prior(phi_prior)

    def to_spec(self) -> dict:
        return {"id": "paradox-ratio", "theta_prior": self.theta_prior.to_dict(),
                "phi_prior": self.phi_prior.to_dict()}

    @classmethod
    def from_spec(cls, spec: dict) -> "RatioModel":
        return cls(spec.get("theta_prior", "flat"), spec.get("phi_prior", "flat"))

    def log_prior(self, theta):
        t = np.asarray(theta, dtype=float)
        return self.theta_prior.log_density(t[..., 0]) + self.phi_prior.log_density(t[..., 1])

    def log_likelihood(self, theta, y):
        t = np.asarray(theta, dtype=float)
        z = np.asarray(y, dtype=float)[..., 0]
        th = t[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(th) - 2.0 * np.log(th + z)

    def param_hint(self, y):
        z = float(np.asarray(y, dtype=float).ravel()[0])
        up = self.theta_prior.upper
        c0 = min(z, 0.5 * up) if math.isfinite(up) else z
        c1 = self.phi_prior.total_mass
        c1 = 1.0 if not math.isfinite(c1) else 0.5 * c1
        return np.array([c0, c1]), np.array([1.0, 1.0])

    def quadrature_breakpoints(self, y):
        c, _ = self.param_hint(y)
        b0 = [float(c[0])] + ([self.theta_prior.upper] if math.isfinite(self.theta_prior.upper) else [])
        b1 = [float(c[1])] + ([self.phi_prior.upper] if math.isfinite(self.phi_prior.upper) else [])
        return [b0, b1]


@dataclass
class ConditionalGivenZ:
    """Conditional law of ``(theta, phi)`` given a ratio ``z`` of an observable ratio process."""

    z: float
    law: PosteriorLaw
    theta_normalizer: float
    model: ParadoxModel

    def density(self, theta, phi) -> np.ndarray:
        pts = np.stack(np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float)), -1)
        return self.law.density(pts)

    def theta_marginal(self, theta) -> np.ndarray:
        """Theta density with phi integrated out numerically."""
        return self.law.marginal_density(0, theta)

    def theta_factor(self, theta) -> np.ndarray:
        return method2_kernel(self.model, self.z, theta) / self.theta_normalizer

    def phi_factor(self, phi) -> np.ndarray:
        return self.model.phi_prior.density(phi) / self.model.phi_prior.total_mass

    def sample(self, count: int, seed) -> np.ndarray:
        return self.law.sample(count, seed)


def conditional_given_z(model: ParadoxModel, z: float) -> ConditionalGivenZ:
    """Law ``proportional to pi(theta) rho(phi) theta / (theta + z)^2`` attached to a ratio event.

    Built as the per-event conditional of the ratio process, whose intensity
    at ``z`` is computed by 2-D quadrature over ``(theta, phi)``.

    Raises
    ------
    NonNormalizableError
        When ``rho`` has infinite mass or the theta kernel is not integrable.
    """
    if not z > 0:
        raise DomainError("z must be positive")
    if not math.isfinite(model.phi_prior.total_mass):
        raise NonNormalizableError("rho has infinite total mass; the ratio process is not observable")
    m2 = method2_verdict(model, z)
    if not m2.normalizable:
        raise NonNormalizableError(f"theta kernel at z={z:g} is not integrable",
                                   certificate=m2.certificate.to_dict())
    ratio = RatioModel(model.theta_prior, model.phi_prior)
    law = posterior_for_event(ratio, np.array([z]))
    return ConditionalGivenZ(float(z), law, m2.law.normalizer, model)


# ---------------------------------------------------------------------------
# simulation and report


def sample_observations(theta: float, phi: float, count: int, seed) -> np.ndarray:
    """``count`` pairs ``(x, y)`` with ``x ~ Exp(rate theta phi)`` and ``y ~ Exp(rate phi)``."""
    if not (theta > 0 and phi > 0):
        raise DomainError("theta and phi must be positive")
    rng = make_rng(seed)
    x = rng.exponential(1.0 / (theta * phi), count)
    y = rng.exponential(1.0 / phi, count)
    return np.column_stack([x, y])


def default_theta_grid() -> np.ndarray:
    return np.concatenate([np.linspace(0.0, 10.0, 1001), np.geomspace(10.0, 1e5, 2001)[1:]])


def paradox_report(model: ParadoxModel, x: float = 1.0, y: float = 1.0,
                   interval: tuple[float, float] = (0.5, 2.0), theta_grid=None) -> dict:
    """Both formal posteriors on a theta grid, the ratio-interval verdict and its ladders.

    ``method1.mass`` is the trapezoid sum of the method-1 densities over the
    grid, a quick normalization check.  The default grid is uniform on [0, 10]
    and geometric out to 1e5, since the posteriors may have tails as heavy as
    ``theta**-2``.
    """
    if theta_grid is None:
        theta_grid = default_theta_grid()
    grid = np.asarray(theta_grid, dtype=float)
    z = y / x
    m1 = method1_posterior(model, x, y)
    d1 = m1.pdf(grid)
    m2 = method2_verdict(model, z)
    zres = z_marginal_observability(model, *interval)
    report = {
        "model": model.to_spec(),
        "event": {"x": x, "y": y, "z": z},
        "theta_grid": _floats(grid),
        "method1": {"density": _floats(d1), "mass": _f(np.trapezoid(d1, grid))},
        "method2": {
            "verdict": m2.verdict,
            "density": _floats(m2.pdf(grid)) if m2.normalizable else None,
        },
        "z_marginal": zres.status,
        "z_marginal_measure": zres.to_dict()["measure"],
        "certificates": {
            "method2": m2.certificate.to_dict(),
            "z_marginal": None if zres.certificate is None else zres.certificate.to_dict(),
        },
    }
    return report


def _f(v) -> float:
    return float(f"{float(v):.17g}")


def _floats(arr) -> list[float]:
    return [_f(v) for v in np.asarray(arr, dtype=float)]


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True)
