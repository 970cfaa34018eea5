"""Binary sequences with the prior ``dtheta / (theta (1 - theta))`` on (0, 1).

A sequence with ``n1`` ones and ``n0`` zeros has intensity
``Gamma(n0) Gamma(n1) / Gamma(n)`` (counting measure on {0,1}^n), infinite
for the two constant sequences.  The attached parameter is Beta(n1, n0) and
the predictive extension is the Polya urn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DivergentIntensityError, DomainError
from .measure import IntensityModel, SamplingRegion, register_model, register_predicate
from .rng import make_rng, stream


def counts(y) -> tuple[np.ndarray, np.ndarray]:
    """``(n1, n0)`` along the last axis."""
    y = np.asarray(y)
    n1 = np.count_nonzero(y == 1, axis=-1)
    return n1, y.shape[-1] - n1


@register_model("bernoulli")
class BernoulliImproperModel(IntensityModel):
    """i.i.d. Bernoulli(theta) sequences of length ``n``."""

    param_names = ("theta",)
    param_support = ("unit",)
    param_dim = 1
    discrete = True

    def __init__(self, n: int):
        if int(n) < 1:
            raise DomainError("sequence length must be positive")
        self.n = int(n)
        self.obs_dim = self.n

    def __repr__(self):
        return f"BernoulliImproperModel(n={self.n})"

    def to_spec(self) -> dict:
        return {"id": "bernoulli", "n": self.n}

    @property
    def has_closed_form(self) -> bool:
        return True

    def log_prior(self, theta):
        t = np.asarray(theta, dtype=float)[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.log(t) - np.log1p(-t)
        return np.where((t > 0) & (t < 1), out, -np.inf)

    def log_likelihood(self, theta, y):
        t = np.asarray(theta, dtype=float)[..., 0]
        n1, n0 = counts(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(n1 > 0, n1 * np.log(t), 0.0)
            b = np.where(n0 > 0, n0 * np.log1p(-t), 0.0)
        return a + b

    def marginal_intensity(self, y):
        y = np.asarray(y)
        if y.shape[-1] != self.n:
            raise DomainError(f"expected sequences of length {self.n}")
        _check_binary(y)
        n1, n0 = counts(y)
        ok = (n1 > 0) & (n0 > 0)
        with np.errstate(all="ignore"):
            val = np.exp(gammaln(np.where(ok, n0, 1)) + gammaln(np.where(ok, n1, 1))
                         - gammaln(self.n))
        out = np.where(ok, val, np.inf)
        return float(out) if out.ndim == 0 else out

    def param_hint(self, y):
        n1, _ = counts(y)
        c = min(max(float(n1) / self.n, 0.05), 0.95)
        return np.array([c]), np.array([1.0])


def _check_binary(y: np.ndarray) -> None:
    if not np.all((y == 0) | (y == 1)):
        raise DomainError("Bernoulli observations must be 0/1")


@register_predicate("nonconstant")
def _nonconstant(points):
    pts = np.asarray(points)
    return np.any(pts != pts[:, :1], axis=1)


@register_predicate("sequences")
def _sequences(points, members):
    """Membership in an explicit list of sequences."""
    pts = np.asarray(points)
    allowed = np.asarray(members, dtype=float).reshape(-1, pts.shape[1])
    return np.any(np.all(pts[:, None, :] == allowed[None, :, :], axis=2), axis=1)


def cube_region(n: int, predicate: str = "box", params: dict | None = None) -> SamplingRegion:
    """Subset of {0,1}^n cut out by a registered predicate."""
    return SamplingRegion([[0, 1]] * n, predicate, params or {})


def nonconstant_region(n: int) -> SamplingRegion:
    """{0,1}^n without the all-zero and all-one sequences."""
    return cube_region(n, "nonconstant")


def bernoulli_intensity(model: BernoulliImproperModel, y) -> float:
    """``Gamma(n0) Gamma(n1) / Gamma(n)``, or ``math.inf`` if either count is zero."""
    return float(model.marginal_intensity(np.asarray(y)))


def bernoulli_intensity_exact(y) -> Fraction:
    """The same quantity as an exact rational ``(n0-1)! (n1-1)! / (n-1)!``."""
    n1, n0 = (int(v) for v in counts(y))
    if n1 == 0 or n0 == 0:
        raise DivergentIntensityError("constant sequence has infinite intensity")
    return Fraction(math.factorial(n0 - 1) * math.factorial(n1 - 1), math.factorial(n0 + n1 - 1))


def beta_posterior_params(model: BernoulliImproperModel, y) -> tuple[int, int]:
    """``(alpha, beta) = (n1(y), n0(y))`` of the Beta law attached to ``y``."""
    y = np.asarray(y)
    _check_binary(y)
    n1, n0 = (int(v) for v in counts(y))
    if n1 == 0 or n0 == 0:
        raise DivergentIntensityError(f"constant sequence {y.tolist()} has infinite intensity")
    return n1, n0


def _initial_counts(model: BernoulliImproperModel, y) -> tuple[np.ndarray, int, int]:
    y = np.asarray(y).astype(np.int64)
    if y.ndim != 1 or len(y) < 1:
        raise DomainError("initial sequence must be a 1-D 0/1 array")
    n1, n0 = beta_posterior_params(model, y)
    return y, n1, n0


def polya_extend(model: BernoulliImproperModel, y, steps: int, seed=None,
                 uniforms=None) -> np.ndarray:
    """Append ``steps`` draws; each is 1 with probability ``n1 / length`` of the current sequence.

    A step appends 1 iff ``u * length < n1`` with ``u`` uniform on [0, 1),
    comparing against the exact integer counts.  ``uniforms`` replaces the
    random ``u`` (a test hook).
    """
    y, n1, _ = _initial_counts(model, y)
    u = make_rng(seed).random(steps) if uniforms is None else np.asarray(uniforms, dtype=float)
    out = np.empty(len(y) + steps, dtype=np.int64)
    out[: len(y)] = y
    m = len(y)
    for j in range(steps):
        bit = 1 if u[j] * m < n1 else 0
        out[m] = bit
        n1 += bit
        m += 1
    return out


def polya_path_probability(y, extension) -> Fraction:
    """Exact probability that the urn started at ``y`` appends ``extension``."""
    n1, n0 = (int(v) for v in counts(y))
    prob = Fraction(1)
    for bit in extension:
        m = n1 + n0
        if bit:
            prob *= Fraction(n1, m)
            n1 += 1
        else:
            prob *= Fraction(n0, m)
            n0 += 1
    return prob


@dataclass
class PolyaLimit:
    """Average of the appended components, one per path."""

    limits: np.ndarray
    steps: int

    def to_csv(self) -> str:
        lines = ["path_index,limit"]
        lines += [f"{i},{v:.17g}" for i, v in enumerate(self.limits)]
        return "\n".join(lines) + "\n"


def polya_limit(model: BernoulliImproperModel, y, steps: int = 10_000, paths: int = 1,
                seed: int = 0, block: int = 512) -> PolyaLimit:
    """Mean of the ``steps`` appended components on each of ``paths`` urns.

    Path ``i`` uses the uniforms of ``stream(seed, i)``, so it equals
    ``polya_extend(model, y, steps, stream(seed, i))``; blocks of paths are
    advanced together.
    """
    y, n1_0, _ = _initial_counts(model, y)
    n = len(y)
    out = np.empty(paths)
    for b0 in range(0, paths, block):
        idx = range(b0, min(b0 + block, paths))
        u = np.stack([stream(seed, i).random(steps) for i in idx])
        n1 = np.full(len(u), n1_0, dtype=np.int64)
        for j in range(steps):
            n1 += u[:, j] * (n + j) < n1
        out[b0:b0 + len(u)] = (n1 - n1_0) / steps
    return PolyaLimit(out, steps)


def direct_joint_events(model: BernoulliImproperModel, region: SamplingRegion, count: int,
                        seed, eps: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """``count`` (theta, y) pairs of the joint process thinned to ``region``.

    The prior is Lebesgue measure in logit coordinates; restricted to
    ``theta`` in ``(eps, 1 - eps)`` it is finite, so parameters are drawn
    uniformly in logit, sequences from the likelihood, and pairs whose
    sequence falls outside ``region`` are discarded.  The truncation drops a
    fraction of order ``eps`` of the thinned mass.
    """
    rng = make_rng(seed)
    lim = math.log(1 - eps) - math.log(eps)
    thetas, seqs = [], []
    have = 0
    while have < count:
        u = rng.uniform(-lim, lim, 8192)
        th = 1.0 / (1.0 + np.exp(-u))
        ys = (rng.random((len(th), model.n)) < th[:, None]).astype(np.int64)
        keep = region.contains(ys)
        thetas.append(th[keep])
        seqs.append(ys[keep])
        have += int(keep.sum())
    return np.concatenate(thetas)[:count], np.concatenate(seqs)[:count]
