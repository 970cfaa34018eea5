"""Mean measures on parameter x observation space and their Poisson patterns.

A model couples a (possibly improper) prior density on parameter space with a
likelihood; integrating the product over parameters gives the marginal
intensity on observation space.  A sampling region is observable when its
intensity mass is strictly between zero and infinity, and only then can a
finite point pattern be drawn from it.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np

from . import quadrature
from .errors import (
    DomainError,
    NonConvergedError,
    NotObservableError,
    OverlappingRegionsError,
    RejectionStallError,
)
from .rng import make_rng, stream
from .verify import divergence_certificate, halving_ladder

INFINITE = math.inf

OBSERVABLE = "OBSERVABLE"
NOT_OBSERVABLE_ZERO = "NOT_OBSERVABLE_ZERO"
NOT_OBSERVABLE_INFINITE = "NOT_OBSERVABLE_INFINITE"


# ---------------------------------------------------------------------------
# models


class IntensityModel:
    """Base class for a prior/likelihood pair.

    Subclasses set ``param_dim``, ``obs_dim``, ``param_support`` (one of
    ``"real"``, ``"positive"``, ``"unit"`` per parameter coordinate) and
    implement :meth:`log_prior` and :meth:`log_likelihood`.  Those take
    parameter arrays of shape ``(..., param_dim)``; observation arrays have
    shape ``(..., obs_dim)``.

    :meth:`marginal_intensity` falls back to :func:`quadrature_intensity`;
    model families override it with their closed forms.
    """

    model_id: ClassVar[str] = "generic"
    param_names: tuple[str, ...] = ()
    param_support: tuple[str, ...] = ()
    discrete: bool = False
    param_dim: int
    obs_dim: int

    def log_prior(self, theta) -> np.ndarray:
        raise NotImplementedError

    def log_likelihood(self, theta, y) -> np.ndarray:
        raise NotImplementedError

    def prior_density(self, theta) -> np.ndarray:
        return np.exp(self.log_prior(theta))

    def likelihood_density(self, theta, y) -> np.ndarray:
        return np.exp(self.log_likelihood(theta, y))

    def log_joint(self, theta, y) -> np.ndarray:
        lp = self.log_prior(theta)
        with np.errstate(invalid="ignore"):
            out = lp + self.log_likelihood(theta, y)
        return np.where(np.isneginf(lp), -np.inf, out)

    def marginal_intensity(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        flat = y.reshape(-1, self.obs_dim)
        out = np.array([quadrature_intensity(self, row) for row in flat])
        return out.reshape(y.shape[:-1]) if y.ndim > 1 else out[0]

    @property
    def has_closed_form(self) -> bool:
        return False

    def singular_distance(self, y) -> np.ndarray:
        """Distance from each observation to the set where the intensity is infinite."""
        y = np.asarray(y, dtype=float)
        return np.full(y.shape[:-1], np.inf)

    def param_hint(self, y) -> tuple[np.ndarray, np.ndarray]:
        """Rough location and scale of the posterior given event ``y``."""
        return np.ones(self.param_dim), np.ones(self.param_dim)

    def quadrature_breakpoints(self, y) -> list[list[float]]:
        centre, _ = self.param_hint(y)
        return [[float(c)] for c in centre]

    def lattice(self, region: "SamplingRegion") -> np.ndarray:
        """Integer points of a discrete observation space inside ``region.bounds``."""
        if not self.discrete:
            raise DomainError(f"{self.model_id} model has a continuous observation space")
        b = np.asarray(region.bounds, dtype=float)
        axes = [np.arange(math.ceil(lo), math.floor(hi) + 1) for lo, hi in b]
        if any(len(a) == 0 for a in axes):
            return np.empty((0, len(b)), dtype=np.int64)
        pts = np.array(list(itertools.product(*axes)), dtype=np.int64)
        return pts[region.contains(pts)]

    def to_spec(self) -> dict:
        raise NotImplementedError


MODEL_REGISTRY: dict[str, Callable[..., IntensityModel]] = {}


def register_model(model_id: str):
    def deco(cls):
        cls.model_id = model_id
        MODEL_REGISTRY[model_id] = cls
        return cls
    return deco


def model_from_spec(spec: dict) -> IntensityModel:
    spec = dict(spec)
    model_id = spec.pop("id")
    try:
        factory = MODEL_REGISTRY[model_id]
    except KeyError:
        raise DomainError(f"unknown model id {model_id!r}") from None
    return factory.from_spec(spec) if hasattr(factory, "from_spec") else factory(**spec)


# coordinate transforms to an unconstrained line, used by quadrature and by
# the posterior grid sampler

def to_natural(support: str, u, centre: float, scale: float):
    """Map unconstrained ``u`` to the natural coordinate; returns (value, log|Jacobian|)."""
    u = np.asarray(u, dtype=float)
    if support == "real":
        return centre + scale * np.sinh(u), math.log(scale) + np.logaddexp(u, -u) - math.log(2.0)
    if support == "positive":
        with np.errstate(over="ignore"):
            val = centre * np.exp(u)
        return val, math.log(centre) + u
    if support == "unit":
        val = 0.5 * (1.0 + np.tanh(0.5 * u))
        return val, -np.logaddexp(0.0, u) - np.logaddexp(0.0, -u)
    raise ValueError(f"unknown support {support!r}")


def to_unconstrained(support: str, x, centre: float, scale: float):
    x = np.asarray(x, dtype=float)
    if support == "real":
        return np.arcsinh((x - centre) / scale)
    if support == "positive":
        return np.log(x / centre)
    if support == "unit":
        return np.log(x) - np.log1p(-x)
    raise ValueError(f"unknown support {support!r}")


# half-width of the unconstrained window used by quadrature_intensity; the
# natural coordinate reaches about exp(40) times the hint scale
_UNCONSTRAINED_HALF_WIDTH = 40.0


def quadrature_intensity(model: IntensityModel, y, epsrel: float = 1e-9,
                         budget: int = quadrature.DEFAULT_BUDGET) -> float:
    """Marginal intensity ``integral p_theta(y) nu(theta) dtheta`` by nested adaptive quadrature.

    Independent of any closed form: integrates the model's own prior and
    likelihood.  Each parameter axis is mapped to an unconstrained line
    (``sinh`` for real axes, ``log`` for positive ones, ``logit`` for the unit
    interval) and integrated over a wide finite window with vectorized
    Gauss-Kronrod; the model's breakpoints split each axis.

    Raises
    ------
    NonConvergedError
        When the integrand has not decayed at the window edges (the integral
        is then likely infinite) or quadrature fails.
    """
    y = np.asarray(y, dtype=float)
    d = model.param_dim
    if d not in (1, 2):
        raise DomainError("quadrature_intensity supports 1 or 2 parameters")
    centre, scale = model.param_hint(y)
    centre = np.asarray(centre, dtype=float)
    scale = np.asarray(scale, dtype=float)
    half = _UNCONSTRAINED_HALF_WIDTH
    shared = quadrature.EvalBudget(budget)

    def nat(axis, u):
        return to_natural(model.param_support[axis], u, float(centre[axis]), float(scale[axis]))

    breaks = []
    for axis, pts in enumerate(model.quadrature_breakpoints(y)):
        with np.errstate(all="ignore"):
            u = to_unconstrained(model.param_support[axis], np.asarray(pts, dtype=float),
                                 float(centre[axis]), float(scale[axis]))
        breaks.append(sorted(float(v) for v in np.atleast_1d(u) if np.isfinite(v) and abs(v) < half))

    def joint(u):
        # u has shape (..., d) in unconstrained coordinates
        parts = [nat(a, u[..., a]) for a in range(d)]
        x = np.stack([p[0] for p in parts], axis=-1)
        with np.errstate(all="ignore"):
            out = np.exp(model.log_joint(x, y) + sum(p[1] for p in parts))
        return np.where(np.isnan(out), 0.0, out)

    # coarse scan: sets the absolute tolerance and checks decay at the edges of
    # the first axis (pointwise values there are spike-free); the second axis
    # is checked below through its accurately integrated profile
    coarse = np.linspace(-half, half, 401)
    if d == 1:
        scan = joint(coarse[:, None])
        rough = float(np.trapezoid(scan, coarse))
        edge = max(scan[0], scan[-1])
    else:
        g0, g1 = np.meshgrid(coarse, coarse, indexing="ij")
        scan = joint(np.stack([g0, g1], -1))
        rough = float(np.trapezoid(np.trapezoid(scan, coarse, axis=0), coarse))
        edge = float(np.trapezoid(scan[[0, -1], :], coarse, axis=1).max())
    if not np.isfinite(rough):
        raise NonConvergedError("integrand overflows on the quadrature window")
    if rough > 0 and edge > 1e-3 * epsrel * rough:
        raise NonConvergedError("integrand does not decay; intensity may be infinite")
    epsabs = 1e-3 * epsrel * rough if rough > 0 else 1e-300

    if d == 1:
        val, _ = quadrature.gauss_kronrod(lambda u: joint(u[:, None]), -half, half,
                                          epsabs, epsrel, budget=shared, points=breaks[0])
        return float(val)

    def outer(u1):
        def inner(u0):
            pts = np.stack(np.broadcast_arrays(u0[:, None], u1[None, :]), -1)
            return joint(pts)

        val, _ = quadrature.gauss_kronrod(inner, -half, half, epsabs / (20 * half), epsrel / 10,
                                          budget=shared, points=breaks[0])
        return np.atleast_1d(val)

    val, _ = quadrature.gauss_kronrod(outer, -half, half, epsabs, epsrel,
                                      budget=shared, points=breaks[1])
    if max(outer(np.array([-half, half]))) > 1e-3 * epsrel * abs(val):
        raise NonConvergedError("integrand does not decay; intensity may be infinite")
    return float(val)


# ---------------------------------------------------------------------------
# regions

PREDICATES: dict[str, Callable[..., np.ndarray]] = {}


def register_predicate(name: str):
    """Register a vectorized membership test ``fn(points, **params) -> bool array``."""
    def deco(fn):
        PREDICATES[name] = fn
        return fn
    return deco


@register_predicate("box")
def _box(points, **_):
    return np.ones(points.shape[0], dtype=bool)


@register_predicate("halfspace")
def _halfspace(points, axis: int, threshold: float, side: str = "below"):
    v = points[:, int(axis)]
    return v < threshold if side == "below" else v >= threshold


def _sub_predicates(parts):
    return [(p["predicate"], p.get("params", {})) for p in parts]


@register_predicate("and")
def _and(points, parts):
    out = np.ones(points.shape[0], dtype=bool)
    for name, params in _sub_predicates(parts):
        out &= PREDICATES[name](points, **params)
    return out


@register_predicate("or")
def _or(points, parts):
    out = np.zeros(points.shape[0], dtype=bool)
    for part in parts:
        sub = SamplingRegion.from_dict(part)
        out |= sub.contains(points)
    return out


@register_predicate("not")
def _not(points, predicate, params=None):
    return ~PREDICATES[predicate](points, **(params or {}))


@dataclass
class SamplingRegion:
    """A bounded subset of observation space.

    ``predicate`` names a registered membership test; points outside
    ``bounds`` are never contained.  ``measure`` caches the intensity mass once
    computed (``None`` while unknown, ``math.inf`` when certified infinite).

    ``singular_mass`` is the mass assigned to the part of the region lying on
    the model's singular set (where the intensity density is infinite).  That
    set is excluded from every region unless this is set; it is added to the
    integral as is, and may be ``math.inf``.
    """

    bounds: np.ndarray
    predicate: str = "box"
    params: dict = field(default_factory=dict)
    singular_mass: float = 0.0
    measure: float | None = field(default=None, compare=False)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(-1, 2)
        if self.predicate not in PREDICATES:
            raise DomainError(f"unknown region predicate {self.predicate!r}")

    def __eq__(self, other):
        if not isinstance(other, SamplingRegion):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def is_empty(self) -> bool:
        return self.dim == 0 or bool(np.any(self.bounds[:, 1] < self.bounds[:, 0]))

    def contains(self, y) -> np.ndarray:
        pts = np.asarray(y, dtype=float)
        single = pts.ndim == 1
        pts = pts.reshape(-1, self.dim)
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        if inside.any():
            sel = np.flatnonzero(inside)
            inside[sel] = PREDICATES[self.predicate](pts[sel], **self.params)
        return bool(inside[0]) if single else inside

    def to_dict(self) -> dict:
        d = {
            "bounds": [[_num(lo), _num(hi)] for lo, hi in self.bounds],
            "predicate": self.predicate,
            "params": self.params,
        }
        if self.singular_mass:
            d["singular_mass"] = _num(self.singular_mass)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingRegion":
        sm = d.get("singular_mass", 0.0)
        return cls(
            bounds=d["bounds"],
            predicate=d.get("predicate", "box"),
            params=dict(d.get("params", {})),
            singular_mass=math.inf if sm == "inf" else float(sm),
        )


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def union_region(r1: SamplingRegion, r2: SamplingRegion) -> SamplingRegion:
    lo = np.minimum(r1.bounds[:, 0], r2.bounds[:, 0])
    hi = np.maximum(r1.bounds[:, 1], r2.bounds[:, 1])
    return SamplingRegion(np.column_stack([lo, hi]), "or",
                          {"parts": [r1.to_dict(), r2.to_dict()]},
                          singular_mass=r1.singular_mass + r2.singular_mass)


def intersect_region(r: SamplingRegion, predicate: str, params: dict | None = None,
                     bounds=None) -> SamplingRegion:
    """``r`` intersected with another registered predicate (and optional tighter bounds)."""
    b = r.bounds if bounds is None else np.column_stack([
        np.maximum(r.bounds[:, 0], np.asarray(bounds)[:, 0]),
        np.minimum(r.bounds[:, 1], np.asarray(bounds)[:, 1]),
    ])
    parts = [{"predicate": r.predicate, "params": r.params},
             {"predicate": predicate, "params": params or {}}]
    return SamplingRegion(b, "and", {"parts": parts})


# ---------------------------------------------------------------------------
# patterns


@dataclass
class PointPattern:
    """Finite multiset of events observed on ``region``.

    Coincident events are kept as repeated rows.
    """

    events: np.ndarray
    region: SamplingRegion
    seed: int | None = None

    def __post_init__(self):
        ev = np.asarray(self.events)
        if ev.size == 0:
            dtype = ev.dtype if ev.dtype.kind in "iu" else float
            ev = np.empty((0, self.region.dim), dtype=dtype)
        self.events = ev.reshape(-1, self.region.dim)

    def __len__(self) -> int:
        return len(self.events)

    def to_dict(self) -> dict:
        if self.events.dtype.kind in "iu":
            ev = self.events.tolist()
        else:
            ev = [[float(f"{v:.17g}") for v in row] for row in self.events]
        return {"region": self.region.to_dict(), "seed": self.seed, "events": ev}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PointPattern":
        region = SamplingRegion.from_dict(d["region"])
        arr = np.asarray(d.get("events", []))
        return cls(arr, region, d.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> "PointPattern":
        return cls.from_dict(json.loads(text))


def restrict(pattern: PointPattern, region: SamplingRegion) -> PointPattern:
    """Events of ``pattern`` that fall in ``region`` (thinning by restriction)."""
    keep = region.contains(pattern.events) if len(pattern) else np.zeros(0, bool)
    return PointPattern(pattern.events[keep], region, pattern.seed)


# ---------------------------------------------------------------------------
# integration and observability

# first rung of the excision ladder, as a fraction of the region diameter,
# when the region touches the singular set
_EXCISION_START = 0.5
_LADDER_RUNGS = 48
_DISTANCE_PROBES = 65


def _region_singular_gap(model: IntensityModel, region: SamplingRegion) -> float:
    """Smallest singular distance over a probe grid of contained points."""
    d = region.dim
    per_axis = max(3, int(round(_DISTANCE_PROBES ** (2.0 / max(d, 2)))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in region.bounds]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    pts = pts[region.contains(pts)]
    if len(pts) == 0:
        return math.inf
    return float(np.min(model.singular_distance(pts)))


def integrate_intensity(model: IntensityModel, region: SamplingRegion,
                        tol: float | None = None, epsabs: float | None = None,
                        budget: int = quadrature.DEFAULT_BUDGET) -> float:
    """Intensity mass of ``region``: a float, or ``math.inf`` when certified infinite.

    Discrete models are summed exactly over the lattice.  Continuous regions
    are integrated on a ladder of truncations that excise a neighbourhood of
    the model's singular set, the excision radius halving each rung; the
    ladder's certificate decides between a finite value and divergence.

    Raises
    ------
    NonConvergedError
        When quadrature fails or the ladder is inconclusive.
    """
    epsrel = quadrature.DEFAULT_EPSREL if tol is None else tol
    epsabs = quadrature.DEFAULT_EPSABS if epsabs is None else epsabs
    if region.is_empty:
        return 0.0 + region.singular_mass
    if model.discrete:
        pts = model.lattice(region)
        if len(pts) == 0:
            return 0.0 + region.singular_mass
        w = np.asarray(model.marginal_intensity(pts), dtype=float)
        if np.any(np.isinf(w)):
            return INFINITE
        return math.fsum(w.tolist()) + region.singular_mass

    gap = _region_singular_gap(model, region)
    shared = quadrature.EvalBudget(budget)

    def rung(eps: float) -> float:
        def indicator(pts):
            inside = region.contains(pts)
            if eps > 0 and inside.any():
                sel = np.flatnonzero(inside)
                inside[sel] = model.singular_distance(pts[sel]) >= eps
            return inside

        def f(pts):
            return np.asarray(model.marginal_intensity(pts), dtype=float)

        return quadrature.integrate_region(f, region.bounds, indicator,
                                           epsabs=epsabs, epsrel=epsrel, budget=shared)

    if math.isinf(gap):
        # no singular set within reach: a single integral
        value = rung(0.0)
        return value + region.singular_mass
    diameter = float(np.linalg.norm(region.bounds[:, 1] - region.bounds[:, 0]))
    start = gap if gap > 0 else _EXCISION_START * diameter
    try:
        cert = divergence_certificate(
            None, halving_ladder(start, _LADDER_RUNGS), integrate=rung,
            relative_step=max(epsrel, 1e-12),
        )
    except NonConvergedError:
        raise
    except Exception as exc:  # InconclusiveError
        raise NonConvergedError(f"intensity integral inconclusive: {exc}") from exc
    if not cert.finite:
        return INFINITE
    return cert.value + region.singular_mass


@dataclass(frozen=True)
class Observability:
    status: str
    measure: float

    @property
    def observable(self) -> bool:
        return self.status == OBSERVABLE

    def __str__(self) -> str:
        if self.observable:
            return f"{OBSERVABLE}({self.measure:.17g})"
        return self.status


def check_observable(model: IntensityModel, region: SamplingRegion,
                     tol: float | None = None) -> Observability:
    """OBSERVABLE iff ``0 < Lambda(region) < inf``; caches the mass on the region."""
    if region.measure is None:
        region.measure = integrate_intensity(model, region, tol)
    m = region.measure
    if math.isinf(m):
        return Observability(NOT_OBSERVABLE_INFINITE, m)
    if m <= 0.0:
        return Observability(NOT_OBSERVABLE_ZERO, 0.0)
    return Observability(OBSERVABLE, m)


# ---------------------------------------------------------------------------
# sampling

ENVELOPE_INFLATION = 1.2
ACCEPTANCE_FLOOR = 1e-3
_MIN_PROPOSALS_FOR_STALL = 2000
_PROPOSAL_BATCH = 4096


def envelope_cells_per_axis(dim: int) -> int:
    if dim <= 2:
        return 2**10
    if dim <= 4:
        return 2**5
    return 2 ** max(1, 20 // dim)


class PatternSampler:
    """Reusable sampler for one (model, region) pair.

    Continuous regions use rejection from a piecewise-constant envelope on a
    dyadic grid over the region bounds: each cell's level is the largest
    intensity found at its contained corners and centre, times 1.2.  Cells
    with no contained probe get level zero, so slivers of the region thinner
    than a cell are not proposed.
    """

    def __init__(self, model: IntensityModel, region: SamplingRegion,
                 allow_zero: bool = False, tol: float | None = None,
                 acceptance_floor: float = ACCEPTANCE_FLOOR):
        if region.singular_mass:
            raise DomainError("cannot sample events on the singular set")
        verdict = check_observable(model, region, tol)
        if not verdict.observable and not (allow_zero and verdict.status == NOT_OBSERVABLE_ZERO):
            raise NotObservableError(verdict.status, region=region.to_dict())
        self.model = model
        self.region = region
        self.mass = verdict.measure
        self.acceptance_floor = acceptance_floor
        self.envelope_violations = 0
        self._points = None
        self._cdf = None
        if self.mass > 0:
            if model.discrete:
                self._build_discrete()
            else:
                self._build_envelope()

    def _build_discrete(self):
        pts = self.model.lattice(self.region)
        w = np.asarray(self.model.marginal_intensity(pts), dtype=float)
        self._points = pts
        self._probs = w / w.sum()

    def _build_envelope(self):
        b = self.region.bounds
        d = len(b)
        k = envelope_cells_per_axis(d)
        self._k = k
        self._lo = b[:, 0]
        self._width = (b[:, 1] - b[:, 0]) / k
        model, region = self.model, self.region

        def masked_intensity(pts):
            out = np.zeros(len(pts))
            inside = region.contains(pts)
            if inside.any():
                out[inside] = model.marginal_intensity(pts[inside])
            return out

        axes = [np.linspace(lo, hi, k + 1) for lo, hi in b]
        corners = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        corner_vals = masked_intensity(corners).reshape((k + 1,) * d)
        centres_axes = [0.5 * (a[:-1] + a[1:]) for a in axes]
        centres = np.stack(np.meshgrid(*centres_axes, indexing="ij"), axis=-1).reshape(-1, d)
        level = masked_intensity(centres).reshape((k,) * d)
        for offset in itertools.product((0, 1), repeat=d):
            sl = tuple(slice(o, o + k) for o in offset)
            level = np.maximum(level, corner_vals[sl])
        if not np.all(np.isfinite(level)):
            raise DomainError("intensity is infinite at a probe inside the region")
        level = ENVELOPE_INFLATION * level.ravel()
        total = level.sum()
        if total <= 0:
            raise RejectionStallError("envelope is identically zero on the region")
        self._level = level
        self._cdf = np.cumsum(level) / total

    def _draw_events(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.model.discrete:
            if count == 0:
                return np.empty((0, self.region.dim), dtype=np.int64)
            idx = rng.choice(len(self._points), size=count, p=self._probs)
            return self._points[idx]
        d = self.region.dim
        if count == 0:
            return np.empty((0, d))
        accepted = []
        n_acc = proposed = 0
        while n_acc < count:
            u = rng.random(_PROPOSAL_BATCH)
            cells = np.minimum(np.searchsorted(self._cdf, u, side="right"), len(self._cdf) - 1)
            idx = np.stack(np.unravel_index(cells, (self._k,) * d), axis=-1)
            pts = self._lo + (idx + rng.random((_PROPOSAL_BATCH, d))) * self._width
            env = self._level[cells]
            inside = self.region.contains(pts)
            lam = np.zeros(_PROPOSAL_BATCH)
            if inside.any():
                lam[inside] = self.model.marginal_intensity(pts[inside])
            self.envelope_violations += int(np.count_nonzero(lam > env))
            keep = rng.random(_PROPOSAL_BATCH) * env < lam
            proposed += _PROPOSAL_BATCH
            accepted.append(pts[keep])
            n_acc += int(keep.sum())
            if proposed >= _MIN_PROPOSALS_FOR_STALL and n_acc / proposed < self.acceptance_floor:
                raise RejectionStallError(
                    f"acceptance rate {n_acc / proposed:.2e} below floor {self.acceptance_floor:g}"
                )
        return np.concatenate(accepted)[:count]

    def sample(self, seed) -> PointPattern:
        rng = make_rng(seed)
        n = int(rng.poisson(self.mass)) if self.mass > 0 else 0
        ev = self._draw_events(rng, n)
        return PointPattern(ev, self.region, seed if isinstance(seed, (int, np.integer)) else None)

    def replicates(self, seed: int, count: int, start: int = 0) -> list[PointPattern]:
        """``count`` patterns, replicate ``i`` drawn from ``stream(seed, start + i)``."""
        out = []
        for i in range(start, start + count):
            p = self.sample(stream(seed, i))
            p.seed = int(seed)
            out.append(p)
        return out


def sample_point_pattern(model: IntensityModel, region: SamplingRegion, seed,
                         allow_zero: bool = False) -> PointPattern:
    """Draw ``N ~ Poisson(Lambda(region))`` events from the normalized intensity on ``region``.

    ``allow_zero`` admits a region of zero mass (yielding an empty pattern).
    """
    return PatternSampler(model, region, allow_zero=allow_zero).sample(seed)


def _regions_overlap(r1: SamplingRegion, r2: SamplingRegion, probes_per_axis: int = 64) -> bool:
    lo = np.maximum(r1.bounds[:, 0], r2.bounds[:, 0])
    hi = np.minimum(r1.bounds[:, 1], r2.bounds[:, 1])
    if np.any(hi < lo):
        return False
    d = len(lo)
    n = max(2, int(round(probes_per_axis ** (2.0 / max(d, 2)))))
    axes = []
    for a, b in zip(lo, hi):
        ints = np.arange(math.ceil(a), math.floor(b) + 1)
        grid = np.linspace(a, b, n)
        axes.append(np.union1d(grid, ints))
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return bool(np.any(r1.contains(pts) & r2.contains(pts)))


def superpose(p1: PointPattern, p2: PointPattern) -> PointPattern:
    """Multiset union of patterns observed on disjoint regions.

    Disjointness is checked on a probe grid over the bounds overlap (including
    integer lattice points) and on the events themselves.

    Raises
    ------
    OverlappingRegionsError
    """
    r1, r2 = p1.region, p2.region
    if r1.dim != r2.dim:
        raise DomainError("patterns live in spaces of different dimension")
    overlap = _regions_overlap(r1, r2)
    if not overlap:
        overlap = bool((len(p1) and np.any(r2.contains(p1.events))) or
                       (len(p2) and np.any(r1.contains(p2.events))))
    if overlap:
        raise OverlappingRegionsError("regions of superposed patterns intersect")
    if p1.events.dtype.kind in "iu" and p2.events.dtype.kind in "iu":
        events = np.concatenate([p1.events, p2.events])
    else:
        events = np.concatenate([p1.events.astype(float), p2.events.astype(float)])
    return PointPattern(events, union_region(r1, r2), None)
