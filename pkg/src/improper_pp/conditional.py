"""Per-event conditional laws on parameter space.

Given a pattern on an observable region, the parameters attached to the
events are conditionally independent, and the law attached to event ``y``
has density ``prior(x) * likelihood(x, y) / intensity(y)`` whatever the region.

Sampling works in unconstrained coordinates (``sinh`` around a centre for
real axes, ``log`` for positive axes, ``logit`` for the unit interval).  One
parameter: inverse CDF on a 4096-point grid over a window reaching down to
1e-12 of the peak density.  Two parameters: the first coordinate from its
marginal the same way, then the second from its conditional given the first.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import (
    DivergentIntensityError,
    DomainError,
    ImproperPPError,
    NonConvergedError,
    ZeroIntensityError,
)
from .measure import IntensityModel, PointPattern, to_natural, to_unconstrained
from .quadrature import gauss_kronrod
from .rng import make_rng, stream

GRID_POINTS = 4096
MARGINAL_POINTS = 1024
WINDOW_CUTOFF = math.log(1e12)
_WINDOW_NODES = 65
_MAX_EXTENT = 400.0


# ---------------------------------------------------------------------------
# one-dimensional machinery


def _mode_near(log_q: Callable, start: float, span: float = 60.0, step: float = 0.05) -> float:
    """Mode of a unimodal log-density, searched on a coarse grid then refined."""
    grid = start + np.arange(-span, span + step / 2, step)
    with np.errstate(all="ignore"):
        vals = np.asarray(log_q(grid), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    if not np.any(np.isfinite(vals)):
        raise NonConvergedError("log-density is -inf on the whole search grid")
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda u: -float(log_q(np.array([u]))[0]),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x) if -res.fun >= vals[i] else float(grid[i])


def _edge(log_q: Callable, mode: float, peak: float, direction: int,
          cutoff: float = WINDOW_CUTOFF) -> float:
    """Step away from ``mode`` (doubling steps) until log_q drops ``cutoff`` below ``peak``."""
    target = peak - cutoff
    inner, step = mode, 0.25
    while True:
        outer = mode + direction * step
        if abs(outer - mode) > _MAX_EXTENT:
            raise NonConvergedError("density tail too heavy for the support window")
        with np.errstate(all="ignore"):
            v = float(log_q(np.array([outer]))[0])
        if not v >= target:  # includes -inf / nan
            break
        inner = outer
        step *= 2.0
    for _ in range(30):
        mid = 0.5 * (inner + outer)
        with np.errstate(all="ignore"):
            v = float(log_q(np.array([mid]))[0])
        if v >= target:
            inner = mid
        else:
            outer = mid
    return outer


def support_window(log_q: Callable, start: float = 0.0) -> tuple[float, float, float]:
    """``(lo, hi, mode)`` bracketing everything above 1e-12 of the peak of ``log_q``."""
    m = _mode_near(log_q, start)
    peak = float(log_q(np.array([m]))[0])
    return _edge(log_q, m, peak, -1), _edge(log_q, m, peak, +1), m


class GridInverseCDF:
    """Piecewise-linear CDF table of a density known up to a constant."""

    def __init__(self, u: np.ndarray, log_q: np.ndarray):
        self.u = np.asarray(u, dtype=float)
        lq = np.asarray(log_q, dtype=float)
        lq = np.where(np.isnan(lq), -np.inf, lq)
        self.log_peak = float(np.max(lq))
        w = np.exp(lq - self.log_peak)
        h = np.diff(self.u)
        cells = 0.5 * (w[1:] + w[:-1]) * h
        cdf = np.concatenate([[0.0], np.cumsum(cells)])
        self.log_mass = self.log_peak + math.log(cdf[-1])
        self.cdf = cdf / cdf[-1]

    def draw(self, uniforms: np.ndarray) -> np.ndarray:
        uni = np.asarray(uniforms, dtype=float)
        i = np.clip(np.searchsorted(self.cdf, uni, side="right") - 1, 0, len(self.u) - 2)
        c0, c1 = self.cdf[i], self.cdf[i + 1]
        frac = np.where(c1 > c0, (uni - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.5)
        return self.u[i] + frac * (self.u[i + 1] - self.u[i])


def _batched_inverse_cdf(u_grid: np.ndarray, log_q: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Row-wise inverse CDF: ``u_grid`` and ``log_q`` have shape (B, K)."""
    lq = np.where(np.isnan(log_q), -np.inf, log_q)
    w = np.exp(lq - lq.max(axis=1, keepdims=True))
    cells = 0.5 * (w[:, 1:] + w[:, :-1]) * np.diff(u_grid, axis=1)
    cdf = np.concatenate([np.zeros((len(w), 1)), np.cumsum(cells, axis=1)], axis=1)
    cdf /= cdf[:, -1:]
    target = uniforms[:, None]
    i = np.clip((cdf <= target).sum(axis=1) - 1, 0, u_grid.shape[1] - 2)
    rows = np.arange(len(w))
    c0, c1 = cdf[rows, i], cdf[rows, i + 1]
    frac = np.where(c1 > c0, (uniforms - c0) / np.where(c1 > c0, c1 - c0, 1.0), 0.5)
    return u_grid[rows, i] + frac * (u_grid[rows, i + 1] - u_grid[rows, i])


# ---------------------------------------------------------------------------
# general laws on 1 or 2 parameters


class GridLaw:
    """A law on 1 or 2 parameters given by an (unnormalized) log-density.

    ``log_density`` takes natural-coordinate arrays of shape ``(..., d)``.
    """

    def __init__(self, log_density: Callable, support: tuple[str, ...],
                 centre, scale, grid_points: int = GRID_POINTS):
        self._log_density = log_density
        self.support = tuple(support)
        self.dim = len(self.support)
        if self.dim not in (1, 2):
            raise DomainError("grid sampling supports 1 or 2 parameters")
        self.centre = np.asarray(centre, dtype=float)
        self.scale = np.asarray(scale, dtype=float)
        self.grid_points = grid_points
        self._table = None

    # coordinate plumbing

    def _nat(self, axis: int, u):
        return to_natural(self.support[axis], u, float(self.centre[axis]), float(self.scale[axis]))

    def _unc(self, axis: int, x):
        return to_unconstrained(self.support[axis], x, float(self.centre[axis]), float(self.scale[axis]))

    def log_q(self, u: np.ndarray) -> np.ndarray:
        """Log-density in unconstrained coordinates (shape (..., d))."""
        u = np.asarray(u, dtype=float)
        parts = [self._nat(a, u[..., a]) for a in range(self.dim)]
        x = np.stack([p[0] for p in parts], axis=-1)
        logjac = sum(p[1] for p in parts)
        with np.errstate(all="ignore"):
            out = self._log_density(x) + logjac
        return np.where(np.isnan(out), -np.inf, out)

    def _start(self) -> np.ndarray:
        s = []
        for a, sup in enumerate(self.support):
            c = float(self.centre[a])
            s.append(to_unconstrained(sup, c, c, float(self.scale[a])) if sup == "unit" else 0.0)
        return np.asarray(s, dtype=float)

    # table construction

    def _conditional_window(self, u0: float, start: float):
        return support_window(lambda v: self.log_q(np.stack(np.broadcast_arrays(u0, v), -1)), start)

    def _log_marginal_scalar(self, u0: float, start: float):
        lo, hi, m = self._conditional_window(u0, start)
        v = np.linspace(lo, hi, MARGINAL_POINTS)
        lq = self.log_q(np.stack([np.full_like(v, u0), v], -1))
        peak = lq.max()
        val = np.trapezoid(np.exp(lq - peak), v)
        return peak + math.log(val), m

    def _build(self):
        if self.dim == 1:
            lo, hi, _ = support_window(lambda v: self.log_q(v[:, None]), float(self._start()[0]))
            u = np.linspace(lo, hi, self.grid_points)
            self._table = {"u0": GridInverseCDF(u, self.log_q(u[:, None]))}
            return
        start = self._start()
        res = optimize.minimize(lambda w: -float(self.log_q(np.asarray(w))),
                                start, method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
        m0 = float(res.x[0])
        cond_start = float(res.x[1])

        def log_q0(us):
            return np.array([self._log_marginal_scalar(float(t), cond_start)[0] for t in us])

        # the marginal peak may sit slightly off the joint mode
        m0 = _mode_near(log_q0, m0, span=1.0, step=0.1)
        peak0 = float(log_q0([m0])[0])
        lo0 = _edge(log_q0, m0, peak0, -1)
        hi0 = _edge(log_q0, m0, peak0, +1)

        nodes = np.linspace(lo0, hi0, _WINDOW_NODES)
        windows = np.empty((_WINDOW_NODES, 2))
        # continuation: follow the conditional mode outward from the centre
        centre_idx = int(np.argmin(np.abs(nodes - m0)))
        order = list(range(centre_idx, _WINDOW_NODES)) + list(range(centre_idx - 1, -1, -1))
        modes = {}
        for j in order:
            prev = modes.get(j - 1 if j > centre_idx else j + 1, cond_start)
            lo1, hi1, md = self._conditional_window(float(nodes[j]), prev)
            windows[j] = lo1, hi1
            modes[j] = md
        self._nodes = nodes
        self._windows = windows

        u0 = np.linspace(lo0, hi0, self.grid_points)
        lo1, hi1 = self._interp_window(u0)
        lq0 = np.empty(len(u0))
        chunk = 256
        t = np.linspace(0.0, 1.0, MARGINAL_POINTS)
        for s in range(0, len(u0), chunk):
            sl = slice(s, s + chunk)
            v = lo1[sl, None] + (hi1 - lo1)[sl, None] * t[None, :]
            lq = self.log_q(np.stack([np.broadcast_to(u0[sl, None], v.shape), v], -1))
            pk = lq.max(axis=1)
            lq0[sl] = pk + np.log(np.trapezoid(np.exp(lq - pk[:, None]), v, axis=1))
        self._table = {"u0": GridInverseCDF(u0, lq0)}

    def _interp_window(self, u0: np.ndarray):
        """Union of the conditional windows at the two bracketing nodes, padded by 10%."""
        nodes, win = self._nodes, self._windows
        j = np.clip(np.searchsorted(nodes, u0) - 1, 0, len(nodes) - 2)
        lo = np.minimum(win[j, 0], win[j + 1, 0])
        hi = np.maximum(win[j, 1], win[j + 1, 1])
        # extrapolate beyond the outermost nodes
        below = u0 < nodes[0]
        above = u0 > nodes[-1]
        lo = np.where(below | above, np.minimum(lo, win[:, 0].min()), lo)
        hi = np.where(below | above, np.maximum(hi, win[:, 1].max()), hi)
        pad = 0.1 * (hi - lo)
        return lo - pad, hi + pad

    # public API

    def sample(self, count: int, seed) -> np.ndarray:
        """``count`` i.i.d. draws, shape ``(count, dim)``, natural coordinates."""
        if count == 0:
            return np.empty((0, self.dim))
        if self._table is None:
            self._build()
        rng = make_rng(seed)
        u0 = self._table["u0"].draw(rng.random(count))
        x0 = self._nat(0, u0)[0]
        if self.dim == 1:
            return x0[:, None]
        uni = rng.random(count)
        lo1, hi1 = self._interp_window(u0)
        t = np.linspace(0.0, 1.0, self.grid_points)
        u1 = np.empty(count)
        chunk = 128
        for s in range(0, count, chunk):
            sl = slice(s, s + chunk)
            v = lo1[sl, None] + (hi1 - lo1)[sl, None] * t[None, :]
            lq = self.log_q(np.stack([np.broadcast_to(u0[sl, None], v.shape), v], -1))
            u1[sl] = _batched_inverse_cdf(v, lq, uni[sl])
        x1 = self._nat(1, u1)[0]
        return np.column_stack([x0, x1])

    def log_density(self, x) -> np.ndarray:
        return self._log_density(np.asarray(x, dtype=float))

    def density(self, x) -> np.ndarray:
        return np.exp(self.log_density(x))

    def marginal_density(self, axis: int, values, epsrel: float = 1e-12) -> np.ndarray:
        """Density of coordinate ``axis`` with the other coordinate integrated out."""
        vals = np.atleast_1d(np.asarray(values, dtype=float))
        if self.dim == 1:
            return self.density(vals[:, None])
        other = 1 - axis
        out = np.empty(len(vals))
        start = float(self._start()[other])
        for i, x in enumerate(vals):
            def lq(v, x=x):
                xo, lj = self._nat(other, v)
                pts = np.empty(np.shape(v) + (2,))
                pts[..., axis] = x
                pts[..., other] = xo
                with np.errstate(all="ignore"):
                    r = self._log_density(pts) + lj
                return np.where(np.isnan(r), -np.inf, r)
            try:
                lo, hi, m = support_window(lq, start)
            except NonConvergedError:
                out[i] = 0.0
                continue
            start = m
            peak = float(lq(np.array([m]))[0])
            val, _ = gauss_kronrod(lambda v: np.exp(lq(v) - peak), lo, hi,
                                   epsabs=0.0, epsrel=epsrel, points=(m,))
            out[i] = math.exp(peak) * val
        return out


# ---------------------------------------------------------------------------
# posterior laws


class PosteriorLaw(GridLaw):
    """Conditional law of the parameter attached to one event."""

    def __init__(self, model: IntensityModel, event, normalizer: float):
        self.model = model
        self.event = np.asarray(event)
        self.normalizer = float(normalizer)
        self._log_norm = math.log(self.normalizer)
        centre, scale = model.param_hint(self.event)
        super().__init__(self._posterior_log_density, model.param_support, centre, scale)

    def _posterior_log_density(self, x):
        return self.model.log_joint(x, self.event) - self._log_norm

    def discretize(self, grid) -> np.ndarray:
        """Density on ``grid`` (shape (K, d)) normalized to sum to one."""
        w = self.density(grid)
        return w / w.sum()


def posterior_for_event(model: IntensityModel, y) -> PosteriorLaw:
    """Law with density ``prior(x) * likelihood(x, y) / intensity(y)``.

    Raises
    ------
    ZeroIntensityError, DivergentIntensityError
    """
    lam = float(model.marginal_intensity(np.asarray(y)))
    if math.isnan(lam):
        raise NonConvergedError("intensity evaluated to NaN", event=list(np.asarray(y).tolist()))
    if lam == 0.0:
        raise ZeroIntensityError(f"intensity is zero at {np.asarray(y).tolist()}")
    if math.isinf(lam):
        raise DivergentIntensityError(f"intensity is infinite at {np.asarray(y).tolist()}")
    return PosteriorLaw(model, y, lam)


@dataclass
class JointPosterior:
    """Product of per-event laws, one per event, multiplicities kept."""

    laws: list[PosteriorLaw] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.laws)

    def log_density(self, xs) -> float:
        """``xs`` has shape (m, d): one parameter vector per event."""
        xs = np.asarray(xs, dtype=float)
        if len(self.laws) == 0:
            return 0.0
        return float(sum(law.log_density(x) for law, x in zip(self.laws, xs)))

    def sample(self, count: int, seed: int) -> np.ndarray:
        """Draws of shape ``(count, m, d)``; law ``i`` uses ``stream(seed, i)``."""
        if not self.laws:
            return np.empty((count, 0, 0))
        per = [law.sample(count, stream(seed, i)) for i, law in enumerate(self.laws)]
        return np.stack(per, axis=1)


def joint_posterior(model: IntensityModel, pattern: PointPattern) -> JointPosterior:
    """Per-event laws for every event of ``pattern``.

    Errors from individual events are re-raised with the event index attached.
    """
    laws = []
    for i, y in enumerate(pattern.events):
        try:
            laws.append(posterior_for_event(model, y))
        except ImproperPPError as exc:
            exc.context["event_index"] = i
            raise type(exc)(f"event {i} {np.asarray(y).tolist()}: {exc}", **exc.context) from exc
    return JointPosterior(laws)


def sample_posterior(law: GridLaw, count: int, seed) -> np.ndarray:
    """``count`` i.i.d. parameter draws (rows), reproducible from ``seed``."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return law.sample(count, seed)


def posterior_draws_csv(joint: JointPosterior, count: int, seed: int,
                        param_names: tuple[str, ...]) -> str:
    """CSV with columns ``event_index, draw_index, <one per parameter>``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["event_index", "draw_index", *param_names])
    if len(joint):
        draws = joint.sample(count, seed)
        for i in range(draws.shape[1]):
            for k in range(count):
                w.writerow([i, k, *(f"{v:.17g}" for v in draws[k, i])])
    return buf.getvalue()


def marginal_cdf(law: GridLaw, axis: int = 0, half_width: float = 20.0,
                 points: int = 2001) -> Callable[[np.ndarray], np.ndarray]:
    """CDF of one coordinate, by integrating :meth:`GridLaw.marginal_density`.

    The density is tabulated on ``points`` nodes of the unconstrained
    coordinate over ``[-half_width, half_width]`` and accumulated with the
    trapezoid rule.  The table is not renormalized, so any shortfall in the
    law's own normalization shows up in the upper tail.
    """
    u = np.linspace(-half_width, half_width, points)
    x, logjac = law._nat(axis, u)
    dens = law.marginal_density(axis, x) * np.exp(logjac)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])

    def cdf(values):
        with np.errstate(all="ignore"):
            uq = law._unc(axis, np.asarray(values, dtype=float))
        return np.interp(uq, u, cum, left=0.0, right=cum[-1])

    return cdf
