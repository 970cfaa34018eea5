"""Adaptive quadrature over bounded regions.

The 1-D workhorse is a globally adaptive Gauss-Kronrod (7/15) rule whose
embedded Gauss estimate drives bisection of the worst interval.  Integrands
are vectorized: each call receives every node of an interval at once.

Regions are handled by nested integration over the bounding box.  Along each
innermost line the region indicator is probed on a uniform grid and every
in/out transition is located by bisection, so the Kronrod rule only ever sees
the smooth integrand on sub-intervals lying inside the region.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergedError

# Kronrod 15-point nodes (non-negative half) and weights, with the embedded
# 7-point Gauss weights on the odd-indexed nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
# Gauss nodes are Kronrod nodes 1, 3, 5, 7(centre), 9, 11, 13
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[7] = _WG[3]
_GWEIGHTS[[9, 11, 13]] = _WG[2::-1]

DEFAULT_EPSABS = 1e-6
DEFAULT_EPSREL = 1e-4
DEFAULT_BUDGET = 10**7


class EvalBudget:
    """Shared evaluation counter; raises once the budget is spent."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = int(limit)
        self.used = 0

    def charge(self, n: int) -> None:
        self.used += n
        if self.used > self.limit:
            raise NonConvergedError(
                f"quadrature budget of {self.limit} evaluations exhausted",
                used=self.used,
            )


def _gk_interval(f, a: float, b: float, budget: EvalBudget | None):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    fx = np.asarray(f(x), dtype=float)
    if budget is not None:
        budget.charge(fx.size)
    if not np.all(np.isfinite(fx)):
        raise NonConvergedError(
            f"integrand not finite on [{a:.17g}, {b:.17g}]", a=a, b=b
        )
    kron = half * (_KWEIGHTS @ fx)
    gauss = half * (_GWEIGHTS @ fx)
    return kron, np.abs(kron - gauss)


def gauss_kronrod(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    epsabs: float = DEFAULT_EPSABS,
    epsrel: float = DEFAULT_EPSREL,
    limit: int = 2000,
    budget: EvalBudget | None = None,
    points: Sequence[float] = (),
):
    """Integrate a vectorized ``f`` over the finite interval ``[a, b]``.

    ``f`` maps the 15 nodes of an interval (shape ``(15,)``) to values of
    shape ``(15,)`` or ``(15, m)``; in the latter case ``m`` integrals are
    refined together and each must meet the tolerance.  Returns
    ``(value, error_estimate)`` as floats or length-``m`` arrays.  Converged
    when the summed error estimate is below ``max(epsabs, epsrel * |value|)``.
    ``points`` are interior breakpoints used for the initial partition.

    Raises
    ------
    NonConvergedError
        If ``limit`` subdivisions or the evaluation budget are exhausted.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("gauss_kronrod needs finite limits")
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = sorted({a, b, *(p for p in points if a < p < b)})
    pieces = {}
    heap: list[tuple[float, int]] = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, e = _gk_interval(f, lo, hi, budget)
        key = len(pieces)
        pieces[key] = (lo, hi, val, e)
        heapq.heappush(heap, (-float(np.max(e)), key))
    if not pieces:
        return 0.0, 0.0

    def sums():
        vals = np.array([p[2] for p in pieces.values()])
        errs = np.array([p[3] for p in pieces.values()])
        return _fsum0(vals), _fsum0(errs)

    total, err = sums()
    n_sub = len(pieces)
    next_key = n_sub
    while np.any(err > np.maximum(epsabs, epsrel * np.abs(total))):
        if n_sub >= limit:
            raise NonConvergedError(
                f"no convergence after {limit} subdivisions",
                value=_scalar(total), error=_scalar(err),
            )
        _, key = heapq.heappop(heap)
        lo, hi, val, e = pieces.pop(key)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval cannot be split further in floating point
            raise NonConvergedError("interval underflow", value=_scalar(total), error=_scalar(err))
        for a2, b2 in ((lo, mid), (mid, hi)):
            v2, e2 = _gk_interval(f, a2, b2, budget)
            pieces[next_key] = (a2, b2, v2, e2)
            heapq.heappush(heap, (-float(np.max(e2)), next_key))
            next_key += 1
            total = total + v2
            err = err + e2
        total = total - val
        err = err - e
        n_sub += 1
        if n_sub % 64 == 0:
            # resynchronise running sums against drift
            total, err = sums()
    total, err = sums()
    return _scalar(sign * total), _scalar(err)


def _fsum0(arr: np.ndarray):
    if arr.ndim == 1:
        return math.fsum(arr.tolist())
    return np.array([math.fsum(col) for col in arr.T.tolist()])


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else np.asarray(x)


def inside_runs(
    indicator: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    probes: int = 129,
    bisections: int = 48,
) -> list[tuple[float, float]]:
    """Maximal sub-intervals of ``[lo, hi]`` on which ``indicator`` holds.

    Transitions are located to roughly ``(hi - lo) * 2**-bisections``; features
    narrower than the probe spacing can be missed.
    """
    if hi <= lo:
        return []
    t = np.linspace(lo, hi, probes)
    mask = np.asarray(indicator(t), dtype=bool)
    if not mask.any():
        return []

    def locate(t_in: float, t_out: float) -> float:
        # returns a point on the inside, as close to the transition as possible
        for _ in range(bisections):
            mid = 0.5 * (t_in + t_out)
            if mid == t_in or mid == t_out:
                break
            if indicator(np.array([mid]))[0]:
                t_in = mid
            else:
                t_out = mid
        return t_in

    runs = []
    i = 0
    n = len(t)
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        start = lo if i == 0 else locate(t[i], t[i - 1])
        stop = hi if j == n - 1 else locate(t[j], t[j + 1])
        if stop > start:
            runs.append((start, stop))
        i = j + 1
    return runs


def integrate_region(
    f: Callable[[np.ndarray], np.ndarray],
    bounds: np.ndarray,
    indicator: Callable[[np.ndarray], np.ndarray],
    epsabs: float = DEFAULT_EPSABS,
    epsrel: float = DEFAULT_EPSREL,
    probes: int = 129,
    budget: EvalBudget | None = None,
) -> float:
    """Integrate ``f`` over ``{y in bounds : indicator(y)}``.

    ``f`` and ``indicator`` take arrays of shape ``(m, d)``.  Nested adaptive
    Gauss-Kronrod, innermost axis last; inner tolerances are tightened by a
    factor of ten so that inner error does not swamp the outer estimate.
    """
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    d = len(bounds)
    if d == 0 or np.any(bounds[:, 1] <= bounds[:, 0]):
        return 0.0
    budget = budget if budget is not None else EvalBudget()
    widths = bounds[:, 1] - bounds[:, 0]

    def level(axis: int, fixed: tuple[float, ...], eabs: float, erel: float) -> float:
        lo, hi = bounds[axis]
        if axis == d - 1:
            prefix = np.asarray(fixed, dtype=float)

            def pts(t):
                t = np.atleast_1d(t)
                out = np.empty((t.size, d))
                out[:, :axis] = prefix
                out[:, axis] = t
                return out

            runs = inside_runs(lambda t: indicator(pts(t)), lo, hi, probes)
            budget.charge(probes)
            total = 0.0
            for a, b in runs:
                val, _ = gauss_kronrod(
                    lambda t: f(pts(t)), a, b, eabs / max(len(runs), 1), erel,
                    budget=budget,
                )
                total += val
            return total

        inner_abs = eabs / (10.0 * widths[axis])
        inner_rel = erel / 10.0

        def g(ts):
            return np.array([level(axis + 1, fixed + (float(t),), inner_abs, inner_rel)
                             for t in np.atleast_1d(ts)])

        val, _ = gauss_kronrod(g, lo, hi, eabs, erel, budget=budget)
        return val

    return level(0, (), epsabs, epsrel)
