"""Statistical and numerical checks shared by every model.

Each check returns a :class:`VerificationReport`; reports serialize to one
JSON object per line.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import InconclusiveError, TooFewSamplesError

MIN_KS_SAMPLES = 50
MIN_COUNT_REPLICATES = 200


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``direction`` is ``"below"`` when the check passes for
    ``statistic <= threshold`` and ``"above"`` when it passes for
    ``statistic >= threshold``.
    """

    check_id: str
    statistic: float
    threshold: float
    passed: bool
    seed: int | None = None
    sample_sizes: list[int] = field(default_factory=list)
    runtime_ms: int = 0
    notes: str = ""
    direction: str = "below"

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        self.passed = bool(self.passed)
        self.sample_sizes = [int(s) for s in self.sample_sizes]

    @classmethod
    def compare(cls, check_id, statistic, threshold, direction="below", **kw):
        if direction == "below":
            passed = statistic <= threshold
        elif direction == "above":
            passed = statistic >= threshold
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return cls(check_id, statistic, threshold, passed, direction=direction, **kw)

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("statistic", "threshold"):
            d[key] = _json_float(d[key])
        return json.dumps(d, sort_keys=True)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        op = "<=" if self.direction == "below" else ">="
        return (f"[{mark}] {self.check_id}: {self.statistic:.6g} {op} "
                f"{self.threshold:.6g} ({self.runtime_ms} ms){' ' + self.notes if self.notes else ''}")


def _json_float(x: float):
    if math.isfinite(x):
        return float(f"{x:.17g}")
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def write_jsonl(reports: Iterable[VerificationReport], path) -> None:
    ordered = sorted(reports, key=lambda r: (r.check_id, -1 if r.seed is None else r.seed))
    with open(path, "w", encoding="utf-8") as fh:
        for r in ordered:
            fh.write(r.to_json() + "\n")


class timed:
    """Context manager measuring wall time in milliseconds."""

    def __enter__(self):
        self._t0 = time.perf_counter()
        self.ms = 0
        return self

    def __exit__(self, *exc):
        self.ms = int(round(1000 * (time.perf_counter() - self._t0)))
        return False


def ks_critical_value(alpha: float, n: int) -> float:
    """Asymptotic one-sample critical value ``c(alpha) / sqrt(n)``."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def ks_statistic(samples, cdf: Callable) -> float:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_test(samples, cdf: Callable, alpha: float = 0.01, check_id: str = "ks",
            seed: int | None = None, notes: str = "") -> VerificationReport:
    """One-sample Kolmogorov-Smirnov test against ``cdf``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_KS_SAMPLES:
        raise TooFewSamplesError(f"KS needs >= {MIN_KS_SAMPLES} samples, got {x.size}")
    with timed() as t:
        d = ks_statistic(x, cdf)
        crit = ks_critical_value(alpha, x.size)
    return VerificationReport.compare(check_id, d, crit, seed=seed,
                                      sample_sizes=[x.size], runtime_ms=t.ms, notes=notes)


def ks_two_sample(a, b, alpha: float = 0.01, check_id: str = "ks2",
                  seed: int | None = None, notes: str = "") -> VerificationReport:
    """Two-sample KS with critical value ``c(alpha) * sqrt((n+m)/(n m))``."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if min(a.size, b.size) < MIN_KS_SAMPLES:
        raise TooFewSamplesError("two-sample KS needs >= 50 samples per side")
    grid = np.concatenate([a, b])
    d = float(np.max(np.abs(np.searchsorted(a, grid, side="right") / a.size
                            - np.searchsorted(b, grid, side="right") / b.size)))
    crit = math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((a.size + b.size) / (a.size * b.size))
    return VerificationReport.compare(check_id, d, crit, seed=seed,
                                      sample_sizes=[a.size, b.size], notes=notes)


def _pooled_chi_square(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    """Merge adjacent cells (left to right, remainder into the last) until
    every expected count reaches ``min_expected``."""
    obs_cells, exp_cells = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_cells.append(o_acc)
            exp_cells.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_cells:
            obs_cells[-1] += o_acc
            exp_cells[-1] += e_acc
        else:
            obs_cells.append(o_acc)
            exp_cells.append(e_acc)
    o = np.asarray(obs_cells)
    e = np.asarray(exp_cells)
    return float(np.sum((o - e) ** 2 / e)), len(o)


def chi_square_counts(counts, expected_mean: float, alpha: float = 0.01,
                      check_id: str = "chi2-poisson", seed: int | None = None,
                      notes: str = "") -> VerificationReport:
    """Goodness of fit of replicate counts to ``Poisson(expected_mean)``.

    Cells are the integers 0..K plus an upper tail, pooled so each expected
    count is at least 5.  The mean is known, so df = cells - 1.
    """
    c = np.asarray(counts, dtype=np.int64).ravel()
    if c.size < MIN_COUNT_REPLICATES:
        raise TooFewSamplesError(f"need >= {MIN_COUNT_REPLICATES} replicate counts")
    if np.any(c < 0):
        raise ValueError("counts must be nonnegative")
    with timed() as t:
        n = c.size
        top = int(max(c.max(), stats.poisson.ppf(1 - 1e-12, expected_mean))) + 1
        k = np.arange(top + 1)
        probs = stats.poisson.pmf(k, expected_mean)
        probs[-1] = stats.poisson.sf(top - 1, expected_mean)
        observed = np.bincount(np.minimum(c, top), minlength=top + 1).astype(float)
        stat, cells = _pooled_chi_square(observed, n * probs, 5.0)
        df = max(cells - 1, 1)
        crit = float(stats.chi2.ppf(1 - alpha, df))
    return VerificationReport.compare(check_id, stat, crit, seed=seed, sample_sizes=[n],
                                      runtime_ms=t.ms, notes=notes or f"df={df}")


def chi_square_frequencies(observed, expected_probs, alpha: float = 0.01,
                           check_id: str = "chi2-freq", seed: int | None = None,
                           notes: str = "") -> VerificationReport:
    """Goodness of fit of category counts to known probabilities."""
    o = np.asarray(observed, dtype=float).ravel()
    p = np.asarray(expected_probs, dtype=float).ravel()
    p = p / p.sum()
    n = o.sum()
    if n < MIN_COUNT_REPLICATES:
        raise TooFewSamplesError("too few categorical observations")
    stat, cells = _pooled_chi_square(o, n * p, 5.0)
    df = max(cells - 1, 1)
    crit = float(stats.chi2.ppf(1 - alpha, df))
    return VerificationReport.compare(check_id, stat, crit, seed=seed,
                                      sample_sizes=[int(n)], notes=notes or f"df={df}")


def chi_square_homogeneity(table, alpha: float = 0.01, check_id: str = "chi2-homog",
                           seed: int | None = None, notes: str = "",
                           min_expected: float = 5.0) -> VerificationReport:
    """Chi-square test that the rows of a contingency table share one distribution.

    Adjacent columns are merged (left to right, remainder into the last)
    until every expected cell count reaches ``min_expected``.
    """
    t = np.asarray(table, dtype=float)
    t = t[:, t.sum(axis=0) > 0]
    rows = t.sum(axis=1)
    need = min_expected * t.sum() / rows.min()
    cols, acc = [], np.zeros(len(t))
    for j in range(t.shape[1]):
        acc = acc + t[:, j]
        if acc.sum() >= need:
            cols.append(acc)
            acc = np.zeros(len(t))
    if acc.sum() > 0:
        if cols:
            cols[-1] = cols[-1] + acc
        else:
            cols.append(acc)
    pooled = np.column_stack(cols)
    if pooled.shape[1] < 2:
        return VerificationReport.compare(check_id, 0.0, 0.0, seed=seed,
                                          sample_sizes=[int(s) for s in rows],
                                          notes=notes or "single pooled cell")
    stat, _, df, _ = stats.chi2_contingency(pooled, correction=False)
    crit = float(stats.chi2.ppf(1 - alpha, df))
    return VerificationReport.compare(check_id, stat, crit, seed=seed,
                                      sample_sizes=[int(s) for s in rows],
                                      notes=notes or f"df={df}")


# ---------------------------------------------------------------------------
# divergence certificates

MIN_LADDER_RUNGS = 8
FINITE_RELATIVE_STEP = 1e-4
FINITE_STREAK = 3
GROWTH_FACTOR = 1.5
GROWTH_STREAK = 6


@dataclass
class Certificate:
    """Verdict of a truncation ladder: ``"FINITE"`` or ``"INFINITE"``."""

    verdict: str
    value: float
    domains: list = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return self.verdict == "FINITE"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": _json_float(self.value),
            "ladder": [
                {"domain": _plain(d), "integral": _json_float(v)}
                for d, v in zip(self.domains, self.values)
            ],
        }


def _plain(d):
    if isinstance(d, (tuple, list, np.ndarray)):
        return [_plain(x) for x in d]
    if isinstance(d, (float, np.floating)):
        return _json_float(float(d))
    return d


def divergence_certificate(
    integrand: Callable | None,
    truncation_ladder: Sequence,
    integrate: Callable | None = None,
    growth_factor: float = GROWTH_FACTOR,
    growth_streak: int = GROWTH_STREAK,
    relative_step: float = FINITE_RELATIVE_STEP,
    finite_streak: int = FINITE_STREAK,
) -> Certificate:
    """Classify an integral as finite or infinite from nested truncations.

    ``truncation_ladder`` lists nested domains, each containing the previous.
    By default each domain is an interval ``(lo, hi)`` integrated with
    Gauss-Kronrod; pass ``integrate(domain) -> float`` for anything else.

    With ``I_k`` the rung integrals and ``D_k = I_k - I_{k-1}``:

    * FINITE once ``|D_k| <= relative_step * |I_k|`` on ``finite_streak``
      consecutive rungs (rungs that are all zero so far do not count, but a
      ladder that is zero throughout is FINITE(0)).
    * INFINITE once, on ``growth_streak`` consecutive rungs, the projected
      total exceeds ``growth_factor * I_k``.  The projection extends the
      increments geometrically at their observed ratio ``r = D_k / D_{k-1}``:
      ``I_k + D_k r / (1 - r)``, or unbounded when ``r >= 1``.

    Raises
    ------
    InconclusiveError
        When neither rule fires before the ladder runs out.
    """
    ladder = list(truncation_ladder)
    if len(ladder) < MIN_LADDER_RUNGS:
        raise ValueError(f"ladder needs >= {MIN_LADDER_RUNGS} rungs")
    if integrate is None:
        from .quadrature import gauss_kronrod

        def integrate(dom):
            lo, hi = dom
            f = np.vectorize(integrand, otypes=[float])
            return gauss_kronrod(f, lo, hi, epsabs=1e-13, epsrel=1e-10, limit=5000)[0]

    values: list[float] = []
    domains: list = []
    stable = growth = 0
    prev_step = None
    for dom in ladder:
        v = float(integrate(dom))
        if not math.isfinite(v):
            domains.append(dom)
            values.append(v)
            return Certificate("INFINITE", math.inf, domains, values)
        domains.append(dom)
        values.append(v)
        if len(values) < 2:
            continue
        prev, cur = values[-2], values[-1]
        step = cur - prev
        if cur == 0.0 and prev == 0.0:
            stable = 0
        elif abs(step) <= relative_step * abs(cur):
            stable += 1
        else:
            stable = 0
        if stable >= finite_streak:
            return Certificate("FINITE", cur, domains, values)

        if prev_step is not None and prev_step > 0 and step > 0:
            r = step / prev_step
            projected = math.inf if r >= 1.0 else cur + step * r / (1.0 - r)
            growth = growth + 1 if projected > growth_factor * cur else 0
        else:
            growth = 0
        if growth >= growth_streak:
            return Certificate("INFINITE", math.inf, domains, values)
        prev_step = step
    if all(v == 0.0 for v in values):
        return Certificate("FINITE", 0.0, domains, values)
    raise InconclusiveError(
        "truncation ladder neither converged nor certified divergence",
        domains=domains, values=values,
    )


def halving_ladder(start: float, rungs: int = 48) -> list[float]:
    return [start * 0.5**k for k in range(rungs)]


def doubling_ladder(start: float, rungs: int = 48) -> list[float]:
    return [start * 2.0**k for k in range(rungs)]
