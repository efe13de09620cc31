"""Distributional diagnostics: sign-break times, tail fits and stylized facts.

Covers everything the demos and the compare pipeline report: stopping times
where a maintained sign breaks, the complementary CDF of the waiting times
between breaks with a log-linear decay fit, geometric and negative-binomial
model tails, the back-solve from a fitted decay rate to an implied flip
probability, normal-probability-plot data, phase-plot pairs, windowed
realized volatility and its lag-1 correlation, and excess kurtosis.

All operations are pure functions over immutable inputs with fixed reduction
orders, so results are independent of any internal parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import ndtri
from scipy.stats import nbinom

from .timeseries import ReturnSeries, _readonly

__all__ = [
    "FlipTimes",
    "CcdfTable",
    "DecayFit",
    "StatsBundle",
    "flip_times",
    "ccdf",
    "decay_rate",
    "geometric_tail",
    "negbinom_tail",
    "q_from_decay",
    "normal_prob_plot",
    "phase_plot",
    "realized_vol",
    "lag1_corr",
    "excess_kurtosis",
    "analyze",
]


def _values(x) -> np.ndarray:
    v = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    return np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class FlipTimes:
    """Break positions and the waiting times between them.

    ``times`` are strictly increasing 1-based positions; ``durations`` are
    the gaps with the convention that the first gap is measured from 0, so
    durations always sum to the last break position. ``order`` is the
    averaging depth used in the break definition.
    """

    times: np.ndarray
    durations: np.ndarray
    order: int

    def __post_init__(self):
        t = np.array(self.times, dtype=np.int64)
        tau = np.array(self.durations, dtype=np.int64)
        if t.shape != tau.shape or t.ndim != 1:
            raise ValueError("times and durations must be matching vectors")
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ValueError("times must be strictly increasing")
            if np.any(tau < 1):
                raise ValueError("durations must be positive")
            if int(tau.sum()) != int(t[-1]):
                raise ValueError("durations must sum to the last break position")
        object.__setattr__(self, "times", _readonly(t))
        object.__setattr__(self, "durations", _readonly(tau))

    def __len__(self) -> int:
        return int(self.times.size)

    def summary(self) -> dict:
        tau = self.durations
        if not tau.size:
            return {"count": 0, "order": self.order}
        return {
            "count": int(tau.size),
            "order": self.order,
            "mean_duration": float(tau.mean()),
            "median_duration": float(np.median(tau)),
            "max_duration": int(tau.max()),
            "last_time": int(self.times[-1]),
        }


def flip_times(x, order: int) -> FlipTimes:
    """Positions where the series breaks a maintained sign.

    A break sits at 1-based position k when x[k] opposes the sum of its
    previous ``order`` values while those values were trending together,
    i.e. every product x[k-i] * x[k-i-1] for i = 1..order-1 is strictly
    positive (vacuous for order 1). Products of exactly zero never qualify.
    """
    v = _values(x)
    n = int(order)
    if n < 1:
        raise ValueError("order must be at least 1")
    if v.size < n + 2:
        raise ValueError(f"series must have at least {n + 2} values")
    prior_sums = sliding_window_view(v, n)[:-1].sum(axis=1)
    hit = v[n:] * prior_sums < 0.0
    for i in range(1, n):
        hit &= v[n - i:-i] * v[n - i - 1:-i - 1] > 0.0
    t = np.flatnonzero(hit) + n + 1
    return FlipTimes(times=t, durations=np.diff(t, prepend=0), order=n)


@dataclass(frozen=True, eq=False)
class CcdfTable:
    """Tail table p(s) = Pr(duration > s) for s = 1..max duration.

    ``counts`` holds the number of observed durations exceeding each s for
    empirical tables; model-generated tables carry ``counts=None`` and are
    treated as exact (every point usable in fits).
    """

    s: np.ndarray
    p: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        s = np.array(self.s, dtype=np.int64)
        p = np.array(self.p, dtype=float)
        if s.shape != p.shape or s.ndim != 1 or not s.size:
            raise ValueError("s and p must be matching non-empty vectors")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.diff(p) > 0.0):
            raise ValueError("tail probabilities must be nonincreasing in s")
        object.__setattr__(self, "s", _readonly(s))
        object.__setattr__(self, "p", _readonly(p))
        if self.counts is not None:
            c = np.array(self.counts, dtype=np.int64)
            if c.shape != s.shape:
                raise ValueError("counts must match s")
            object.__setattr__(self, "counts", _readonly(c))

    def to_rows(self):
        c = self.counts if self.counts is not None else np.zeros_like(self.s)
        return zip(self.s.tolist(), self.p.tolist(), c.tolist())


def ccdf(flips: FlipTimes) -> CcdfTable:
    """Empirical tail of the waiting-time distribution."""
    tau = flips.durations
    if not tau.size:
        raise ValueError("no durations: the series never broke sign")
    total = int(tau.size)
    smax = int(tau.max())
    per_s = np.bincount(tau, minlength=smax + 1)
    surviving = total - np.cumsum(per_s)[1:]  # index s-1 holds #{tau > s}
    return CcdfTable(
        s=np.arange(1, smax + 1),
        p=surviving / float(total),
        counts=surviving,
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ln p(s) on s over the usable part of a tail table."""

    rate: float
    intercept: float
    fit_range: tuple[int, int]
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "rate": float(self.rate),
            "intercept": float(self.intercept),
            "fit_range": [int(self.fit_range[0]), int(self.fit_range[1])],
            "r_squared": float(self.r_squared),
            "n_points": int(self.n_points),
        }


def decay_rate(table: CcdfTable, min_count: int = 10,
               fit_range: tuple[int, int] | None = None) -> DecayFit:
    """Exponential decay rate of a tail table: OLS slope of ln p(s) against s.

    Points with p = 0 are unusable; empirical points backed by fewer than
    ``min_count`` surviving durations are excluded as noise-dominated. The
    default fit window runs from s = 1 to the last usable point.
    """
    usable = table.p > 0.0
    if table.counts is not None:
        usable &= table.counts >= int(min_count)
    if fit_range is not None:
        lo, hi = fit_range
        usable &= (table.s >= lo) & (table.s <= hi)
    if int(usable.sum()) < 3:
        raise ValueError("fewer than 3 usable points for the decay fit")
    s = table.s[usable].astype(float)
    logp = np.log(table.p[usable])
    slope, intercept = np.polyfit(s, logp, 1)
    fitted = slope * s + intercept
    ss_res = float(np.sum((logp - fitted) ** 2))
    ss_tot = float(np.sum((logp - logp.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=float(slope),
        intercept=float(intercept),
        fit_range=(int(s[0]), int(s[-1])),
        r_squared=r2,
        n_points=int(s.size),
    )


def geometric_tail(q: float, s) -> float | np.ndarray:
    """Geometric waiting-time tail Pr(duration > s) = (1 - q)^s."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    out = (1.0 - q) ** np.asarray(s)
    return float(out) if np.isscalar(s) else out


def negbinom_tail(q: float, order: int, s: int, survival: bool = False) -> float:
    """Negative-binomial waiting-time model with parameters q and order.

    The default evaluates C(s-1, order-1) * (1-q)^(s-order) * q^order, the
    probability mass at exactly s (the classic closed form quoted for these
    waiting times, which at order 1 disagrees with the geometric tail).
    ``survival=True`` evaluates the proper tail Pr(duration > s); at order 1
    that reduces exactly to the geometric tail.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly inside (0, 1)")
    if order < 1 or s < order:
        raise ValueError("need s >= order >= 1")
    if survival:
        return float(nbinom.sf(s - order, order, q))
    return math.comb(s - 1, order - 1) * (1.0 - q) ** (s - order) * q ** order


def q_from_decay(rate: float, order: int) -> float:
    """Flip probability implied by a fitted tail decay rate.

    Inverts rate = ln(1 - q) for order 1 and the small-gap approximation
    rate = ln(1 - q) - (order - 1) for deeper averaging, so
    q = 1 - exp(rate + order - 1). The result must land strictly inside
    (0, 1); boundary values mean the decay rate is inconsistent with a
    positive flip probability.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    q = 1.0 - math.exp(rate + order - 1)
    if not 0.0 < q < 1.0:
        raise ValueError(f"decay rate {rate:g} implies q={q:g} outside (0, 1)")
    return q


def normal_prob_plot(x) -> np.ndarray:
    """Normal-probability-plot data: column 0 theoretical normal quantiles
    at plotting positions (i - 0.5) / N, column 1 the standardized sorted
    sample. Straightness of the point cloud indicates Gaussian tails."""
    v = _values(x)
    if v.size < 10:
        raise ValueError("need at least 10 values")
    sd = v.std(ddof=1)
    if sd == 0.0:
        raise ValueError("zero variance")
    ordered = np.sort((v - v.mean()) / sd)
    quantiles = ndtri((np.arange(1, v.size + 1) - 0.5) / v.size)
    return np.column_stack([quantiles, ordered])


def phase_plot(x) -> np.ndarray:
    """Consecutive-value pairs (x[k-1], x[k]) as an (N-1) x 2 array."""
    v = _values(x)
    if v.size < 2:
        raise ValueError("need at least 2 values")
    return np.column_stack([v[:-1], v[1:]])


def realized_vol(x, window: int) -> np.ndarray:
    """Sample standard deviation over consecutive non-overlapping windows.

    ``window`` observations per window (10 = biweekly for daily data); the
    trailing partial window is dropped.
    """
    v = _values(x)
    w = int(window)
    if w < 2:
        raise ValueError("window must be at least 2")
    if v.size < 2 * w:
        raise ValueError(f"need at least {2 * w} values for window {w}")
    n_win = v.size // w
    return v[: n_win * w].reshape(n_win, w).std(axis=1, ddof=1)


def lag1_corr(v) -> float:
    """Pearson correlation between consecutive values of a series."""
    a = np.asarray(v, dtype=float)
    if a.size < 3:
        raise ValueError("need at least 3 values")
    lead, lag = a[:-1], a[1:]
    if lead.std() == 0.0 or lag.std() == 0.0:
        raise ValueError("zero variance")
    return float(np.corrcoef(lead, lag)[0, 1])


def excess_kurtosis(x) -> float:
    """Fourth standardized sample moment minus 3 (0 for Gaussian data)."""
    v = _values(x)
    if v.size < 20:
        raise ValueError("need at least 20 values")
    centered = v - v.mean()
    m2 = float(np.mean(centered * centered))
    if m2 == 0.0:
        raise ValueError("zero variance")
    m4 = float(np.mean(centered ** 4))
    return m4 / (m2 * m2) - 3.0


@dataclass(frozen=True, eq=False)
class StatsBundle:
    """Every diagnostic for one return series, computed by :func:`analyze`.

    ``q_from_decay`` is None when the fitted decay rate does not invert to a
    flip probability inside (0, 1), which is the normal outcome for
    pure-trend runs whose tails barely decay.
    """

    flips: FlipTimes
    ccdf: CcdfTable
    decay: DecayFit
    q_from_decay: float | None
    kurtosis_excess: float
    npp: np.ndarray
    phase: np.ndarray
    rv_phase: np.ndarray
    rv_lag1_corr: float

    def summary_dict(self, plot_files: dict[str, str] | None = None) -> dict:
        """JSON-ready summary; large point clouds are reported by size and,
        when written by the CLI, by file name."""
        files = plot_files or {}

        def cloud(name: str, arr: np.ndarray) -> dict:
            doc = {"points": int(arr.shape[0])}
            if name in files:
                doc["file"] = files[name]
            return doc

        return {
            "flips": self.flips.summary(),
            "ccdf": {
                "s": self.ccdf.s.tolist(),
                "p": self.ccdf.p.tolist(),
                "counts": self.ccdf.counts.tolist() if self.ccdf.counts is not None else None,
            },
            "decay": self.decay.to_dict(),
            "q_from_decay": self.q_from_decay,
            "kurtosis_excess": float(self.kurtosis_excess),
            "npp": cloud("npp", self.npp),
            "phase": cloud("phase", self.phase),
            "rv_phase": cloud("rv_phase", self.rv_phase),
            "rv_lag1_corr": float(self.rv_lag1_corr),
        }


def analyze(x, order: int = 2, window: int = 10) -> StatsBundle:
    """Compute the full diagnostic bundle for a return series."""
    flips = flip_times(x, order)
    table = ccdf(flips)
    decay = decay_rate(table)
    try:
        implied_q = q_from_decay(decay.rate, order)
    except ValueError:
        implied_q = None
    rv = realized_vol(x, window)
    return StatsBundle(
        flips=flips,
        ccdf=table,
        decay=decay,
        q_from_decay=implied_q,
        kurtosis_excess=excess_kurtosis(x),
        npp=normal_prob_plot(x),
        phase=phase_plot(x),
        rv_phase=np.column_stack([rv[:-1], rv[1:]]),
        rv_lag1_corr=lag1_corr(rv),
    )
