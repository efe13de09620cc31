"""Boolean gating signals derived from volatility term-structure moves.

The gate is a qualified majority vote. Each term's increment is mapped to a
sign (+1 up, -1 down, 0 inside a dead zone, which for the default zero band
means exactly-zero moves only), the signs are summed, and the sum is
thresholded again: the default rule emits +1 when more than one net term
moved up, -1 when more than one net term moved down, and 0 on near-ties.
Signals are plain ints in {-1, 0, +1}; vectorized paths use int8 arrays.

The per-step probability that the gate commands a flip (signal -1) is the
quantity called q throughout; for a driftless symmetric increment law it
never exceeds 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .timeseries import IncrementSeries, _readonly
from .volprocess import CovarianceMatrix, RngState, cholesky

__all__ = [
    "threshold_sign",
    "ThresholdRule",
    "DEFAULT_RULE",
    "majority_signal",
    "majority_signals",
    "SignSumMeasure",
    "FlipProbability",
    "sign_sum_distribution",
    "flip_probability",
    "flip_probability_from_measure",
    "bivariate_flip_probability",
    "empirical_flip_frequency",
]


def threshold_sign(x: float, band: float = 0.0) -> int:
    """Sign of x with a symmetric dead zone: 0 whenever -band <= x <= band."""
    if band < 0.0:
        raise ValueError("band must be nonnegative")
    if x > band:
        return 1
    if x < -band:
        return -1
    return 0


@dataclass(frozen=True)
class ThresholdRule:
    """Two-stage vote: per-term dead-zone signs summed, then thresholded.

    ``inner`` is the per-term dead zone (scalar or one value per term) and
    ``outer`` the majority threshold on the vote sum. The defaults (0, 1)
    give the qualified-majority rule used by the simulator; other values
    exist for rule experiments only.
    """

    inner: float | np.ndarray = 0.0
    outer: float = 1.0

    def __post_init__(self):
        inner = np.asarray(self.inner, dtype=float)
        if np.any(inner < 0.0) or self.outer < 0.0:
            raise ValueError("thresholds must be nonnegative")

    def vote_sums(self, rows: np.ndarray) -> np.ndarray:
        """Sum of per-term signs for each row of increments."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        inner = np.broadcast_to(np.asarray(self.inner, dtype=float), rows.shape[1:])
        signs = np.where(rows > inner, 1, np.where(rows < -inner, -1, 0))
        return signs.sum(axis=1)

    def signals(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized gate values, one int8 per row of increments."""
        s = self.vote_sums(rows)
        return np.where(s > self.outer, 1, np.where(s < -self.outer, -1, 0)).astype(np.int8)

    def signal(self, row) -> int:
        return int(self.signals(np.asarray(row, dtype=float)[None, :])[0])


DEFAULT_RULE = ThresholdRule()


def majority_signal(row, rule: ThresholdRule = DEFAULT_RULE) -> int:
    """Gate value for one row of per-term increments."""
    return rule.signal(row)


def majority_signals(rows: np.ndarray, rule: ThresholdRule = DEFAULT_RULE) -> np.ndarray:
    """Gate values for a matrix of increment rows (int8 array)."""
    return rule.signals(rows)


@dataclass(frozen=True, eq=False)
class SignSumMeasure:
    """Empirical law of the vote sum on its parity lattice {-m, -m+2, ..., m}."""

    support: np.ndarray
    probabilities: np.ndarray
    sample_count: int

    def __post_init__(self):
        support = np.array(self.support, dtype=int)
        probs = np.array(self.probabilities, dtype=float)
        if support.shape != probs.shape or support.ndim != 1:
            raise ValueError("support and probabilities must be matching vectors")
        m = int(support.max())
        if not np.array_equal(support, np.arange(-m, m + 1, 2)):
            raise ValueError("support must be the lattice -m, -m+2, ..., m")
        if np.any(probs < 0.0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "support", _readonly(support))
        object.__setattr__(self, "probabilities", _readonly(probs))
        object.__setattr__(self, "sample_count", int(self.sample_count))

    @property
    def m(self) -> int:
        return int(self.support.max())

    def prob_of(self, s: int) -> float:
        idx = np.flatnonzero(self.support == s)
        return float(self.probabilities[idx[0]]) if idx.size else 0.0

    def central_mass(self) -> float:
        """Probability that the vote sum lies in [-1, 1]."""
        return float(self.probabilities[np.abs(self.support) <= 1].sum())

    def to_dict(self) -> dict:
        return {
            "support": [int(s) for s in self.support],
            "probabilities": [float(p) for p in self.probabilities],
            "sample_count": self.sample_count,
        }


_SYMMETRIC_METHODS = ("monte-carlo", "exact-bivariate")
_METHODS = _SYMMETRIC_METHODS + ("empirical-frequency",)


@dataclass(frozen=True)
class FlipProbability:
    """Per-step probability that the gate commands a flip, with its standard error.

    Estimates for driftless laws (monte-carlo, exact-bivariate) are bounded
    by 1/2; empirical frequencies from drifting market data may exceed it.
    """

    q: float
    std_error: float
    method: str

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 <= self.q <= 1.0 or self.std_error < 0.0:
            raise ValueError("q must lie in [0, 1] with nonnegative std_error")
        if self.method in _SYMMETRIC_METHODS and self.q > 0.5:
            raise ValueError("driftless flip probability cannot exceed 1/2")

    def to_dict(self) -> dict:
        return {"q": float(self.q), "std_error": float(self.std_error),
                "method": self.method}


def sign_sum_distribution(cov: CovarianceMatrix, samples: int,
                          rng: RngState) -> SignSumMeasure:
    """Empirical vote-sum law over ``samples`` draws of N(0, C) increments.

    Gaussian increments are almost surely nonzero, so the sum lands on the
    parity lattice of m points; an exactly-zero increment (possible only
    through floating-point cancellation) is rejected loudly.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    m = cov.m
    rows = rng.normals((int(samples), m)) @ cholesky(cov).entries.T
    sums = DEFAULT_RULE.vote_sums(rows)
    counts = np.bincount(sums + m, minlength=2 * m + 1)
    if counts[1::2].sum():  # lattice values sit at even offsets of sum + m
        raise ValueError("vote sum off the parity lattice (an increment was exactly zero)")
    return SignSumMeasure(
        support=np.arange(-m, m + 1, 2),
        probabilities=counts[0::2] / float(samples),
        sample_count=int(samples),
    )


def flip_probability_from_measure(measure: SignSumMeasure) -> FlipProbability:
    """Flip probability implied by a vote-sum law: q = (1 - P(|sum| <= 1)) / 2.

    The binomial standard error of the central-mass estimate propagates with
    the same factor of one half.
    """
    central = measure.central_mass()
    n = measure.sample_count
    se = math.sqrt(max(central * (1.0 - central), 0.0) / n) / 2.0
    return FlipProbability(q=(1.0 - central) / 2.0, std_error=se, method="monte-carlo")


def flip_probability(cov: CovarianceMatrix, samples: int,
                     rng: RngState) -> FlipProbability:
    """Monte Carlo flip probability under N(0, C) increments.

    Shares the sampling path of :func:`sign_sum_distribution`, so estimates
    from the same seed agree exactly with the measure-derived value.
    """
    return flip_probability_from_measure(sign_sum_distribution(cov, samples, rng))


def bivariate_flip_probability(rho: float) -> FlipProbability:
    """Closed-form flip probability for two terms with correlation ``rho``.

    With two terms the gate flips only when both increments are negative,
    and the Gaussian orthant identity gives q = 1/4 + arcsin(rho) / (2 pi).
    Serves as the analytic cross-check for the Monte Carlo estimator.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie strictly inside (-1, 1)")
    q = 0.25 + math.asin(rho) / (2.0 * math.pi)
    return FlipProbability(q=q, std_error=0.0, method="exact-bivariate")


def empirical_flip_frequency(incs: IncrementSeries,
                             rule: ThresholdRule = DEFAULT_RULE) -> FlipProbability:
    """Observed frequency of flip commands over recorded increment rows."""
    n = incs.n_rows
    if n < 100:
        raise ValueError("need at least 100 increment rows")
    f = float(np.mean(rule.signals(incs.values) == -1))
    se = math.sqrt(f * (1.0 - f) / n)
    return FlipProbability(q=f, std_error=se, method="empirical-frequency")
