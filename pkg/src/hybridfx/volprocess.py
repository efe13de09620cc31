"""Covariance estimation and the driftless correlated Gaussian increment sampler.

Random stream contract
----------------------
Every normal deviate consumes exactly one 53-bit uniform from a seeded PCG64
stream: u = (i + 0.5) / 2**53 with i drawn uniformly from [0, 2**53), mapped
through the normal quantile function (scipy.special.ndtri, the Cephes
rational approximation; peak relative error about 1.2e-13, so the absolute
error is far below 1e-9 over the attainable range |z| < 8.4). One seed, one
stream: identical seeds give bit-identical output within a fixed
numpy/scipy build. Multi-dimensional draws fill in C order (row-major), so
a (steps, m) request interleaves m deviates per step.

RngState is single-owner and must not be shared between threads; parallel
work uses distinct seeds (seed, seed+1, ...). Matrix containers are
immutable and freely shareable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy
from scipy.special import ndtri

from .timeseries import IncrementSeries, _readonly

__all__ = [
    "RNG_ALGORITHM",
    "RngState",
    "NotPositiveDefiniteError",
    "CovarianceMatrix",
    "CholeskyFactor",
    "cholesky",
    "sample_covariance",
    "estimate_covariance",
    "regularize",
    "equicorrelated",
    "sample_increments",
    "save_covariance_json",
    "load_covariance_json",
]

RNG_ALGORITHM = (
    f"PCG64 (numpy {np.__version__}), period 2^128, "
    f"inverse-CDF normals via scipy.special.ndtri (scipy {scipy.__version__})"
)

_SYM_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be positive definite is not.

    Carries the 1-based Cholesky pivot index that failed and, when computed,
    an estimate of the smallest eigenvalue (a caller may regularize).
    """

    def __init__(self, message: str, pivot: int | None = None,
                 min_eigenvalue: float | None = None):
        super().__init__(message)
        self.pivot = pivot
        self.min_eigenvalue = min_eigenvalue


class RngState:
    """Seeded deterministic random stream (see module docstring)."""

    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bits = np.random.Generator(np.random.PCG64(self.seed))

    def normals(self, shape) -> np.ndarray:
        """Standard normal deviates, one 53-bit uniform each, C-order fill."""
        i = self._bits.integers(0, 1 << 53, size=shape, dtype=np.int64)
        return ndtri((i + 0.5) * 2.0 ** -53)


def _check_symmetric(c: np.ndarray, what: str) -> None:
    gap = np.abs(c - c.T)
    tol = _SYM_TOL * np.maximum(np.abs(c), 1.0)
    if np.any(gap > tol):
        i, j = np.unravel_index(int(np.argmax(gap - tol)), c.shape)
        raise ValueError(f"{what} is not symmetric at ({i}, {j}): "
                         f"{c[i, j]!r} vs {c[j, i]!r}")


def _cholesky_lower(c: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises with the 1-based pivot on failure."""
    m = c.shape[0]
    low = np.zeros((m, m))
    for j in range(m):
        d = c[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:
            raise NotPositiveDefiniteError(
                f"Cholesky pivot {j + 1} is not positive ({d:.6e})", pivot=j + 1
            )
        low[j, j] = math.sqrt(d)
        if j + 1 < m:
            low[j + 1:, j] = (c[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric positive-definite covariance of per-step increments."""

    entries: np.ndarray

    def __post_init__(self):
        c = np.array(self.entries, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError("covariance must be a square matrix")
        if not np.all(np.isfinite(c)):
            raise ValueError("covariance contains non-finite entries")
        _check_symmetric(c, "covariance")
        _cholesky_lower(c)  # positive definiteness gate
        object.__setattr__(self, "entries", _readonly(c))

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    def to_dict(self) -> dict:
        return {"m": self.m, "entries": [float(v) for v in self.entries.ravel()]}

    @classmethod
    def from_dict(cls, doc: dict) -> "CovarianceMatrix":
        m = int(doc["m"])
        entries = np.asarray(doc["entries"], dtype=float)
        if entries.size != m * m:
            raise ValueError(f"expected {m * m} entries, got {entries.size}")
        return cls(entries.reshape(m, m))


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source covariance."""

    entries: np.ndarray

    def __post_init__(self):
        low = np.array(self.entries, dtype=float)
        if low.ndim != 2 or low.shape[0] != low.shape[1]:
            raise ValueError("Cholesky factor must be square")
        if np.any(np.triu(low, k=1) != 0.0):
            raise ValueError("Cholesky factor must be lower-triangular")
        if np.any(np.diag(low) <= 0.0):
            raise ValueError("Cholesky factor needs a strictly positive diagonal")
        object.__setattr__(self, "entries", _readonly(low))

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])


def cholesky(cov: CovarianceMatrix) -> CholeskyFactor:
    """Lower Cholesky factor of a validated covariance."""
    return CholeskyFactor(_cholesky_lower(cov.entries))


def sample_covariance(incs: IncrementSeries) -> np.ndarray:
    """Unbiased sample covariance of increment rows (divisor N-1, mean removed).

    Returned raw and symmetrized, without the positive-definiteness gate, so
    that degenerate estimates can still be regularized.
    """
    rows = incs.values
    m = rows.shape[1]
    if rows.shape[0] < m + 1:
        raise ValueError(f"need at least {m + 1} increment rows, got {rows.shape[0]}")
    c = np.atleast_2d(np.cov(rows, rowvar=False, ddof=1))
    return (c + c.T) / 2.0


def estimate_covariance(incs: IncrementSeries) -> CovarianceMatrix:
    """Sample covariance of increments, validated positive definite."""
    c = sample_covariance(incs)
    try:
        return CovarianceMatrix(c)
    except NotPositiveDefiniteError as err:
        lam = float(np.linalg.eigvalsh(c)[0])
        raise NotPositiveDefiniteError(
            f"sample covariance is not positive definite "
            f"(smallest eigenvalue {lam:.6e}); consider regularize()",
            pivot=err.pivot,
            min_eigenvalue=lam,
        ) from err


def regularize(candidate, ridge: float) -> CovarianceMatrix:
    """Add ridge * I to a symmetric candidate matrix and validate it.

    ``candidate`` may be a raw array or a CovarianceMatrix; ridge 0 on an
    already valid covariance is the identity operation.
    """
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    c = candidate.entries if isinstance(candidate, CovarianceMatrix) else \
        np.array(candidate, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("candidate must be a square matrix")
    _check_symmetric(c, "candidate")
    ridged = c + ridge * np.eye(c.shape[0])
    try:
        return CovarianceMatrix(ridged)
    except NotPositiveDefiniteError as err:
        lam = float(np.linalg.eigvalsh(ridged)[0])
        raise NotPositiveDefiniteError(
            f"still not positive definite after ridge {ridge:g} "
            f"(smallest eigenvalue {lam:.6e})",
            pivot=err.pivot,
            min_eigenvalue=lam,
        ) from err


def equicorrelated(m: int, rho: float, sigma: float) -> CovarianceMatrix:
    """Covariance with common per-step std ``sigma`` and pairwise correlation ``rho``.

    Positive definite for rho in (-1/(m-1), 1); rho is ignored when m == 1.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    if m > 1 and not (-1.0 / (m - 1) < rho < 1.0):
        raise ValueError(
            f"rho={rho:g} outside the positive-definite range "
            f"(-1/{m - 1}, 1) for m={m}"
        )
    c = np.full((m, m), rho * sigma * sigma)
    np.fill_diagonal(c, sigma * sigma)
    return CovarianceMatrix(c)


def sample_increments(factor: CholeskyFactor, steps: int, rng: RngState) -> IncrementSeries:
    """Draw ``steps`` iid rows of N(0, C) increments, C = L @ L.T.

    Each row is L @ z with z fresh standard normals; rows are independent
    across steps. Advances ``rng`` by steps * m deviates.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    z = rng.normals((int(steps), factor.m))
    return IncrementSeries(z @ factor.entries.T)


def save_covariance_json(cov: CovarianceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cov.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_covariance_json(path) -> CovarianceMatrix:
    with open(path, encoding="utf-8") as fh:
        return CovarianceMatrix.from_dict(json.load(fh))
