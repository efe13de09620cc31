"""Gated trend-following return simulator.

The return recursion averages the previous n returns, multiplies by the
per-step gate in {-1, 0, +1}, and adds low-amplitude Gaussian noise:

    x[k] = gate[k] * (x[k-n] + ... + x[k-1]) / n + alpha * eps[k]

In hybrid mode the gate is the qualified-majority vote over the signs of the
correlated vol-term increments drawn at the same step; pure-trend mode pins
the gate at +1 and draws no vol increments. The first n steps are pure
noise warm-up (x[k] = alpha * eps[k]) and are conventionally excluded from
statistics (the CLI's --burn-in defaults to n).

Draw order, for replay audits: n warm-up noise deviates, then per simulated
step m vol deviates followed by one noise deviate (a single C-order block of
shape (steps - n, m + 1), which interleaves exactly that way). Pure-trend
runs draw only the noise column, so the first n deviates match a hybrid run
with the same seed.

A single simulation is strictly sequential; batches parallelize across
replicas only, each replica owning its own stream seeded seed + index, so
results never depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .symbolic import DEFAULT_RULE
from .timeseries import IncrementSeries, ReturnSeries, VolTermPath, _readonly
from .volprocess import CovarianceMatrix, RNG_ALGORITHM, RngState, cholesky

__all__ = ["SimConfig", "SimOutput", "simulate", "simulate_batch", "worker_count"]

MODES = ("hybrid", "pure-trend")


def worker_count() -> int:
    """Worker cap: HYBRIDFX_THREADS when set, else the logical core count."""
    env = os.environ.get("HYBRIDFX_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("HYBRIDFX_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Parameters of one simulation run.

    ``covariance`` drives the vol increments and is required in hybrid mode
    (its dimension must equal ``m``); it is ignored in pure-trend mode.
    ``signal_lag`` shifts the gate to read the vol move from ``lag`` steps
    earlier (steps with no earlier move get gate 0). ``base_level`` only
    anchors the reconstructed vol path when internals are recorded.
    """

    seed: int
    covariance: CovarianceMatrix | None = None
    n: int = 2
    m: int = 4
    alpha: float = 1e-4
    steps: int = 1_000_000
    mode: str = "hybrid"
    record_internals: bool = False
    signal_lag: int = 0
    base_level: float = 0.10

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be at least 1")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be strictly positive")
        if self.steps < self.n + 2:
            raise ValueError(f"steps must be at least n + 2 = {self.n + 2}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.signal_lag < 0:
            raise ValueError("signal_lag must be nonnegative")
        if not self.base_level > 0.0:
            raise ValueError("base_level must be positive")
        if self.mode == "hybrid":
            if self.covariance is None:
                raise ValueError("hybrid mode requires a covariance")
            if self.covariance.m != self.m:
                raise ValueError(
                    f"covariance dimension {self.covariance.m} does not match m={self.m}"
                )


@dataclass(frozen=True, eq=False)
class SimOutput:
    """One completed run: returns, gate stream and optional recorded internals.

    ``signals`` holds the gate for steps n+1..steps (always populated in
    hybrid mode, in pure-trend mode only when internals were recorded).
    With ``record_internals`` the raw Gaussian vol increments, a positive
    vol-level path reconstructed from them (exponentiated walk, so the level
    moves carry exactly the increment signs), and the unscaled noise deviates
    for every step are kept for bit-exact replay.
    """

    returns: ReturnSeries
    signals: np.ndarray
    config: SimConfig
    rng_algorithm: str
    vol_path: VolTermPath | None = None
    increments: IncrementSeries | None = None
    epsilons: np.ndarray | None = None


def _recursion(n: int, alpha: float, warm: np.ndarray, gates: np.ndarray,
               eps: np.ndarray) -> list[float]:
    """Run the gated recursion in plain floats.

    The step expression is ``g * (sum(x[k-n:k]) / n) + alpha * e`` with the
    builtin left-to-right sum; replay checks recompute the identical
    expression, so keep the two in sync bitwise.
    """
    steps = n + len(eps)
    x = [0.0] * steps
    for k in range(n):
        x[k] = alpha * float(warm[k])
    gl = gates.tolist()
    el = eps.tolist()
    for k in range(n, steps):
        x[k] = gl[k - n] * (sum(x[k - n:k]) / n) + alpha * el[k - n]
    return x


def simulate(config: SimConfig) -> SimOutput:
    """Run one deterministic simulation (identical config means identical output)."""
    n, m, steps, alpha = config.n, config.m, config.steps, config.alpha
    rng = RngState(config.seed)
    warm = rng.normals(n)

    if config.mode == "hybrid":
        factor = cholesky(config.covariance).entries
        block = rng.normals((steps - n, m + 1))
        inc_rows = block[:, :m] @ factor.T
        eps_tail = block[:, m]
        gates = DEFAULT_RULE.signals(inc_rows)
        if config.signal_lag:
            lag = config.signal_lag
            shifted = np.zeros_like(gates)
            if lag < gates.size:
                shifted[lag:] = gates[: gates.size - lag]
            gates = shifted
    else:
        inc_rows = None
        eps_tail = rng.normals(steps - n)
        gates = np.ones(steps - n, dtype=np.int8)

    x = _recursion(n, alpha, warm, gates, eps_tail)
    label = f"{config.mode} n={n} m={m} alpha={alpha:g} seed={config.seed}"
    returns = ReturnSeries(np.asarray(x), label=label)

    signals = gates
    if config.mode == "pure-trend" and not config.record_internals:
        signals = np.empty(0, dtype=np.int8)

    vol_path = incs = epsilons = None
    if config.record_internals:
        epsilons = _readonly(np.concatenate([warm, eps_tail]))
        if inc_rows is not None:
            incs = IncrementSeries(inc_rows)
            walk = np.vstack([np.zeros(m), np.cumsum(inc_rows, axis=0)])
            vol_path = VolTermPath(config.base_level * np.exp(walk))

    return SimOutput(
        returns=returns,
        signals=_readonly(np.asarray(signals, dtype=np.int8)),
        config=config,
        rng_algorithm=RNG_ALGORITHM,
        vol_path=vol_path,
        increments=incs,
        epsilons=epsilons,
    )


def simulate_batch(config: SimConfig, replicas: int,
                   max_workers: int | None = None) -> list[SimOutput]:
    """Run ``replicas`` independent simulations, replica r seeded seed + r.

    Outputs are returned in replica order and are identical whether the
    batch runs serially or on multiple workers.
    """
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    configs = [replace(config, seed=config.seed + r) for r in range(replicas)]
    workers = max_workers if max_workers is not None else worker_count()
    workers = max(1, min(int(workers), replicas))
    if workers == 1:
        return [simulate(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate, configs))
