"""Hybrid gating vs pure trend following: the stylized-fact comparison.

Simulates both modes from the same seeds and contrasts the distributional
fingerprints: excess kurtosis (fat tails), the lag-1 correlation of biweekly
realized volatility (clustering) and the phase-plot slope (serial
correlation of returns). Gating the trend rule with the vol-vote signal
fattens the tails and induces volatility clustering; the ungated rule gives
an almost perfectly serially correlated, thin-tailed path.

Usage: python demos/02_hybrid_vs_pure_trend.py
"""
import math

import numpy as np

from hybridfx import (
    SimConfig,
    equicorrelated,
    excess_kurtosis,
    lag1_corr,
    phase_plot,
    realized_vol,
    simulate,
)

STEPS = 300_000
SEEDS = range(4)
COV = equicorrelated(4, 0.9, 0.01)


def fingerprints(x: np.ndarray) -> dict:
    rv = realized_vol(x, 10)
    r = lag1_corr(rv)
    pts = phase_plot(x)
    slope = np.polyfit(pts[:, 0], pts[:, 1], 1)[0]
    return {
        "kurtosis": excess_kurtosis(x),
        "rv_corr": r,
        "rv_t": r * math.sqrt((rv.size - 2) / (1 - r * r)),
        "phase_slope": slope,
    }


print("=" * 76)
print(f"  HYBRID vs PURE TREND, {STEPS} steps, {len(list(SEEDS))} seeds")
print("=" * 76)
print(f"  {'seed':>4s} {'mode':>11s} {'ex.kurtosis':>12s} {'rv lag-1':>10s} "
      f"{'t-stat':>8s} {'phase slope':>12s}")

rows = {"hybrid": [], "pure-trend": []}
for seed in SEEDS:
    for mode in ("hybrid", "pure-trend"):
        cov = COV if mode == "hybrid" else None
        out = simulate(SimConfig(seed=seed, covariance=cov, mode=mode,
                                 steps=STEPS))
        x = out.returns.values[out.config.n:]  # drop the noise warm-up
        f = fingerprints(x)
        rows[mode].append(f)
        print(f"  {seed:>4d} {mode:>11s} {f['kurtosis']:12.3f} "
              f"{f['rv_corr']:10.4f} {f['rv_t']:8.1f} {f['phase_slope']:12.4f}")

print()
print("  medians across seeds")
for mode, fs in rows.items():
    med = {k: float(np.median([f[k] for f in fs])) for k in fs[0]}
    print(f"  {mode:>11s}: kurtosis {med['kurtosis']:+.3f}, "
          f"rv lag-1 {med['rv_corr']:+.4f}, phase slope {med['phase_slope']:.4f}")

print()
print("  Reading the table: the gated runs carry positive excess kurtosis and")
print("  strongly positive realized-vol autocorrelation; the ungated runs sit")
print("  near a unit phase slope (a smooth trend) with thin or even platykurtic")
print("  tails and no clustering.")
