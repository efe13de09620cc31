"""Command-line interface: reproducible simulation, calibration and analysis runs.

Commands: simulate, analyze, compare, calibrate-cov, qprob. Every run that
writes files also writes a ``<output>.manifest.json`` recording the command
line, seed, PRNG identifier, configuration echo and SHA-256 digests of the
inputs and data outputs; replaying the recorded command reproduces the data
outputs byte for byte (the manifest itself differs only in its wall-clock
duration). Randomized commands require an explicit --seed, never an implicit
time-based one.

Exit codes: 0 success, 1 runtime or data error (message on stderr), 2 usage
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .simulator import SimConfig, simulate, simulate_batch, worker_count
from .stats import analyze
from .symbolic import flip_probability_from_measure, sign_sum_distribution
from .timeseries import fmt, increments, load_returns_csv, load_vols_csv
from .volprocess import (
    RNG_ALGORITHM,
    RngState,
    equicorrelated,
    estimate_covariance,
    load_covariance_json,
    regularize,
    sample_covariance,
    save_covariance_json,
)

__all__ = ["main"]


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_json(doc: dict, path) -> None:
    Path(path).write_text(_dump_json(doc), encoding="utf-8")


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _manifest(argv: list[str], seed: int | None, config_doc: dict,
              inputs: list, outputs: list, started: float) -> dict:
    return {
        "command": ["hybridfx", *argv],
        "seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
        "artifact_version": __version__,
        "config": config_doc,
        "input_digests": {str(p): _sha256(p) for p in inputs},
        "output_digests": {str(p): _sha256(p) for p in outputs},
        "duration_seconds": time.perf_counter() - started,
    }


def _parse_cov(spec: str, m: int | None):
    """Covariance from 'equicorrelated:RHO,SIGMA' (needs m) or a JSON path."""
    if spec.startswith("equicorrelated:"):
        if m is None:
            raise ValueError("equicorrelated covariance needs --m")
        try:
            rho_s, sigma_s = spec.split(":", 1)[1].split(",")
            rho, sigma = float(rho_s), float(sigma_s)
        except ValueError:
            raise ValueError(f"bad covariance spec {spec!r}; "
                             f"expected equicorrelated:RHO,SIGMA") from None
        return equicorrelated(m, rho, sigma), None
    cov = load_covariance_json(spec)
    if m is not None and cov.m != m:
        raise ValueError(f"covariance in {spec} has dimension {cov.m}, but m={m}")
    return cov, Path(spec)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _write_run_csv(out, output, burn_in: int) -> int:
    cfg = output.config
    cols = ["k", "x"]
    recorded = output.vol_path is not None
    if recorded:
        cols += ["g"] + [f"y{j + 1}" for j in range(cfg.m)]
    x = output.returns.values
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(burn_in + 1, cfg.steps + 1):
            row = [str(k), fmt(x[k - 1])]
            if recorded:
                if k > cfg.n:
                    row.append(str(int(output.signals[k - cfg.n - 1])))
                    row.extend(fmt(v) for v in output.vol_path.values[k - cfg.n])
                else:
                    row.extend([""] * (1 + cfg.m))
            fh.write(",".join(row) + "\n")
    return cfg.steps - burn_in


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    inputs = []
    cov = None
    if args.mode == "hybrid":
        if not args.cov:
            print("error: hybrid mode requires --cov "
                  "(JSON path or equicorrelated:RHO,SIGMA)", file=sys.stderr)
            return 2
        cov, cov_path = _parse_cov(args.cov, args.m)
        if cov_path is not None:
            inputs.append(cov_path)

    config = SimConfig(
        seed=args.seed,
        covariance=cov,
        n=args.n,
        m=args.m,
        alpha=args.alpha,
        steps=args.steps,
        mode=args.mode,
        record_internals=args.record_internals,
        signal_lag=args.lag,
    )
    burn_in = config.n if args.burn_in is None else args.burn_in
    if not 0 <= burn_in < config.steps:
        raise ValueError(f"burn-in must lie in [0, steps), got {burn_in}")

    if args.replicas == 1:
        outputs = [simulate(config)]
        paths = [Path(args.out)]
    else:
        outputs = simulate_batch(config, args.replicas, max_workers=worker_count())
        base = Path(args.out)
        paths = [base.with_name(f"{base.stem}_r{r:03d}{base.suffix}")
                 for r in range(args.replicas)]

    for out, path in zip(outputs, paths):
        rows = _write_run_csv(path, out, burn_in)
        print(f"wrote {rows} rows to {path}", file=sys.stderr)

    config_doc = {k: v for k, v in asdict(config).items() if k != "covariance"}
    config_doc["covariance"] = cov.to_dict() if cov is not None else None
    config_doc["burn_in"] = burn_in
    config_doc["replicas"] = args.replicas
    _write_json(
        _manifest(argv, args.seed, config_doc, inputs, paths, started),
        _manifest_path(args.out),
    )
    return 0


# ---------------------------------------------------------------------------
# analyze / compare
# ---------------------------------------------------------------------------

_PLOT_FILES = ("ccdf", "npp", "phase", "rv_phase")


def _write_plot_csvs(bundle, out_dir) -> dict[str, str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = {
        "ccdf": (("s", "p", "count"), bundle.ccdf.to_rows()),
        "npp": (("theoretical_quantile", "sample_value"), bundle.npp),
        "phase": (("x_prev", "x"), bundle.phase),
        "rv_phase": (("rv_prev", "rv"), bundle.rv_phase),
    }
    written = {}
    for name, (header, rows) in tables.items():
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) if isinstance(v, float) else str(v)
                                  for v in row) + "\n")
        written[name] = str(path)
    return written


def cmd_analyze(args, argv) -> int:
    started = time.perf_counter()
    series = load_returns_csv(args.input, column=args.column)
    print(f"loaded {len(series)} returns from {args.input}", file=sys.stderr)
    bundle = analyze(series, order=args.n, window=args.window)

    plot_files = {}
    outputs = []
    if args.out_plots:
        plot_files = _write_plot_csvs(bundle, args.out_plots)
        outputs.extend(plot_files.values())
    doc = bundle.summary_dict(plot_files)
    doc["input"] = str(args.input)
    config_doc = {"n": args.n, "window": args.window, "column": args.column}
    if args.out_bundle:
        _write_json(doc, args.out_bundle)
        outputs.append(args.out_bundle)
        _write_json(
            _manifest(argv, None, config_doc, [args.input], outputs, started),
            _manifest_path(args.out_bundle),
        )
    else:
        doc["manifest"] = _manifest(argv, None, config_doc, [args.input],
                                    outputs, started)
        sys.stdout.write(_dump_json(doc))
    return 0


def _compare_side(path, column, n, window) -> dict:
    series = load_returns_csv(path, column=column)
    bundle = analyze(series, order=n, window=window)
    return {
        "file": str(path),
        "returns": len(series),
        "decay_rate": bundle.decay.rate,
        "decay_r_squared": bundle.decay.r_squared,
        "q_from_decay": bundle.q_from_decay,
        "flip_count": len(bundle.flips),
        "kurtosis_excess": bundle.kurtosis_excess,
        "rv_lag1_corr": bundle.rv_lag1_corr,
    }


def cmd_compare(args, argv) -> int:
    started = time.perf_counter()
    doc = {
        "a": _compare_side(args.a, args.column, args.n, args.window),
        "b": _compare_side(args.b, args.column, args.n, args.window),
        "n": args.n,
        "window": args.window,
    }
    config_doc = {"n": args.n, "window": args.window}
    if args.out:
        _write_json(doc, args.out)
        _write_json(
            _manifest(argv, None, config_doc, [args.a, args.b], [args.out], started),
            _manifest_path(args.out),
        )
    else:
        doc["manifest"] = _manifest(argv, None, config_doc, [args.a, args.b],
                                    [], started)
        sys.stdout.write(_dump_json(doc))
    return 0


# ---------------------------------------------------------------------------
# calibrate-cov / qprob
# ---------------------------------------------------------------------------

def cmd_calibrate_cov(args, argv) -> int:
    started = time.perf_counter()
    path = load_vols_csv(args.input, scale=args.vol_scale)
    print(f"loaded {path.n_rows} rows x {path.n_terms} terms from {args.input}",
          file=sys.stderr)
    incs = increments(path)
    if args.ridge is not None:
        cov = regularize(sample_covariance(incs), args.ridge)
    else:
        cov = estimate_covariance(incs)
    save_covariance_json(cov, args.out)
    config_doc = {"vol_scale": args.vol_scale, "ridge": args.ridge, "m": cov.m}
    _write_json(
        _manifest(argv, None, config_doc, [args.input], [args.out], started),
        _manifest_path(args.out),
    )
    return 0


def cmd_qprob(args, argv) -> int:
    started = time.perf_counter()
    if args.cov.startswith("equicorrelated:") and args.m is None:
        print("error: equicorrelated covariance specs require --m", file=sys.stderr)
        return 2
    inputs = []
    cov, cov_path = _parse_cov(args.cov, args.m)
    if cov_path is not None:
        inputs.append(cov_path)
    rng = RngState(args.seed)
    measure = sign_sum_distribution(cov, args.samples, rng)
    estimate = flip_probability_from_measure(measure)
    doc = {
        "q_estimate": estimate.to_dict(),
        "sign_sum_measure": measure.to_dict(),
    }
    config_doc = {"m": cov.m, "samples": args.samples, "cov": args.cov}
    if args.out:
        _write_json(doc, args.out)
        _write_json(
            _manifest(argv, args.seed, config_doc, inputs, [args.out], started),
            _manifest_path(args.out),
        )
    else:
        doc["manifest"] = _manifest(argv, args.seed, config_doc, inputs, [], started)
        sys.stdout.write(_dump_json(doc))
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridfx",
        description="Gated trend-following return simulator and diagnostics.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"%(prog)s {__version__} | PRNG: {RNG_ALGORITHM}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the return simulator")
    sim.add_argument("--n", type=int, default=2, help="averaging depth (default 2)")
    sim.add_argument("--m", type=int, default=4, help="number of vol terms (default 4)")
    sim.add_argument("--alpha", type=float, default=1e-4,
                     help="noise scale (default 1e-4)")
    sim.add_argument("--steps", type=int, default=1_000_000,
                     help="total steps (default 1000000)")
    sim.add_argument("--seed", type=int, required=True, help="PRNG seed (required)")
    sim.add_argument("--mode", choices=["hybrid", "pure-trend"], default="hybrid")
    sim.add_argument("--cov", help="covariance: JSON path or equicorrelated:RHO,SIGMA")
    sim.add_argument("--record-internals", action="store_true",
                     help="record gate values and the vol path in the output CSV")
    sim.add_argument("--burn-in", type=int, default=None,
                     help="rows to drop from the head of the output (default n)")
    sim.add_argument("--lag", type=int, default=0,
                     help="gate reads the vol move from this many steps earlier")
    sim.add_argument("--replicas", type=int, default=1,
                     help="independent runs seeded seed, seed+1, ...")
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="compute diagnostics for a returns CSV")
    ana.add_argument("--input", required=True, help="returns CSV")
    ana.add_argument("--column", default=None,
                     help="value column (name or 0-based index) for wide files")
    ana.add_argument("--n", type=int, default=2, help="averaging depth (default 2)")
    ana.add_argument("--window", type=int, default=10,
                     help="realized-vol window (default 10)")
    ana.add_argument("--out-bundle", default=None, help="bundle JSON path")
    ana.add_argument("--out-plots", default=None,
                     help="directory for ccdf/npp/phase/rv_phase CSVs")
    ana.set_defaults(func=cmd_analyze)

    cmp_ = sub.add_parser("compare", help="side-by-side diagnostics of two runs")
    cmp_.add_argument("--a", required=True, help="first returns CSV")
    cmp_.add_argument("--b", required=True, help="second returns CSV")
    cmp_.add_argument("--column", default=None)
    cmp_.add_argument("--n", type=int, default=2)
    cmp_.add_argument("--window", type=int, default=10)
    cmp_.add_argument("--out", default=None, help="summary JSON path")
    cmp_.set_defaults(func=cmd_compare)

    cal = sub.add_parser("calibrate-cov",
                         help="estimate an increment covariance from a vols CSV")
    cal.add_argument("--input", required=True, help="vols CSV")
    cal.add_argument("--vol-scale", type=float, default=1.0,
                     help="multiplier for quotes (0.01 for percent data)")
    cal.add_argument("--ridge", type=float, default=None,
                     help="add this ridge to the diagonal before validation")
    cal.add_argument("--out", required=True, help="covariance JSON path")
    cal.set_defaults(func=cmd_calibrate_cov)

    qp = sub.add_parser("qprob",
                        help="Monte Carlo flip probability and vote-sum law")
    qp.add_argument("--cov", required=True,
                    help="covariance: JSON path or equicorrelated:RHO,SIGMA")
    qp.add_argument("--m", type=int, default=None,
                    help="dimension (required for equicorrelated specs)")
    qp.add_argument("--samples", type=int, default=1_000_000)
    qp.add_argument("--seed", type=int, required=True, help="PRNG seed (required)")
    qp.add_argument("--out", default=None, help="write the JSON here instead of stdout")
    qp.set_defaults(func=cmd_qprob)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
