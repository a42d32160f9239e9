"""
Command-line entry point ``entwalk``.

Subcommands
-----------
run             one walk: per-step distribution and metrics
sweep           metrics for a range of n plus the classical baseline
classical       binomial baseline walk
spectral-check  per-k closed-form eigensystem table and round-trip error
stationary      stationary-phase estimate against the exact distribution
validate        invariant suites, exit 0 only if all pass

Exit codes: 0 success, 2 usage error, 3 numerical or invariant failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .checks import FAULTS, run_validation
from .classical import ClassicalWalkConfig, classical_distribution
from .core import N_MAX, InitialState, WalkConfig, evolve, iter_states, probabilities
from .errors import InvariantViolation, SpectralConsistencyError, WalkDomainError
from .io import Table, parse_complex_list, parse_n_range, render_csv, render_json, write_output
from .metrics import (
    DEFAULT_THRESHOLD,
    report_for_state,
    shannon_entropy,
    support_count,
    symmetry_defect,
    variance,
)

log = logging.getLogger("entwalk")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3

PROBABILITY_SUM_TOL = 1e-9
# squared round-off of an amplitude that is exactly zero in exact arithmetic
ZERO_FLOOR = np.finfo(np.float64).eps ** 2

DIST_COLUMNS = ("step", "position", "probability")
METRIC_COLUMNS = (
    "step",
    "variance",
    "std_dev",
    "mean_x",
    "support",
    "H_shannon_pos",
    "S_vn_pos",
    "H_coin",
    "sym_defect",
)


class UsageError(Exception):
    """Flags are individually valid but inconsistent."""


def _threads(jobs: int) -> int:
    raw = os.environ.get("ENTWALK_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise UsageError(f"ENTWALK_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise UsageError("ENTWALK_THREADS must be at least 1")
    return max(1, min(cap, jobs))


def _base(args) -> Optional[float]:
    return 2.0 if args.log_base == "2" else None


def _unit(args) -> str:
    return "bits" if args.log_base == "2" else "nats"


def _initial_state(args, n: int) -> Optional[InitialState]:
    if args.initial is None:
        return None
    try:
        amps = parse_complex_list(args.initial)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if amps.size != 2**n:
        raise UsageError(f"--initial needs {2**n} amplitudes for n={n}, got {amps.size}")
    if args.normalize_initial:
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise UsageError("--initial is the zero vector")
        amps = amps / norm
    return InitialState(amps)


def _metric_row(report) -> tuple:
    return (
        report.step,
        report.variance,
        report.std_dev,
        report.expected_position,
        report.support_count,
        report.shannon_entropy_position,
        report.von_neumann_entropy_position,
        report.coin_entropy,
        report.symmetry_defect,
    )


def _check_sum(step: int, weights: np.ndarray) -> None:
    total = float(weights.sum())
    if abs(total - 1.0) > PROBABILITY_SUM_TOL:
        raise InvariantViolation(f"probabilities at step {step} sum to {total!r}")


def _walk_tables(config: WalkConfig, threshold: float, base, want_dist: bool = True):
    dist_rows, metric_rows = [], []
    for t, state in enumerate(iter_states(config)):
        dist = probabilities(state)
        _check_sum(t, dist.weights)
        if want_dist:
            for x, p in zip(dist.positions, dist.weights):
                if p > ZERO_FLOOR:
                    dist_rows.append((t, int(x), float(p)))
        metric_rows.append(_metric_row(report_for_state(t, state, threshold, base)))
    return dist_rows, metric_rows


def _classical_tables(steps: int, p_right: float, threshold: float, base, want_dist: bool = True):
    dist_rows, metric_rows = [], []
    for t in range(steps + 1):
        dist = classical_distribution(ClassicalWalkConfig(t, p_right))
        _check_sum(t, dist.weights)
        if want_dist:
            for x, p in zip(dist.positions, dist.weights):
                if p > ZERO_FLOOR:
                    dist_rows.append((t, int(x), float(p)))
        var, std, mean = variance(dist)
        # a classical walker has no coin register: quantum entropies are undefined
        metric_rows.append(
            (t, var, std, mean, support_count(dist, threshold), shannon_entropy(dist, base), None, None,
             symmetry_defect(dist))
        )
    return dist_rows, metric_rows


def _select(tables: list[Table], which: str) -> list[Table]:
    if which == "all":
        return tables
    return [t for t in tables if t.name == which]


def _emit(args, tables: list[Table], meta: dict) -> None:
    tables = _select(tables, getattr(args, "table", "all"))
    render = render_json if args.format == "json" else render_csv
    write_output(render(tables, meta, timestamp=not args.no_timestamp), args.out, sys.stdout)


def cmd_run(args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    config = WalkConfig(args.n, args.steps, initial_state=_initial_state(args, args.n))
    dist_rows, metric_rows = _walk_tables(config, args.threshold, _base(args), args.table != "metrics")
    meta = {
        "command": "run",
        "n": args.n,
        "steps": args.steps,
        "threshold": args.threshold,
        "entropy_unit": _unit(args),
        "initial": "ghz" if args.initial is None else args.initial,
    }
    _emit(args, [Table("distribution", DIST_COLUMNS, dist_rows), Table("metrics", METRIC_COLUMNS, metric_rows)], meta)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        n_values = parse_n_range(args.n)
    except ValueError as exc:
        raise UsageError(f"--n: {exc}") from None
    if any(n < 1 or n > N_MAX for n in n_values):
        raise UsageError(f"--n range must lie within 1..{N_MAX}")
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    if args.initial is not None and len(set(n_values)) > 1:
        raise UsageError("--initial only applies to a single n")
    base = _base(args)

    def one(n: int):
        cfg = WalkConfig(n, args.steps, initial_state=_initial_state(args, n))
        return _walk_tables(cfg, args.threshold, base, want_dist=False)[1]

    with ThreadPoolExecutor(max_workers=_threads(len(n_values))) as pool:
        results = list(pool.map(one, n_values))

    rows = []
    for n, series in zip(n_values, results):
        rows.extend((str(n),) + r for r in series)
    if not args.no_classical:
        rows.extend(("cw",) + r for r in _classical_tables(args.steps, 0.5, args.threshold, base, False)[1])
    meta = {
        "command": "sweep",
        "n": args.n,
        "steps": args.steps,
        "threshold": args.threshold,
        "entropy_unit": _unit(args),
    }
    _emit(args, [Table("metrics", ("walk",) + METRIC_COLUMNS, rows)], meta)
    return EXIT_OK


def cmd_classical(args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    if not 0.0 <= args.p_right <= 1.0:
        raise UsageError("--p-right must lie in [0, 1]")
    dist_rows, metric_rows = _classical_tables(
        args.steps, args.p_right, args.threshold, _base(args), args.table != "metrics"
    )
    meta = {
        "command": "classical",
        "steps": args.steps,
        "p_right": args.p_right,
        "threshold": args.threshold,
        "entropy_unit": _unit(args),
    }
    _emit(args, [Table("distribution", DIST_COLUMNS, dist_rows), Table("metrics", METRIC_COLUMNS, metric_rows)], meta)
    return EXIT_OK


def cmd_spectral_check(args) -> int:
    from .spectral.closed_form import _residuals, closed_form_eigensystem
    from .spectral.evolution import spectral_evolve
    from .spectral.operators import MomentumGrid, default_grid

    grid = MomentumGrid(args.grid) if args.grid else default_grid(args.steps)
    k = grid.points
    sys_ = closed_form_eigensystem(args.n, k)
    identity = np.abs(sys_.norm_plus * sys_.norm_minus - (6.0 + 2.0 * np.cos(k)))
    modulus = np.max(np.abs(np.abs(sys_.eigenvalues) - 1.0), axis=-1)
    residual = _residuals(sys_)
    rows = [
        (
            float(k[i]),
            float(sys_.phi[i]),
            float(sys_.lambda_plus[i].real),
            float(sys_.lambda_plus[i].imag),
            float(sys_.lambda_minus[i].real),
            float(sys_.lambda_minus[i].imag),
            float(sys_.gamma_plus[i]),
            float(sys_.gamma_minus[i]),
            float(sys_.norm_plus[i]),
            float(sys_.norm_minus[i]),
            float(identity[i]),
            float(modulus[i]),
            float(residual[i]),
        )
        for i in range(k.size)
    ]
    cols = ("k", "phi", "lambda_plus_re", "lambda_plus_im", "lambda_minus_re", "lambda_minus_im",
            "gamma_plus", "gamma_minus", "N_plus", "N_minus", "NN_identity_err", "modulus_err", "residual")

    config = WalkConfig(args.n, args.steps, initial_state=_initial_state(args, args.n))
    roundtrip = float(np.max(np.abs(spectral_evolve(config, grid).amplitudes - evolve(config).amplitudes)))
    summary = [
        ("max_NN_identity_err", float(identity.max()), 1e-10),
        ("max_modulus_err", float(modulus.max()), 1e-12),
        ("max_residual", float(residual.max()), 1e-8),
        ("roundtrip_max_abs_err", roundtrip, 1e-10),
    ]
    ok = all(v <= tol for _, v, tol in summary)
    summary_rows = [(name, v, tol, v <= tol) for name, v, tol in summary]
    meta = {"command": "spectral-check", "n": args.n, "steps": args.steps, "grid": grid.num_points}
    _emit(args, [Table("eigensystem", cols, rows), Table("summary", ("check", "value", "tolerance", "passed"), summary_rows)], meta)
    if not ok:
        for name, v, tol in summary:
            if v > tol:
                print(f"entwalk: spectral check {name} = {v:.3e} exceeds {tol:.0e}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_stationary(args) -> int:
    from .spectral.asymptotics import (
        dominant_term_amplitude,
        lattice_to_model_position,
        stationary_phase_total,
    )
    from .spectral.dispersion import (
        band_structure,
        caustics,
        simulated_outer_peaks,
        walk_stationary_phase_amplitude,
    )

    if args.steps < 1:
        raise UsageError("--steps must be at least 1 for stationary phase")
    config = WalkConfig(args.n, args.steps, initial_state=_initial_state(args, args.n))
    a = config.initial_state.coin_amplitudes
    T = args.steps
    dist = probabilities(evolve(config))

    if args.model == "tensor":
        # raises WalkDomainError for n >= 3, where the tensor model is another walk
        lattice_to_model_position(args.n, 0)

        def predict(x):
            amp = stationary_phase_total(args.n, T, lattice_to_model_position(args.n, x), a)
            if args.n % 2 == 0:
                # flat m = q branches have no stationary point; add them exactly
                amp = amp + dominant_term_amplitude(args.n, T, x, coin_state=a)
            return amp
    else:
        bands = band_structure(args.n)

        def predict(x):
            return walk_stationary_phase_amplitude(args.n, T, x, a, bands)

    rows = []
    for x in range(-T, T + 1):
        exact = dist.at(x)
        approx = float(np.sum(np.abs(predict(x)) ** 2))
        rel = abs(approx - exact) / exact if exact > 0 else None
        rows.append((x, x / T, exact, approx, rel))

    left, right = caustics(args.n)
    sim_lo, sim_hi = simulated_outer_peaks(dist)
    peaks = [
        ("left", T * left.velocity, T * left.velocity + left.peak_offset(T), sim_lo),
        ("right", T * right.velocity, T * right.velocity - right.peak_offset(T), sim_hi),
    ]
    meta = {"command": "stationary", "n": args.n, "steps": T, "model": args.model}
    _emit(
        args,
        [
            Table("amplitudes", ("position", "x_over_T", "exact", "predicted", "rel_error"), rows),
            Table("peaks", ("side", "caustic", "airy_peak", "simulated_peak"), peaks),
        ],
        meta,
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.oracle_depth < 0:
        raise UsageError("--oracle-depth must be nonnegative")
    report = run_validation(oracle_depth=args.oracle_depth, fault=args.inject_fault)
    meta = {
        "command": "validate",
        "oracle_depth": args.oracle_depth,
        "fault": args.inject_fault or "none",
        "passed": report.passed,
    }
    cols = ("suite", "invariant", "passed", "max_error", "tolerance", "seconds", "detail")
    rows = [(s.name, s.invariant, s.passed, s.max_error, s.tolerance, round(s.seconds, 3), s.detail)
            for s in report.suites]
    if args.no_timestamp:
        # timings vary between runs; drop them for byte-stable output
        rows = [r[:5] + (None,) + r[6:] for r in rows]
    _emit(args, [Table("suites", cols, rows)], meta)
    for s in report.failed:
        print(f"entwalk: suite {s.name} failed: {s.invariant} (max error {s.max_error:.3e}, "
              f"tolerance {s.tolerance:.0e})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_INVARIANT


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _add_common(p: argparse.ArgumentParser, fmt: str = "csv", initial: bool = True) -> None:
    # added per subcommand: parent parsers would share (and leak) defaults
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation timestamp")
    p.add_argument("--log-base", choices=("e", "2"), default="e", help="entropy logarithm base")
    p.add_argument("--threshold", type=_nonneg_float, default=DEFAULT_THRESHOLD,
                   help="support-count threshold (default 1e-4)")
    if initial:
        p.add_argument("--initial", help="coin amplitudes as 're+imj,...' (length 2^n)")
        p.add_argument("--normalize-initial", action="store_true", help="rescale --initial to unit norm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entwalk", description="Quantum walks with an entangled n-qubit coin.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log to stderr")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one walk")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--table", choices=("all", "distribution", "metrics"), default="all")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="metric series for a range of n")
    _add_common(p)
    p.add_argument("--n", required=True, help="single n or inclusive range 'a..b'")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--no-classical", action="store_true", help="omit the classical baseline rows")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classical", help="binomial baseline walk")
    _add_common(p, initial=False)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--p-right", type=float, default=0.5)
    p.add_argument("--table", choices=("all", "distribution", "metrics"), default="all")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("spectral-check", help="closed-form eigensystem table")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=10, help="steps for the round-trip comparison")
    p.add_argument("--grid", type=int, help="number of momentum points (default: next power of two >= 4(T+1))")
    p.add_argument("--table", choices=("all", "eigensystem", "summary"), default="all")
    p.set_defaults(func=cmd_spectral_check)

    p = sub.add_parser("stationary", help="stationary-phase estimate vs exact")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--model", choices=("walk", "tensor"), default="walk",
                   help="'walk': exact lattice bands; 'tensor': tensor-power model (n = 1, 2)")
    p.add_argument("--table", choices=("all", "amplitudes", "peaks"), default="all")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("validate", help="run the invariant suites")
    _add_common(p, fmt="json", initial=False)
    p.add_argument("--oracle-depth", type=int, default=6, help="largest T for the path-sum comparison")
    p.add_argument("--inject-fault", choices=FAULTS, help="deliberately break the build (negative control)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, WalkDomainError) as exc:
        print(f"entwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, SpectralConsistencyError) as exc:
        print(f"entwalk: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"entwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
