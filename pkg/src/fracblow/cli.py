"""Command-line driver: ``fracblow <spec-file> [--out DIR] [--threads K] [--seed S]``.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
On failure a single line ``error: <category>: <message>`` goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .analysis import alpha_sweep, dichotomy_scan, levine_check
from .config import PROBE_TIME, ConfigError, ExperimentSpec, load_builtin, load_config
from .fracpow import QuadratureSpec, frac_power_apply, scalar_frac_power, with_error_estimate
from .kernels import (
    resolvent_dirichlet,
    resolvent_neumann,
    resolvent_periodic,
    resolvent_whole_line,
    singular_integral_frac,
    whole_line,
)
from .spectral import CosineSpectrum, GridFunction, analyze, make_grid, synthesize
from .timestepper import NumericalFailure, OutcomeKind, SimulationResult, run_simulation, value_at

__all__ = ["main", "run_experiment", "format_float", "write_csv"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

SUMMARY_HEADER = ["alpha", "outcome", "T_num", "max_at_t0.6"]
TIMESERIES_HEADER = ["step", "t", "tau", "max_u", "argmax_x"]


def format_float(x) -> str:
    """17 significant digits, enough to round-trip a float64."""
    if x is None:
        return "nan"
    return "%.17g" % float(x)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)) or v is None:
        return format_float(v)
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _time_tag(t: float) -> str:
    return "%g" % t


# --- per-run output ---------------------------------------------------------


def _write_run(res: SimulationResult, d: Path, plots: bool = True):
    d.mkdir(parents=True, exist_ok=True)
    x = res.grid.nodes
    write_csv(
        d / "timeseries.csv",
        TIMESERIES_HEADER,
        ((r.step, r.t, r.tau, r.max_u, x[r.argmax_index]) for r in res.records),
    )
    wanted = set(res.config.snapshot_times)
    written = set()
    curves = []
    for t, g in res.snapshots:
        if t in wanted and t not in written:
            write_csv(d / f"profile_{_time_tag(t)}.csv", ["x", "u"], zip(x, g.values))
            written.add(t)
            curves.append((f"t={_time_tag(t)}", x, g.values))
    if res.outcome.blew_up:
        write_csv(d / "profile_blowup.csv", ["x", "u"], zip(x, res.final.values))
    if plots:
        if curves:
            plotting.plot_profiles(curves, d / "profiles.png", title=f"alpha = {res.config.alpha:g}")
        if res.records:
            plotting.plot_max_history(
                [(f"alpha={res.config.alpha:g}", [r.t for r in res.records], [r.max_u for r in res.records])],
                d / "max_u.png",
            )


def _summary_row(alpha, res: SimulationResult | None, outcome, T_num):
    if res is None:
        probe = float("nan")
    else:
        try:
            probe = value_at(res, PROBE_TIME, 0)
        except KeyError:
            probe = float("nan")
    return (alpha, str(outcome), T_num, probe)


def synthesize_values(grid, coeffs) -> np.ndarray:
    return synthesize(CosineSpectrum(grid, coeffs)).values


# --- experiments --------------------------------------------------------------


def _run(spec: ExperimentSpec) -> int:
    res = run_simulation(spec.config, raise_on_failure=False)
    out = spec.output_dir
    _write_run(res, out)
    write_csv(out / "summary.csv", SUMMARY_HEADER, [_summary_row(spec.config.alpha, res, res.outcome, res.outcome.T_num)])
    if res.outcome.kind is OutcomeKind.NUMERICAL_FAILURE:
        raise NumericalFailure(res.outcome.message)
    return EXIT_OK


def _sweep(spec: ExperimentSpec, threads: int) -> int:
    out = spec.output_dir
    sweep = alpha_sweep(spec.config, spec.alphas, threads=threads)
    rows = []
    curves = []
    series = []
    for row in sweep.rows:
        res = row.result
        if res is not None:
            _write_run(res, out / f"alpha_{row.alpha:g}")
            g = res.snapshot(PROBE_TIME)
            if g is not None:
                curves.append((f"alpha={row.alpha:g}", res.grid.nodes, g.values))
            elif res.outcome.blew_up:
                curves.append((f"alpha={row.alpha:g} (blew up at {res.outcome.T_num:.4f})", res.grid.nodes, res.final.values))
            series.append((f"alpha={row.alpha:g}", [r.t for r in res.records], [r.max_u for r in res.records]))
        rows.append(_summary_row(row.alpha, res, row.outcome, row.T_num))
    write_csv(out / "summary.csv", SUMMARY_HEADER, rows)
    if curves:
        plotting.plot_profiles(curves, out / f"profiles_t{_time_tag(PROBE_TIME)}.png", title=f"{spec.kind}: u(t={PROBE_TIME:g}, x)")
    if series:
        plotting.plot_max_history(series, out / "max_u.png", title=spec.kind)
    plotting.plot_blowup_times([r.alpha for r in sweep.rows], [r.T_num for r in sweep.rows], out / "blowup_times.png", title=f"T_num trend: {sweep.direction}")
    if any(r.outcome.kind is OutcomeKind.NUMERICAL_FAILURE for r in sweep.rows):
        bad = [r for r in sweep.rows if r.outcome.kind is OutcomeKind.NUMERICAL_FAILURE][0]
        raise NumericalFailure(f"alpha = {bad.alpha:g}: {bad.outcome.message}")
    return EXIT_OK


def _levine(spec: ExperimentSpec) -> int:
    cfg = spec.config
    u0 = cfg.initial.sample(make_grid(cfg.N))
    rows = []
    for a in spec.alphas:
        rep = levine_check(u0, a, cfg.p)
        rows.append((a, cfg.p, rep.G_value, rep.quad_value, rep.predicts_blowup))
    write_csv(spec.output_dir / "levine.csv", ["alpha", "p", "G_value", "quad_value", "predicts_blowup"], rows)
    return EXIT_OK


def _quadcheck(spec: ExperimentSpec) -> int:
    kappas = spec.extra.get("kappas", (0.1, 1.0, 2.0, 10.0, 100.0))
    Q = spec.extra.get("Q", 64)
    rule = spec.extra.get("rule", "sqrt")
    rows = []
    for a in spec.alphas:
        quad = QuadratureSpec(alpha=a, Q=Q, rule=rule)
        for k in kappas:
            val, est = with_error_estimate(lambda kk, q: scalar_frac_power(kk, q.alpha, q), k, quad=quad)
            exact = k**a
            rows.append((k, a, val, exact, abs(val - exact), est))
    write_csv(spec.output_dir / "quadcheck.csv", ["kappa", "alpha", "value", "exact", "abs_err", "err_estimate"], rows)
    plotting.plot_error_table([(r[0], r[1], r[4]) for r in rows], spec.output_dir / "quadcheck.png", title=f"rule={rule}, Q={Q}")
    return EXIT_OK


def _kernelcheck(spec: ExperimentSpec, seed: int) -> int:
    lambdas = spec.extra.get("lambdas", (0.1, 1.0, 10.0))
    M = spec.extra.get("M", 200)
    rows = []
    g = make_grid(spec.config.N)
    x = g.nodes
    s = np.linspace(0.0, 1.0, M)
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(g.size)
    coeffs[:9] = rng.standard_normal(9) / (1.0 + np.arange(9)) ** 2
    v_rand = synthesize_values(g, coeffs)
    n2 = np.arange(g.size, dtype=float) ** 2
    for lam in lambdas:
        out = resolvent_periodic(lam, GridFunction(g, np.cos(x))).values
        rows.append(("periodic_cos1", lam, np.max(np.abs(out - np.cos(x) / (lam + 1)))))
        out = resolvent_periodic(lam, GridFunction(g, v_rand)).values
        ref = synthesize_values(g, analyze(GridFunction(g, v_rand)).coeffs / (lam + n2))
        rows.append(("periodic_random", lam, np.max(np.abs(out - ref))))
        out = resolvent_dirichlet(lam, np.sin(np.pi * s))
        rows.append(("dirichlet_sin1", lam, np.max(np.abs(out - np.sin(np.pi * s) / (lam + np.pi**2)))))
        out = resolvent_neumann(lam, np.cos(np.pi * s))
        rows.append(("neumann_cos1", lam, np.max(np.abs(out - np.cos(np.pi * s) / (lam + np.pi**2)))))
        dom = whole_line(400, 10.0)
        xl = dom.nodes
        v = np.exp(-(xl**2))
        w = resolvent_whole_line(lam, v)
        hh = dom.h
        resid = lam * w[1:-1] - (w[2:] - 2 * w[1:-1] + w[:-2]) / hh**2 - v[1:-1]
        rows.append(("whole_line_residual", lam, np.max(np.abs(resid))))
    dom = whole_line(400, 10.0)
    xl = dom.nodes
    v = np.exp(-(xl**2))
    interior = np.abs(xl) <= 8.0
    res = dom.resolvent_map("bandlimited")
    for a in spec.alphas:
        si = singular_integral_frac(v, a)
        fp = frac_power_apply(res, v, QuadratureSpec(alpha=a))
        rows.append(("two_route", a, np.max(np.abs(si - fp)[interior])))
    write_csv(spec.output_dir / "kernelcheck.csv", ["check", "parameter", "max_err"], rows)
    return EXIT_OK


def _dichotomy(spec: ExperimentSpec, threads: int) -> int:
    rep = dichotomy_scan(spec.config, spec.extra["amplitudes"], threads=threads)
    write_csv(spec.output_dir / "dichotomy.csv", ["amplitude", "outcome", "T_num"], [(a, str(o), T) for a, o, T in rep.rows])
    return EXIT_OK


def run_experiment(spec: ExperimentSpec, threads: int = 1, seed: int = 0) -> int:
    """Execute ``spec`` and write its files; returns the exit status.

    Raises NumericalFailure or OSError; ``main`` maps them to exit codes.
    """
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    threads = int(spec.extra.get("threads", threads))
    if spec.kind == "run":
        return _run(spec)
    if spec.kind in ("figure1", "figure2", "sweep"):
        return _sweep(spec, threads)
    if spec.kind == "levine":
        return _levine(spec)
    if spec.kind == "quadcheck":
        return _quadcheck(spec)
    if spec.kind == "kernelcheck":
        return _kernelcheck(spec, seed)
    if spec.kind == "dichotomy":
        return _dichotomy(spec, threads)
    raise ConfigError(f"key 'kind': unknown kind {spec.kind!r}")


def _load(path: str, out):
    if path.startswith("builtin:"):
        return load_builtin(path.split(":", 1)[1], out)
    return load_config(path, out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fracblow", description="Fractional semilinear heat equation experiments.")
    ap.add_argument("spec", help="experiment specification file, or builtin:figure1 / builtin:figure2")
    ap.add_argument("--out", default=None, help="output directory (overrides output_dir in the file)")
    ap.add_argument("--threads", type=int, default=1, help="parallel runs for sweeps")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks (never used by simulations)")
    args = ap.parse_args(argv)
    try:
        spec = _load(args.spec, args.out)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FileNotFoundError) as err:
        print(f"error: io: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        status = run_experiment(spec, threads=max(1, args.threads), seed=args.seed)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as err:
        print(f"error: numerical: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return EXIT_IO
    print(f"{spec.kind}: wrote {spec.output_dir}")
    return status


if __name__ == "__main__":
    sys.exit(main())
