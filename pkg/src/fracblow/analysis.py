"""Blow-up predictors and probes built on the time stepper.

- ``levine_check``: energy criterion G(u0) > (1/2)(u0, A^alpha u0).
- ``jensen_projection_trace``: the projection phi(t) = (u(t), phi0) on the
  positive principal eigenfunction obeys phi' >= -kappa0^alpha phi + c_J phi^p.
- ``alpha_sweep``, ``max_ordering_check``, ``dichotomy_scan``: batches of runs
  that tabulate blow-up times, compare maxima across orders, and scan
  initial amplitudes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .spectral import GridFunction, assemble_T, inner_product, make_grid
from .timestepper import (
    NumericalFailure,
    Outcome,
    OutcomeKind,
    SimulationResult,
    SolverConfig,
    run_simulation,
    value_at,
)

__all__ = [
    "LevineReport",
    "levine_check",
    "EigenPair",
    "periodic_eigenpair",
    "JensenTrace",
    "jensen_projection_trace",
    "jensen_bound_time",
    "SweepRow",
    "SweepResult",
    "alpha_sweep",
    "OrderingReport",
    "max_ordering_check",
    "DichotomyReport",
    "dichotomy_scan",
]


# --- Levine -------------------------------------------------------------------


@dataclass(frozen=True)
class LevineReport:
    G_value: float
    quad_value: float
    predicts_blowup: bool


def levine_check(u0: GridFunction, alpha: float, p: int) -> LevineReport:
    """G(u0) = (u0^p, u0)/(p+1) against (1/2)(u0, A^alpha u0).

    Inner products are full-period trapezoidal sums, the same rule the
    cosine analysis uses.
    """
    T = assemble_T(u0.grid, alpha).matrix
    G = inner_product(u0.values**p, u0.values) / (p + 1)
    quad = 0.5 * inner_product(u0.values, -(T @ u0.values))
    return LevineReport(G, quad, bool(G > quad))


# --- Jensen projection ---------------------------------------------------------


@dataclass(frozen=True)
class EigenPair:
    """Smallest eigenvalue kappa0 of A and its positive eigenfunction."""

    kappa0: float
    phi0: GridFunction

    def __post_init__(self):
        if self.kappa0 < 0:
            raise ValueError("kappa0 must be nonnegative")
        if not np.all(self.phi0.values > 0):
            raise ValueError("phi0 must be strictly positive")

    def residual(self, alpha: float = 1.0) -> float:
        """max |A^alpha phi0 - kappa0^alpha phi0| on the grid."""
        T = assemble_T(self.phi0.grid, alpha).matrix
        return float(np.max(np.abs(-(T @ self.phi0.values) - self.kappa0**alpha * self.phi0.values)))

    def jensen_constant_for(self, p: int) -> float:
        """c_J = (phi0, 1)^(1-p): Jensen for the probability measure phi0 dx / (phi0, 1)."""
        mass = inner_product(self.phi0.values, np.ones_like(self.phi0.values))
        return mass ** (1 - p)


def periodic_eigenpair(N: int) -> EigenPair:
    """kappa0 = 0, phi0 = 1 on the periodic grid."""
    g = make_grid(N)
    return EigenPair(0.0, GridFunction(g, np.ones(g.size)))


def jensen_bound_time(phi_start: float, kappa0: float, alpha: float, p: int, c_J: float) -> float:
    """Blow-up time of phi' = -k phi + c_J phi^p, k = kappa0^alpha (inf if none)."""
    k = kappa0**alpha if kappa0 > 0 else 0.0
    if phi_start <= 0:
        return float("inf")
    if k == 0.0:
        return phi_start ** (1 - p) / (c_J * (p - 1))
    ratio = k / (c_J * phi_start ** (p - 1))
    if ratio >= 1.0:
        return float("inf")
    return -np.log1p(-ratio) / ((p - 1) * k)


@dataclass
class JensenTrace:
    times: np.ndarray
    phi: np.ndarray
    c_J: float
    violations: int
    first_violation: tuple[int, float, float] | None
    T_bound: float
    T_num: float | None

    @property
    def bound_respected(self) -> bool:
        return self.T_num is None or self.T_num <= self.T_bound


def jensen_projection_trace(
    result: SimulationResult,
    pair: EigenPair,
    alpha: float,
    p: int,
    tol: float = 1e-8,
) -> JensenTrace:
    """Check the discrete inequality on consecutive snapshots.

    For each pair of stored profiles,
        (phi_{k+1} - phi_k)/dt >= -kappa0^alpha phi_k + c_J phi_k^p - tol * max(1, |rhs|).
    The tolerance scales with the right-hand side because phi^p reaches
    ~1e16 near blow-up.  Store every step (``snapshot_every=1``) for the
    comparison to reflect the scheme rather than interpolation.
    """
    snaps = _dedup(result.snapshots)
    if len(snaps) < 2:
        raise ValueError("jensen_projection_trace needs at least two snapshots")
    for t, g in snaps:
        if np.min(g.values) < -1e-8:
            raise ValueError(f"snapshot at t = {t} has negative entries; Jensen bound needs u >= 0")
    t = np.array([s[0] for s in snaps])
    phi = np.array([inner_product(g.values, pair.phi0.values) for _, g in snaps])
    c_J = pair.jensen_constant_for(p)
    k = pair.kappa0**alpha if pair.kappa0 > 0 else 0.0
    lhs = np.diff(phi) / np.diff(t)
    rhs = -k * phi[:-1] + c_J * phi[:-1] ** p
    bad = np.nonzero(lhs < rhs - tol * np.maximum(1.0, np.abs(rhs)))[0]
    first = None if bad.size == 0 else (int(bad[0]), float(lhs[bad[0]]), float(rhs[bad[0]]))
    T_bound = jensen_bound_time(phi[0], pair.kappa0, alpha, p, c_J)
    return JensenTrace(t, phi, c_J, int(bad.size), first, T_bound, result.outcome.T_num)


def _dedup(snaps):
    out = []
    for t, g in snaps:
        if out and out[-1][0] == t:
            continue
        out.append((t, g))
    return out


# --- alpha sweep -----------------------------------------------------------------


@dataclass
class SweepRow:
    alpha: float
    outcome: Outcome
    T_num: float | None
    max_at: dict[float, float]
    result: SimulationResult | None = field(default=None, repr=False)


@dataclass
class SweepResult:
    """One row per alpha, in input order.

    ``direction`` is the empirical trend of T_num over the rows that blew up:
    "increasing", "decreasing", "constant" or "mixed".
    """

    rows: list[SweepRow]
    direction: str
    violations: list[int]


def _run_row(cfg: SolverConfig) -> SweepRow:
    try:
        res = run_simulation(cfg, raise_on_failure=False)
    except NumericalFailure as err:
        return SweepRow(cfg.alpha, Outcome(OutcomeKind.NUMERICAL_FAILURE, message=str(err)), None, {})
    max_at = {}
    for ts in cfg.snapshot_times:
        try:
            max_at[ts] = value_at(res, ts, 0)
        except KeyError:
            max_at[ts] = float("nan")
    return SweepRow(cfg.alpha, res.outcome, res.outcome.T_num, max_at, res)


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _direction(values: list[float]) -> tuple[str, list[int]]:
    if len(values) < 2:
        return "constant", []
    d = np.diff(values)
    if np.all(d == 0):
        return "constant", []
    if np.all(d >= 0):
        return "increasing", []
    if np.all(d <= 0):
        return "decreasing", []
    # majority trend, with the steps that go against it
    up = int(np.sum(d > 0))
    down = int(np.sum(d < 0))
    against = [i for i, x in enumerate(d) if (x < 0 if up >= down else x > 0)]
    return "mixed", against


def alpha_sweep(base: SolverConfig, alphas, threads: int = 1) -> SweepResult:
    """Run ``base`` at each alpha; the trend of T_num is reported, not asserted."""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError("alpha_sweep needs at least one alpha")
    if any(b <= a for a, b in zip(alphas[:-1], alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    rows = _map(_run_row, [base.with_(alpha=a) for a in alphas], threads)
    T = [r.T_num for r in rows if r.T_num is not None]
    direction, against = _direction(T)
    return SweepResult(rows, direction, against)


# --- maximum ordering --------------------------------------------------------------


@dataclass
class OrderingReport:
    """u_alpha(t, 0) < u_beta(t, 0) at each time, and profile crossings.

    A run that blew up before t counts as +inf there.  ``crossing_indices``
    maps each time where both profiles exist to the grid points where
    u_alpha > u_beta.
    """

    alpha: float
    beta: float
    times: list[float]
    at_zero: list[tuple[float, float, float]]
    ordering_holds: bool
    equal: bool
    crossing: bool
    crossing_indices: dict[float, list[int]]


def max_ordering_check(base: SolverConfig, alpha: float, beta: float, times, threads: int = 1) -> OrderingReport:
    """Compare the maxima at x = 0 of the runs at orders alpha > beta."""
    times = sorted(float(t) for t in times)
    if not times:
        raise ValueError("max_ordering_check needs at least one time")
    if beta > alpha:
        raise ValueError(f"expected beta <= alpha, got alpha={alpha}, beta={beta}")
    cfgs = [base.with_(alpha=a, snapshot_times=tuple(times), t_end=times[-1]) for a in (alpha, beta)]
    ra, rb = _map(lambda c: run_simulation(c, raise_on_failure=True), cfgs, threads)
    for r in (ra, rb):
        if r.outcome.kind in (OutcomeKind.NUMERICAL_FAILURE, OutcomeKind.MAX_STEPS):
            raise RuntimeError(f"run at alpha = {r.config.alpha} ended with {r.outcome}")

    at_zero = []
    crossings: dict[float, list[int]] = {}
    for t in times:
        va, vb = value_at(ra, t, 0), value_at(rb, t, 0)
        at_zero.append((t, va, vb))
        ga, gb = ra.snapshot(t), rb.snapshot(t)
        if ga is not None and gb is not None:
            crossings[t] = [int(i) for i in np.nonzero(ga.values > gb.values)[0]]
    equal = all(va == vb for _, va, vb in at_zero)
    holds = all(va < vb for _, va, vb in at_zero)
    crossing = any(bool(ix) for ix in crossings.values())
    return OrderingReport(alpha, beta, times, at_zero, holds, equal, crossing, crossings)


# --- amplitude scan ----------------------------------------------------------------


@dataclass
class DichotomyReport:
    """Outcome per amplitude and the bracket between survival and blow-up.

    ``bracket`` is (largest surviving amplitude, smallest blowing-up amplitude),
    either side None when absent.
    """

    rows: list[tuple[float, Outcome, float | None]]
    bracket: tuple[float | None, float | None]


def dichotomy_scan(base: SolverConfig, amplitudes, t_end: float | None = None, threads: int = 1) -> DichotomyReport:
    """Scale the initial data by each amplitude and classify the runs.

    The horizon is ``t_end``, else ``base.t_end``, else 200.
    """
    horizon = t_end if t_end is not None else (base.t_end if base.t_end is not None else 200.0)
    amps = [float(a) for a in amplitudes]
    if any(a < 0 for a in amps):
        raise ValueError("amplitudes must be nonnegative")
    cfgs = [base.with_(initial=base.initial.scaled(a), t_end=horizon) for a in amps]
    rows_raw = _map(_run_row, cfgs, threads)
    rows = [(a, r.outcome, r.T_num) for a, r in zip(amps, rows_raw)]
    survived = [a for a, o, _ in rows if o.kind is OutcomeKind.REACHED_T_END]
    blew = [a for a, o, _ in rows if o.blew_up]
    bracket = (max(survived) if survived else None, min(blew) if blew else None)
    return DichotomyReport(rows, bracket)
