"""Time marching for u_t = -A^alpha u + u^p on the even periodic grid.

Two first-order schemes are provided:

    explicit   u' = u + tau (T u + u^p)
    implicit   u' = (1 + tau A^alpha)^-1 (u + tau u^p)

with the adaptive step tau_m = min(tau0, c / max_j |u_j|).  A run stops when
max u reaches U_stop (blow-up, T_num = sum of the steps taken), when t passes
t_end, or when the step budget is spent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .spectral import (
    FractionalOperator,
    Grid,
    GridFunction,
    analysis_matrix,
    apply_implicit_resolvent,
    assemble_T,
    make_grid,
    resolvent_multiplier,
    synthesis_matrix,
)

__all__ = [
    "Scheme",
    "InitialData",
    "cos_plus_const",
    "constant",
    "modes",
    "SolverConfig",
    "StepRecord",
    "Outcome",
    "OutcomeKind",
    "SimulationResult",
    "NumericalFailure",
    "RegularityWarning",
    "MonotoneReport",
    "adaptive_tau",
    "step_explicit",
    "step_implicit",
    "run_simulation",
    "monotone_time_check",
    "value_at",
]

STABILITY_LIMIT = 2.0


class Scheme(str, Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


class NumericalFailure(RuntimeError):
    """Non-finite values or an unstable configuration.

    ``state`` carries the last valid grid function (or the initial data when
    the run never started) and ``t`` its time.
    """

    def __init__(self, message: str, state: GridFunction | None = None, t: float = 0.0):
        super().__init__(message)
        self.state = state
        self.t = t


class RegularityWarning(UserWarning):
    """alpha <= 1/4, below the range where the monotonicity hypothesis is justified."""


# --- initial data -----------------------------------------------------------


@dataclass(frozen=True)
class InitialData:
    """Initial-data descriptor.

    kind is ``cos_plus_const`` (params a, b: a cos x + b), ``constant``
    (params b) or ``modes`` (params gamma_0..gamma_k, raw cosine
    coefficients).
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        n = len(self.params)
        if self.kind == "cos_plus_const" and n != 2:
            raise ValueError("cos_plus_const takes two parameters a, b")
        if self.kind == "constant" and n != 1:
            raise ValueError("constant takes one parameter b")
        if self.kind == "modes" and n < 1:
            raise ValueError("modes needs at least one coefficient")
        if self.kind not in ("cos_plus_const", "constant", "modes"):
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if not all(np.isfinite(self.params)):
            raise ValueError("initial-data parameters must be finite")

    def sample(self, grid: Grid) -> GridFunction:
        x = grid.nodes
        if self.kind == "cos_plus_const":
            a, b = self.params
            return GridFunction(grid, a * np.cos(x) + b)
        if self.kind == "constant":
            return GridFunction(grid, np.full(grid.size, float(self.params[0])))
        gam = np.asarray(self.params, dtype=float)
        if gam.size > grid.size:
            raise ValueError(f"{gam.size} modes do not fit on a grid with N={grid.N}")
        coeffs = np.zeros(grid.size)
        coeffs[: gam.size] = gam
        return GridFunction(grid, synthesis_matrix(grid.N) @ coeffs)

    def scaled(self, amplitude: float) -> "InitialData":
        return InitialData(self.kind, tuple(float(amplitude) * p for p in self.params))


def cos_plus_const(a: float = 1.0, b: float = 1.0) -> InitialData:
    return InitialData("cos_plus_const", (float(a), float(b)))


def constant(b: float) -> InitialData:
    return InitialData("constant", (float(b),))


def modes(*gammas: float) -> InitialData:
    return InitialData("modes", tuple(float(g) for g in gammas))


# --- configuration and results ----------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one simulation.

    ``c=None`` means c = tau0.  ``zero_operator`` drops the diffusion term and
    leaves the pointwise ODE u' = u^p.  ``snapshot_times`` are interpolated
    linearly between bracketing steps; ``snapshot_every=k`` additionally
    stores the exact state every k steps (and at t = 0).
    """

    alpha: float
    N: int = 100
    p: int = 2
    tau0: float = 1e-3
    c: float | None = None
    scheme: Scheme = Scheme.EXPLICIT
    initial: InitialData = field(default_factory=cos_plus_const)
    U_stop: float = 1e8
    t_end: float | None = None
    max_steps: int = 10_000_000
    snapshot_times: tuple[float, ...] = ()
    snapshot_every: int = 0
    record_every: int = 1
    zero_operator: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "snapshot_times", tuple(sorted(float(t) for t in self.snapshot_times)))
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha: must be positive, got {self.alpha}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N: must be an integer >= 2, got {self.N}")
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"p: must be an integer >= 2, got {self.p}")
        if not self.tau0 > 0:
            raise ValueError(f"tau0: must be positive, got {self.tau0}")
        if self.c is not None and not self.c > 0:
            raise ValueError(f"c: must be positive, got {self.c}")
        if self.t_end is not None and not self.t_end > 0:
            raise ValueError(f"t_end: must be positive, got {self.t_end}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError(f"max_steps: must be a positive integer, got {self.max_steps}")
        if self.snapshot_every < 0 or self.record_every < 1:
            raise ValueError("snapshot_every must be >= 0 and record_every >= 1")
        if any(t < 0 for t in self.snapshot_times):
            raise ValueError("snapshot_times: must be nonnegative")
        u0max = float(np.max(self.initial.sample(make_grid(self.N)).values))
        if not self.U_stop > u0max:
            raise ValueError(f"U_stop: must exceed max initial value {u0max}, got {self.U_stop}")
        if self.alpha <= 0.25 and not self.zero_operator:
            warnings.warn(
                f"alpha = {self.alpha} <= 1/4: monotone-in-time behaviour is not guaranteed",
                RegularityWarning,
                stacklevel=3,
            )

    @property
    def c_eff(self) -> float:
        return self.tau0 if self.c is None else float(self.c)

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class StepRecord:
    """State after a step: time reached, step used, max and argmax of u."""

    step: int
    t: float
    tau: float
    max_u: float
    argmax_index: int


class OutcomeKind(str, Enum):
    BLEW_UP = "BlewUp"
    REACHED_T_END = "ReachedTEnd"
    MAX_STEPS = "MaxStepsExceeded"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    T_num: float | None = None
    message: str = ""

    @property
    def blew_up(self) -> bool:
        return self.kind is OutcomeKind.BLEW_UP

    def __str__(self):
        return self.kind.value


@dataclass
class SimulationResult:
    """Records, outcome and saved profiles of one run.

    ``tail_estimate`` is the time the pure ODE u' = u^p needs to go from
    U_stop to infinity, U_stop^(1-p)/(p-1); it indicates how far T_num sits
    below the true blow-up time.
    """

    config: SolverConfig
    grid: Grid
    initial: GridFunction
    records: list[StepRecord]
    outcome: Outcome
    snapshots: list[tuple[float, GridFunction]]
    final: GridFunction
    t_final: float
    steps: int
    tail_estimate: float

    def snapshot(self, t: float) -> GridFunction | None:
        for ts, g in self.snapshots:
            if ts == t:
                return g
        return None


# --- single steps -----------------------------------------------------------


def adaptive_tau(u, tau0: float, c: float) -> float:
    """min(tau0, c / max_j |u_j|); tau0 when u vanishes."""
    v = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
    m = float(np.max(np.abs(v)))
    if not np.isfinite(m):
        raise NumericalFailure("adaptive_tau: non-finite state")
    if m == 0.0:
        return float(tau0)
    return min(float(tau0), c / m)


def _finite_or_fail(v: np.ndarray, grid: Grid, where: str) -> GridFunction:
    if not np.all(np.isfinite(v)):
        raise NumericalFailure(f"{where}: non-finite values after step")
    return GridFunction(grid, v)


def step_explicit(
    u: GridFunction,
    op: FractionalOperator | None,
    p: int,
    tau: float,
    reaction: bool = True,
) -> GridFunction:
    """u + tau (T u + u^p); ``op=None`` is the zero operator."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = np.zeros_like(u.values) if op is None else op.matrix @ u.values
        if reaction:
            rhs = rhs + u.values**p
        return _finite_or_fail(u.values + tau * rhs, u.grid, "step_explicit")


def step_implicit(
    u: GridFunction,
    alpha: float | None,
    p: int,
    tau: float,
    reaction: bool = True,
) -> GridFunction:
    """(1 + tau A^alpha)^-1 (u + tau u^p); ``alpha=None`` is the zero operator."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    with np.errstate(over="ignore", invalid="ignore"):
        v = u.values + tau * u.values**p if reaction else u.values.copy()
    if not np.all(np.isfinite(v)):
        raise NumericalFailure("step_implicit: non-finite values after step")
    if alpha is None:
        return GridFunction(u.grid, v)
    w = apply_implicit_resolvent(GridFunction(u.grid, v), alpha, tau).values
    return _finite_or_fail(w, u.grid, "step_implicit")


# --- driver -----------------------------------------------------------------


def _stepper(cfg: SolverConfig, grid: Grid):
    """Array-level step function u, tau -> u' for the configured scheme."""
    p = cfg.p
    if cfg.zero_operator:
        return lambda u, tau: u + tau * u**p
    if cfg.scheme is Scheme.EXPLICIT:
        T = assemble_T(grid, cfg.alpha).matrix
        return lambda u, tau: u + tau * (T @ u + u**p)
    An = analysis_matrix(grid.N)
    Sy = synthesis_matrix(grid.N)
    N, alpha = grid.N, cfg.alpha

    def implicit(u, tau):
        return Sy @ (resolvent_multiplier(N, alpha, tau) * (An @ (u + tau * u**p)))

    return implicit


def run_simulation(config: SolverConfig, raise_on_failure: bool = True) -> SimulationResult:
    """March ``config`` to blow-up, t_end, or max_steps.

    Steps are never shortened to land on t_end; the run stops after the
    first step that reaches it, and snapshots in between are interpolated.
    With ``raise_on_failure=False`` a numerical failure is reported as the
    outcome instead of raised.
    """
    cfg = config
    grid = make_grid(cfg.N)
    u0 = cfg.initial.sample(grid)
    c = cfg.c_eff
    if cfg.scheme is Scheme.EXPLICIT and not cfg.zero_operator:
        ratio = cfg.tau0 * cfg.N ** (2 * cfg.alpha)
        if ratio > STABILITY_LIMIT:
            err = NumericalFailure(
                f"explicit scheme unstable: tau0*N^(2 alpha) = {ratio:.3g} > {STABILITY_LIMIT:g}; "
                "reduce tau0 or use the implicit scheme",
                u0,
                0.0,
            )
            if raise_on_failure:
                raise err
            return _result(cfg, grid, u0, [], Outcome(OutcomeKind.NUMERICAL_FAILURE, message=str(err)), [], u0.values, 0.0, 0)

    step = _stepper(cfg, grid)
    pending = [t for t in cfg.snapshot_times]
    snaps: list[tuple[float, GridFunction]] = []
    while pending and pending[0] == 0.0:
        snaps.append((0.0, u0))
        pending.pop(0)
    exact: list[tuple[float, GridFunction]] = [(0.0, u0)] if cfg.snapshot_every else []

    records: list[StepRecord] = []
    u = u0.values.copy()
    t = 0.0
    m = 0
    outcome = None
    last: StepRecord | None = None
    while True:
        if m >= cfg.max_steps:
            outcome = Outcome(OutcomeKind.MAX_STEPS, message=f"{m} steps")
            break
        tau = adaptive_tau(u, cfg.tau0, c)
        with np.errstate(over="ignore", invalid="ignore"):
            un = step(u, tau)
        if not np.all(np.isfinite(un)):
            msg = f"non-finite values at step {m + 1}, t = {t:.6g}"
            if raise_on_failure:
                raise NumericalFailure(msg, GridFunction(grid, u), t)
            outcome = Outcome(OutcomeKind.NUMERICAL_FAILURE, message=msg)
            break
        tn = t + tau
        m += 1
        while pending and pending[0] <= tn:
            ts = pending.pop(0)
            theta = (ts - t) / tau
            snaps.append((ts, GridFunction(grid, u + theta * (un - u))))
        u, t = un, tn
        j = int(np.argmax(u))
        last = StepRecord(m, t, tau, float(u[j]), j)
        if m % cfg.record_every == 0:
            records.append(last)
        if cfg.snapshot_every and m % cfg.snapshot_every == 0:
            exact.append((t, GridFunction(grid, u)))
        if u[j] >= cfg.U_stop:
            outcome = Outcome(OutcomeKind.BLEW_UP, T_num=t)
            break
        if cfg.t_end is not None and t >= cfg.t_end:
            outcome = Outcome(OutcomeKind.REACHED_T_END)
            break
    if last is not None and (not records or records[-1] is not last):
        records.append(last)
    if cfg.snapshot_every and exact[-1][0] != t:
        exact.append((t, GridFunction(grid, u)))
    if cfg.snapshot_every:
        snaps = sorted(snaps + exact, key=lambda s: s[0])
    return _result(cfg, grid, u0, records, outcome, snaps, u, t, m)


def _result(cfg, grid, u0, records, outcome, snaps, u, t, m) -> SimulationResult:
    tail = cfg.U_stop ** (1 - cfg.p) / (cfg.p - 1)
    return SimulationResult(
        cfg, grid, u0, records, outcome, snaps, GridFunction(grid, u), t, m, tail
    )


def value_at(result: SimulationResult, t: float, index: int = 0) -> float:
    """u(t, x_index) from the snapshot at ``t``; +inf if the run blew up first.

    Raises KeyError if the run ended at or before t without blowing up and
    no snapshot exists.
    """
    g = result.snapshot(t)
    if g is not None:
        return float(g.values[index])
    if result.outcome.blew_up and result.outcome.T_num <= t:
        return float("inf")
    raise KeyError(f"no snapshot at t = {t} (outcome {result.outcome}, t_final = {result.t_final:.6g})")


# --- monotonicity diagnostics -----------------------------------------------


@dataclass
class MonotoneReport:
    """Snapshot monotonicity and the sufficient condition at t = 0.

    ``condition_held`` reports whether -A^alpha u0 + u0^p >= 0 on the grid;
    ``condition_values`` holds that grid function.
    """

    monotone: bool
    pairs_checked: int
    first_violation: tuple[float, float, int] | None
    condition_held: bool
    condition_values: np.ndarray
    times: list[float]


def monotone_time_check(
    result: SimulationResult,
    tol: float = 1e-9,
    include_final: bool = False,
    t_max: float | None = None,
) -> MonotoneReport:
    """Check u(t_k) <= u(t_{k+1}) + tol on consecutive stored profiles.

    With ``include_final`` the last state of the run is appended.  Near
    blow-up that state carries grid-scale oscillations away from the peak
    (the spike is no longer resolved), so it is off by default.  ``t_max``
    restricts the check to profiles with t <= t_max.
    """
    cfg = result.config
    profiles = list(result.snapshots)
    if include_final and (not profiles or result.t_final > profiles[-1][0]):
        profiles.append((result.t_final, result.final))
    if t_max is not None:
        profiles = [(t, g) for t, g in profiles if t <= t_max]
    if len(profiles) < 2:
        raise ValueError("monotone_time_check needs at least two profiles")

    first = None
    for (t0, g0), (t1, g1) in zip(profiles[:-1], profiles[1:]):
        bad = np.nonzero(g0.values > g1.values + tol)[0]
        if bad.size and first is None:
            first = (t0, t1, int(bad[0]))

    u0 = result.initial.values
    Tu = np.zeros_like(u0) if cfg.zero_operator else assemble_T(result.grid, cfg.alpha).matrix @ u0
    cond = Tu + u0**cfg.p
    held = bool(np.all(cond >= -1e-12 * max(1.0, float(np.max(np.abs(cond))))))
    return MonotoneReport(
        first is None, len(profiles) - 1, first, held, cond, [t for t, _ in profiles]
    )
