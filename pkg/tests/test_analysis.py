import math

import numpy as np
import pytest

from fracblow.analysis import (
    EigenPair,
    alpha_sweep,
    dichotomy_scan,
    jensen_bound_time,
    jensen_projection_trace,
    levine_check,
    max_ordering_check,
    periodic_eigenpair,
)
from fracblow.spectral import GridFunction, make_grid
from fracblow.timestepper import OutcomeKind, SolverConfig, constant, cos_plus_const, run_simulation
from oracles import cos_poly_period_integral

G = make_grid(100)


# --- energy criterion ---


@pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
def test_levine_constant(b):
    rep = levine_check(GridFunction(G, np.full(101, b)), 0.6, 2)
    assert abs(rep.G_value - 2 * math.pi * b**3 / 3) <= 1e-12
    assert abs(rep.quad_value) <= 1e-9
    assert rep.predicts_blowup


def test_levine_small_cos():
    eps = 1e-2
    rep = levine_check(GridFunction(G, eps * np.cos(G.nodes)), 0.7, 2)
    assert abs(rep.G_value) <= 1e-15
    assert abs(rep.quad_value - eps**2 * math.pi / 2) <= 1e-12
    assert not rep.predicts_blowup


@pytest.mark.parametrize("alpha", [0.3, 0.6, 1.0])
def test_levine_cos_plus_one(alpha):
    rep = levine_check(GridFunction(G, np.cos(G.nodes) + 1), alpha, 2)
    assert abs(rep.G_value - 5 * math.pi / 3) <= 1e-12
    assert abs(rep.G_value - cos_poly_period_integral(1, 1, 3) / 3) <= 1e-12
    assert abs(rep.quad_value - math.pi / 2) <= 1e-10
    assert rep.predicts_blowup


def test_levine_p3():
    rep = levine_check(GridFunction(G, 2 * np.cos(G.nodes) + 1), 0.5, 3)
    assert abs(rep.G_value - cos_poly_period_integral(2, 1, 4) / 4) <= 1e-11


# --- Jensen projection ---


def test_periodic_eigenpair():
    pair = periodic_eigenpair(100)
    assert pair.kappa0 == 0.0
    assert pair.residual(0.6) <= 1e-10
    assert abs(pair.jensen_constant_for(2) - 1 / (2 * math.pi)) <= 1e-15


def test_eigenpair_rejects_nonpositive():
    with pytest.raises(ValueError):
        EigenPair(0.0, GridFunction(G, np.cos(G.nodes)))
    with pytest.raises(ValueError):
        EigenPair(-1.0, GridFunction(G, np.ones(101)))


def test_jensen_bound_time_closed_forms():
    # phi' = c phi^2: T = 1/(c phi0)
    assert jensen_bound_time(2.0, 0.0, 0.5, 2, 0.25) == pytest.approx(2.0)
    # phi' = -phi + phi^2 from phi0 = 2: T = ln 2
    assert jensen_bound_time(2.0, 1.0, 0.5, 2, 1.0) == pytest.approx(math.log(2))
    # below the threshold nothing blows up
    assert jensen_bound_time(0.5, 1.0, 0.5, 2, 1.0) == float("inf")


@pytest.mark.parametrize("alpha", [0.5, 0.7])
def test_jensen_trace_no_violations(alpha):
    res = run_simulation(SolverConfig(alpha=alpha, snapshot_every=1))
    tr = jensen_projection_trace(res, periodic_eigenpair(100), alpha, 2)
    assert tr.violations == 0
    assert tr.T_bound == pytest.approx(1.0, rel=1e-12)
    assert tr.bound_respected


def test_jensen_trace_rejects_negative_profile():
    res = run_simulation(SolverConfig(alpha=0.5, initial=cos_plus_const(1, 0), t_end=0.01, snapshot_times=(0, 0.01)))
    with pytest.raises(ValueError):
        jensen_projection_trace(res, periodic_eigenpair(100), 0.5, 2)


# --- alpha sweep ---


def test_sweep_single_alpha():
    sw = alpha_sweep(SolverConfig(alpha=0.7), [0.7])
    assert len(sw.rows) == 1 and sw.direction == "constant"


def test_sweep_rejects_unsorted():
    with pytest.raises(ValueError):
        alpha_sweep(SolverConfig(alpha=0.7), [0.7, 0.6])


def test_sweep_zero_operator_identical():
    base = SolverConfig(alpha=0.5, zero_operator=True, initial=constant(1.0))
    sw = alpha_sweep(base, [0.4, 0.6, 0.8])
    T = [r.T_num for r in sw.rows]
    assert T[0] == T[1] == T[2]
    assert sw.direction == "constant"


def test_sweep_threads_deterministic():
    base = SolverConfig(alpha=0.6, snapshot_times=(0.5,))
    a = alpha_sweep(base, [0.6, 0.7])
    b = alpha_sweep(base, [0.6, 0.7], threads=2)
    assert [r.T_num for r in a.rows] == [r.T_num for r in b.rows]
    assert [r.max_at for r in a.rows] == [r.max_at for r in b.rows]
    assert a.direction == "increasing"


# --- maximum ordering ---


def test_ordering_explicit_pair():
    rep = max_ordering_check(SolverConfig(alpha=0.6), 0.7, 0.6, [0.5, 0.55])
    assert rep.ordering_holds and not rep.equal
    for _, va, vb in rep.at_zero:
        assert va < vb


def test_ordering_counts_blowup_as_inf():
    rep = max_ordering_check(SolverConfig(alpha=0.5), 0.6, 0.5, [0.6])
    (_, va, vb), = rep.at_zero
    assert math.isfinite(va) and vb == float("inf")
    assert rep.ordering_holds


def test_ordering_same_alpha_equal():
    rep = max_ordering_check(SolverConfig(alpha=0.6, t_end=0.2), 0.6, 0.6, [0.2])
    assert rep.equal and not rep.ordering_holds


def test_ordering_rejects_order():
    with pytest.raises(ValueError):
        max_ordering_check(SolverConfig(alpha=0.6), 0.5, 0.7, [0.1])


# --- amplitude scan ---


def test_dichotomy_zero_amplitude():
    rep = dichotomy_scan(SolverConfig(alpha=0.6), [0.0], t_end=0.5)
    (_, outcome, _), = rep.rows
    assert outcome.kind is OutcomeKind.REACHED_T_END
    assert rep.bracket == (0.0, None)


def test_dichotomy_zero_operator_ode_times():
    base = SolverConfig(alpha=0.6, zero_operator=True, initial=constant(1.0))
    rep = dichotomy_scan(base, [0.01, 10.0])
    (_, o1, T1), (_, o2, T2) = rep.rows
    assert o1.blew_up and o2.blew_up
    assert T1 == pytest.approx(100.0, rel=2e-3)
    assert T2 == pytest.approx(0.1, rel=2e-3)
    assert rep.bracket == (None, 0.01)


def test_dichotomy_rejects_negative():
    with pytest.raises(ValueError):
        dichotomy_scan(SolverConfig(alpha=0.6), [-1.0])
