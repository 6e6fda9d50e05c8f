import numpy as np
import pytest

from fracblow.spectral import GridFunction, assemble_S, assemble_T, make_grid
from fracblow.timestepper import (
    NumericalFailure,
    OutcomeKind,
    RegularityWarning,
    SolverConfig,
    adaptive_tau,
    constant,
    cos_plus_const,
    modes,
    monotone_time_check,
    run_simulation,
    step_explicit,
    step_implicit,
    value_at,
)
from oracles import explicit_ode_blowup_time

G100 = make_grid(100)


def gf(values, g=G100):
    return GridFunction(g, values)


# --- adaptive step ---


def test_tau_attains_tau0():
    assert adaptive_tau(gf(np.ones(101)), 1e-3, 1e-3) == 1e-3


def test_tau_large_max():
    assert adaptive_tau(gf(np.full(101, 1e6)), 1e-3, 1.0) == 1e-6


def test_tau_max_two():
    u = np.ones(101)
    u[3] = -2.0
    assert adaptive_tau(gf(u), 1e-3, 1e-3) == 0.0005


def test_tau_zero_state():
    assert adaptive_tau(gf(np.zeros(101)), 1e-3, 1e-3) == 1e-3


# --- single steps ---


def test_explicit_zero_operator_ode():
    out = step_explicit(gf(np.ones(101)), None, 2, 0.1)
    np.testing.assert_allclose(out.values, 1.1, rtol=1e-15)


def test_explicit_eigen_decay():
    x = G100.nodes
    out = step_explicit(gf(np.cos(x)), assemble_T(G100, 1.0), 2, 0.01, reaction=False)
    np.testing.assert_allclose(out.values, 0.99 * np.cos(x), atol=1e-12)


def test_explicit_matches_dense_oracle():
    x = G100.nodes
    u = np.cos(x) + 1
    T = assemble_T(G100, 0.5).matrix
    ref = np.array([u[m] + 1e-3 * (sum(T[m, k] * u[k] for k in range(101)) + u[m] ** 2) for m in range(101)])
    out = step_explicit(gf(u), assemble_T(G100, 0.5), 2, 1e-3).values
    assert np.max(np.abs(out - ref)) <= 1e-12


def test_explicit_taylor_alpha1():
    x = G100.nodes
    u = np.cos(x) + 1
    tau = 1e-5
    out = step_explicit(gf(u), assemble_T(G100, 1.0), 2, tau).values
    exact_rhs = -np.cos(x) + u**2
    assert np.max(np.abs(out - (u + tau * exact_rhs))) <= 1e-9


def test_explicit_nonfinite_raises():
    with pytest.raises(NumericalFailure):
        step_explicit(gf(np.full(101, 1e200)), None, 2, 1.0)


def test_implicit_constant():
    out = step_implicit(gf(np.ones(101)), 0.7, 2, 0.1)
    np.testing.assert_allclose(out.values, 1.1, rtol=1e-13)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.3])
def test_implicit_cos_half(alpha):
    x = G100.nodes
    out = step_implicit(gf(np.cos(x)), alpha, 2, 1.0, reaction=False)
    np.testing.assert_allclose(out.values, np.cos(x) / 2, atol=1e-13)


def test_implicit_matches_S_oracle():
    x = G100.nodes
    u = np.cos(x) + 1
    S = assemble_S(G100, 0.7, 1e-3)
    ref = S @ (u + 1e-3 * u**2)
    out = step_implicit(gf(u), 0.7, 2, 1e-3).values
    assert np.max(np.abs(out - ref)) <= 1e-10


def test_implicit_nonfinite_raises():
    with pytest.raises(NumericalFailure):
        step_implicit(gf(np.full(101, 1e200)), 0.5, 2, 1.0)


# --- configuration ---


def test_config_validation():
    with pytest.raises(ValueError, match="alpha"):
        SolverConfig(alpha=-1.0)
    with pytest.raises(ValueError, match="tau0"):
        SolverConfig(alpha=0.5, tau0=0.0)
    with pytest.raises(ValueError, match="c"):
        SolverConfig(alpha=0.5, c=-1.0)
    with pytest.raises(ValueError, match="U_stop"):
        SolverConfig(alpha=0.5, U_stop=1.5)
    with pytest.raises(ValueError, match="p"):
        SolverConfig(alpha=0.5, p=1)


def test_config_low_alpha_warns():
    with pytest.warns(RegularityWarning):
        SolverConfig(alpha=0.2)


def test_default_c_is_tau0():
    assert SolverConfig(alpha=0.5).c_eff == 1e-3


def test_initial_descriptors():
    g = make_grid(16)
    np.testing.assert_allclose(cos_plus_const(2, 3).sample(g).values, 2 * np.cos(g.nodes) + 3)
    np.testing.assert_allclose(constant(4).sample(g).values, 4.0)
    np.testing.assert_allclose(modes(1.0, 0.0, 0.5).sample(g).values, 1 + 0.5 * np.cos(2 * g.nodes), atol=1e-14)
    with pytest.raises(ValueError):
        modes(*np.ones(30)).sample(g)


# --- driver ---


def test_ode_blowup_time_brackets_oracle():
    cfg = SolverConfig(alpha=1.0, zero_operator=True, initial=constant(1.0), c=1e-3, U_stop=1e8)
    res = run_simulation(cfg)
    assert res.outcome.kind is OutcomeKind.BLEW_UP
    # Euler with tau = c/u: u_{m+1} = (1+c) u_m, so T_num = sum c/u_m -> (1+c)(1-(1+c)^-M)
    ref = explicit_ode_blowup_time(1.0, 2, 1e-3, 1e-3, 1e8)
    assert abs(res.outcome.T_num - ref) <= 1e-9
    assert 0.95 <= res.outcome.T_num <= 1.0 + 2e-3


def test_step_rule_law_and_records():
    cfg = SolverConfig(alpha=0.5, t_end=0.3)
    res = run_simulation(cfg)
    prev_max = float(np.max(np.abs(res.initial.values)))
    ts = [r.t for r in res.records]
    assert all(b > a for a, b in zip(ts[:-1], ts[1:]))
    for r in res.records:
        assert r.tau == min(cfg.tau0, cfg.c_eff / prev_max)
        assert r.tau <= cfg.tau0
        prev_max = r.max_u  # nonnegative data: max|u| = max u


def test_T_num_is_sum_of_steps():
    res = run_simulation(SolverConfig(alpha=0.7))
    assert res.outcome.blew_up
    assert res.outcome.T_num == pytest.approx(sum(r.tau for r in res.records), rel=1e-12)


def test_argmax_stays_at_zero():
    res = run_simulation(SolverConfig(alpha=0.6))
    assert all(r.argmax_index == 0 for r in res.records)


def test_record_stride():
    res = run_simulation(SolverConfig(alpha=0.5, t_end=0.1, record_every=10))
    assert all(r.step % 10 == 0 for r in res.records[:-1])
    assert res.records[-1].step == res.steps


def test_max_steps_outcome():
    res = run_simulation(SolverConfig(alpha=0.5, max_steps=5))
    assert res.outcome.kind is OutcomeKind.MAX_STEPS
    assert res.steps == 5


def test_stability_guard():
    cfg = SolverConfig(alpha=1.3, tau0=1e-3)
    with pytest.raises(NumericalFailure, match="implicit"):
        run_simulation(cfg)
    res = run_simulation(cfg, raise_on_failure=False)
    assert res.outcome.kind is OutcomeKind.NUMERICAL_FAILURE


def test_snapshot_interpolation():
    # in zero-operator mode with tau = tau0 the exact Euler iterate is known
    cfg = SolverConfig(alpha=1.0, zero_operator=True, initial=constant(0.1), c=1.0, tau0=0.01,
                       t_end=0.05, snapshot_times=(0.015,))
    res = run_simulation(cfg)
    u = [0.1]
    for _ in range(2):
        u.append(u[-1] + 0.01 * u[-1] ** 2)
    expected = 0.5 * (u[1] + u[2])
    assert abs(res.snapshot(0.015).values[0] - expected) <= 1e-15


def test_value_at_blown_up_is_inf():
    res = run_simulation(SolverConfig(alpha=0.5, snapshot_times=(0.6,)))
    assert res.outcome.T_num < 0.6
    assert value_at(res, 0.6) == float("inf")


def test_implicit_explicit_consistency():
    snaps = (0.1,)
    e = run_simulation(SolverConfig(alpha=0.7, t_end=0.1, snapshot_times=snaps))
    i = run_simulation(SolverConfig(alpha=0.7, t_end=0.1, snapshot_times=snaps, scheme="implicit"))
    assert np.max(np.abs(e.snapshot(0.1).values - i.snapshot(0.1).values)) <= 5e-2


def test_U_stop_refinement_small_positive_shift():
    for c in (1e-3, 1e-2):
        a = run_simulation(SolverConfig(alpha=0.6, c=c, U_stop=1e6)).outcome.T_num
        b = run_simulation(SolverConfig(alpha=0.6, c=c, U_stop=1e8)).outcome.T_num
        assert 0 < b - a < 1e-3


def test_deterministic_runs():
    a = run_simulation(SolverConfig(alpha=0.6))
    b = run_simulation(SolverConfig(alpha=0.6))
    assert a.outcome.T_num == b.outcome.T_num
    assert np.array_equal(a.final.values, b.final.values)


# --- monotonicity ---


def test_monotone_cos_plus_one():
    res = run_simulation(SolverConfig(alpha=0.5, snapshot_times=(0, 0.2, 0.4, 0.5, 0.55)))
    rep = monotone_time_check(res)
    assert rep.monotone and rep.condition_held
    # -A^alpha u0 = -cos x for every alpha since only mode 1 is present
    x = res.grid.nodes
    np.testing.assert_allclose(rep.condition_values, -np.cos(x) + (np.cos(x) + 1) ** 2, atol=1e-12)


def test_monotone_constant():
    res = run_simulation(SolverConfig(alpha=0.5, initial=constant(1.0), t_end=0.5, snapshot_times=(0, 0.25, 0.5)))
    rep = monotone_time_check(res)
    assert rep.monotone and rep.condition_held
    np.testing.assert_allclose(rep.condition_values, 1.0, atol=1e-12)


def test_monotone_condition_pointwise_oracle():
    res = run_simulation(SolverConfig(alpha=0.8, initial=cos_plus_const(1, 5), t_end=0.01, snapshot_times=(0, 0.01)))
    rep = monotone_time_check(res)
    x = res.grid.nodes
    u0 = 5 + np.cos(x)
    oracle = -np.cos(x) + u0**2
    np.testing.assert_allclose(rep.condition_values, oracle, atol=1e-10)
    assert rep.condition_held == bool(np.all(oracle >= 0))


def test_monotone_needs_two_profiles():
    res = run_simulation(SolverConfig(alpha=0.5, t_end=0.01))
    with pytest.raises(ValueError):
        monotone_time_check(res)


def test_monotone_window_and_late_stage():
    # stepwise monotone on [0, 0.6]; grid-scale decreases appear only in the final approach
    res = run_simulation(SolverConfig(alpha=0.7, snapshot_every=1))
    assert monotone_time_check(res, t_max=0.6).monotone
    late = monotone_time_check(res)
    assert not late.monotone and late.first_violation[0] > 0.6
