import numpy as np
import pytest

from fracblow.fracpow import QuadratureSpec, frac_power_apply
from fracblow.kernels import (
    KernelDomain,
    TruncationWarning,
    kink_correction,
    periodic,
    resolvent_dirichlet,
    resolvent_neumann,
    resolvent_periodic,
    resolvent_whole_line,
    singular_integral_frac,
    unit_dirichlet,
    unit_neumann,
    whole_line,
)
from fracblow.spectral import CosineSpectrum, GridFunction, analyze, make_grid, synthesize
from oracles import fourier_frac_gaussian, hyp_frac_gaussian

LAMS = [1e-4, 1e-2, 0.3, 1.0, 10.0, 1e3, 1e6]


def low_mode_even(rng, g, kmax=8):
    c = np.zeros(g.size)
    c[: kmax + 1] = rng.standard_normal(kmax + 1) / (1.0 + np.arange(kmax + 1)) ** 2
    return synthesize(CosineSpectrum(g, c)).values


# --- kernel-level invariants ---


@pytest.mark.parametrize("dom", [whole_line(60, 5.0), periodic(30), unit_dirichlet(40), unit_neumann(40)])
def test_kernel_symmetry_and_sign(dom):
    rng = np.random.default_rng(0)
    lo, hi = (dom.nodes[0], dom.nodes[-1])
    x = rng.uniform(lo, hi, 200)
    y = rng.uniform(lo, hi, 200)
    for lam in (1e-3, 1.0, 50.0):
        K1 = dom.kernel(lam, x, y)
        K2 = dom.kernel(lam, y, x)
        assert np.max(np.abs(K1 - K2)) <= 1e-12 * max(1.0, np.max(np.abs(K1)))
        assert K1.min() >= 0.0


@pytest.mark.parametrize("dom", [whole_line(80, 5.0), periodic(40), unit_dirichlet(50), unit_neumann(50)])
def test_discrete_matrix_nonnegative(dom):
    for lam in LAMS:
        assert dom.matrix(lam).min() >= -1e-14 * np.max(dom.matrix(lam))


def test_kink_correction_series_branch_continuity():
    h = 0.1
    lam_switch = (2 * 0.1 / h) ** 2
    a = kink_correction(lam_switch * (1 - 1e-9), h)
    b = kink_correction(lam_switch * (1 + 1e-9), h)
    assert abs(a - b) <= 1e-12 * abs(a)


def test_kernel_domain_validation():
    with pytest.raises(ValueError):
        KernelDomain("torus", 10)
    with pytest.raises(ValueError):
        KernelDomain("periodic", 2)
    with pytest.raises(ValueError):
        periodic(10).matrix(0.0)
    with pytest.raises(ValueError):
        periodic(10).resolvent_map("bandlimited")


# --- periodic ---


def test_periodic_cos1():
    g = make_grid(100)
    out = resolvent_periodic(1.0, GridFunction(g, np.cos(g.nodes))).values
    assert np.max(np.abs(out - np.cos(g.nodes) / 2)) <= 1e-6


@pytest.mark.parametrize("lam", LAMS)
def test_periodic_constant(lam):
    g = make_grid(100)
    out = resolvent_periodic(lam, GridFunction(g, np.ones(101))).values
    assert np.max(np.abs(out * lam - 1)) <= 1e-10


def test_periodic_cos_n():
    g = make_grid(100)
    for n in (2, 5):
        for lam in (0.5, 4.0):
            out = resolvent_periodic(lam, GridFunction(g, np.cos(n * g.nodes))).values
            assert np.max(np.abs(out - np.cos(n * g.nodes) / (lam + n * n))) <= 1e-6


def test_periodic_random_even_spectral_oracle():
    rng = np.random.default_rng(5)
    g = make_grid(100)
    n2 = np.arange(101, dtype=float) ** 2
    for _ in range(5):
        v = low_mode_even(rng, g)
        lam = float(np.exp(rng.uniform(np.log(0.05), np.log(50))))
        out = resolvent_periodic(lam, GridFunction(g, v)).values
        ref = synthesize(CosineSpectrum(g, analyze(GridFunction(g, v)).coeffs / (lam + n2))).values
        assert np.max(np.abs(out - ref)) <= 1e-6


def test_periodic_resolvent_identity():
    rng = np.random.default_rng(6)
    g = make_grid(100)
    dom = periodic(100)
    lam, mu = 1.0, 2.0
    for _ in range(5):
        v = low_mode_even(rng, g)
        lhs = dom.matrix(lam) @ v - dom.matrix(mu) @ v
        rhs = (mu - lam) * (dom.matrix(lam) @ (dom.matrix(mu) @ v))
        assert np.max(np.abs(lhs - rhs)) <= 1e-6


def test_periodic_nonnegative_inputs():
    rng = np.random.default_rng(7)
    dom = periodic(60)
    for lam in LAMS:
        for _ in range(5):
            v = rng.uniform(0, 1, 61) * (rng.uniform(size=61) < 0.4)
            assert (dom.matrix(lam) @ v).min() >= -1e-10


# --- unit interval ---


def test_dirichlet_sin():
    x = np.linspace(0, 1, 200)
    for lam in (0.5, 1.0, 20.0):
        out = resolvent_dirichlet(lam, np.sin(np.pi * x))
        assert np.max(np.abs(out - np.sin(np.pi * x) / (lam + np.pi**2))) <= 1e-4


def test_dirichlet_sin2():
    x = np.linspace(0, 1, 200)
    out = resolvent_dirichlet(1.0, np.sin(2 * np.pi * x))
    assert np.max(np.abs(out - np.sin(2 * np.pi * x) / (1 + 4 * np.pi**2))) <= 1e-4


def test_dirichlet_boundary_zero():
    rng = np.random.default_rng(8)
    v = rng.uniform(0, 1, 100)
    out = resolvent_dirichlet(3.0, v)
    assert abs(out[0]) <= 1e-12 and abs(out[-1]) <= 1e-12


def test_neumann_constant():
    for lam in LAMS:
        out = resolvent_neumann(lam, np.ones(200))
        assert np.max(np.abs(out - 1 / lam)) <= 1e-6 / lam


def test_neumann_cos():
    x = np.linspace(0, 1, 200)
    out = resolvent_neumann(2.0, np.cos(np.pi * x))
    assert np.max(np.abs(out - np.cos(np.pi * x) / (2 + np.pi**2))) <= 1e-4


def test_neumann_dirichlet_positivity():
    rng = np.random.default_rng(9)
    for lam in LAMS:
        for _ in range(5):
            v = rng.uniform(0, 1, 120) * (rng.uniform(size=120) < 0.3)
            assert resolvent_neumann(lam, v).min() >= -1e-10
            assert resolvent_dirichlet(lam, v).min() >= -1e-10


# --- whole line ---


def test_whole_line_fd_residual():
    # the residual check has its own O(h^2) truncation error; M = 2001 puts it near 1e-5
    M, L = 2001, 10.0
    x = np.linspace(-L, L, M)
    h = x[1] - x[0]
    v = np.exp(-(x**2))
    w = resolvent_whole_line(1.0, v, L=L)
    resid = w[1:-1] - (w[2:] - 2 * w[1:-1] + w[:-2]) / h**2 - v[1:-1]
    assert np.max(np.abs(resid)) <= 1e-4


def test_whole_line_zero():
    assert np.all(resolvent_whole_line(2.0, np.zeros(400)) == 0)


def test_whole_line_large_lambda():
    x = np.linspace(-10, 10, 400)
    v = np.exp(-(x**2))
    out = resolvent_whole_line(1e4, v)
    assert np.max(np.abs(out - v / 1e4)) <= 1e-3 * np.max(np.abs(v / 1e4))


def test_whole_line_bandlimited_matches_trapezoid_small_lambda():
    x = np.linspace(-10, 10, 400)
    v = np.exp(-(x**2))
    a = resolvent_whole_line(1.0, v)
    b = resolvent_whole_line(1.0, v, method="bandlimited")
    assert np.max(np.abs(a - b)) <= 1e-6


def test_whole_line_truncation_warning():
    x = np.linspace(-3, 3, 100)
    with pytest.warns(TruncationWarning):
        resolvent_whole_line(1.0, np.exp(-(x**2) / 4), L=3.0)


# --- singular integral ---


def test_fourier_oracle_agrees_with_closed_form():
    x = np.linspace(-5, 5, 21)
    for a in (0.3, 0.5, 0.7):
        np.testing.assert_allclose(fourier_frac_gaussian(x, a), hyp_frac_gaussian(x, a), atol=1e-9)


def test_singular_integral_constant_interior():
    out = singular_integral_frac(np.full(400, 2.5), 0.5, edge="constant")
    assert np.max(np.abs(out[50:-50])) <= 1e-10


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_singular_integral_fourier_oracle(alpha):
    x = np.linspace(-10, 10, 400)
    v = np.exp(-(x**2))
    out = singular_integral_frac(v, alpha)
    ref = fourier_frac_gaussian(x, alpha)
    interior = np.abs(x) <= 8
    assert np.max(np.abs(out - ref)[interior]) <= 1e-3


def test_singular_integral_two_routes_half():
    x = np.linspace(-10, 10, 400)
    v = np.exp(-(x**2))
    res = whole_line(400, 10.0).resolvent_map("bandlimited")
    fp = frac_power_apply(res, v, QuadratureSpec(alpha=0.5))
    si = singular_integral_frac(v, 0.5)
    interior = np.abs(x) <= 8
    assert np.max(np.abs(fp - si)[interior]) <= 1e-3


def test_singular_integral_rejects_alpha_and_warns():
    with pytest.raises(ValueError):
        singular_integral_frac(np.zeros(10), 1.0)
    with pytest.warns(TruncationWarning):
        singular_integral_frac(np.ones(50), 0.5)
