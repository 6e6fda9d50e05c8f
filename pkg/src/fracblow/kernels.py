"""Green's-function resolvents of A = -d^2/dx^2 and the singular-integral A^alpha.

Four domains are covered: the whole line (truncated to [-L, L]), the
2*pi-periodic circle (even functions on the half-period cosine grid), and
[0, 1] with Dirichlet or Neumann conditions.  Each resolvent is the integral
operator with kernel

    whole line   exp(-a|x-y|) / (2a)
    periodic     cosh(a(pi - |x-y|)) / (2a sinh(pi a))
    [0, 1]       (cosh(a(1-|x-y|)) -+ cosh(a(1-x-y))) / (2a sinh a)

with a = sqrt(lam), discretized with trapezoidal weights.

The kernels have a derivative jump on the diagonal, which limits the plain
trapezoidal rule to O(h^2).  Subtracting

    c(lam, h) = (s coth s - 1) / lam,   s = a h / 2,

from each diagonal entry removes the jump's contribution exactly for
constants and leaves an O(h^4) error for smooth data.  The corrected diagonal
stays nonnegative, so the discrete resolvents keep their positivity.

For lam h^2 >> 1 the trapezoidal kernel stops behaving like a resolvent of
any fixed nonnegative operator, which spoils fractional powers built from it.
``method="bandlimited"`` on the whole line instead uses the exact resolvent
of the sinc-interpolant Laplacian (symbol xi^2 for |xi| < pi/h), whose
lattice weights are computed by quadrature over the Fourier variable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import gamma, zeta

from .fracpow import ResolventMap
from .spectral import Grid, GridFunction

__all__ = [
    "KernelDomain",
    "TruncationWarning",
    "whole_line",
    "periodic",
    "unit_dirichlet",
    "unit_neumann",
    "kink_correction",
    "resolvent_whole_line",
    "resolvent_periodic",
    "resolvent_dirichlet",
    "resolvent_neumann",
    "singular_integral_frac",
    "singular_integral_matrix",
]

VARIANTS = ("whole_line", "periodic", "dirichlet", "neumann")
DECAY_TOL = 1e-8


class TruncationWarning(UserWarning):
    """Sampled data does not decay at the edge of the truncated line."""


def _check_lam(lam) -> float:
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam}")
    return lam


def kink_correction(lam: float, h: float) -> float:
    """Diagonal correction (s coth s - 1)/lam with s = sqrt(lam) h / 2."""
    s = np.sqrt(lam) * h / 2
    if s < 0.1:
        s2 = s * s
        return h * h / 4 * (1 / 3 - s2 / 45 + 2 * s2 * s2 / 945 - s2**3 / 4725)
    return (s / np.tanh(s) - 1.0) / lam


def _circle_green(a: float, z: np.ndarray, period_half: float) -> np.ndarray:
    """cosh(a(P - z)) / (2a sinh(aP)) for z in [0, 2P], overflow-free."""
    num = np.exp(-a * z) + np.exp(-a * (2 * period_half - z))
    return num / (2 * a * -np.expm1(-2 * a * period_half))


@dataclass(frozen=True)
class KernelDomain:
    """A sampled domain for the resolvent kernels.

    ``size`` is the number of sample points (M, or N+1 for the periodic
    half-period grid) and ``L`` the whole-line truncation radius.
    """

    variant: str
    size: int
    L: float = 10.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if int(self.size) != self.size or self.size < 3:
            raise ValueError(f"need at least 3 sample points, got {self.size}")
        if not self.L > 0:
            raise ValueError("truncation radius L must be positive")

    @property
    def nodes(self) -> np.ndarray:
        if self.variant == "whole_line":
            return np.linspace(-self.L, self.L, self.size)
        if self.variant == "periodic":
            return Grid(self.size - 1).nodes
        return np.linspace(0.0, 1.0, self.size)

    @property
    def h(self) -> float:
        if self.variant == "whole_line":
            return 2 * self.L / (self.size - 1)
        if self.variant == "periodic":
            return np.pi / (self.size - 1)
        return 1.0 / (self.size - 1)

    @property
    def weights(self) -> np.ndarray:
        """y-quadrature weights.

        The whole-line data is zero-extended past +-L, so the trapezoidal
        rule on the lattice is the plain rectangle sum there.
        """
        if self.variant == "whole_line":
            return np.full(self.size, self.h)
        w = np.full(self.size, self.h)
        w[0] = w[-1] = self.h / 2
        return w

    def kernel(self, lam: float, x, y) -> np.ndarray:
        """Continuous kernel K(x, y) of (lam + A)^-1, broadcast over x and y."""
        a = np.sqrt(_check_lam(lam))
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        d = np.abs(x - y)
        if self.variant == "whole_line":
            return np.exp(-a * d) / (2 * a)
        if self.variant == "periodic":
            # even function: distances folded into [0, 2 pi]
            return _circle_green(a, np.mod(d, 2 * np.pi), np.pi)
        if self.variant == "dirichlet":
            # nonnegative analytically; clip the cancellation error near the boundary
            return np.maximum(_circle_green(a, d, 1.0) - _circle_green(a, x + y, 1.0), 0.0)
        return _circle_green(a, d, 1.0) + _circle_green(a, x + y, 1.0)

    def matrix(self, lam: float) -> np.ndarray:
        """Corrected trapezoidal matrix of (lam + A)^-1 on the nodes."""
        lam = _check_lam(lam)
        x = self.nodes
        w = self.weights
        if self.variant == "periodic":
            # even extension: y and -y both contribute, endpoints counted once
            a = np.sqrt(lam)
            G = _circle_green(a, np.abs(x[:, None] - x[None, :]), np.pi)
            G += _circle_green(a, x[:, None] + x[None, :], np.pi)
            M = G * w[None, :]
        else:
            M = self.kernel(lam, x[:, None], x[None, :]) * w[None, :]
        c = kink_correction(lam, self.h)
        idx = np.arange(self.size)
        if self.variant == "dirichlet":
            idx = idx[1:-1]
            M[0, :] = 0.0
            M[-1, :] = 0.0
        M[idx, idx] -= c
        return M

    def resolvent_map(self, method: str = "trapezoid") -> ResolventMap:
        """ResolventMap applying the discretized kernel."""
        if method == "bandlimited":
            if self.variant != "whole_line":
                raise ValueError("the band-limited kernel exists only on the whole line")

            def solve(lam, u):
                return _bandlimited_matrix(_check_lam(lam), self.h, self.size) @ u

            return ResolventMap(solve, False, name="whole_line[bandlimited]")
        if method != "trapezoid":
            raise ValueError(f"unknown method {method!r}")

        def solve(lam, u):
            return self.matrix(lam) @ u

        return ResolventMap(solve, True, name=self.variant)


def whole_line(M: int = 400, L: float = 10.0) -> KernelDomain:
    return KernelDomain("whole_line", M, L)


def periodic(N: int) -> KernelDomain:
    return KernelDomain("periodic", int(N) + 1)


def unit_dirichlet(M: int) -> KernelDomain:
    return KernelDomain("dirichlet", M)


def unit_neumann(M: int) -> KernelDomain:
    return KernelDomain("neumann", M)


# --- band-limited whole-line kernel ----------------------------------------
#
# W_j = (h^2/pi) int_0^pi cos(j theta) / (eps^2 + theta^2) dtheta, eps = a h.
# The theta = 0 peak is split off analytically:
#   int_0^pi 1/(eps^2+theta^2) = atan(pi/eps)/eps,
# and the remainder (cos(j theta) - 1)/(eps^2 + theta^2) is integrated by
# composite Gauss-Legendre, uniform on [delta, pi] and geometric toward 0.

_GL_NODES = 24


@lru_cache(maxsize=8)
def _uniform_panels(jmax: int):
    delta = min(0.05, 20.0 / max(jmax, 1))
    n_panels = int(np.ceil((np.pi - delta) / delta))
    edges = np.linspace(delta, np.pi, n_panels + 1)
    th, wt = _gl_on(edges)
    cosm = np.cos(np.outer(np.arange(jmax + 1), th)) - 1.0
    return delta, th, wt, cosm


def _gl_on(edges):
    g, gw = np.polynomial.legendre.leggauss(_GL_NODES)
    lo, hi = edges[:-1, None], edges[1:, None]
    th = ((hi - lo) / 2 * g[None, :] + (hi + lo) / 2).ravel()
    wt = ((hi - lo) / 2 * gw[None, :]).ravel()
    return th, wt


def _bandlimited_weights(lam: float, h: float, jmax: int) -> np.ndarray:
    eps = np.sqrt(lam) * h
    delta, th_u, wt_u, cos_u = _uniform_panels(jmax)
    # geometric panels on [0, delta], finest at the scale of eps
    start = max(eps, 1e-12)
    if start < delta:
        n_geo = int(np.ceil(np.log2(delta / start)))
        edges = np.concatenate([[0.0], delta * 2.0 ** -np.arange(n_geo, -1, -1)])
    else:
        edges = np.array([0.0, delta])
    th_g, wt_g = _gl_on(edges)
    j = np.arange(jmax + 1)
    cos_g = np.cos(np.outer(j, th_g)) - 1.0
    rem = cos_u @ (wt_u / (eps * eps + th_u * th_u)) + cos_g @ (wt_g / (eps * eps + th_g * th_g))
    return h * h / np.pi * (np.arctan(np.pi / eps) / eps + rem)


def _bandlimited_matrix(lam: float, h: float, size: int) -> np.ndarray:
    return toeplitz(_bandlimited_weights(lam, h, size - 1))


# --- public resolvent operations -------------------------------------------


def _as_samples(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ValueError("expected a finite 1-D array of samples")
    return v


def _warn_decay(v: np.ndarray, what: str):
    edge = max(abs(v[0]), abs(v[-1]))
    if edge > DECAY_TOL:
        warnings.warn(
            f"{what}: |v(+-L)| = {edge:.2e} exceeds {DECAY_TOL:g}; truncation is not justified",
            TruncationWarning,
            stacklevel=3,
        )


def resolvent_whole_line(lam: float, v, L: float = 10.0, method: str = "trapezoid") -> np.ndarray:
    """(lam + A)^-1 v on the line, v sampled at linspace(-L, L, len(v))."""
    v = _as_samples(v)
    _warn_decay(v, "resolvent_whole_line")
    dom = whole_line(v.size, L)
    return dom.resolvent_map(method)(lam, v)


def resolvent_periodic(lam: float, v: GridFunction) -> GridFunction:
    """(lam + A)^-1 v for an even 2*pi-periodic grid function."""
    dom = periodic(v.grid.N)
    return GridFunction(v.grid, dom.matrix(lam) @ v.values)


def resolvent_dirichlet(lam: float, v) -> np.ndarray:
    """(lam + A)^-1 v on [0, 1], u(0) = u(1) = 0; v at linspace(0, 1, len(v))."""
    v = _as_samples(v)
    return unit_dirichlet(v.size).matrix(lam) @ v


def resolvent_neumann(lam: float, v) -> np.ndarray:
    """(lam + A)^-1 v on [0, 1], u'(0) = u'(1) = 0; v at linspace(0, 1, len(v))."""
    v = _as_samples(v)
    return unit_neumann(v.size).matrix(lam) @ v


# --- singular integral ------------------------------------------------------


def _check_frac_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"singular integral needs 0 < alpha < 1, got {alpha}")
    return alpha


def singular_integral_matrix(M: int, h: float, alpha: float) -> np.ndarray:
    """Toeplitz matrix of the lattice singular integral for A^alpha.

    With C = sin(pi alpha) Gamma(2 alpha + 1) / pi,

        A^alpha v(x) = C int_0^inf (2v(x) - v(x+z) - v(x-z)) z^(-1-2 alpha) dz.

    The z-integral is the lattice sum over z = jh, j >= 1, plus the
    generalized Euler-Maclaurin endpoint term zeta(2 alpha - 1) h^(-2 alpha)
    times the central second difference; this accounts for the integrand's
    z^(1-2 alpha) behaviour at z = 0 with an O(h^2) error.
    """
    alpha = _check_frac_alpha(alpha)
    C = np.sin(np.pi * alpha) * gamma(2 * alpha + 1) / np.pi
    s = 1 + 2 * alpha
    z1 = zeta(2 * alpha - 1)
    col = np.empty(M)
    col[0] = 2 * zeta(s) - 2 * z1
    if M > 1:
        col[1] = -1.0 + z1
        j = np.arange(2, M, dtype=float)
        col[2:] = -(j**-s)
    return C * h ** (-2 * alpha) * toeplitz(col)


def singular_integral_frac(v, alpha: float, L: float = 10.0, edge: str = "zero") -> np.ndarray:
    """A^alpha v on the line from the singular-integral representation.

    v is sampled at linspace(-L, L, len(v)).  Outside the window v is taken as
    zero (``edge="zero"``, with a warning if v has not decayed) or as the
    nearest edge value (``edge="constant"``); the tail sums of the latter are
    Hurwitz zeta values.
    """
    v = _as_samples(v)
    alpha = _check_frac_alpha(alpha)
    M = v.size
    h = 2 * L / (M - 1)
    out = singular_integral_matrix(M, h, alpha) @ v
    if edge == "zero":
        _warn_decay(v, "singular_integral_frac")
        return out
    if edge != "constant":
        raise ValueError(f"unknown edge mode {edge!r}")
    C = np.sin(np.pi * alpha) * gamma(2 * alpha + 1) / np.pi
    s = 1 + 2 * alpha
    i = np.arange(M, dtype=float)
    # node i reaches past the right edge for j >= M - i, past the left for j >= i + 1
    tail = v[-1] * zeta(s, M - i) + v[0] * zeta(s, i + 1)
    out -= C * h ** (-2 * alpha) * tail
    z1 = zeta(2 * alpha - 1)
    out[0] += C * h ** (-2 * alpha) * z1 * v[0]
    out[-1] += C * h ** (-2 * alpha) * z1 * v[-1]
    return out
