"""Fractional powers of a nonnegative operator from its resolvent.

Everything here is written against a ``ResolventMap``: a callable returning
(lam + A)^-1 u for lam > 0.  Three integral representations are discretized:

    A^alpha u      = s/pi int_0^inf lam^(alpha-1) (u - lam (lam+A)^-1 u) dlam
    A^-alpha u     = s/pi int_0^inf lam^(-alpha) (lam+A)^-1 u dlam
    (mu+A^alpha)^-1 u
                   = s/pi int_0^inf lam^alpha / (mu^2 + 2 mu lam^alpha c + lam^(2 alpha))
                                    (lam+A)^-1 u dlam

with s = sin(pi alpha), c = cos(pi alpha), 0 < alpha < 1.

The first two use Gauss-Jacobi rules whose weight absorbs the algebraic
endpoint behaviour exactly.  Rule ``"sqrt"`` substitutes sqrt(lam) = s/(1-s)
and rule ``"lambda"`` substitutes lam = t/(1-t); for an eigenvalue kappa the
remaining integrand is rational in s (resp. t) with its pole at distance
~kappa^-1/2 (resp. ~kappa^-1) from the interval, so ``"sqrt"`` stays accurate
for spectra up to ~1e4 at Q = 64 where ``"lambda"`` does not.

The mu-resolvent integrand carries lam^alpha inside a rational factor, which
no single Jacobi weight captures.  It is integrated with the trapezoidal rule
in y = log(lam): there the integrand is analytic in a strip of half-width
min(pi, pi (1-alpha)/alpha) and decays like exp(-alpha |y|), so step and
range follow from a target tolerance.  All quadrature weights are positive,
which is what carries positivity of the resolvent over to the results.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "ResolventMap",
    "QuadratureSpec",
    "QuadratureWarning",
    "matrix_resolvent",
    "diagonal_resolvent",
    "scalar_frac_power",
    "frac_power_apply",
    "neg_frac_power_apply",
    "frac_resolvent_apply",
    "hille_semigroup_apply",
    "with_error_estimate",
]

RULES = ("sqrt", "lambda")

# lam is kept inside this range; beyond it (lam+A)^-1 is lam^-1 to working precision
_LAM_FLOOR, _LAM_CEIL = 1e-250, 1e250


class QuadratureWarning(RuntimeWarning):
    """Doubling the node count changed the result by more than the tolerance."""


@dataclass
class ResolventMap:
    """u -> (lam + A)^-1 u for lam > 0.

    ``solve`` must accept a vector of shape (n,) or a block of shape (n, k)
    and act column-wise.  ``positivity_preserving`` records whether
    nonnegative input is known to give nonnegative output.
    """

    solve: Callable[[float, np.ndarray], np.ndarray]
    positivity_preserving: bool = False
    name: str = "resolvent"

    def __call__(self, lam: float, u: np.ndarray) -> np.ndarray:
        return self.solve(lam, u)


def matrix_resolvent(A, positivity_preserving: bool = False) -> ResolventMap:
    """Dense resolvent of a (symmetric nonnegative) matrix by LU solves."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eye = np.eye(n)

    def solve(lam, u):
        return np.linalg.solve(lam * eye + A, u)

    return ResolventMap(solve, positivity_preserving, name=f"matrix[{n}x{n}]")


def diagonal_resolvent(kappas) -> ResolventMap:
    """Resolvent of diag(kappas); exact, used for eigenvector checks."""
    k = np.asarray(kappas, dtype=float)
    if np.any(k < 0):
        raise ValueError("diagonal operator must be nonnegative")

    def solve(lam, u):
        u = np.asarray(u, dtype=float)
        d = 1.0 / (lam + k)
        return d[:, None] * u if u.ndim == 2 else d * u

    return ResolventMap(solve, True, name="diagonal")


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of the lam-integrals.

    Q is the Gauss-Jacobi node count for A^alpha and A^-alpha.  ``tol``, when
    set, makes every evaluation repeat itself at 2Q and warn if the two
    differ by more than ``tol`` (relative to the result norm, floored at 1).
    ``resolvent_tol`` and ``lam_max`` size the log-trapezoid used for
    (mu + A^alpha)^-1: the rule is built to resolve spectra up to ``lam_max``.
    """

    alpha: float
    Q: int = 64
    rule: str = "sqrt"
    tol: float | None = None
    resolvent_tol: float = 1e-10
    lam_max: float = 1e8

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"quadrature needs 0 < alpha < 1, got {self.alpha}")
        if int(self.Q) != self.Q or self.Q < 4:
            raise ValueError(f"Q must be an integer >= 4, got {self.Q}")
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; expected one of {RULES}")
        if not 0 < self.resolvent_tol < 1:
            raise ValueError("resolvent_tol must lie in (0, 1)")

    def doubled(self) -> "QuadratureSpec":
        return replace(self, Q=2 * self.Q, resolvent_tol=self.resolvent_tol**1.5, tol=None)


# --- node generation --------------------------------------------------------


@lru_cache(maxsize=128)
def _jacobi(Q: int, a: float, b: float):
    # weight (1-x)^a (1+x)^b on [-1, 1]; scipy divides 0/0 at a+b = 0 internally
    with np.errstate(invalid="ignore", divide="ignore"):
        x, w = roots_jacobi(Q, a, b)
    return x, w


@lru_cache(maxsize=128)
def _power_nodes(Q: int, alpha: float, rule: str, negative: bool):
    """Nodes lam_k, weights, and the per-node transform for A^{+-alpha}.

    Returns (lam, weight, kind, jac) such that the integral equals
    sin(pi alpha)/pi * sum_k weight_k * jac_k * F(lam_k), where F is
    u - lam R u (positive power) or R u (negative power).
    """
    if rule == "sqrt":
        a, b = (2 * alpha - 1, 1 - 2 * alpha) if negative else (1 - 2 * alpha, 2 * alpha - 1)
    else:
        a, b = (alpha - 1, -alpha) if negative else (-alpha, alpha - 1)
    x, w = _jacobi(Q, a, b)
    s = (1.0 + x) / 2.0
    r = (1.0 - x) / 2.0
    # s^b r^a = 2^-(a+b) (1+x)^b (1-x)^a and ds = dx/2
    w = w * 2.0 ** (-(a + b)) / 2.0
    if rule == "sqrt":
        lam = (s / r) ** 2
        jac = 2.0 / r**2
    else:
        lam = s / r
        jac = 1.0 / r
    return lam, w, jac


def _apply_nodes(res: ResolventMap, u: np.ndarray, lam, w, jac, positive: bool) -> np.ndarray:
    acc = np.zeros_like(u, dtype=float)
    for lk, wk, jk in zip(lam, w, jac):  # ascending node index, fixed order
        lk = float(np.clip(lk, _LAM_FLOOR, _LAM_CEIL))
        Ru = res(lk, u)
        term = (u - lk * Ru) if positive else Ru
        acc += (wk * jk) * term
    return acc


def _check_tol(value, doubled, quad: QuadratureSpec, what: str):
    if quad.tol is None:
        return
    diff = float(np.max(np.abs(np.asarray(value) - np.asarray(doubled))))
    scale = max(1.0, float(np.max(np.abs(value))))
    if diff > quad.tol * scale:
        warnings.warn(
            f"{what}: Q={quad.Q} and Q={2 * quad.Q} differ by {diff:.3e} (tol {quad.tol:g})",
            QuadratureWarning,
            stacklevel=3,
        )


def _as_float_array(u) -> np.ndarray:
    u = np.array(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("input vector has non-finite entries")
    return u


def scalar_frac_power(kappa: float, alpha: float, quad: QuadratureSpec | None = None) -> float:
    """kappa^alpha evaluated through the resolvent integral.

    This is the integral applied to an eigenvector with eigenvalue kappa; it
    is the convergence oracle for node counts and rules.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    quad = _resolve_quad(alpha, quad)
    value = _scalar_power(kappa, quad)
    if quad.tol is not None:
        _check_tol(value, _scalar_power(kappa, quad.doubled()), quad, "scalar_frac_power")
    return value


def _scalar_power(kappa, quad):
    lam, w, jac = _power_nodes(quad.Q, quad.alpha, quad.rule, False)
    # u - lam (lam + kappa)^-1 u with u = 1
    f = kappa / (lam + kappa)
    return float(np.sin(np.pi * quad.alpha) / np.pi * np.sum(w * jac * f))


def _resolve_quad(alpha, quad):
    if quad is None:
        return QuadratureSpec(alpha=float(alpha))
    if alpha is not None and not np.isclose(alpha, quad.alpha, rtol=0, atol=1e-15):
        raise ValueError(f"alpha={alpha} disagrees with quad.alpha={quad.alpha}")
    return quad


def frac_power_apply(res: ResolventMap, u, quad: QuadratureSpec) -> np.ndarray:
    """A^alpha u; one resolvent solve per node."""
    u = _as_float_array(u)
    value = _frac_power(res, u, quad, negative=False)
    if quad.tol is not None:
        _check_tol(value, _frac_power(res, u, quad.doubled(), False), quad, "frac_power_apply")
    return value


def neg_frac_power_apply(res: ResolventMap, u, quad: QuadratureSpec) -> np.ndarray:
    """A^-alpha u; requires A invertible."""
    u = _as_float_array(u)
    value = _frac_power(res, u, quad, negative=True)
    if quad.tol is not None:
        _check_tol(value, _frac_power(res, u, quad.doubled(), True), quad, "neg_frac_power_apply")
    return value


def _frac_power(res, u, quad, negative):
    lam, w, jac = _power_nodes(quad.Q, quad.alpha, quad.rule, negative)
    acc = _apply_nodes(res, u, lam, w, jac, positive=not negative)
    return np.sin(np.pi * quad.alpha) / np.pi * acc


@lru_cache(maxsize=256)
def _log_trapezoid_nodes(alpha: float, mu: float, lam_max: float, tol: float):
    """Nodes y_k = log(lam_k) and weights for (mu + A^alpha)^-1."""
    L = np.log(1.0 / tol)
    strip = 0.8 * min(np.pi, np.pi * (1.0 - alpha) / alpha)
    hy = min(2.0 * np.pi * strip / L, 1.0)
    y0 = np.log(mu) / alpha  # where lam^alpha = mu
    lo = y0 - L / alpha
    hi = max(y0, np.log(lam_max)) + L / alpha
    lo = max(lo, np.log(_LAM_FLOOR))
    hi = min(hi, np.log(_LAM_CEIL))
    n = int(np.ceil((hi - lo) / hy))
    y = lo + hy * np.arange(n + 1)
    # lam^alpha / (mu^2 + 2 mu c lam^alpha + lam^(2 alpha)), written via e^(alpha y)
    ea = np.exp(alpha * y)
    rational = 1.0 / (mu * mu / ea + 2.0 * mu * np.cos(np.pi * alpha) + ea)
    lam = np.exp(y)
    # dlam = lam dy
    weights = np.sin(np.pi * alpha) / np.pi * hy * rational * lam
    return lam, weights


def frac_resolvent_apply(res: ResolventMap, mu: float, u, quad: QuadratureSpec) -> np.ndarray:
    """(mu + A^alpha)^-1 u for mu > 0."""
    mu = float(mu)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    u = _as_float_array(u)
    value = _frac_resolvent(res, mu, u, quad)
    if quad.tol is not None:
        _check_tol(value, _frac_resolvent(res, mu, u, quad.doubled()), quad, "frac_resolvent_apply")
    return value


def _frac_resolvent(res, mu, u, quad):
    lam, weights = _log_trapezoid_nodes(quad.alpha, mu, quad.lam_max, quad.resolvent_tol)
    acc = np.zeros_like(u, dtype=float)
    for lk, wk in zip(lam, weights):
        acc += wk * res(float(lk), u)
    return acc


def hille_semigroup_apply(
    res: ResolventMap,
    t: float,
    n: int,
    u,
    quad: QuadratureSpec | None = None,
) -> np.ndarray:
    """(1 + (t/n) Op)^-n u, approximating exp(-t Op) u.

    Op is A itself when ``quad`` is None and A^alpha otherwise.  Each factor
    is (n/t) (n/t + Op)^-1.  The factor is linear, so it is materialized once
    as a matrix (one solve per basis vector) and raised to the n-th power.
    """
    t = float(t)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    u = _as_float_array(u)
    mu = n / t

    def factor(v):
        if quad is None:
            return mu * res(mu, v)
        return mu * _frac_resolvent(res, mu, v, quad)

    dim = u.shape[0]
    step = factor(np.eye(dim))
    return np.linalg.matrix_power(step, n) @ u


def with_error_estimate(func: Callable, *args, quad: QuadratureSpec):
    """Evaluate ``func(*args, quad)`` at Q and 2Q.

    Returns ``(value, err)`` with err = max |value(Q) - value(2Q)|.
    """
    base = replace(quad, tol=None)
    value = func(*args, base)
    finer = func(*args, base.doubled())
    err = float(np.max(np.abs(np.asarray(value) - np.asarray(finer))))
    return value, err
