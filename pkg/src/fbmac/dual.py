"""Lagrange-dual upper bound on the linear-feedback sum-capacity.

The dual function is evaluated in its two-variable symmetric form

    J(lam, gamma) = max_{x >= 0} max_{0 <= phi <= N} g(gamma, x, phi) + lam N (P - x)

with ``g = (1 - gamma) C1 + gamma C2``.  The inner maximiser comes from
the stationarity quadratic ``a phi^2 + b phi + c = 0`` (clamped to
``[0, N]``); the outer one from a grid pre-scan followed by golden-section
refinement.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._optimize import golden_section_max
from .capacity import (DEFAULT_TOL, c1, c2, f1, f2,
                       linear_feedback_sum_capacity, solve_phi)
from .exceptions import DomainError

__all__ = [
    "DualParams",
    "InnerMaximizer",
    "DualEvaluation",
    "g",
    "phi_star",
    "g_star",
    "g_star_slope",
    "dual_bound",
    "gamma_star",
    "lambda_star",
    "strong_duality_point",
    "stationarity_residual",
    "dependence_balance_gap",
]


@dataclass(frozen=True)
class DualParams:
    gamma: float
    lam: float

    def __post_init__(self):
        if self.gamma < 0 or self.lam < 0:
            raise DomainError("multipliers must be nonnegative")


@dataclass(frozen=True)
class InnerMaximizer:
    """Stationary point of ``g`` in ``phi``; ``phi_star`` is ``inf`` when
    ``gamma == 0`` (``g = C1`` has no interior maximum)."""

    phi_star: float
    quad_a: float
    quad_b: float
    quad_c: float
    alpha: float

    @property
    def unbounded(self):
        return math.isinf(self.phi_star)


@dataclass(frozen=True)
class DualEvaluation:
    params: DualParams
    j_value: float
    x_star: float
    phi_at_x: float

    @property
    def unbounded(self):
        return math.isinf(self.j_value)


def g(gamma, x, phi, n_senders):
    return (1.0 - gamma) * c1(x, phi, n_senders) + gamma * c2(x, phi, n_senders)


def _quad(gamma, x, n):
    a = (n + gamma - 1 + gamma * n) * x
    b = -n * (n + gamma - 1) * x + 2 * gamma
    c = -(n + gamma - 1)
    return a, b, c


def _positive_root(a, b, c):
    # citardauq form: no cancellation when b > 0, and a -> 0 is fine
    disc = np.sqrt(b * b - 4 * a * c)
    return np.where(b <= 0, (-b + disc) / np.where(a > 0, 2 * a, 1.0), (2 * c) / (-b - disc))


def _phi_star_values(gamma, x, n):
    """Vectorised positive root of the stationarity quadratic (gamma > 0)."""
    a, b, c = _quad(gamma, np.asarray(x, dtype=float), n)
    root = _positive_root(a, b, c)
    # x == 0: a == 0, linear equation b phi + c = 0
    return np.where(a > 0, root, -c / b)


def phi_star(gamma, x, n_senders):
    """Unique positive stationary point of ``phi -> g(gamma, x, phi)``."""
    n = n_senders
    if gamma < 0:
        raise DomainError("gamma must be nonnegative")
    if x < 0:
        raise DomainError("x must be nonnegative")
    a, b, c = _quad(gamma, x, n)
    alpha = 1.0 + gamma * n / (n + gamma - 1)
    if gamma == 0:
        return InnerMaximizer(math.inf, a, b, c, alpha)
    return InnerMaximizer(float(_phi_star_values(gamma, x, n)), a, b, c, alpha)


def stationarity_residual(gamma, x, phi, n_senders):
    """``(1-gamma)(N-1)(1 + x phi (N-phi)) - gamma (2 phi - N)(1 + N x phi)``."""
    n = n_senders
    return ((1 - gamma) * (n - 1) * (1 + x * phi * (n - phi))
            - gamma * (2 * phi - n) * (1 + n * x * phi))


def g_star(gamma, x, n_senders, clamp=False):
    """``g`` at its inner maximiser.

    With ``clamp=True`` the maximiser is restricted to ``[0, N]``, which is
    what the dual function uses; ``gamma == 0`` then gives ``C1(x, N)``.
    With ``clamp=False`` and ``gamma == 0`` the value is ``inf``.
    """
    n = n_senders
    x = np.asarray(x, dtype=float)
    if gamma == 0:
        if not clamp:
            return np.full_like(x, math.inf) if x.ndim else math.inf
        phi = np.full_like(x, float(n))
    else:
        phi = _phi_star_values(gamma, x, n)
        if clamp:
            phi = np.minimum(phi, n)
    val = g(gamma, x, phi, n)
    return float(val) if np.ndim(val) == 0 else val


def g_star_slope(gamma, x, n_senders):
    """Closed-form ``d g*/dx`` (envelope theorem), unclamped maximiser."""
    n = n_senders
    phi = float(_phi_star_values(gamma, x, n))
    return n * (gamma - 1) * phi ** 2 / (2 * (1 + n * x * phi) * (n - 2 * phi))


def _dual_objective(gamma, lam, n, power):
    def obj(x):
        return g_star(gamma, x, n, clamp=True) + lam * n * (power - x)
    return obj


def dual_bound(lam, gamma, n_senders, power, grid=200, xtol=1e-13):
    """Evaluate ``J(lam, gamma)`` and its maximising ``x``.

    ``lam == 0`` gives an unbounded objective (``g*`` grows without bound
    in ``x``) and returns ``j_value = inf``.
    """
    n = n_senders
    params = DualParams(gamma=gamma, lam=lam)
    if power < 0:
        raise DomainError("power must be nonnegative")
    if lam == 0:
        return DualEvaluation(params, math.inf, math.inf, float(n))
    obj = _dual_objective(gamma, lam, n, power)
    # the maximiser of g* + lam N (P - x) sits below (1 + gamma) / (2 lam)
    x_hi = max(10.0 * power, 10.0 * (1.0 + gamma) / lam)
    xs = np.linspace(0.0, x_hi, grid + 1)
    vals = obj(xs)
    k = int(np.argmax(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, grid)]
    x_best, j_best = golden_section_max(obj, lo, hi, xtol=xtol)
    if vals[k] > j_best:
        x_best, j_best = xs[k], vals[k]
    if gamma == 0:
        phi_x = float(n)
    else:
        phi_x = min(float(_phi_star_values(gamma, x_best, n)), float(n))
    return DualEvaluation(params, float(j_best), float(x_best), phi_x)


def gamma_star(n_senders, power, tol=DEFAULT_TOL):
    """Multiplier that makes the inner maximiser at ``x = P`` equal ``phi(N, P)``."""
    n = n_senders
    if power <= 0:
        raise DomainError("power must be positive")
    phi = solve_phi(n, power, tol)
    if phi < 1:
        raise DomainError("gamma_star requires phi >= 1")
    t = (n - 2 * phi) * (1 + n * power * phi) / ((n - 1) * (1 + power * phi * (n - phi)))
    return 1.0 / (1.0 - t)


def lambda_star(n_senders, power, gamma=None, rel_step=1e-5):
    """Power multiplier from the first-order condition ``x* = P``.

    ``(1/N) d g*(gamma, x)/dx`` at ``x = P`` by central differences.
    """
    n = n_senders
    if gamma is None:
        gamma = gamma_star(n, power)
    h = rel_step * power
    slope = (g_star(gamma, power + h, n) - g_star(gamma, power - h, n)) / (2 * h)
    return slope / n


def strong_duality_point(n_senders, power, grid=200):
    """``(gamma*, lambda*, J(lambda*, gamma*), C_L)``."""
    gam = gamma_star(n_senders, power)
    lam = lambda_star(n_senders, power, gam)
    ev = dual_bound(lam, gam, n_senders, power, grid=grid)
    cl = linear_feedback_sum_capacity(n_senders, power).sum_capacity
    return gam, lam, ev, cl


def dependence_balance_gap(K):
    """``f1(K) - f2(K)``; a value <= 0 satisfies the single-letter
    dependence-balance condition."""
    K = np.asarray(K, dtype=float)
    return f1(K) - f2(K)
