"""Linear-feedback sum-capacity of the symmetric Gaussian MAC.

All rates are in nats; the CLI converts to bits at the presentation layer.

The cooperation factor ``phi(N, P)`` is the root in ``[1, N]`` of

    (1 + N P phi)^(N-1) = (1 + P phi (N - phi))^N,

which we solve by bisection on the log-domain residual
``(N-1) log1p(N P phi) - N log1p(P phi (N - phi))``.  The residual is
nonpositive at ``phi = 1``, positive at ``phi = N`` and strictly increasing
in between, so bisection always converges.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = [
    "CapacityPoint",
    "SymmetricCovariance",
    "phi_residual",
    "solve_phi",
    "linear_feedback_sum_capacity",
    "c1",
    "c2",
    "f1",
    "f2",
    "kramer_threshold",
    "limit_gaps",
    "nofeedback_sum_capacity",
    "cooperation_sum_capacity",
]

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class CapacityPoint:
    n_senders: int
    power: float
    phi: float
    sum_capacity: float

    @property
    def rho(self):
        """Equivalent symmetric correlation ``(phi - 1) / (N - 1)``."""
        return (self.phi - 1.0) / (self.n_senders - 1)


@dataclass(frozen=True)
class SymmetricCovariance:
    """``x * ((1 - rho) I + rho 11')`` with ``phi = 1 + (N - 1) rho``."""

    scale_x: float
    phi: float
    n_senders: int

    def __post_init__(self):
        if self.n_senders < 2:
            raise DomainError("n_senders must be >= 2")
        if self.scale_x < 0:
            raise DomainError("scale_x must be nonnegative")
        if not 0.0 <= self.phi <= self.n_senders:
            raise DomainError(f"phi must lie in [0, {self.n_senders}]")

    @property
    def rho(self):
        return (self.phi - 1.0) / (self.n_senders - 1)

    def matrix(self):
        n = self.n_senders
        rho = self.rho
        return self.scale_x * ((1.0 - rho) * np.eye(n) + rho * np.ones((n, n)))


def _check_n(n_senders):
    if int(n_senders) != n_senders or n_senders < 2:
        raise DomainError(f"n_senders must be an integer >= 2, got {n_senders}")
    return int(n_senders)


def phi_residual(n_senders, power, phi):
    """Log-domain residual of the fixed-point equation (negative below the root)."""
    n = n_senders
    return (n - 1) * np.log1p(n * power * phi) - n * np.log1p(power * phi * (n - phi))


def scaled_phi_residual(n_senders, power, phi):
    """``phi_residual`` divided by the size of its larger term."""
    n = n_senders
    lhs = (n - 1) * np.log1p(n * power * phi)
    rhs = n * np.log1p(power * phi * (n - phi))
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    return np.abs(lhs - rhs) / np.where(scale > 0, scale, 1.0)


def solve_phi(n_senders, power, tol=DEFAULT_TOL):
    """Cooperation factor ``phi(N, P)`` in ``[1, N]``.

    ``power`` may be a scalar or an array (solved elementwise); ``tol`` is
    the final bracket width.
    """
    n = _check_n(n_senders)
    p = np.asarray(power, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise DomainError("power must be positive and finite; use P=0 branch of "
                          "linear_feedback_sum_capacity for zero power")
    lo = np.ones_like(p)
    hi = np.full_like(p, float(n))
    # width halves each pass; small fixed count is enough for any tol >= 1e-15
    n_iter = int(np.ceil(np.log2((n - 1) / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = phi_residual(n, p, mid) <= 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol):
            break
    phi = 0.5 * (lo + hi)
    return float(phi) if phi.ndim == 0 else phi


def c1(x, phi, n_senders):
    """``1/2 log(1 + N x phi)``."""
    t = n_senders * np.asarray(x, dtype=float) * np.asarray(phi, dtype=float)
    if np.any(t <= -1):
        raise DomainError("1 + N x phi must be positive")
    return 0.5 * np.log1p(t)


def c2(x, phi, n_senders):
    """``N / (2 (N-1)) log(1 + (N - phi) x phi)``."""
    n = n_senders
    phi = np.asarray(phi, dtype=float)
    t = (n - phi) * np.asarray(x, dtype=float) * phi
    if np.any(t <= -1):
        raise DomainError("1 + (N - phi) x phi must be positive")
    return n / (2.0 * (n - 1)) * np.log1p(t)


def nofeedback_sum_capacity(n_senders, power):
    return 0.5 * np.log1p(n_senders * power)


def cooperation_sum_capacity(n_senders, power):
    return 0.5 * np.log1p(n_senders ** 2 * power)


def linear_feedback_sum_capacity(n_senders, power, tol=DEFAULT_TOL):
    n = _check_n(n_senders)
    if power < 0 or not np.isfinite(power):
        raise DomainError("power must be nonnegative and finite")
    if power == 0:
        return CapacityPoint(n, 0.0, 1.0, 0.0)
    phi = solve_phi(n, power, tol)
    return CapacityPoint(n, float(power), phi, float(c1(power, phi, n)))


def _as_matrix(K):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DomainError(f"K must be square, got shape {K.shape}")
    return K


def f1(K):
    """``1/2 log(1 + sum of all entries of K)``."""
    K = _as_matrix(K)
    arg = 1.0 + K.sum()
    if arg <= 0:
        raise DomainError("1 + sum(K) must be positive")
    return 0.5 * np.log(arg)


def f2(K):
    """Average over senders of the output entropy given one sender's input.

    A row that is entirely zero contributes ``(row sum)^2 / K_jj := 0``.
    """
    K = _as_matrix(K)
    n = K.shape[0]
    if n < 2:
        raise DomainError("f2 needs at least two senders")
    total = 1.0 + K.sum()
    row = K.sum(axis=1)
    diag = np.diag(K)
    ratio = np.zeros(n)
    for j in range(n):
        if diag[j] > 0:
            ratio[j] = row[j] ** 2 / diag[j]
        elif np.any(K[j] != 0):
            raise DomainError(f"K[{j},{j}] = 0 but row {j} is nonzero; K is not PSD")
    args = total - ratio
    if np.any(args <= 0):
        raise DomainError("conditional output variance must be positive")
    return float(np.sum(np.log(args)) / (2.0 * (n - 1)))


def kramer_threshold(n_senders, tol=DEFAULT_TOL):
    """Power ``P_c(N)`` above which Kramer's code is known to be sum-rate optimal.

    Root of ``(1 + N^2 P / 2)^(N-1) = (1 + N^2 P / 4)^N``; equals 0 for N=2.
    ``tol`` is the relative bracket width.
    """
    n = _check_n(n_senders)
    if n == 2:
        return 0.0
    a = n * n

    def h(p):
        return (n - 1) * np.log1p(a * p / 2) - n * np.log1p(a * p / 4)

    lo, hi = 0.0, 1.0
    while h(hi) > 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def limit_gaps(n_senders, power, tol=DEFAULT_TOL):
    """``(C_L - C_nofeedback, C_L - C_full_cooperation)``; the first is >= 0,
    the second <= 0."""
    if power <= 0:
        raise DomainError("power must be positive")
    cl = linear_feedback_sum_capacity(n_senders, power, tol).sum_capacity
    return (cl - float(nofeedback_sum_capacity(n_senders, power)),
            cl - float(cooperation_sum_capacity(n_senders, power)))
