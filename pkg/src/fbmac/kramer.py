"""Kramer's linear-feedback code over the complex Gaussian MAC.

A pair of real channel uses is packaged as one complex use.  The code
works on the sqrt(2)-normalised complex channel ``Y = 1'X + Z`` with
``E|Z|^2 = 1``, so covariance diagonals read directly as per-real-use
powers.

Indexing: ``X_1 = Theta`` and ``X_{i+1} = A (X_i - Xhat_i)`` where
``Xhat_i = K_i 1 / (1 + 1'K_i 1) * Y_i``.  The decoder forms
``Theta_hat = sum_{i=1}^n A^{-(i-1)} Xhat_i`` so that
``Theta - Theta_hat = A^{-n} X_{n+1}`` exactly.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError
from .linalg import rank_one_riccati_step
from .riccati import GainMatrix, symmetric_gain

__all__ = [
    "KramerParams",
    "MessagePointGrid",
    "EncoderState",
    "DecoderState",
    "build_grid",
    "feasible_bits_per_axis",
    "lmmse_gain",
    "covariance_trajectory",
    "encode_step",
    "transmit",
    "sender_transmissions",
    "decode",
    "nearest_message",
    "error_bound",
]


@dataclass(frozen=True)
class MessagePointGrid:
    """``side x side`` centres in the square with corners ``+-1 +-i``.

    Message ``m = p + side * q`` sits at
    ``(-1 + (2p+1)/side) + i (-1 + (2q+1)/side)``, so message 0 is the
    bottom-left cell.
    """

    bits_per_axis: int

    @property
    def side(self):
        return 1 << self.bits_per_axis

    @property
    def size(self):
        return self.side * self.side

    @property
    def min_distance(self):
        return 2.0 / self.side

    @property
    def symbol_energy(self):
        """``E|theta|^2`` for a uniformly drawn message."""
        m = self.side
        return 2.0 * (m * m - 1) / (3.0 * m * m)

    def axis_center(self, idx):
        return -1.0 + (2.0 * np.asarray(idx) + 1.0) / self.side

    def center(self, message):
        message = np.asarray(message)
        p, q = message % self.side, message // self.side
        return self.axis_center(p) + 1j * self.axis_center(q)


def feasible_bits_per_axis(rate_per_sender, blocklength):
    """Largest integer ``b <= n R``; the grid then carries ``2b`` bits."""
    bits = math.floor(rate_per_sender * blocklength + 1e-9)
    return bits


def build_grid(rate_per_sender, blocklength):
    """Grid for ``2^(2 n R)`` messages; ``n R`` must be a positive integer."""
    nr = rate_per_sender * blocklength
    bits = round(nr)
    if bits < 1 or abs(nr - bits) > 1e-9:
        nearest = max(feasible_bits_per_axis(rate_per_sender, blocklength), 1) / blocklength
        raise ParameterError(
            f"n*R = {nr:g} is not a positive integer; nearest feasible rate is {nearest:g}")
    return MessagePointGrid(bits)


@dataclass(frozen=True)
class KramerParams:
    """Symmetric Kramer code parameters.

    ``rate_per_sender`` is in bits per real channel use: each sender
    sends ``2 n R`` bits over ``n`` complex uses.  The rate is rounded down
    to the nearest value with ``n R`` integral; ``requested_rate`` keeps the
    original.
    """

    n_senders: int
    beta: float
    rate_per_sender: float
    blocklength: int
    power_budget: float = 1.0
    omegas: tuple = None
    requested_rate: float = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_senders < 1:
            raise ParameterError("n_senders must be positive")
        if self.blocklength < 1:
            raise ParameterError("blocklength must be positive")
        if self.beta <= 1:
            raise ParameterError("beta must exceed 1")
        if self.power_budget <= 0:
            raise ParameterError("power budget must be positive")
        bits = feasible_bits_per_axis(self.rate_per_sender, self.blocklength)
        if bits < 1:
            raise ParameterError(
                f"rate {self.rate_per_sender:g} gives no message bits at blocklength "
                f"{self.blocklength}; smallest feasible rate is {1 / self.blocklength:g}")
        if self.requested_rate is None:
            object.__setattr__(self, "requested_rate", self.rate_per_sender)
        object.__setattr__(self, "rate_per_sender", bits / self.blocklength)

    @property
    def gain(self):
        if self.omegas is None:
            return symmetric_gain(self.n_senders, self.beta)
        return GainMatrix((float(self.beta),) * self.n_senders, tuple(self.omegas))

    @property
    def grid(self):
        return build_grid(self.rate_per_sender, self.blocklength)

    def as_dict(self):
        return {
            "n_senders": self.n_senders,
            "beta": self.beta,
            "rate_per_sender": self.rate_per_sender,
            "requested_rate": self.requested_rate,
            "blocklength": self.blocklength,
            "power_budget": self.power_budget,
        }


@dataclass
class EncoderState:
    x_prev: np.ndarray
    k_current: np.ndarray
    time: int = 1


@dataclass
class DecoderState:
    accumulated_estimate: np.ndarray
    a_inverse_power: np.ndarray
    time: int = 0

    def update(self, gain, k, y):
        """Absorb output ``Y_i`` (``i = time + 1``) given ``K_i``."""
        self.accumulated_estimate = (self.accumulated_estimate
                                     + self.a_inverse_power * (lmmse_gain(k) * y))
        self.a_inverse_power = self.a_inverse_power / gain.diagonal
        self.time += 1
        return self


def lmmse_gain(k):
    """Coefficients ``K1 / (1 + 1'K1)`` of the LMMSE estimate of X from Y."""
    k = np.asarray(k)
    k1 = k.sum(axis=1)
    return k1 / (1.0 + np.real(k1.sum()))


def covariance_trajectory(gain, k1, steps):
    """``[K_1, ..., K_steps]`` of the Riccati recursion; data-independent, so
    encoders and decoder can all replay it."""
    A = gain.matrix
    traj = [np.asarray(k1, dtype=complex)]
    for _ in range(steps - 1):
        traj.append(rank_one_riccati_step(A, traj[-1]))
    return traj


def initial_covariance(grid, n_senders):
    return grid.symbol_energy * np.eye(n_senders, dtype=complex)


def encode_step(state, gain, y_prev):
    """``X_i = A (X_{i-1} - Xhat_{i-1}(Y_{i-1}))`` and ``K_i = step(K_{i-1})``.

    ``state.x_prev`` may carry leading batch dimensions (one row per
    transmission); ``y_prev`` then has the matching batch shape.
    """
    g = lmmse_gain(state.k_current)
    y_prev = np.asarray(y_prev)
    x_new = gain.diagonal * (state.x_prev - g * y_prev[..., None])
    k_new = rank_one_riccati_step(gain.matrix, state.k_current)
    return EncoderState(x_new, k_new, state.time + 1)


def transmit(theta, noise, gain, k_traj):
    """Run the vector recursion.

    ``theta``: (..., N) message points; ``noise``: (..., n) complex noise.
    Returns ``(X, Y, x_next)`` with ``X`` (..., n, N), ``Y`` (..., n) and
    ``x_next = A (X_n - Xhat_n)``.
    """
    theta = np.asarray(theta, dtype=complex)
    noise = np.asarray(noise, dtype=complex)
    n = noise.shape[-1]
    if len(k_traj) < n:
        raise ParameterError("covariance trajectory shorter than blocklength")
    d = gain.diagonal
    X = np.empty(noise.shape[:-1] + (n, theta.shape[-1]), dtype=complex)
    Y = np.empty(noise.shape, dtype=complex)
    x = theta
    for i in range(n):
        X[..., i, :] = x
        y = x.sum(axis=-1) + noise[..., i]
        Y[..., i] = y
        x = d * (x - lmmse_gain(k_traj[i]) * y[..., None])
    return X, Y, x


def sender_transmissions(j, theta_j, y_seq, gain, k_traj):
    """What sender ``j`` alone transmits, from its own message point and the
    fed-back outputs ``y_seq`` (only ``y_1 .. y_{n-1}`` are used)."""
    a_j = gain.diagonal[j]
    n = len(y_seq)
    out = np.empty(n, dtype=complex)
    x = complex(theta_j)
    for i in range(n):
        out[i] = x
        x = a_j * (x - lmmse_gain(k_traj[i])[j] * y_seq[i])
    return out


def decode(y_sequence, gain, k_trajectory):
    """``Theta_hat = sum_i A^{-(i-1)} Xhat_i``; ``y_sequence`` is (..., n)."""
    y = np.asarray(y_sequence, dtype=complex)
    n = y.shape[-1]
    if len(k_trajectory) != n:
        raise ParameterError(
            f"trajectory length {len(k_trajectory)} != sequence length {n}")
    inv = 1.0 / gain.diagonal
    a_pow = np.ones_like(inv)
    est = np.zeros(y.shape[:-1] + (len(inv),), dtype=complex)
    for i in range(n):
        est = est + a_pow * lmmse_gain(k_trajectory[i]) * y[..., i, None]
        a_pow = a_pow * inv
    return est


def nearest_message(estimate, grid):
    """Index of the subsquare containing ``estimate``.

    Cells are ``(lo, hi]`` on each axis with the first one closed, so a
    point on a boundary goes to the lower-index cell; points outside the
    square clamp to the nearest edge cell.
    """
    est = np.asarray(estimate)
    m = grid.side

    def axis(v):
        idx = np.ceil((v + 1.0) * (m / 2.0)) - 1
        return np.clip(idx, 0, m - 1).astype(np.int64)

    idx = axis(est.real) + m * axis(est.imag)
    return int(idx) if idx.ndim == 0 else idx


def error_bound(params, k_next=None):
    """Union/Chebyshev bound ``sum_j E|D_n(j)|^2 / (Delta/2)^2``.

    ``E|D_n(j)|^2 = beta^{-2n} K_{n+1}(j, j)``, i.e.
    ``K_{n+1}(j,j) 2^{2n(R - log2 beta)}``.
    """
    gain, grid, n = params.gain, params.grid, params.blocklength
    if k_next is None:
        k1 = initial_covariance(grid, params.n_senders)
        k_next = covariance_trajectory(gain, k1, n + 1)[-1]
    kjj = np.real(np.diag(k_next))
    log2_terms = 2 * n * (params.rate_per_sender - np.log2(np.array(gain.betas)))
    return float(np.sum(kjj * np.exp2(log2_terms)))
