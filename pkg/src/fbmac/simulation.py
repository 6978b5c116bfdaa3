"""Monte Carlo campaigns for Kramer's code.

Randomness: trial ``t`` of a campaign with seed ``s`` draws from
``numpy.random.Generator(Philox(key=(s, t)))`` -- first the message
indices (real-axis then imaginary-axis cell per sender), then ``2n``
standard normals for the noise.  Per-trial streams make any subset of
trials reproducible and the result independent of batching.

Noise is drawn per real channel use with unit variance and packaged into
the sqrt(2)-normalised complex channel the code runs on.
"""
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .exceptions import ParameterError
from .kramer import (covariance_trajectory, decode, error_bound, initial_covariance,
                     nearest_message, transmit)
from .riccati import solve_dare_iterative

__all__ = ["SimulationReport", "run_campaign", "empirical_power_trace", "wilson_interval",
           "trial_rng", "budget_blocklength"]

_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    message_errors: int
    per_sender_error_counts: list
    empirical_powers: list
    wilson_interval: tuple
    seed: int
    params_echo: dict
    analytic_bound: float
    k_star_diag: list
    power_trace: np.ndarray = field(default=None, repr=False, compare=False)
    budget_blocklength: int = None

    @property
    def error_rate(self):
        return self.message_errors / self.trials

    def as_dict(self):
        return {
            "trials": self.trials,
            "message_errors": self.message_errors,
            "error_rate": self.error_rate,
            "per_sender_error_counts": list(self.per_sender_error_counts),
            "wilson_interval_99": list(self.wilson_interval),
            "analytic_bound": self.analytic_bound,
            "empirical_powers": list(self.empirical_powers),
            "k_star_diag": list(self.k_star_diag),
            "budget_blocklength": self.budget_blocklength,
            "seed": self.seed,
            "params": dict(self.params_echo),
        }


def wilson_interval(successes, trials, confidence=0.99):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ParameterError("trials must be positive")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


def trial_rng(seed, trial):
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def _check(trials, seed):
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not 0 <= seed < _SEED_LIMIT:
        raise ParameterError("seed must be a 64-bit unsigned integer")


def _draw(params, grid, seed, start, stop, noise, forced_messages):
    n_s, n = params.n_senders, params.blocklength
    msgs = np.empty((stop - start, n_s), dtype=np.int64)
    z = np.zeros((stop - start, n), dtype=complex)
    for row, t in enumerate(range(start, stop)):
        rng = trial_rng(seed, t)
        pq = rng.integers(0, grid.side, size=(n_s, 2))
        msgs[row] = pq[:, 0] + grid.side * pq[:, 1]
        w = rng.standard_normal((n, 2))
        if noise:
            z[row] = (w[:, 0] + 1j * w[:, 1]) / math.sqrt(2.0)
    if forced_messages is not None:
        msgs[:] = np.asarray(forced_messages, dtype=np.int64)
    return msgs, z


def _simulate(params, trials, seed, noise=True, forced_messages=None, chunk=4096):
    _check(trials, seed)
    grid, gain, n = params.grid, params.gain, params.blocklength
    k_traj = covariance_trajectory(gain, initial_covariance(grid, params.n_senders), n + 1)
    joint = 0
    per_sender = np.zeros(params.n_senders, dtype=np.int64)
    power_sum = np.zeros((n, params.n_senders))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        msgs, z = _draw(params, grid, seed, start, stop, noise, forced_messages)
        X, Y, _ = transmit(grid.center(msgs), z, gain, k_traj)
        decoded = nearest_message(decode(Y, gain, k_traj[:n]), grid)
        wrong = decoded != msgs
        joint += int(np.count_nonzero(wrong.any(axis=1)))
        per_sender += wrong.sum(axis=0)
        power_sum += (np.abs(X) ** 2).sum(axis=0)
    return joint, per_sender, power_sum / trials, k_traj


def budget_blocklength(trace, power):
    """Smallest ``n0`` such that the running average power of every sender
    stays within ``power`` for all blocklengths ``n >= n0`` simulated;
    ``None`` if it is exceeded at the full length."""
    running = np.cumsum(trace, axis=0) / np.arange(1, len(trace) + 1)[:, None]
    over = np.flatnonzero(np.any(running > power, axis=1))
    if over.size == 0:
        return 1
    if over[-1] == len(trace) - 1:
        return None
    return int(over[-1]) + 2


def run_campaign(params, trials, seed, noise=True, forced_messages=None):
    """Simulate ``trials`` independent codeword transmissions.

    ``noise=False`` and ``forced_messages`` are test hooks: the first runs
    the noiseless channel, the second fixes every trial's message tuple.
    """
    joint, per_sender, trace, k_traj = _simulate(params, trials, seed, noise, forced_messages)
    k_star = solve_dare_iterative(params.gain).k_star
    return SimulationReport(
        trials=trials,
        message_errors=joint,
        per_sender_error_counts=[int(v) for v in per_sender],
        empirical_powers=[float(v) for v in trace.mean(axis=0)],
        wilson_interval=wilson_interval(joint, trials),
        seed=int(seed),
        params_echo=params.as_dict(),
        analytic_bound=error_bound(params, k_traj[-1]),
        k_star_diag=[float(v) for v in np.real(np.diag(k_star))],
        power_trace=trace,
        budget_blocklength=budget_blocklength(trace, params.power_budget),
    )


def empirical_power_trace(params, trials, seed, noise=True, forced_messages=None):
    """Per-time, per-sender Monte Carlo mean of ``|X_ji|^2``, shape (n, N).

    The Cesaro average is ``trace.mean(axis=0)``.
    """
    return _simulate(params, trials, seed, noise, forced_messages)[2]
