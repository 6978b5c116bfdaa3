"""Linear-feedback sum-capacity of the Gaussian multiple access channel.

Capacity and cooperation factor (``capacity``), Lagrange-dual converse
(``dual``), Riccati steady state (``riccati``), Kramer's code and its
Monte Carlo harness (``kramer``, ``simulation``), and conditional maximal
correlation (``maxcorr``).
"""
from .capacity import (CapacityPoint, kramer_threshold, limit_gaps,
                       linear_feedback_sum_capacity, solve_phi)
from .dual import dual_bound, gamma_star, lambda_star
from .exceptions import ConvergenceError, DomainError, ParameterError
from .kramer import KramerParams
from .maxcorr import ConditionalMaxCorrelation, conditional_correlation
from .riccati import solve_dare_circulant, solve_dare_iterative, symmetric_gain
from .simulation import run_campaign

__version__ = "0.1.0"

__all__ = [
    "CapacityPoint",
    "ConditionalMaxCorrelation",
    "ConvergenceError",
    "DomainError",
    "KramerParams",
    "ParameterError",
    "conditional_correlation",
    "dual_bound",
    "gamma_star",
    "kramer_threshold",
    "lambda_star",
    "limit_gaps",
    "linear_feedback_sum_capacity",
    "run_campaign",
    "solve_dare_circulant",
    "solve_dare_iterative",
    "solve_phi",
    "symmetric_gain",
]
