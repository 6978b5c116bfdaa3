"""Steady state of the feedback-refinement Riccati recursion.

``K -> A K A^H - (A K 1)(1 + 1'K1)^{-1}(A K 1)^H`` with a diagonal gain
matrix ``A = diag(beta_j omega_j)``.  Two solvers:

* fixed-point iteration, for any detectable ``(A, 1)``;
* the circulant closed form for the symmetric choice ``beta_j = beta``,
  ``omega_j = exp(2 pi i (j-1)/N)``, where the DFT diagonalises the
  solution with eigenvalues ``lambda_1 = (beta^(2N) - 1)/N`` and
  ``lambda_j = lambda_1 / beta^(2(j-1))``.
"""
from dataclasses import dataclass, field

import numpy as np

from .capacity import solve_phi
from .exceptions import ConvergenceError, DomainError
from .linalg import dft_matrix, rank_one_riccati_step

__all__ = [
    "GainMatrix",
    "RiccatiSolution",
    "symmetric_gain",
    "is_detectable",
    "dare_residual",
    "solve_dare_iterative",
    "solve_dare_circulant",
    "diagonal_power",
    "lambeq_defect",
]


@dataclass(frozen=True)
class GainMatrix:
    betas: tuple
    omegas: tuple

    def __post_init__(self):
        if len(self.betas) != len(self.omegas) or not self.betas:
            raise DomainError("betas and omegas must be nonempty and equally long")
        if any(b <= 1 for b in self.betas):
            raise DomainError("every beta must exceed 1")
        if any(abs(abs(w) - 1) > 1e-12 for w in self.omegas):
            raise DomainError("every omega must lie on the unit circle")

    @property
    def n_senders(self):
        return len(self.betas)

    @property
    def diagonal(self):
        return np.array(self.betas, dtype=float) * np.array(self.omegas, dtype=complex)

    @property
    def matrix(self):
        return np.diag(self.diagonal)


def symmetric_gain(n_senders, beta):
    """``beta_j = beta`` and ``omega_j`` the N-th roots of unity."""
    if beta <= 1:
        raise DomainError(f"beta must exceed 1, got {beta}")
    omegas = tuple(np.exp(2j * np.pi * np.arange(n_senders) / n_senders))
    return GainMatrix((float(beta),) * n_senders, omegas)


@dataclass(frozen=True)
class RiccatiSolution:
    k_star: np.ndarray
    iterations: int
    residual: float
    eigenvalues: tuple
    residual_trace: tuple = field(default=(), repr=False)


def is_detectable(gain, tol=1e-12):
    """``(A, 1)`` detectable iff the unstable diagonal entries are distinct.

    All entries are unstable here (``beta_j > 1``), so this is pairwise
    distinctness of ``beta_j omega_j``.
    """
    d = gain.diagonal
    unstable = d[np.abs(d) >= 1]
    for i in range(len(unstable)):
        for j in range(i + 1, len(unstable)):
            if abs(unstable[i] - unstable[j]) <= tol:
                return False
    return True


def dare_residual(A, K):
    """Max-norm of ``K - step(K)``."""
    return float(np.max(np.abs(K - rank_one_riccati_step(A, K))))


def _sorted_eigs(K):
    return tuple(float(v) for v in np.linalg.eigvalsh(0.5 * (K + K.conj().T))[::-1])


def solve_dare_iterative(gain, k_init=None, tol=1e-12, max_iters=1_000_000):
    """Iterate the recursion from ``k_init`` (identity by default) until the
    max-norm step is below ``tol``."""
    if not is_detectable(gain):
        raise DomainError("(A, 1) is not detectable: repeated unstable eigenvalues")
    A = gain.matrix
    n = gain.n_senders
    K = np.eye(n, dtype=complex) if k_init is None else np.array(k_init, dtype=complex)
    if K.shape != (n, n):
        raise DomainError(f"k_init must be {n}x{n}")
    trace = []
    for it in range(1, max_iters + 1):
        K_next = rank_one_riccati_step(A, K)
        step = float(np.max(np.abs(K_next - K)))
        K = K_next
        if it <= 64 or it % 64 == 0:
            trace.append(step)
        if step < tol:
            return RiccatiSolution(K, it, dare_residual(A, K), _sorted_eigs(K), tuple(trace))
    raise ConvergenceError(f"DARE iteration did not converge in {max_iters} steps",
                           last=K, residual=step, iterations=max_iters)


def circulant_eigenvalues(n_senders, beta):
    if beta <= 1:
        raise DomainError(f"beta must exceed 1, got {beta}")
    lam1 = np.expm1(2 * n_senders * np.log(beta)) / n_senders
    return lam1 / beta ** (2.0 * np.arange(n_senders))


def solve_dare_circulant(n_senders, beta):
    """Closed-form solution ``Q diag(lambda) Q^H`` for the symmetric gain."""
    lam = circulant_eigenvalues(n_senders, beta)
    Q = dft_matrix(n_senders)
    K = (Q * lam) @ Q.conj().T
    K = 0.5 * (K + K.conj().T)
    A = symmetric_gain(n_senders, beta).matrix
    return RiccatiSolution(K, 0, dare_residual(A, K), tuple(float(v) for v in lam))


def diagonal_power(solution):
    """Real diagonal ``K*_jj``: the asymptotic per-sender power."""
    return [float(v) for v in np.real(np.diag(solution.k_star))]


def lambeq_defect(solution, n_senders=None):
    """``|lambda_1 - K_jj phi(N, K_jj)|`` maximised over senders.

    Holds for the symmetric (circulant) solution, linking the steady-state
    power to the cooperation factor.
    """
    n = n_senders or solution.k_star.shape[0]
    lam1 = solution.eigenvalues[0]
    return max(abs(lam1 - kjj * solve_phi(n, kjj)) for kjj in diagonal_power(solution))
