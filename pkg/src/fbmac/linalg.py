"""Small dense linear-algebra helpers over real and complex matrices.

Matrices here are tiny (N <= a few dozen), so everything is plain numpy.
"""
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianCheckReport",
    "dft_matrix",
    "hermitian_defect",
    "is_psd",
    "rank_one_riccati_step",
    "ones",
]


@dataclass(frozen=True)
class HermitianCheckReport:
    is_hermitian: bool
    max_asymmetry: float
    min_eigenvalue: float
    tol: float

    @property
    def is_psd(self):
        return self.is_hermitian and self.min_eigenvalue >= -self.tol


def _square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def ones(n):
    return np.ones(n)


def dft_matrix(n):
    """Unitary n-point DFT matrix, ``Q[j, k] = exp(-2 pi i j k / n) / sqrt(n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) / np.sqrt(n)


def hermitian_defect(m):
    """Max-norm of ``m - m^H``."""
    m = _square(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_psd(m, tol=1e-10):
    """Check Hermitian symmetry and report the smallest eigenvalue.

    ``tol`` is relative to ``max(1, ||m||_max)`` for both the symmetry test
    and the PSD test.
    """
    m = _square(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    asym = hermitian_defect(m)
    herm = 0.5 * (m + m.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm)[0]) if m.size else 0.0
    return HermitianCheckReport(
        is_hermitian=asym <= tol * scale,
        max_asymmetry=asym,
        min_eigenvalue=min_eig,
        tol=tol * scale,
    )


def rank_one_riccati_step(A, K):
    """One step of ``K -> A K A^H - (A K 1)(1 + 1^H K 1)^{-1} (A K 1)^H``.

    This is the error covariance of the LMMSE estimate of ``X ~ (0, K)``
    from ``1' X + Z`` (unit noise), propagated through ``A``.
    """
    A = _square(A, "A")
    K = _square(K, "K")
    if A.shape != K.shape:
        raise ValueError(f"A and K shapes differ: {A.shape} vs {K.shape}")
    k1 = K.sum(axis=1)
    denom = 1.0 + np.real(k1.sum())
    if denom <= 0:
        raise ValueError("1 + 1'K1 <= 0; K is not PSD")
    ak1 = A @ k1
    out = A @ K @ A.conj().T - np.outer(ak1, ak1.conj()) / denom
    # symmetrize away rounding drift
    return 0.5 * (out + out.conj().T)
