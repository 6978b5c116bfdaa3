"""Input validation helpers shared by the estimator and the CLI."""
import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DomainError
from .linalg import is_psd


def check_samples(X, min_cols=2):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] < min_cols:
        raise ValueError(f"expected at least {min_cols} columns (v1, v2, y...), "
                         f"got {X.shape[1]}")
    return X


def check_covariance(K, tol=1e-10):
    """Return ``K`` as a float array after checking it is symmetric PSD."""
    K = check_array(K, dtype=np.float64, ensure_2d=True)
    if K.shape[0] != K.shape[1]:
        raise DomainError(f"covariance must be square, got {K.shape}")
    report = is_psd(K, tol)
    if not report.is_hermitian:
        raise DomainError(f"covariance is not symmetric (defect {report.max_asymmetry:.3g})")
    if not report.is_psd:
        raise DomainError(f"covariance is not PSD (min eigenvalue {report.min_eigenvalue:.3g})")
    return K
