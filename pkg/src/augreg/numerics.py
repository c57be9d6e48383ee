"""Dense symmetric linear-algebra kernels used by every other module."""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NotPositiveDefinite, NotSymmetric

SYM_TOL = 1e-10


@dataclass(frozen=True)
class SymmetricSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(A, tol=SYM_TOL):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {A.shape}")
    scale = max(np.abs(A).max(initial=0.0), np.finfo(float).tiny)
    if np.abs(A - A.T).max(initial=0.0) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (A + A.T)


def spd_solve(A, B, tol=1e-13):
    """Solve A X = B for symmetric positive-definite A.

    Raises NotPositiveDefinite (with the smallest eigenvalue attached) when
    the smallest eigenvalue is not above ``tol`` times the largest.
    """
    A = _check_symmetric(A)
    B = np.asarray(B, dtype=float)
    w = linalg.eigvalsh(A)
    if w[-1] <= 0 or w[0] <= tol * w[-1]:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {w[0]:.3e} (largest {w[-1]:.3e})", smallest=float(w[0])
        )
    return linalg.cho_solve(linalg.cho_factor(A, lower=True), B)


def sym_eig(A):
    """Eigendecomposition with eigenvalues in non-increasing order."""
    A = _check_symmetric(A)
    w, V = linalg.eigh(A)
    # eigh is ascending; a stable sort on -w keeps tied eigenvalues in their original order
    order = np.argsort(-w, kind="stable")
    return SymmetricSpectrum(w[order], V[:, order])


def operator_norm(A):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(linalg.svdvals(A)[0])


def min_norm_lsq(X, y):
    """Minimum-Euclidean-norm least-squares solution."""
    X = np.asarray(X, dtype=float)
    rcond = max(X.shape) * np.finfo(float).eps
    theta, *_ = np.linalg.lstsq(X, np.asarray(y, dtype=float), rcond=rcond)
    return theta


def sym_sqrt(A, inverse=False):
    """Symmetric square root (or inverse square root) of a PSD matrix."""
    A = _check_symmetric(A)
    w, V = linalg.eigh(A)
    w = np.clip(w, 0.0, None)
    if inverse:
        if w[0] <= 0:
            raise NotPositiveDefinite("cannot invert a singular matrix", smallest=float(w[0]))
        w = 1.0 / w
    return (V * np.sqrt(w)) @ V.T
