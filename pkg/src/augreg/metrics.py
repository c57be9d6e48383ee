"""Generalization metrics, effective ranks and augmentation-transformed quantities."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import augment, numerics
from .errors import Degenerate, InvalidIndex, InvalidParam, NotPositiveDefinite, SingularExpectedCov, ZeroTailEigenvalue
from .estimate import solve_aerm, solve_aerm_deterministic
from .model import eigs_of, sample_latent, sgn, stream


def _sigma_matrix(spectrum):
    S = np.asarray(spectrum.eigenvalues if hasattr(spectrum, "eigenvalues") else spectrum, dtype=float)
    return S if S.ndim == 2 else np.diag(S)


def sigma_norm2(v, spectrum):
    """‖v‖²_Σ for a spectrum (diagonal Σ) or a full covariance matrix."""
    S = np.asarray(spectrum.eigenvalues if hasattr(spectrum, "eigenvalues") else spectrum, dtype=float)
    v = np.asarray(v, dtype=float)
    if S.ndim == 1:
        return float(np.sum(S * v * v))
    return float(v @ S @ v)


def mse(theta_hat, theta_star, spectrum):
    return sigma_norm2(np.asarray(theta_hat) - theta_star, spectrum)


def relative_sigma_distance(a, b, spectrum):
    """‖a − b‖_Σ / ‖b‖_Σ."""
    return float(np.sqrt(sigma_norm2(np.asarray(a) - b, spectrum) / sigma_norm2(b, spectrum)))


@dataclass(frozen=True)
class MseDecomposition:
    bias: float
    variance: float
    approx_error: float
    total_mse: float


def decompose_mse(X, y, theta_star, spectrum, spec):
    """Split the aERM error into bias, variance and approximation parts.

    θ̄ is the estimator with the expected augmentation covariance; it is refit on
    the noiseless labels Xθ* for the bias and compared across labels for the variance.
    """
    clean = X @ theta_star
    bar_clean = solve_aerm_deterministic(X, clean, spec, spectrum).theta
    bar_y = solve_aerm_deterministic(X, y, spec, spectrum).theta
    hat_y = solve_aerm(X, y, spec).theta
    return MseDecomposition(
        bias=mse(bar_clean, theta_star, spectrum),
        variance=mse(bar_y, bar_clean, spectrum),
        approx_error=mse(hat_y, bar_y, spectrum),
        total_mse=mse(hat_y, theta_star, spectrum),
    )


@dataclass(frozen=True)
class ClassificationMetrics:
    su: float
    cn: float
    poe: float


def survival_contamination(theta_hat, spectrum, t):
    """SU = √λ_t θ̂_t and CN = (Σ_{j≠t} λ_j θ̂_j²)^{1/2}."""
    lam = eigs_of(spectrum)
    if not 0 <= t < lam.size:
        raise InvalidIndex(f"index {t} outside [0, {lam.size})")
    w = lam * np.asarray(theta_hat, dtype=float) ** 2
    su = float(np.sqrt(lam[t]) * theta_hat[t])
    return su, float(np.sqrt(max(w.sum() - w[t], 0.0)))


def poe_from_su_cn(su, cn):
    if su == 0 and cn == 0:
        raise Degenerate("survival and contamination are both zero")
    if cn == 0:
        return 0.0 if su > 0 else 1.0
    return float(0.5 - np.arctan(su / cn) / np.pi)


def poe_closed_form(theta_hat, spectrum, t, latent="gaussian"):
    """Probability of error against a signal supported on feature t.

    Valid only for independent gaussian features; other latents must use
    :func:`poe_monte_carlo`.
    """
    if latent != "gaussian":
        raise InvalidParam("closed-form POE needs gaussian independent features")
    return poe_from_su_cn(*survival_contamination(theta_hat, spectrum, t))


def classification_metrics(theta_hat, spectrum, t):
    su, cn = survival_contamination(theta_hat, spectrum, t)
    return ClassificationMetrics(su, cn, poe_from_su_cn(su, cn))


def poe_monte_carlo(theta_hat, theta_star, spectrum, N, seed, latent="gaussian", chunk=50000):
    """Fraction of N fresh test points with sgn(xᵀθ̂) ≠ sgn(xᵀθ*)."""
    lam = eigs_of(spectrum)
    rng = stream(seed, "poe")
    wrong = 0
    done = 0
    while done < N:
        m = min(chunk, N - done)
        Xt = sample_latent(latent, (m, lam.size), rng) * np.sqrt(lam)
        wrong += int(np.sum(sgn(Xt @ theta_hat) != sgn(Xt @ theta_star)))
        done += m
    return wrong / N


@dataclass(frozen=True)
class EffectiveRanks:
    rho: np.ndarray
    bigR: np.ndarray
    c: float
    n: int


def effective_rank_arrays(eigs, c, n):
    """ρ_k and R_k for every k = 0..p−1 (NaN where the tail eigenvalue is zero)."""
    lam = np.asarray(eigs, dtype=float)
    tail = np.cumsum(lam[::-1])[::-1]
    tail2 = np.cumsum((lam**2)[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(lam > 0, (c + tail) / (n * lam), np.nan)
        bigR = np.where(tail2 > 0, (c + tail) ** 2 / tail2, np.nan)
    return EffectiveRanks(rho, bigR, float(c), int(n))


def effective_ranks(eigs, c, n, k):
    """(ρ_k, R_k) with ρ_k = (c + Σ_{i>k}λ_i)/(nλ_{k+1}), R_k = (c + Σ_{i>k}λ_i)²/Σ_{i>k}λ_i²."""
    lam = np.asarray(eigs, dtype=float)
    if not 0 <= k < lam.size:
        raise InvalidIndex(f"split {k} outside [0, {lam.size})")
    if lam[k] <= 0:
        raise ZeroTailEigenvalue(f"eigenvalue after split {k} is zero")
    tail = lam[k:].sum()
    return float((c + tail) / (n * lam[k])), float((c + tail) ** 2 / np.sum(lam[k:] ** 2))


def mean_linear_part(spec, p):
    """(M, b) with μ_G(x) = M x + b; every family here has an affine mean."""
    b = augment.mean_operator(spec, np.zeros(p))
    M = (augment.mean_operator(spec, np.eye(p)) - b).T
    return M, b


@dataclass(frozen=True, eq=False)
class AugTransformed:
    eigenvalues: np.ndarray
    perm: Optional[np.ndarray]
    basis: np.ndarray
    sigma_aug: np.ndarray
    theta_aug: np.ndarray
    sigma_bar: np.ndarray
    expected_cov: np.ndarray
    kappa: float
    delta_G: Optional[float] = None

    @property
    def theta_coords(self):
        """θ*_aug in the eigenbasis of Σ_aug, ordered like ``eigenvalues``."""
        return self.basis.T @ self.theta_aug


def aug_transformed(spectrum, theta_star, spec, X=None):
    """Σ_aug = E^{-1/2} Σ̄ E^{-1/2}, θ*_aug = E^{1/2} θ*, Σ̄ = Cov(μ_G(x)).

    For diagonal Σ_aug the sorted order is recorded in ``perm`` (eigenvalue j is
    feature perm[j]); otherwise a full eigendecomposition is used and perm is None.
    """
    Sigma = _sigma_matrix(spectrum)
    p = Sigma.shape[0]
    E = augment.expected_cov_operator(spec, np.diag(Sigma))
    try:
        E_is = numerics.sym_sqrt(E, inverse=True)
    except NotPositiveDefinite as exc:
        raise SingularExpectedCov(str(exc)) from exc
    M, _ = mean_linear_part(spec, p)
    sigma_bar = M @ Sigma @ M.T
    S_aug = E_is @ sigma_bar @ E_is
    S_aug = 0.5 * (S_aug + S_aug.T)
    off = S_aug - np.diag(np.diag(S_aug))
    if np.abs(off).max(initial=0.0) <= 1e-12 * np.abs(S_aug).max(initial=1.0):
        d = np.diag(S_aug)
        perm = np.argsort(-d, kind="stable")
        eig = d[perm]
        basis = np.eye(p)[:, perm]
    else:
        se = numerics.sym_eig(S_aug)
        eig, basis, perm = se.eigenvalues, se.eigenvectors, None
    kappa = float(eig[0] / eig[-1]) if eig[-1] > 0 else np.inf
    dG = None if X is None else augment.delta_G(spec, X, np.diag(Sigma))
    return AugTransformed(
        eig, perm, basis, S_aug, numerics.sym_sqrt(E) @ theta_star, sigma_bar, E, kappa, dG
    )


@dataclass(frozen=True, eq=False)
class BiasShift:
    cov_xi: np.ndarray
    theta_norm_xi: float
    delta_xi: Optional[float] = None


def bias_shift(spec, spectrum, theta_star, X=None):
    """Statistics of ξ(x) = μ_G(x) − x: Cov_ξ = E[ξξᵀ], ‖θ*‖_{Cov_ξ} and Δ_ξ."""
    Sigma = _sigma_matrix(spectrum)
    p = Sigma.shape[0]
    M, b = mean_linear_part(spec, p)
    D = M - np.eye(p)
    cov = D @ Sigma @ D.T + np.outer(b, b)
    tn = float(np.sqrt(max(theta_star @ cov @ theta_star, 0.0)))
    dxi = None
    if X is not None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xi = augment.mean_operator(spec, X) - X
        dxi = numerics.operator_norm(Xi.T @ Xi / X.shape[0] - cov)
    return BiasShift(cov, tn, dxi)
