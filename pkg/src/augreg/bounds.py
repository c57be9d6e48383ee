"""Right-hand sides of the regression and classification bounds.

Universal constants are evaluated as 1 and logarithms are natural. The values
track the shape of each bound, not calibrated coverage.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numerics
from .augment import gaussian_noise
from .errors import InvalidIndex, InvalidParam, InvalidSplit, OddDimensionForRotation, SingularSigmaBar
from .metrics import AugTransformed, BiasShift, aug_transformed, effective_rank_arrays
from .model import eigs_of

CONSTANTS_NOTE = "universal constants set to 1; natural log"


@dataclass(frozen=True)
class BoundReport:
    bias_bound: float
    variance_bound: float
    approx_bound: float
    k1: int
    k2: int
    constants_note: str = CONSTANTS_NOTE
    L1: float = 1.0
    L2: float = 1.0

    @property
    def total(self):
        return self.bias_bound + self.variance_bound + self.approx_bound


@dataclass(frozen=True)
class ClassBoundReport:
    su_lower: float
    su_upper: float
    cn_lower: float
    cn_upper: float
    k: int
    poe_bound: Optional[float]
    vacuous: bool
    L: float = 1.0
    constants_note: str = field(default=CONSTANTS_NOTE)


def condition_numbers(X_aug, n):
    """Condition number of nI + X_{k+1:p} X_{k+1:p}ᵀ for every split k.

    ``X_aug`` holds the transformed data in the eigenbasis of Σ_aug, columns in
    descending eigenvalue order.
    """
    X_aug = np.asarray(X_aug, dtype=float)
    p = X_aug.shape[1]
    out = np.empty(p)
    for k in range(p):
        tail = X_aug[:, k:]
        w = np.linalg.eigvalsh(n * np.eye(X_aug.shape[0]) + tail @ tail.T)
        out[k] = w[-1] / w[0]
    return out


def _bias_terms(lam, coords, n):
    """General bias expression for every split k₁ = 0..p−1."""
    p = lam.size
    ranks = effective_rank_arrays(lam, n, n)
    w = coords**2
    tail = np.cumsum((lam * w)[::-1])[::-1]
    head = np.concatenate([[0.0], np.cumsum(w / lam)])[:p]
    rho = ranks.rho
    factor = rho**2 / (lam ** -2.0 + lam[0] ** -2.0 * rho**2)
    return tail + head * factor


def _variance_terms(lam, n):
    ranks = effective_rank_arrays(lam, n, n)
    k = np.arange(lam.size)
    return (k / n + n / ranks.bigR) * np.log(n)


def _check_split(k, kmax, name):
    if k is not None and not 0 <= k <= kmax:
        raise InvalidSplit(f"{name}={k} outside [0, {kmax}]")


def regression_bound(aug: AugTransformed, n, k1=None, k2=None, delta_G=None,
                     theta_sigma_norm=None, sigma_eps=1.0, X_aug=None, L1=None, L2=None):
    """Bias, variance and approximation bounds for an unbiased augmentation.

    Splits left as None are chosen by exhaustive minimization over
    [0, min(n, p−1)]. Condition numbers L₁, L₂ are measured on ``X_aug`` when
    given (and not overridden), otherwise taken as 1.
    """
    lam = aug.eigenvalues
    p = lam.size
    kmax = min(n, p - 1)
    _check_split(k1, kmax, "k1")
    _check_split(k2, kmax, "k2")
    conds = condition_numbers(X_aug, n) if X_aug is not None else np.ones(p)
    bias = _bias_terms(lam, aug.theta_coords, n)[: kmax + 1]
    var = _variance_terms(lam, n)[: kmax + 1]
    l1 = np.full(kmax + 1, float(L1)) if L1 is not None else conds[: kmax + 1]
    l2 = np.full(kmax + 1, float(L2)) if L2 is not None else conds[: kmax + 1]
    bias_all = l1**4 * bias
    var_all = sigma_eps**2 * l2**2 * var
    k1 = int(np.nanargmin(bias_all)) if k1 is None else k1
    k2 = int(np.nanargmin(var_all)) if k2 is None else k2
    b, v = float(bias_all[k1]), float(var_all[k2])
    dG = delta_G if delta_G is not None else (aug.delta_G or 0.0)
    if dG > 0 and theta_sigma_norm is None:
        raise InvalidParam("theta_sigma_norm is needed when delta_G > 0")
    approx = float(np.sqrt(aug.kappa) * dG * ((theta_sigma_norm or 0.0) + np.sqrt(b + v)))
    return BoundReport(b, v, approx, k1, k2, L1=float(l1[k1]), L2=float(l2[k2]))


def _mask_bias(psi, n, p, k1, theta, lam, K):
    w = lam * theta**2
    inK = np.zeros(p, dtype=bool)
    inK[list(K)] = True
    a = psi * n + p - k1
    return float(w[inK].sum() + w[~inK].sum() * a**2 / (n**2 + a**2))


def _mask_variance(psi, n, p, k2):
    return (k2 / n + n * (p - k2) / (psi * n + p - k2) ** 2) * np.log(n)


def mask_regression_bound(psi, n, p, theta, spectrum, k1=None, k2=None, K=None,
                          sigma_eps=1.0, sigma_z=1.0):
    """Uniform random-mask bound.

    The features in K (|K| = k₁) keep their full Σ-weight; the rest are scaled by
    (ψn + p − k₁)² / (n² + (ψn + p − k₁)²). When K is omitted it is the k₁
    largest-eigenvalue features, and omitted splits are minimized over [0, min(n, p)].
    """
    lam = eigs_of(spectrum)
    theta = np.asarray(theta, dtype=float)
    kmax = min(n, p)
    if K is not None:
        K = tuple(int(i) for i in K)
        if k1 is not None and len(K) != k1:
            raise InvalidSplit(f"|K|={len(K)} does not match k1={k1}")
        k1 = len(K)
    _check_split(k1, kmax, "k1")
    _check_split(k2, kmax, "k2")
    if k1 is None:
        biases = [_mask_bias(psi, n, p, k, theta, lam, range(k)) for k in range(kmax + 1)]
        k1 = int(np.argmin(biases))
    if K is None:
        K = tuple(range(k1))
    if k2 is None:
        k2 = int(np.argmin([_mask_variance(psi, n, p, k) for k in range(min(kmax, p - 1) + 1)]))
    bias = _mask_bias(psi, n, p, k1, theta, lam, K)
    var = sigma_eps**2 * _mask_variance(psi, n, p, k2)
    theta_norm = np.sqrt(np.sum(lam * theta**2))
    approx = sigma_z**2 * np.sqrt(np.log(n) / n) * theta_norm
    return BoundReport(bias, float(var), float(approx), k1, k2)


def nonuniform_mask_bound(psi0, psi1, s, n, p, theta, spectrum, sigma_z=1.0):
    """Two-level mask: ψ₁ on the s support features, ψ₀ elsewhere."""
    lam = eigs_of(spectrum)
    null_risk = float(np.sum(lam * np.asarray(theta, dtype=float) ** 2))
    r = psi1 / psi0
    base_approx = sigma_z**2 * np.log(n) / n * np.sqrt(null_risk)
    if psi1 <= psi0:
        a = psi1 * n + r * (p - s)
        bias = a**2 / (n**2 + a**2) * null_risk
        var = s / n + n * (p - s) / (psi0 * n + p - s) ** 2
        approx = np.sqrt(r) * base_approx
    else:
        bias = null_risk
        var = (r**2 + s / n) / (r + s / n) ** 2
        approx = np.sqrt(1.0 / r) * base_approx
    return BoundReport(float(bias), float(var), float(approx), s, s)


def pepper_equivalent_noise(beta, sigma2):
    """Gaussian-noise variance with the same regularization as salt-and-pepper's noise part."""
    return beta * sigma2 / (1.0 - beta) ** 2


def gaussian_transformed(spectrum, theta, sigma2):
    """Σ_aug and θ*_aug for gaussian noise injection of variance σ² (no data needed)."""
    return aug_transformed(spectrum, theta, gaussian_noise(sigma2))


def pepper_bound(beta, sigma2, n, spectrum, theta, sigma_eps=1.0, sigma_z=1.0):
    """Salt-and-pepper bound via the gaussian-noise bound at variance βσ²/(1−β)²."""
    lam = eigs_of(spectrum)
    tau2 = pepper_equivalent_noise(beta, sigma2)
    ref = regression_bound(gaussian_transformed(lam, theta, tau2), n, delta_G=0.0,
                           theta_sigma_norm=np.sqrt(np.sum(lam * theta**2)), sigma_eps=sigma_eps)
    inflate = ((lam[0] * (1.0 - beta) + sigma2) / sigma2) ** 2
    approx = sigma_z**2 * np.sqrt(np.log(n) / n) * np.sqrt(np.sum(lam * theta**2))
    return BoundReport(inflate * ref.bias_bound, ref.variance_bound, float(approx), ref.k1, ref.k2)


def _position(aug, t):
    if aug.perm is None:
        return t
    return int(np.flatnonzero(aug.perm == t)[0])


def classification_bounds(aug: AugTransformed, t, n, nu, k=None, L=1.0, sigma_z=1.0):
    """Survival, contamination and POE bounds for a signal on feature t.

    Feature t is located in the sorted Σ_aug spectrum through the recorded
    permutation. When k is omitted the split minimizing CN_upper/SU_lower is used.
    """
    lam = aug.eigenvalues
    p = lam.size
    if not 0 <= t < p or t >= n:
        raise InvalidIndex(f"signal index {t} must be below n={n} and p={p}")
    tp = _position(aug, t)
    lt = lam[tp]
    lam_loo = np.delete(lam, tp)
    ranks = effective_rank_arrays(lam, n, n)
    ranks_loo = effective_rank_arrays(lam_loo, n, n)
    rho0 = ranks.rho[0]
    kmax = min(n - 1, p - 2)

    def at(kk):
        fl = 1.0 - kk / n
        denom = lam[kk] * ranks.rho[kk]
        su_lo = lt * (1 - 2 * nu) * fl / (L * (denom + lt * L))
        su_hi = L * lt * (1 - 2 * nu) / (denom + lt * fl / L)
        cn_hi = np.sqrt((1 + su_hi**2) * L**2 * (kk / n + n / ranks_loo.bigR[kk]) * np.log(n))
        tail2 = np.sum(lam_loo[kk + 1 :] ** 2)
        cn_lo = np.sqrt(tail2 / n / (L**2 * lam[0] ** 2 * (1 + rho0) ** 2))
        return su_lo, su_hi, cn_lo, cn_hi

    if k is None:
        k = int(np.argmin([at(kk)[3] / max(at(kk)[0], 1e-300) for kk in range(kmax + 1)]))
    elif not 0 <= k <= kmax:
        raise InvalidSplit(f"k={k} outside [0, {kmax}]")
    su_lo, su_hi, cn_lo, cn_hi = (float(v) for v in at(k))
    vacuous = su_lo <= cn_hi
    poe = None
    if not vacuous:
        r = cn_hi / su_lo
        poe = float(r * (1 + sigma_z * np.sqrt(np.log(1 / r))))
    return ClassBoundReport(su_lo, su_hi, cn_lo, cn_hi, k, poe, vacuous, L)


def _diag_or_none(A):
    return np.diag(A) if np.count_nonzero(A - np.diag(np.diag(A))) == 0 else None


def biased_mse_bound(aug: AugTransformed, spectrum, theta, shift: BiasShift, delta_G, base: BoundReport,
                     n, c=None):
    """R₁²(√MSE° + R₂)² with covariate-shift factor R₁ and label-shift term R₂.

    c defaults to Δ_G, the smallest admissible constant; Δ_G ≥ 1 gives +inf.
    """
    lam_x = eigs_of(spectrum)
    S_bar = aug.sigma_bar
    d_bar = _diag_or_none(S_bar)
    if d_bar is not None:
        if np.any(d_bar <= 0):
            raise SingularSigmaBar("covariance of the mean augmentation is singular")
        R1 = 1.0 + float(np.max(np.abs(np.sqrt(lam_x / d_bar) - 1.0)))
    else:
        try:
            R1 = 1.0 + numerics.operator_norm(
                np.diag(np.sqrt(lam_x)) @ numerics.sym_sqrt(S_bar, inverse=True) - np.eye(lam_x.size)
            )
        except Exception as exc:
            raise SingularSigmaBar(str(exc)) from exc
    shift_size = np.sqrt(shift.delta_xi or 0.0) * np.linalg.norm(theta) + shift.theta_norm_xi
    mse0 = base.total
    if shift_size == 0:
        return float(R1**2 * mse0)
    c = delta_G if c is None else c
    if delta_G >= 1 or c >= 1:
        return float("inf")
    lam = aug.eigenvalues
    ranks = effective_rank_arrays(lam, n, n)
    k = max(base.k1, 1)
    k = min(k, lam.size - 1)
    spread = np.sqrt(1.0 / lam[k - 1]) + np.sqrt(lam[k] * (1 + ranks.rho[k]) / (lam[0] * ranks.rho[0]) ** 2)
    scale = np.sqrt(numerics.operator_norm(S_bar @ np.linalg.inv(aug.expected_cov)))
    R2 = scale * (1 + delta_G / (1 - c)) * shift_size * spread
    return float(R1**2 * (np.sqrt(mse0) + R2) ** 2)


def bias_mask_bound(psi, n, spectrum, theta, mse0):
    """Biased-mask specialization: (√MSE° + ψ(1 + log n / n)((λ₁ + Σλ/n)‖θ*‖ + ‖θ*‖_Σ))²."""
    lam = eigs_of(spectrum)
    theta = np.asarray(theta, dtype=float)
    shift = (lam[0] + lam.sum() / n) * np.linalg.norm(theta) + np.sqrt(np.sum(lam * theta**2))
    return float((np.sqrt(mse0) + psi * (1 + np.log(n) / n) * shift) ** 2)


def rotation_reference(alpha, spectrum, n, p):
    """Ridge penalty n p⁻¹ (1 − cos α) Σλ_j matched to rotation, plus the reference estimators."""
    if p % 2:
        raise OddDimensionForRotation(f"rotation needs even p, got {p}")
    if not 0 <= alpha <= 180:
        raise InvalidParam("rotation angle must lie in [0, 180] degrees")
    lam = eigs_of(spectrum)
    ridge = n / p * (1.0 - np.cos(np.deg2rad(alpha))) * lam.sum()
    return float(ridge), "lse", "ridge"
