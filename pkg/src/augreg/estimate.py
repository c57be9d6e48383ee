"""Estimators: closed-form aERM, its deterministic counterpart, ridge, stacked
pre-computed augmentation, the minimum-Mahalanobis-norm limit and aSGD."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import augment, numerics
from .errors import (
    DivergenceDetected,
    InvalidParam,
    NotPositiveDefinite,
    SingularCov,
    SingularExpectedCov,
    SingularSystem,
)
from .model import stream


@dataclass(frozen=True, eq=False)
class Estimator:
    theta: np.ndarray
    solver: str
    spec: Optional[augment.AugSpec] = None
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None


def _solve(A, b, what):
    try:
        return numerics.spd_solve(A, b)
    except NotPositiveDefinite as exc:
        raise SingularSystem(f"{what}: {exc}", **exc.details) from exc


def _aerm_system(X, y, spec, cov):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mu = augment.mean_operator(spec, X)
    return mu.T @ mu + X.shape[0] * cov, mu.T @ np.asarray(y, dtype=float)


def solve_aerm(X, y, spec):
    """θ̂ = (μ(X)ᵀμ(X) + n Cov_G(X))⁻¹ μ(X)ᵀ y."""
    A, b = _aerm_system(X, y, spec, augment.empirical_cov_operator(spec, X))
    return Estimator(_solve(A, b, "aERM system"), "aerm", spec)


def solve_aerm_deterministic(X, y, spec, spectrum):
    """Same as :func:`solve_aerm` with Cov_G(X) replaced by E_x[Cov_g(x)]."""
    E = augment.expected_cov_operator(spec, spectrum)
    if np.linalg.eigvalsh(E)[0] <= 0:
        raise SingularExpectedCov("expected augmentation covariance is singular")
    A, b = _aerm_system(X, y, spec, E)
    return Estimator(_solve(A, b, "deterministic aERM system"), "aerm-deterministic", spec)


def solve_ridge(X, y, lam):
    if lam < 0:
        raise InvalidParam(f"ridge penalty must be non-negative, got {lam}")
    X = np.asarray(X, dtype=float)
    A = X.T @ X + lam * np.eye(X.shape[1])
    return Estimator(_solve(A, X.T @ y, "ridge system"), "ridge", params={"lambda": lam})


def solve_lse(X, y):
    return Estimator(numerics.min_norm_lsq(X, y), "lse")


def stack_augmented(X, y, spec, M, seed):
    """M augmented copies of X stacked vertically, with y repeated alongside."""
    if M < 1:
        raise InvalidParam("need at least one augmented copy")
    G = np.vstack([augment.draw_augmented(spec, X, seed, "copy", j) for j in range(M)])
    return G, np.tile(np.asarray(y, dtype=float), M)


def solve_precomputed(X, y, spec, M, seed):
    """Minimum-norm least squares over M stacked augmented copies (originals excluded)."""
    G, yy = stack_augmented(X, y, spec, M, seed)
    return Estimator(numerics.min_norm_lsq(G, yy), "precomputed", spec, {"M": M}, seed)


def solve_limit_interpolator(X, y, C):
    """θ̂ = C⁻¹Xᵀ(XC⁻¹Xᵀ)† y, the interpolator of minimal θᵀCθ."""
    X = np.asarray(X, dtype=float)
    try:
        Ci_Xt = numerics.spd_solve(C, X.T)
    except NotPositiveDefinite as exc:
        raise SingularCov(str(exc)) from exc
    K = X @ Ci_Xt
    return Estimator(Ci_Xt @ numerics.min_norm_lsq(K, y), "limit-interpolator")


def ridge_equivalence_transform(X, spectrum, theta, spec):
    """Map aERM with E_x[Cov_g] onto ridge with penalty n.

    Returns (X̃, θ̃*, λ, Σ̃) with X̃ = μ(X) E^{-1/2}, θ̃* = E^{1/2} θ*, λ = n and
    Σ̃ = E^{-1/2} Σ E^{-1/2} the covariance in which the transformed error is measured.
    """
    E = augment.expected_cov_operator(spec, spectrum)
    try:
        E_is = numerics.sym_sqrt(E, inverse=True)
    except NotPositiveDefinite as exc:
        raise SingularExpectedCov(str(exc)) from exc
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xt = augment.mean_operator(spec, X) @ E_is
    lam = np.asarray(spectrum if not hasattr(spectrum, "eigenvalues") else spectrum.eigenvalues)
    sigma_t = E_is @ np.diag(lam) @ E_is
    return Xt, numerics.sym_sqrt(E) @ theta, float(X.shape[0]), sigma_t


@dataclass(frozen=True)
class AsgdConfig:
    batch_size: int
    aug_size: int
    eta: float = 1e-5
    schedule: str = "constant"
    decay: float = 1.0
    epochs: Optional[int] = None
    max_steps: Optional[int] = None
    seed: int = 0
    stride: int = 100
    tol: Optional[float] = None
    theta0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.batch_size < 1 or self.aug_size < 1:
            raise InvalidParam("batch and augmentation sizes must be >= 1")
        if self.eta <= 0:
            raise InvalidParam("learning rate must be positive")
        if self.schedule not in ("constant", "geometric"):
            raise InvalidParam(f"unknown schedule {self.schedule!r}")
        if self.epochs is None and self.max_steps is None:
            raise InvalidParam("set epochs or max_steps")
        if self.stride < 1:
            raise InvalidParam("snapshot stride must be >= 1")


@dataclass(frozen=True)
class TrainingTrajectory:
    steps: np.ndarray
    thetas: np.ndarray
    objective: np.ndarray
    stopped_by: str

    @property
    def final(self):
        return self.thetas[-1]


def run_asgd(X, y, spec, config):
    """Augmented SGD on the squared loss.

    Each step takes B rows from a per-epoch permutation, draws H augmentations
    of each and applies θ ← θ − η_t Σ 2(⟨θ, g⟩ − y) g over the B·H pairs.
    The schedule ``geometric`` multiplies η by ``decay`` after every epoch.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    B, H = min(config.batch_size, n), config.aug_size
    per_epoch = -(-n // B)
    total = config.max_steps if config.max_steps is not None else config.epochs * per_epoch
    rng = stream(config.seed, "asgd")
    C = augment.empirical_cov_operator(spec, X)
    mu = augment.mean_operator(spec, X)

    def objective(t):
        r = mu @ t - y
        return float(r @ r + n * t @ C @ t)

    theta = np.zeros(p) if config.theta0 is None else np.array(config.theta0, dtype=float)
    ref = max(np.linalg.norm(theta), np.linalg.norm(y) * np.sqrt(p) / max(np.linalg.norm(X), 1e-300))
    steps, thetas, objs = [0], [theta.copy()], [objective(theta)]
    stopped_by = "budget"
    step = 0
    eta = config.eta
    while step < total:
        order = rng.permutation(n)
        for start in range(0, n, B):
            if step >= total:
                break
            idx = np.repeat(order[start : start + B], H)
            G = augment.apply(spec, X[idx], rng)
            theta -= eta * 2.0 * (G.T @ (G @ theta - y[idx]))
            step += 1
            if step % config.stride == 0 or step == total:
                norm = np.linalg.norm(theta)
                if not np.isfinite(norm) or norm > 1e6 * ref:
                    raise DivergenceDetected(f"iterate norm {norm:.3e} at step {step}", step=step)
                moved = np.linalg.norm(theta - thetas[-1])
                steps.append(step)
                thetas.append(theta.copy())
                objs.append(objective(theta))
                if config.tol is not None and moved <= config.tol * max(norm, 1e-300):
                    stopped_by = "tolerance"
                    total = step
        if config.schedule == "geometric":
            eta *= config.decay
    return TrainingTrajectory(np.array(steps), np.array(thetas), np.array(objs), stopped_by)
