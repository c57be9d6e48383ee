"""Augmentation families: sampling, mean operator, covariance operators and Δ_G.

Every family is described by an immutable :class:`AugSpec`. Closed forms follow
the convention Cov_G(X) = (1/n) Σ_i Cov_g(x_i).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numerics
from .errors import (
    InvalidParam,
    MissingSpectrum,
    NotPositiveDefinite,
    OddDimensionForRotation,
    SingularExpectedCov,
)
from .model import eigs_of, stream

FAMILIES = (
    "gaussian_noise",
    "correlated_noise",
    "mask_unbiased",
    "mask_biased",
    "mask_nonuniform",
    "cutout",
    "salt_pepper",
    "rotation",
    "group_mix",
)


@dataclass(frozen=True, eq=False)
class AugSpec:
    family: str
    sigma2: float = 0.0
    W: Optional[np.ndarray] = None
    beta: float = 0.0
    betas: Optional[np.ndarray] = None
    k: int = 0
    alpha: float = 0.0
    mu: float = 0.0
    spectrum: Optional[np.ndarray] = None
    # "large_p": closed form for large p, 4(1-cos α)/p; "exact": exact for the sampler used here
    rotation_form: str = "large_p"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParam(f"unknown augmentation family {self.family!r}")
        f = self.family
        if f in ("gaussian_noise", "salt_pepper") and self.sigma2 < 0:
            raise InvalidParam("noise variance must be non-negative")
        if f == "correlated_noise":
            if self.W is None:
                raise InvalidParam("correlated noise needs W")
            W = np.asarray(self.W, dtype=float)
            if not np.allclose(W, W.T, atol=1e-12) or np.linalg.eigvalsh(W)[0] < -1e-10:
                raise InvalidParam("W must be symmetric PSD")
            object.__setattr__(self, "W", W)
        if f in ("mask_unbiased", "salt_pepper") and not 0 <= self.beta < 1:
            raise InvalidParam(f"beta must lie in [0, 1), got {self.beta}")
        if f == "mask_biased" and not 0 <= self.beta <= 1:
            raise InvalidParam(f"beta must lie in [0, 1], got {self.beta}")
        if f == "mask_nonuniform":
            b = np.asarray(self.betas, dtype=float)
            if b.ndim != 1 or np.any(b < 0) or np.any(b >= 1):
                raise InvalidParam("per-feature betas must lie in [0, 1)")
            object.__setattr__(self, "betas", b)
        if f == "cutout" and self.k < 0:
            raise InvalidParam("cutout length must be non-negative")
        if f == "rotation":
            if not 0 <= self.alpha <= 180:
                raise InvalidParam("rotation angle must lie in [0, 180] degrees")
            if self.rotation_form not in ("large_p", "exact"):
                raise InvalidParam("rotation_form must be 'large_p' or 'exact'")
        if self.spectrum is not None:
            object.__setattr__(self, "spectrum", eigs_of(self.spectrum))

    @property
    def psi(self):
        return self.beta / (1.0 - self.beta)

    @property
    def is_unbiased(self):
        if self.family == "group_mix":
            return False
        if self.family == "mask_biased":
            return self.beta == 0
        if self.family == "salt_pepper":
            return self.mu == 0
        return True

    def describe(self):
        f = self.family
        parts = {
            "gaussian_noise": f"sigma2={self.sigma2:g}",
            "correlated_noise": "W",
            "mask_unbiased": f"beta={self.beta:g}",
            "mask_biased": f"beta={self.beta:g}",
            "mask_nonuniform": "betas",
            "cutout": f"k={self.k}",
            "salt_pepper": f"beta={self.beta:g},mu={self.mu:g},sigma2={self.sigma2:g}",
            "rotation": f"alpha={self.alpha:g},form={self.rotation_form}",
            "group_mix": "",
        }[f]
        return f"{f}({parts})"


def gaussian_noise(sigma2):
    return AugSpec("gaussian_noise", sigma2=float(sigma2))


def correlated_noise(W):
    return AugSpec("correlated_noise", W=W)


def mask_unbiased(beta):
    return AugSpec("mask_unbiased", beta=float(beta))


def mask_biased(beta):
    return AugSpec("mask_biased", beta=float(beta))


def mask_nonuniform(betas):
    return AugSpec("mask_nonuniform", betas=np.asarray(betas, dtype=float))


def cutout(k):
    return AugSpec("cutout", k=int(k))


def salt_pepper(beta, sigma2, mu=0.0):
    return AugSpec("salt_pepper", beta=float(beta), sigma2=float(sigma2), mu=float(mu))


def rotation(alpha, form="large_p"):
    return AugSpec("rotation", alpha=float(alpha), rotation_form=form)


def group_mix(spectrum=None):
    return AugSpec("group_mix", spectrum=spectrum)


def _check_dims(spec, p):
    f = spec.family
    if f == "rotation" and p % 2:
        raise OddDimensionForRotation(f"rotation needs even p, got {p}")
    if f == "correlated_noise" and spec.W.shape != (p, p):
        raise InvalidParam(f"W has shape {spec.W.shape}, expected {(p, p)}")
    if f == "mask_nonuniform" and spec.betas.size != p:
        raise InvalidParam(f"expected {p} per-feature betas, got {spec.betas.size}")
    if f == "cutout" and spec.k >= p:
        raise InvalidParam(f"cutout length {spec.k} must be below p={p}")
    if f == "group_mix" and spec.spectrum is not None and spec.spectrum.size != p:
        raise InvalidParam("group_mix spectrum length does not match p")


def _need_spectrum(spec):
    if spec.spectrum is None:
        raise MissingSpectrum("group_mix needs the data spectrum")
    return spec.spectrum


def haar_orthogonal(m, p, rng):
    """``m`` independent Haar-distributed p×p orthogonal matrices."""
    Z = rng.standard_normal((m, p, p))
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diagonal(R, axis1=1, axis2=2))
    d[d == 0] = 1.0
    return Q * d[:, None, :]


def rotate_rows(X, alpha, rng):
    """Rotate each row by exactly ``alpha`` degrees inside every plane of a random orthonormal basis.

    R = U B Uᵀ with U Haar and B block-diagonal 2×2 rotations, so ⟨Rx, x⟩ = cos α ‖x‖².
    """
    X = np.atleast_2d(X)
    m, p = X.shape
    if p % 2:
        raise OddDimensionForRotation(f"rotation needs even p, got {p}")
    a = np.deg2rad(alpha)
    U = haar_orthogonal(m, p, rng)
    z = np.einsum("mji,mj->mi", U, X)
    z1, z2 = z[:, 0::2], z[:, 1::2]
    w = np.empty_like(z)
    w[:, 0::2] = np.cos(a) * z1 - np.sin(a) * z2
    w[:, 1::2] = np.sin(a) * z1 + np.cos(a) * z2
    return np.einsum("mij,mj->mi", U, w)


def apply(spec, X, rng):
    """Augment every row of ``X`` once, drawing from a single generator."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, p = X.shape
    _check_dims(spec, p)
    f = spec.family
    if f == "gaussian_noise":
        return X + np.sqrt(spec.sigma2) * rng.standard_normal((m, p))
    if f == "correlated_noise":
        return X + rng.standard_normal((m, p)) @ numerics.sym_sqrt(spec.W)
    if f == "mask_unbiased":
        return X * (rng.random((m, p)) >= spec.beta) / (1.0 - spec.beta)
    if f == "mask_biased":
        return X * (rng.random((m, p)) >= spec.beta)
    if f == "mask_nonuniform":
        return X * (rng.random((m, p)) >= spec.betas) / (1.0 - spec.betas)
    if f == "cutout":
        start = rng.integers(0, p, size=(m, 1))
        offset = (np.arange(p)[None, :] - start) % p
        return X * (offset >= spec.k) * (p / (p - spec.k))
    if f == "salt_pepper":
        keep = rng.random((m, p)) >= spec.beta
        noise = spec.mu + np.sqrt(spec.sigma2) * rng.standard_normal((m, p))
        return np.where(keep, X, noise) / (1.0 - spec.beta)
    if f == "rotation":
        # shift by the exact mean offset so the transform is unbiased
        return rotate_rows(X, spec.alpha, rng) + (1.0 - np.cos(np.deg2rad(spec.alpha))) * X
    # group_mix
    lam = _need_spectrum(spec)
    return (X + rng.standard_normal((m, p)) * np.sqrt(lam)) / np.sqrt(2.0)


def draw_augmented(spec, X, seed, *keys):
    """G(X): one augmentation per row, each row from its own sub-stream.

    Extra ``keys`` select an independent family of streams under the same seed.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_dims(spec, X.shape[1])
    out = np.empty_like(X)
    for i in range(X.shape[0]):
        out[i] = apply(spec, X[i : i + 1], stream(seed, *keys, "augment", i))[0]
    return out


def mean_operator(spec, x):
    """μ_G(x) in closed form; works row-wise on a matrix too."""
    x = np.asarray(x, dtype=float)
    f = spec.family
    if f == "mask_biased":
        return (1.0 - spec.beta) * x
    if f == "group_mix":
        return x / np.sqrt(2.0)
    if f == "salt_pepper":
        return x + spec.psi * spec.mu
    return x.copy()


def cutout_matrix(p, k):
    """Circulant M with (p/(p-k)) M ⊙ xxᵀ equal to the cutout per-sample covariance.

    Exact form for a uniformly placed, wrapping window of length k:
    M_ij = (max(k - d, 0) + max(k - p + d, 0) - k²/p) / (p - k), d = |i - j|.
    """
    if not 0 <= k < p:
        raise InvalidParam(f"cutout length must lie in [0, p), got {k}")
    d = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    both = np.maximum(k - d, 0) + np.maximum(k - p + d, 0)
    return (both - k * k / p) / (p - k)


def _rotation_coef(spec, p):
    a = np.deg2rad(spec.alpha)
    if spec.rotation_form == "exact":
        return np.sin(a) ** 2 / (p - 1)
    return 4.0 * (1.0 - np.cos(a)) / p


def per_sample_cov(spec, x):
    """Closed-form Cov_g(x) for a single sample."""
    x = np.asarray(x, dtype=float)
    p = x.size
    _check_dims(spec, p)
    f = spec.family
    if f == "gaussian_noise":
        return spec.sigma2 * np.eye(p)
    if f == "correlated_noise":
        return spec.W.copy()
    if f == "mask_unbiased":
        return np.diag(spec.psi * x**2)
    if f == "mask_biased":
        return np.diag(spec.beta * (1.0 - spec.beta) * x**2)
    if f == "mask_nonuniform":
        return np.diag(spec.betas / (1.0 - spec.betas) * x**2)
    if f == "cutout":
        return p / (p - spec.k) * cutout_matrix(p, spec.k) * np.outer(x, x)
    if f == "salt_pepper":
        b = spec.beta
        return np.diag(spec.psi * (x - spec.mu) ** 2 + b * spec.sigma2 / (1.0 - b) ** 2)
    if f == "rotation":
        return _rotation_coef(spec, p) * (x @ x * np.eye(p) - np.outer(x, x))
    return np.diag(_need_spectrum(spec) / 2.0)


def empirical_cov_operator(spec, X):
    """Cov_G(X) = (1/n) Σ_i Cov_g(x_i) in closed form."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    _check_dims(spec, p)
    f = spec.family
    G = X.T @ X / n
    dg = np.diag(G)
    if f == "gaussian_noise":
        return spec.sigma2 * np.eye(p)
    if f == "correlated_noise":
        return spec.W.copy()
    if f == "mask_unbiased":
        return np.diag(spec.psi * dg)
    if f == "mask_biased":
        return np.diag(spec.beta * (1.0 - spec.beta) * dg)
    if f == "mask_nonuniform":
        return np.diag(spec.betas / (1.0 - spec.betas) * dg)
    if f == "cutout":
        return p / (p - spec.k) * cutout_matrix(p, spec.k) * G
    if f == "salt_pepper":
        b = spec.beta
        centered = np.mean((X - spec.mu) ** 2, axis=0)
        return np.diag(spec.psi * centered + b * spec.sigma2 / (1.0 - b) ** 2)
    if f == "rotation":
        return _rotation_coef(spec, p) * (np.trace(G) * np.eye(p) - G)
    if spec.spectrum is not None:
        return np.diag(spec.spectrum / 2.0)
    return G / 2.0


def expected_cov_operator(spec, spectrum):
    """E_x[Cov_g(x)] for x with diagonal covariance ``spectrum`` and zero mean."""
    lam = eigs_of(spectrum)
    p = lam.size
    _check_dims(spec, p)
    f = spec.family
    if f == "gaussian_noise":
        return spec.sigma2 * np.eye(p)
    if f == "correlated_noise":
        return spec.W.copy()
    if f == "mask_unbiased":
        return np.diag(spec.psi * lam)
    if f == "mask_biased":
        return np.diag(spec.beta * (1.0 - spec.beta) * lam)
    if f == "mask_nonuniform":
        return np.diag(spec.betas / (1.0 - spec.betas) * lam)
    if f == "cutout":
        return np.diag(spec.k / (p - spec.k) * lam)
    if f == "salt_pepper":
        b = spec.beta
        return np.diag(spec.psi * (lam + spec.mu**2) + b * spec.sigma2 / (1.0 - b) ** 2)
    if f == "rotation":
        return _rotation_coef(spec, p) * (lam.sum() * np.eye(p) - np.diag(lam))
    return np.diag(lam / 2.0)


def monte_carlo_cov(spec, x, M, seed, chunk=20000):
    """Sample covariance of M independent draws of g(x) about their empirical mean."""
    if M < 2:
        raise InvalidParam("need at least two draws")
    x = np.asarray(x, dtype=float)
    rng = stream(seed, "monte-carlo-cov")
    p = x.size
    total = np.zeros(p)
    outer = np.zeros((p, p))
    done = 0
    while done < M:
        m = min(chunk, M - done)
        G = apply(spec, np.broadcast_to(x, (m, p)), rng)
        total += G.sum(axis=0)
        outer += G.T @ G
        done += m
    mean = total / M
    return (outer - M * np.outer(mean, mean)) / (M - 1)


def delta_G(spec, X, spectrum):
    """‖E[Cov]^{-1/2} Cov_G(X) E[Cov]^{-1/2} − I‖ (operator norm)."""
    E = expected_cov_operator(spec, spectrum)
    try:
        E_is = numerics.sym_sqrt(E, inverse=True)
    except NotPositiveDefinite as exc:
        raise SingularExpectedCov("expected augmentation covariance is singular") from exc
    C = empirical_cov_operator(spec, X)
    if np.array_equal(C, E):
        return 0.0
    return numerics.operator_norm(E_is @ C @ E_is - np.eye(E.shape[0]))


@dataclass(frozen=True)
class AugmentationStats:
    mean: np.ndarray
    empirical_cov: np.ndarray
    expected_cov: Optional[np.ndarray]
    is_unbiased: bool


def augmentation_stats(spec, X, spectrum=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    expected = None if spectrum is None else expected_cov_operator(spec, spectrum)
    return AugmentationStats(
        mean_operator(spec, X), empirical_cov_operator(spec, X), expected, spec.is_unbiased
    )
