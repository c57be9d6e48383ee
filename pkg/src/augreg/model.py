"""Spectra, signal models and synthetic data for regression and signed classification.

Indices are 0-based throughout the package: the "t-th" feature is ``theta[t]``.
"""
from dataclasses import dataclass, field
import zlib

import numpy as np

from .errors import InvalidParam, ZeroEigenvalue

LATENTS = ("gaussian", "rademacher", "uniform")


def stream(seed, *keys):
    """Independent Philox stream for ``(seed, *keys)``.

    Keys may be ints or strings; each distinct key path gives a statistically
    independent generator, so trials can run in any order.
    """
    spawn = tuple(k if isinstance(k, (int, np.integer)) else zlib.crc32(str(k).encode()) for k in keys)
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    """Integer seed for a sub-experiment, derived from the ``(seed, *keys)`` stream."""
    return int(stream(seed, *keys, "derive").integers(2**62))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size < 1:
            raise InvalidParam("spectrum must be a non-empty 1-d sequence")
        if np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise InvalidParam("spectrum must be non-negative and non-increasing")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def p(self):
        return self.eigenvalues.size

    @property
    def matrix(self):
        return np.diag(self.eigenvalues)


def eigs_of(spectrum):
    """Eigenvalue array from a Spectrum or any 1-d sequence."""
    if isinstance(spectrum, Spectrum):
        return spectrum.eigenvalues
    return np.asarray(spectrum, dtype=float)


def make_spectrum(kind, p, gamma=None, a=None, b=None, split=None, values=None):
    """Build a descending spectrum.

    kind is one of ``isotropic``, ``geometric`` (λ_i = γ^i, i = 1..p),
    ``bilevel`` (first ``split`` entries ``a``, the rest ``b``) or
    ``explicit`` (``values`` as given, must already be descending).
    """
    if p < 1:
        raise InvalidParam(f"p must be >= 1, got {p}")
    if kind == "isotropic":
        lam = np.ones(p)
    elif kind == "geometric":
        if gamma is None or not 0 < gamma < 1:
            raise InvalidParam(f"gamma must lie in (0, 1), got {gamma}")
        lam = gamma ** np.arange(1, p + 1, dtype=float)
    elif kind == "bilevel":
        if a is None or b is None or not a >= b > 0:
            raise InvalidParam("bilevel needs a >= b > 0")
        if split is None or not 0 <= split <= p:
            raise InvalidParam("bilevel split must lie in [0, p]")
        lam = np.where(np.arange(p) < split, float(a), float(b))
    elif kind == "explicit":
        lam = np.asarray(values, dtype=float)
        if lam.size != p:
            raise InvalidParam(f"expected {p} values, got {lam.size}")
        if np.any(np.diff(lam) > 0):
            raise InvalidParam("explicit spectrum must be non-increasing")
    else:
        raise InvalidParam(f"unknown spectrum kind {kind!r}")
    return Spectrum(lam)


def gamma_for_ratio(ratio, p):
    """Decay γ such that the geometric spectrum has λ_p / λ_1 = ratio."""
    return float(ratio) ** (1.0 / (p - 1))


@dataclass(frozen=True)
class SignalModel:
    theta: np.ndarray
    kind: str = "dense"
    support: tuple = field(default_factory=tuple)


def make_sparse_signal(spectrum, t):
    """1-sparse signal e_t / sqrt(λ_t), so that its Σ-norm is exactly one."""
    lam = eigs_of(spectrum)
    if not 0 <= t < lam.size:
        raise InvalidParam(f"index {t} outside [0, {lam.size})")
    if lam[t] <= 0:
        raise ZeroEigenvalue(f"eigenvalue at index {t} is zero")
    theta = np.zeros(lam.size)
    theta[t] = 1.0 / np.sqrt(lam[t])
    return SignalModel(theta, "1-sparse", (t,))


def make_ksparse_signal(p, support, coefs):
    theta = np.zeros(p)
    theta[list(support)] = coefs
    return SignalModel(theta, "k-sparse", tuple(int(i) for i in support))


def make_dense_signal(p, seed, scale=1.0):
    """Isotropic random signal with i.i.d. N(0, scale²) entries."""
    return SignalModel(scale * stream(seed, "signal").standard_normal(p), "dense")


def sample_latent(family, shape, rng):
    """Zero-mean, unit-variance i.i.d. entries."""
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "rademacher":
        return rng.choice([-1.0, 1.0], size=shape)
    if family == "uniform":
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=shape)
    raise InvalidParam(f"unknown latent family {family!r}")


def sample_covariates(spectrum, n, seed, latent="gaussian"):
    """Rows x = Σ^{1/2} z with z drawn from ``latent``."""
    lam = eigs_of(spectrum)
    z = sample_latent(latent, (n, lam.size), stream(seed, "covariates"))
    return z * np.sqrt(lam)


def gen_regression_labels(X, theta, sigma, seed, noise="gaussian"):
    y = X @ theta
    if sigma == 0:
        return y
    return y + sigma * sample_latent(noise, y.shape, stream(seed, "label-noise"))


def sgn(v):
    """Sign with sgn(0) = +1."""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


def gen_classification_labels(X, theta, nu, seed):
    """sgn(X θ*) with each label flipped independently with probability ν."""
    if not 0 <= nu < 0.5:
        raise InvalidParam(f"flip probability must lie in [0, 1/2), got {nu}")
    y = sgn(X @ theta)
    flips = stream(seed, "label-flips").random(y.shape) < nu
    return np.where(flips, -y, y)


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    kind: str
    noise: float
    seed: int


def make_dataset(spectrum, theta, n, seed, kind="regression", noise=0.5, latent="gaussian"):
    X = sample_covariates(spectrum, n, seed, latent)
    if kind == "regression":
        y = gen_regression_labels(X, theta, noise, seed)
    elif kind == "classification":
        y = gen_classification_labels(X, theta, noise, seed)
    else:
        raise InvalidParam(f"unknown dataset kind {kind!r}")
    return Dataset(X, y, kind, noise, seed)
