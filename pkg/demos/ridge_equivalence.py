"""Gaussian noise injection is ridge regression in disguise, and a random mask
is ridge regression on a rescaled design.

Run: python demos/ridge_equivalence.py
"""
from augreg import augment, estimate, metrics, model

p, n = 128, 64
sp = model.make_spectrum("geometric", p, gamma=0.95)
theta = model.make_dense_signal(p, seed=0).theta
data = model.make_dataset(sp, theta, n, seed=1, noise=0.5)
X, y = data.X, data.y

# Closed-form aERM with noise variance s2 against ridge with penalty n * s2.
s2 = 0.3
aerm = estimate.solve_aerm(X, y, augment.gaussian_noise(s2)).theta
ridge = estimate.solve_ridge(X, y, n * s2).theta
print(f"gaussian noise vs ridge, relative Σ-distance: {metrics.relative_sigma_distance(aerm, ridge, sp):.2e}")

# A mask regularizes each coordinate in proportion to its own energy. After
# whitening by the expected augmentation covariance it becomes plain ridge with λ = n.
spec = augment.mask_unbiased(0.3)
Xt, tt, lam, St = estimate.ridge_equivalence_transform(X, sp, theta, spec)
bar = estimate.solve_aerm_deterministic(X, y, spec, sp).theta
rid = estimate.solve_ridge(Xt, y, lam).theta
print(f"mask MSE in original space:    {metrics.mse(bar, theta, sp):.6f}")
print(f"ridge MSE in transformed space: {float((rid - tt) @ St @ (rid - tt)):.6f}")

# The transformed spectrum of a mask is flat: every direction looks alike.
aug = metrics.aug_transformed(sp, theta, spec)
print(f"mask Σ_aug eigenvalues: min {aug.eigenvalues.min():.4f}, max {aug.eigenvalues.max():.4f} (1/ψ = {1 / spec.psi:.4f})")

# Salt-and-pepper sits between the mask and gaussian noise.
pep = metrics.aug_transformed(sp, theta, augment.salt_pepper(0.3, 0.5)).eigenvalues
print(f"pepper Σ_aug eigenvalues span {pep.min():.4f} .. {pep.max():.4f}")
