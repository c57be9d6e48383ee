"""Bounds with constants set to one track the shape of the simulated bias and
variance across mask strengths, even where they do not bound the values.

Run: python demos/bounds_vs_simulation.py
"""
import numpy as np

from augreg import augment, bounds, metrics, model

p, n = 128, 64
sp = model.make_spectrum("geometric", p, gamma=0.95)
trials = [model.make_dense_signal(p, seed=t).theta for t in range(10)]

print("beta  bias   bias bound  variance  variance bound")
for beta in np.linspace(0.1, 0.9, 5):
    rows = []
    for t, theta in enumerate(trials):
        d = model.make_dataset(sp, theta, n, seed=100 + t, noise=0.5)
        dec = metrics.decompose_mse(d.X, d.y, theta, sp, augment.mask_unbiased(beta))
        rep = bounds.mask_regression_bound(beta / (1 - beta), n, p, theta, sp, sigma_eps=0.5)
        rows.append((dec.bias, rep.bias_bound, dec.variance, rep.variance_bound))
    med = np.median(rows, axis=0)
    print(f"{beta:.1f}  " + "  ".join(f"{v:9.4f}" for v in med))
