"""A biased mask hurts regression but leaves classification untouched, and
classification error is far less sensitive to how strongly you augment.

Run: python demos/classification_vs_regression.py
"""
import numpy as np

from augreg.expcli import run_preset

bias = run_preset("bias-impact", {"trials": 20}, seed=0)
print("n    MSE unbiased  MSE biased   POE unbiased  POE biased")
for n in (32, 64, 128):
    s = bias.where(n=n)
    row = [np.median(s.column(c)) for c in ("mse_unbiased", "mse_biased", "poe_unbiased", "poe_biased")]
    print(f"{n:<4} " + "  ".join(f"{v:11.4f}" for v in row))

# Relative spread of the error across the tuning grid: a small spread means
# any reasonable strength works.
gap = run_preset("tuning-gap", {"trials": 10}, seed=0)
for fam in ("gaussian_noise", "mask_unbiased"):
    s = gap.where(family=fam)
    params = sorted(set(s.column("param")))
    mse = np.array([np.median(s.where(param=v).column("mse")) for v in params])
    poe = np.array([np.median(s.where(param=v).column("poe")) for v in params])
    print(f"{fam}: MSE worst/best {mse.max() / mse.min():.2f}, POE worst/best {poe.max() / poe.min():.2f}")
