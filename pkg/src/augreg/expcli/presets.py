"""Preset experiments at desk scale.

Every preset is a deterministic function of (parameters, seed). Trials draw
their data from streams keyed by (seed, preset, sample size, trial), so a trial
sees the same data at every augmentation setting.
"""
import numpy as np

from .. import __version__, augment, bounds, estimate, metrics, model
from ..errors import ConfigError, UnknownPreset
from .config import as_list
from .table import ResultsTable


def _spectrum(params):
    p = params["p"]
    if params.get("spectrum", "geometric") == "isotropic":
        return model.make_spectrum("isotropic", p)
    ratio = params.get("ratio")
    gamma = model.gamma_for_ratio(ratio, p) if ratio else params["gamma"]
    return model.make_spectrum("geometric", p, gamma=gamma)


def _dense_signal(seed, name, trial, p):
    return model.stream(seed, name, "signal", trial).standard_normal(p)


def _design(spectrum, n, seed, name, trial):
    return model.sample_covariates(spectrum, n, model.derive_seed(seed, name, "data", n, trial))


def _labels(X, theta, noise, seed, name, n, trial):
    return model.gen_regression_labels(X, theta, noise, model.derive_seed(seed, name, "noise", n, trial))


def _bias_var(solve, X, y, theta, spectrum):
    clean = solve(X, X @ theta)
    return metrics.mse(clean, theta, spectrum), metrics.mse(solve(X, y), clean, spectrum)


def decomposition(prm, seed):
    sp = _spectrum(prm)
    t = ResultsTable(["beta", "trial", "bias", "variance", "approx", "mse"])
    for trial in range(prm["trials"]):
        theta = _dense_signal(seed, "decomposition", trial, sp.p)
        X = _design(sp, prm["n"], seed, "decomposition", trial)
        y = _labels(X, theta, prm["noise"], seed, "decomposition", prm["n"], trial)
        for beta in as_list(prm["betas"]):
            d = metrics.decompose_mse(X, y, theta, sp, augment.mask_unbiased(beta))
            t.add(beta=beta, trial=trial, bias=d.bias, variance=d.variance, approx=d.approx_error, mse=d.total_mse)
    return t


def bias_impact(prm, seed):
    sp = _spectrum(prm)
    theta = model.make_sparse_signal(sp, prm["signal_index"]).theta
    t = ResultsTable(["n", "trial", "mse_unbiased", "mse_biased", "poe_unbiased", "poe_biased"])
    unb, bia = augment.mask_unbiased(prm["beta"]), augment.mask_biased(prm["beta"])
    for n in as_list(prm["ns"]):
        for trial in range(prm["trials"]):
            X = _design(sp, n, seed, "bias-impact", trial)
            y = _labels(X, theta, prm["noise"], seed, "bias-impact", n, trial)
            yc = model.gen_classification_labels(X, theta, prm["nu"], model.derive_seed(seed, "bias-impact", "flip", n, trial))
            row = {"n": n, "trial": trial}
            for tag, spec in (("unbiased", unb), ("biased", bia)):
                row[f"mse_{tag}"] = metrics.mse(estimate.solve_aerm(X, y, spec).theta, theta, sp)
                row[f"poe_{tag}"] = metrics.poe_closed_form(estimate.solve_aerm(X, yc, spec).theta, sp, prm["signal_index"])
            t.add(**row)
    return t


def parse_batch_configs(values):
    out = []
    for v in as_list(values):
        b, sep, h = str(v).partition("x")
        if not sep:
            raise ConfigError(f"batch config {v!r} is not BxH", path="params.configs")
        out.append((int(b), int(h)))
    return out


def asgd_convergence(prm, seed):
    sp = _spectrum(prm)
    spec = augment.mask_unbiased(prm["beta"])
    t = ResultsTable(["batch", "aug", "trial", "step", "rel_dist"])
    n = prm["n"]
    for trial in range(prm["trials"]):
        theta = _dense_signal(seed, "asgd-convergence", trial, sp.p)
        X = _design(sp, n, seed, "asgd-convergence", trial)
        y = _labels(X, theta, prm["noise"], seed, "asgd-convergence", n, trial)
        target = estimate.solve_aerm(X, y, spec).theta
        for B, H in parse_batch_configs(prm["configs"]):
            cfg = estimate.AsgdConfig(B, H, eta=prm["eta"], max_steps=prm["steps"], stride=prm["stride"],
                                      seed=model.derive_seed(seed, "asgd-convergence", "sgd", B, H, trial))
            traj = estimate.run_asgd(X, y, spec, cfg)
            for step, th in zip(traj.steps, traj.thetas):
                t.add(batch=B, aug=H, trial=trial, step=int(step),
                      rel_dist=metrics.relative_sigma_distance(th, target, sp))
    return t


def mask_limit(prm, seed):
    sp = _spectrum(prm)
    n = prm["n"]
    t = ResultsTable(["beta", "trial", "dist_to_limit", "dist_to_lse", "limit_to_lse"])
    for trial in range(prm["trials"]):
        theta = _dense_signal(seed, "mask-limit", trial, sp.p)
        X = _design(sp, n, seed, "mask-limit", trial)
        y = _labels(X, theta, prm["noise"], seed, "mask-limit", n, trial)
        lim = estimate.solve_limit_interpolator(X, y, np.diag(np.diag(X.T @ X)) / n).theta
        lse = estimate.solve_lse(X, y).theta
        gap = metrics.relative_sigma_distance(lse, lim, sp)
        for beta in as_list(prm["betas"]):
            th = estimate.solve_aerm(X, y, augment.mask_unbiased(beta)).theta
            t.add(beta=beta, trial=trial, dist_to_limit=metrics.relative_sigma_distance(th, lim, sp),
                  dist_to_lse=metrics.relative_sigma_distance(th, lse, sp), limit_to_lse=gap)
    return t


def _map_estimators(prm, sp, n):
    ests = [("lse", 0.0, lambda X, y: estimate.solve_lse(X, y).theta)]
    for s2 in as_list(prm["sigma2s"]):
        spec = augment.gaussian_noise(s2)
        ests.append(("gaussian_noise", s2, lambda X, y, s=spec: estimate.solve_aerm(X, y, s).theta))
    for b in as_list(prm["betas"]):
        spec = augment.mask_unbiased(b)
        ests.append(("mask_unbiased", b, lambda X, y, s=spec: estimate.solve_aerm(X, y, s).theta))
    for b in as_list(prm["pepper_betas"]):
        spec = augment.salt_pepper(b, prm["pepper_sigma2"])
        ests.append(("salt_pepper", b, lambda X, y, s=spec: estimate.solve_aerm(X, y, s).theta))
    for a in as_list(prm["alphas"]):
        spec = augment.rotation(a)
        ests.append(("rotation", a, lambda X, y, s=spec: estimate.solve_aerm(X, y, s).theta))
        lam, _, _ = bounds.rotation_reference(a, sp, n, sp.p)
        ests.append(("ridge_rotation_ref", a, lambda X, y, l=lam: estimate.solve_ridge(X, y, l).theta))
    return ests


def augmentation_map(prm, seed):
    sp = _spectrum(prm)
    n = prm["n"]
    t = ResultsTable(["family", "param", "trial", "bias", "variance", "mse"])
    ests = _map_estimators(prm, sp, n)
    for trial in range(prm["trials"]):
        theta = _dense_signal(seed, "augmentation-map", trial, sp.p)
        X = _design(sp, n, seed, "augmentation-map", trial)
        y = _labels(X, theta, prm["noise"], seed, "augmentation-map", n, trial)
        for fam, par, solve in ests:
            b, v = _bias_var(solve, X, y, theta, sp)
            t.add(family=fam, param=par, trial=trial, bias=b, variance=v, mse=metrics.mse(solve(X, y), theta, sp))
    return t


def n_grid(prm):
    return [int(v) for v in np.unique(np.round(np.geomspace(prm["n_min"], prm["n_max"], prm["n_points"])))]


def precomputed_double_descent(prm, seed):
    sp = _spectrum(prm)
    spec = augment.gaussian_noise(prm["sigma2"])
    t = ResultsTable(["aug_size", "n", "trial", "mse_precomputed", "mse_aerm"])
    for n in n_grid(prm):
        for trial in range(prm["trials"]):
            theta = _dense_signal(seed, "precomputed-double-descent", trial, sp.p)
            X = _design(sp, n, seed, "precomputed-double-descent", trial)
            y = _labels(X, theta, prm["noise"], seed, "precomputed-double-descent", n, trial)
            aerm = metrics.mse(estimate.solve_aerm(X, y, spec).theta, theta, sp)
            for k in as_list(prm["aug_sizes"]):
                cs = model.derive_seed(seed, "precomputed-double-descent", "copies", n, trial, k)
                th = estimate.solve_precomputed(X, y, spec, k, cs).theta
                t.add(aug_size=k, n=n, trial=trial, mse_precomputed=metrics.mse(th, theta, sp), mse_aerm=aerm)
    return t


def signal_mask(prm, seed):
    sp = _spectrum(prm)
    p, n, s = sp.p, prm["n"], prm["support"]
    theta = model.make_ksparse_signal(p, range(s), np.ones(s)).theta
    beta0 = prm["beta0"]
    psi0 = beta0 / (1 - beta0)
    t = ResultsTable(["ratio", "trial", "bias", "variance", "mse", "bias_bound", "variance_bound"])
    for ratio in as_list(prm["ratios"]):
        psi1 = ratio * psi0
        betas = np.full(p, beta0)
        betas[:s] = psi1 / (1 + psi1)
        spec = augment.mask_nonuniform(betas)
        rep = bounds.nonuniform_mask_bound(psi0, psi1, s, n, p, theta, sp)
        for trial in range(prm["trials"]):
            X = _design(sp, n, seed, "signal-mask", trial)
            y = _labels(X, theta, prm["noise"], seed, "signal-mask", n, trial)
            d = metrics.decompose_mse(X, y, theta, sp, spec)
            t.add(ratio=ratio, trial=trial, bias=d.bias, variance=d.variance, mse=d.total_mse,
                  bias_bound=rep.bias_bound, variance_bound=rep.variance_bound)
    return t


def spectrum_mask(prm, seed):
    n = prm["n"]
    t = ResultsTable(["gamma", "beta", "trial", "mse", "mse_lse"])
    for gamma in as_list(prm["gammas"]):
        kind = "isotropic" if gamma >= 1 else "geometric"
        sp = _spectrum({"p": prm["p"], "spectrum": kind, "gamma": gamma})
        for trial in range(prm["trials"]):
            theta = _dense_signal(seed, "spectrum-mask", trial, sp.p)
            X = _design(sp, n, seed, f"spectrum-mask-{gamma}", trial)
            y = _labels(X, theta, prm["noise"], seed, f"spectrum-mask-{gamma}", n, trial)
            lse = metrics.mse(estimate.solve_lse(X, y).theta, theta, sp)
            for beta in as_list(prm["betas"]):
                th = estimate.solve_aerm(X, y, augment.mask_unbiased(beta)).theta
                t.add(gamma=gamma, beta=beta, trial=trial, mse=metrics.mse(th, theta, sp), mse_lse=lse)
    return t


def tuning_gap(prm, seed):
    sp = _spectrum(prm)
    n, ti = prm["n"], prm["signal_index"]
    theta = model.make_sparse_signal(sp, ti).theta
    specs = [("gaussian_noise", s2, augment.gaussian_noise(s2)) for s2 in as_list(prm["sigma2s"])]
    specs += [("mask_unbiased", b, augment.mask_unbiased(b)) for b in as_list(prm["betas"])]
    t = ResultsTable(["family", "param", "trial", "mse", "poe"])
    for trial in range(prm["trials"]):
        X = _design(sp, n, seed, "tuning-gap", trial)
        y = _labels(X, theta, prm["noise"], seed, "tuning-gap", n, trial)
        yc = model.gen_classification_labels(X, theta, prm["nu"], model.derive_seed(seed, "tuning-gap", "flip", n, trial))
        for fam, par, spec in specs:
            mse_v = metrics.mse(estimate.solve_aerm(X, y, spec).theta, theta, sp)
            poe_v = metrics.poe_closed_form(estimate.solve_aerm(X, yc, spec).theta, sp, ti)
            t.add(family=fam, param=par, trial=trial, mse=mse_v, poe=poe_v)
    return t


DESK = {"p": 128, "n": 64, "noise": 0.5, "gamma": 0.95}

PRESETS = {
    "decomposition": (
        decomposition,
        dict(DESK, ratio=0.6, betas=[0.1, 0.2, 0.3, 0.4, 0.5], trials=50),
        "bias / variance / approximation split for the random mask over β",
    ),
    "bias-impact": (
        bias_impact,
        dict(DESK, spectrum="isotropic", ns=[32, 64, 128], beta=0.3, nu=0.1, signal_index=0, trials=50),
        "biased vs unbiased mask in regression (MSE) and classification (POE)",
    ),
    "asgd-convergence": (
        asgd_convergence,
        dict(DESK, ratio=0.6, beta=0.3, eta=1e-5, steps=200000, stride=2000,
             configs=["64x1", "8x8", "1x64"], trials=1),
        "aSGD distance to the closed-form aERM solution across batch/augmentation sizes",
    ),
    "mask-limit": (
        mask_limit,
        dict(DESK, betas=[0.5, 0.1, 0.01, 0.001], trials=20),
        "vanishing mask converges to the minimum-Mahalanobis-norm interpolator",
    ),
    "augmentation-map": (
        augmentation_map,
        dict(DESK, sigma2s=[0.01, 0.1, 1.0], betas=[0.1, 0.3, 0.5, 0.7], pepper_betas=[0.1, 0.3, 0.5],
             pepper_sigma2=1.0, alphas=[15.0, 45.0, 90.0], trials=20),
        "bias and variance of common augmentations against LSE and matched ridge",
    ),
    "precomputed-double-descent": (
        precomputed_double_descent,
        dict(DESK, spectrum="isotropic", sigma2=1.0, aug_sizes=[1, 2, 4, 8], n_min=8, n_max=256,
             n_points=21, trials=50),
        "stacked pre-computed copies move the interpolation peak to n = p / k",
    ),
    "signal-mask": (
        signal_mask,
        dict(DESK, spectrum="isotropic", support=4, beta0=0.5, ratios=[0.01, 0.1, 0.3, 1.0, 3.0, 10.0], trials=20),
        "non-uniform mask on a sparse signal: masking signal vs noise features",
    ),
    "spectrum-mask": (
        spectrum_mask,
        dict(DESK, gammas=[0.9, 0.95, 0.97, 0.99, 1.0], betas=[0.1, 0.3, 0.5, 0.7], trials=20),
        "uniform mask across data spectra (γ = 1 means isotropic)",
    ),
    "tuning-gap": (
        tuning_gap,
        dict(DESK, signal_index=0, nu=0.1,
             sigma2s=[0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0],
             betas=[0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95], trials=20),
        "sensitivity of regression MSE vs classification POE to augmentation strength",
    ),
}


def preset_params(name, overrides=None):
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    defaults = PRESETS[name][1]
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise ConfigError(f"preset {name} has no parameter {key!r}", path=f"params.{key}")
        params[key] = value
    if params["trials"] < 1:
        raise ConfigError("trials must be >= 1", path="params.trials")
    return params


def run_preset(name, overrides=None, seed=0):
    """Run a preset; the table is a deterministic function of (name, overrides, seed)."""
    params = preset_params(name, overrides)
    table = PRESETS[name][0](params, seed)
    table.metadata = {
        "preset": name,
        "seed": seed,
        "version": __version__,
        "params": "; ".join(f"{k}={params[k]}" for k in sorted(params)),
    }
    return table
