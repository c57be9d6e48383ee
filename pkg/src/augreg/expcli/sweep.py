"""Generic Cartesian sweep over sample sizes and augmentation parameters."""
import itertools


from .. import __version__, augment, estimate, metrics, model
from ..errors import AugregError, ConfigError
from .config import as_list
from .table import ResultsTable

REGRESSION_METRICS = ("mse", "bias", "variance", "approx", "delta_G")
CLASSIFICATION_METRICS = ("su", "cn", "poe")
SOLVERS = ("aerm", "aerm_deterministic", "lse", "ridge", "precomputed")
DECOMPOSITION = ("bias", "variance", "approx")


def build_spectrum(data):
    p = data["p"]
    kind = data.get("spectrum", "geometric")
    if kind == "geometric":
        gamma = model.gamma_for_ratio(data["ratio"], p) if "ratio" in data else data.get("gamma", 0.95)
        return model.make_spectrum("geometric", p, gamma=gamma)
    if kind == "bilevel":
        return model.make_spectrum("bilevel", p, a=data.get("a", 10.0), b=data.get("b", 1.0),
                                   split=data.get("split", p // 2))
    return model.make_spectrum(kind, p)


def build_signal(data, spectrum, seed, trial):
    kind = data.get("signal", "dense")
    if kind == "dense":
        return model.stream(seed, "signal", trial).standard_normal(spectrum.p)
    if kind == "sparse":
        return model.make_sparse_signal(spectrum, data.get("signal_index", 0)).theta
    raise ConfigError(f"unknown signal kind {kind!r}", path="data.signal")


def make_spec(family, params, spectrum):
    kw = dict(params)
    if family == "gaussian_noise":
        return augment.gaussian_noise(kw.get("sigma2", 1.0))
    if family in ("mask_unbiased", "mask_biased"):
        return getattr(augment, family)(kw.get("beta", 0.5))
    if family == "cutout":
        return augment.cutout(kw.get("k", 1))
    if family == "salt_pepper":
        return augment.salt_pepper(kw.get("beta", 0.5), kw.get("sigma2", 1.0), kw.get("mu", 0.0))
    if family == "rotation":
        return augment.rotation(kw.get("alpha", 45.0), kw.get("rotation_form", "large_p"))
    if family == "group_mix":
        return augment.group_mix(spectrum)
    raise ConfigError(f"family {family!r} is not available in sweeps", path="augmentation.family")


def _solve(name, d, spec, out, seed):
    if name == "aerm":
        return estimate.solve_aerm(d.X, d.y, spec).theta
    if name == "aerm_deterministic":
        return estimate.solve_aerm_deterministic(d.X, d.y, spec, out["spectrum"]).theta
    if name == "lse":
        return estimate.solve_lse(d.X, d.y).theta
    if name == "ridge":
        return estimate.solve_ridge(d.X, d.y, out.get("ridge_lambda", 1.0)).theta
    if name == "precomputed":
        return estimate.solve_precomputed(d.X, d.y, spec, out.get("precomputed_copies", 4), seed).theta
    raise ConfigError(f"unknown solver {name!r}", path="output.solvers")


def sweep_columns(cfg):
    grid_keys = [k for k in cfg.augmentation if k not in ("family", "rotation_form")]
    solvers = [str(s) for s in as_list(cfg.output.get("solvers", "aerm"))]
    default = "mse" if cfg.task == "regression" else "poe"
    wanted = [str(m) for m in as_list(cfg.output.get("metrics", default))]
    allowed = REGRESSION_METRICS if cfg.task == "regression" else CLASSIFICATION_METRICS
    for m in wanted:
        if m not in allowed:
            raise ConfigError(f"metric {m!r} is not available for {cfg.task}", path="output.metrics")
    for s in solvers:
        if s not in SOLVERS:
            raise ConfigError(f"unknown solver {s!r}", path="output.solvers")
    per_solver = [m for m in wanted if m not in DECOMPOSITION and m != "delta_G"]
    shared = [m for m in wanted if m in DECOMPOSITION or m == "delta_G"]
    metric_cols = []
    for s in solvers:
        for m in per_solver:
            metric_cols.append(m if len(solvers) == 1 else f"{s}_{m}")
    return grid_keys, solvers, per_solver, shared, ["n", *grid_keys, "trial", *metric_cols, *shared]


def run_sweep(cfg):
    """Evaluate every (n, augmentation parameters) grid point for every trial.

    Each trial draws fresh data from a stream keyed by (seed, n, trial); the
    same trial shares its data across augmentation parameters.
    """
    if cfg.preset is not None:
        raise ConfigError("config names a preset; use run_preset", path="preset")
    grid_keys, solvers, per_solver, shared, columns = sweep_columns(cfg)
    if cfg.task == "classification" and cfg.data.get("signal", "dense") != "sparse":
        raise ConfigError("classification sweeps need data.signal = sparse", path="data.signal")
    spectrum = build_spectrum(cfg.data)
    family = cfg.augmentation["family"]
    table = ResultsTable(columns, metadata={"seed": cfg.seed, "version": __version__, "sweep": family})
    out = dict(cfg.output, spectrum=spectrum)
    noise = cfg.data.get("noise", 0.5 if cfg.task == "regression" else 0.1)
    grids = [as_list(cfg.augmentation[k]) for k in grid_keys]
    for n in as_list(cfg.data["n"]):
        for combo in itertools.product(*grids):
            params = dict(zip(grid_keys, combo))
            if "rotation_form" in cfg.augmentation:
                params["rotation_form"] = cfg.augmentation["rotation_form"]
            spec = make_spec(family, params, spectrum)
            for trial in range(cfg.trials):
                theta = build_signal(cfg.data, spectrum, cfg.seed, trial)
                d = model.make_dataset(spectrum, theta, n, model.derive_seed(cfg.seed, "data", n, trial),
                                       kind=cfg.task, noise=noise, latent=cfg.data.get("latent", "gaussian"))
                row = {"n": n, "trial": trial, **{k: params[k] for k in grid_keys}}
                for s in solvers:
                    th = _solve(s, d, spec, out, model.derive_seed(cfg.seed, "copies", n, trial))
                    for m in per_solver:
                        col = m if len(solvers) == 1 else f"{s}_{m}"
                        row[col] = _metric(m, th, theta, spectrum, cfg)
                if any(m in DECOMPOSITION for m in shared):
                    dec = metrics.decompose_mse(d.X, d.y, theta, spectrum, spec)
                    row.update(bias=dec.bias, variance=dec.variance, approx=dec.approx_error)
                if "delta_G" in shared:
                    try:
                        row["delta_G"] = augment.delta_G(spec, d.X, spectrum)
                    except AugregError:
                        row["delta_G"] = float("nan")
                table.add(**{k: row[k] for k in columns})
    return table


def _metric(name, theta_hat, theta, spectrum, cfg):
    if name == "mse":
        return metrics.mse(theta_hat, theta, spectrum)
    t = cfg.data.get("signal_index", 0)
    su, cn = metrics.survival_contamination(theta_hat, spectrum, t)
    if name == "su":
        return su
    if name == "cn":
        return cn
    latent = cfg.data.get("latent", "gaussian")
    if latent == "gaussian":
        return metrics.poe_from_su_cn(su, cn)
    return metrics.poe_monte_carlo(theta_hat, theta, spectrum, 20000, cfg.seed, latent=latent)
