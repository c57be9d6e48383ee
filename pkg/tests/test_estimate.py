import numpy as np
import pytest

from augreg import augment, estimate, metrics, model
from augreg.errors import DivergenceDetected, InvalidParam, SingularCov, SingularSystem


def _data(n, p, seed=0, gamma=0.9, noise=0.5):
    sp = model.make_spectrum("geometric", p, gamma=gamma)
    theta = model.stream(seed, "theta").standard_normal(p)
    d = model.make_dataset(sp, theta, n, seed, noise=noise)
    return sp, theta, d.X, d.y


def test_scalar_aerm():
    th = estimate.solve_aerm(np.array([[2.0]]), np.array([3.0]), augment.gaussian_noise(1.0)).theta
    assert th[0] == pytest.approx(1.2)


def test_gaussian_noise_is_ridge():
    sp, _, X, y = _data(20, 30)
    a = estimate.solve_aerm(X, y, augment.gaussian_noise(0.3)).theta
    r = estimate.solve_ridge(X, y, 20 * 0.3).theta
    assert metrics.relative_sigma_distance(a, r, sp) <= 1e-10


def test_biased_mask_scaling_identity():
    _, _, X, y = _data(30, 50)
    for beta in (0.05, 0.3, 0.7, 0.95):
        b = estimate.solve_aerm(X, y, augment.mask_biased(beta)).theta
        u = estimate.solve_aerm(X, y, augment.mask_unbiased(beta)).theta
        np.testing.assert_allclose(b, u / (1 - beta), rtol=1e-10)
        # the explicit form of the identity
        G = X.T @ X
        lhs = np.linalg.solve((1 - beta) ** 2 * G + beta * (1 - beta) * np.diag(np.diag(G)), (1 - beta) * X.T @ y)
        np.testing.assert_allclose(lhs, u / (1 - beta), rtol=1e-8)


def test_aerm_residual_and_singular():
    _, _, X, y = _data(20, 40)
    spec = augment.mask_unbiased(0.4)
    th = estimate.solve_aerm(X, y, spec).theta
    A = X.T @ X + 20 * augment.empirical_cov_operator(spec, X)
    assert np.linalg.norm(A @ th - X.T @ y) <= 1e-8 * np.linalg.norm(X.T @ y)
    with pytest.raises(SingularSystem):
        estimate.solve_aerm(X, y, augment.mask_unbiased(0.0))


def test_deterministic_matches_when_delta_zero():
    sp, _, X, y = _data(15, 10)
    for spec in (augment.gaussian_noise(0.5), augment.correlated_noise(np.diag(np.linspace(1, 2, 10))),
                 augment.group_mix(sp)):
        a = estimate.solve_aerm(X, y, spec).theta
        b = estimate.solve_aerm_deterministic(X, y, spec, sp).theta
        np.testing.assert_allclose(a, b, rtol=1e-10)


def test_deterministic_gap_shrinks_with_n():
    sp = model.make_spectrum("geometric", 32, gamma=0.9)
    spec = augment.mask_unbiased(0.3)

    def gap(n):
        out = []
        for t in range(15):
            theta = model.stream(t, "theta").standard_normal(32)
            d = model.make_dataset(sp, theta, n, model.derive_seed(t, n))
            a = estimate.solve_aerm(d.X, d.y, spec).theta
            b = estimate.solve_aerm_deterministic(d.X, d.y, spec, sp).theta
            out.append(metrics.mse(a, b, sp))
        return np.median(out)

    assert gap(512) < gap(64)


def test_ridge_cases():
    _, _, X, y = _data(20, 20)
    np.testing.assert_allclose(X @ estimate.solve_ridge(X, y, 0.0).theta, y, rtol=1e-8, atol=1e-8)
    norms = [np.linalg.norm(estimate.solve_ridge(X, y, lam).theta) for lam in (1e3, 1e4, 1e5, 1e6)]
    assert np.all(np.diff(norms) < 0)
    with pytest.raises(InvalidParam):
        estimate.solve_ridge(X, y, -1.0)
    with pytest.raises(SingularSystem):
        estimate.solve_ridge(X[:5], y[:5], 0.0)


def test_precomputed_identity_and_shape():
    _, _, X, y = _data(10, 20)
    G, yy = estimate.stack_augmented(X, y, augment.gaussian_noise(1.0), 3, seed=0)
    assert G.shape == (30, 20) and yy.shape == (30,)
    th = estimate.solve_precomputed(X, y, augment.gaussian_noise(0.0), 4, seed=0).theta
    np.testing.assert_allclose(th, estimate.solve_lse(X, y).theta, rtol=1e-8, atol=1e-10)


def test_precomputed_converges_to_aerm():
    sp, _, X, y = _data(8, 12, seed=3)
    spec = augment.gaussian_noise(0.5)
    ref = estimate.solve_aerm(X, y, spec).theta
    th = estimate.solve_precomputed(X, y, spec, 1000, seed=1).theta
    assert metrics.relative_sigma_distance(th, ref, sp) <= 0.05


def test_precomputed_distance_decreases_in_M():
    spec = augment.gaussian_noise(0.5)
    meds = []
    for M in (10, 100, 1000):
        ds = []
        for t in range(20):
            sp, _, X, y = _data(6, 10, seed=t)
            ref = estimate.solve_aerm(X, y, spec).theta
            ds.append(metrics.relative_sigma_distance(estimate.solve_precomputed(X, y, spec, M, seed=t).theta, ref, sp))
        meds.append(np.median(ds))
    assert meds[0] > meds[1] > meds[2]


def test_limit_interpolator():
    sp, _, X, y = _data(10, 30)
    np.testing.assert_allclose(estimate.solve_limit_interpolator(X, y, np.eye(30)).theta,
                               estimate.solve_lse(X, y).theta, rtol=1e-8, atol=1e-12)
    C = np.diag(np.diag(X.T @ X)) / 10
    th = estimate.solve_limit_interpolator(X, y, C).theta
    assert np.abs(X @ th - y).max() <= 1e-8 * np.linalg.norm(y)
    # minimal C-norm among interpolators
    null = np.linalg.svd(X)[2][10:]
    v = null.T @ np.random.default_rng(0).standard_normal(20)
    assert th @ C @ th <= (th + v) @ C @ (th + v)
    with pytest.raises(SingularCov):
        estimate.solve_limit_interpolator(X, y, np.zeros((30, 30)))


def test_limit_matches_small_mask_direction():
    sp, _, X, y = _data(64, 128, gamma=0.95)
    C = np.diag(np.diag(X.T @ X)) / 64
    lim = estimate.solve_limit_interpolator(X, y, C).theta
    th = estimate.solve_aerm(X, y, augment.mask_unbiased(1e-3)).theta
    cos = th @ lim / np.linalg.norm(th) / np.linalg.norm(lim)
    assert np.degrees(np.arccos(min(cos, 1.0))) <= 0.01 * 90


def test_ridge_equivalence_transform():
    sp, theta, X, y = _data(12, 20)
    spec = augment.gaussian_noise(0.25)
    Xt, tt, lam, St = estimate.ridge_equivalence_transform(X, sp, theta, spec)
    np.testing.assert_allclose(Xt, X / 0.5)
    assert lam == 12
    spec = augment.mask_unbiased(0.4)
    Xt, tt, lam, St = estimate.ridge_equivalence_transform(X, sp, theta, spec)
    bar = estimate.solve_aerm_deterministic(X, y, spec, sp).theta
    rid = estimate.solve_ridge(Xt, y, lam).theta
    lhs = metrics.mse(bar, theta, sp)
    rhs = float((rid - tt) @ St @ (rid - tt))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_asgd_gd_limit_is_min_norm():
    sp, _, X, y = _data(8, 16, noise=0.1)
    cfg = estimate.AsgdConfig(batch_size=8, aug_size=1, eta=5e-3, max_steps=20000, stride=1000)
    traj = estimate.run_asgd(X, y, augment.gaussian_noise(0.0), cfg)
    lse = estimate.solve_lse(X, y).theta
    assert np.linalg.norm(traj.final - lse) <= 1e-3 * np.linalg.norm(lse)
    assert np.all(np.diff(traj.steps) > 0)


def test_asgd_progress_determinism_and_tolerance():
    sp, _, X, y = _data(16, 32)
    spec = augment.mask_unbiased(0.3)
    cfg = estimate.AsgdConfig(4, 2, eta=1e-3, max_steps=3000, stride=100, seed=5)
    a, b = estimate.run_asgd(X, y, spec, cfg), estimate.run_asgd(X, y, spec, cfg)
    np.testing.assert_array_equal(a.thetas, b.thetas)
    assert a.objective[-1] < a.objective[0]
    E = augment.expected_cov_operator(spec, sp)
    surrogate = [np.sum((X @ t - y) ** 2) + 16 * t @ E @ t for t in (a.thetas[0], a.final)]
    assert surrogate[1] < surrogate[0]
    assert a.stopped_by == "budget"
    c = estimate.run_asgd(X, y, spec, estimate.AsgdConfig(16, 1, eta=1e-3, epochs=100000, stride=50, tol=0.05))
    assert c.stopped_by == "tolerance"


def test_asgd_divergence_and_config():
    _, _, X, y = _data(8, 8)
    with pytest.raises(DivergenceDetected) as err:
        estimate.run_asgd(X, y, augment.gaussian_noise(0.1), estimate.AsgdConfig(8, 1, eta=10.0, max_steps=500, stride=10))
    assert err.value.details["step"] > 0
    for kw in (dict(batch_size=0, aug_size=1, max_steps=1), dict(batch_size=1, aug_size=1, eta=0, max_steps=1),
               dict(batch_size=1, aug_size=1)):
        with pytest.raises(InvalidParam):
            estimate.AsgdConfig(**kw)


def test_asgd_geometric_schedule_runs():
    _, _, X, y = _data(8, 8)
    cfg = estimate.AsgdConfig(2, 2, eta=1e-3, schedule="geometric", decay=0.9, epochs=5, stride=1)
    traj = estimate.run_asgd(X, y, augment.mask_unbiased(0.2), cfg)
    assert traj.steps[-1] == 20
