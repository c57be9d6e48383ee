import numpy as np
import pytest

from augreg import augment, estimate, metrics, model
from augreg.errors import Degenerate, InvalidParam, ZeroTailEigenvalue


def test_mse_basic_and_monte_carlo():
    lam = np.array([3.0, 2.0, 1.0])
    a, b = np.array([1.0, 0.0, 2.0]), np.array([0.0, 1.0, 1.0])
    assert metrics.mse(a, a, lam) == 0
    assert metrics.mse(a, b, np.ones(3)) == pytest.approx(np.sum((a - b) ** 2))
    Xt = model.sample_covariates(lam, 100_000, seed=1)
    sq = (Xt @ (a - b)) ** 2
    assert abs(sq.mean() - metrics.mse(a, b, lam)) <= 3 * sq.std() / np.sqrt(sq.size)


def test_sigma_norm_full_matrix():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    v = np.array([1.0, -1.0])
    assert metrics.sigma_norm2(v, S) == pytest.approx(v @ S @ v)


def _problem(seed=0, noise=0.5):
    sp = model.make_spectrum("geometric", 40, gamma=0.95)
    theta = model.stream(seed, "theta").standard_normal(40)
    d = model.make_dataset(sp, theta, 20, seed, noise=noise)
    return sp, theta, d


def test_decomposition_cases():
    sp, theta, d = _problem(noise=0.0)
    dec = metrics.decompose_mse(d.X, d.y, theta, sp, augment.mask_unbiased(0.3))
    assert dec.variance == 0
    sp, theta, d = _problem()
    dec = metrics.decompose_mse(d.X, d.y, theta, sp, augment.gaussian_noise(0.2))
    assert dec.approx_error == 0
    for seed in range(5):
        sp, theta, d = _problem(seed)
        dec = metrics.decompose_mse(d.X, d.y, theta, sp, augment.mask_unbiased(0.4))
        assert np.sqrt(dec.total_mse) <= np.sqrt(dec.bias) + np.sqrt(dec.variance) + np.sqrt(dec.approx_error) + 1e-8


def test_survival_contamination():
    lam = np.array([4.0, 2.0, 1.0])
    su, cn = metrics.survival_contamination(np.array([0.5, 0, 0]), lam, 0)
    assert (su, cn) == (1.0, 0.0)
    th = np.array([0.3, -1.0, 2.0])
    su, cn = metrics.survival_contamination(th, lam, 1)
    su2, cn2 = metrics.survival_contamination(-3 * th, lam, 1)
    assert su2 == pytest.approx(-3 * su) and cn2 == pytest.approx(3 * cn)
    assert su**2 + cn**2 == pytest.approx(metrics.sigma_norm2(th, lam))


def test_poe_formula_edges():
    assert metrics.poe_from_su_cn(1.0, 1.0) == pytest.approx(0.25)
    assert metrics.poe_from_su_cn(2.0, 0.0) == 0.0
    assert metrics.poe_from_su_cn(0.0, 1.0) == 0.5
    with pytest.raises(Degenerate):
        metrics.poe_from_su_cn(0.0, 0.0)
    with pytest.raises(InvalidParam):
        metrics.poe_closed_form(np.ones(3), np.ones(3), 0, latent="rademacher")


def test_poe_monte_carlo_cases():
    lam = np.ones(4)
    ts = np.array([1.0, 0, 0, 0])
    assert metrics.poe_monte_carlo(2.5 * ts, ts, lam, 10_000, seed=0) == 0
    N = 100_000
    v = metrics.poe_monte_carlo(np.array([0, 1.0, 0, 0]), ts, lam, N, seed=1, latent="rademacher")
    assert abs(v - 0.5) <= 3 / (2 * np.sqrt(N))
    th = np.array([0.4, 1.0, -0.2, 0.3])
    assert metrics.poe_monte_carlo(th, ts, lam, 5000, 2) == metrics.poe_monte_carlo(7 * th, ts, lam, 5000, 2)


def test_poe_closed_vs_monte_carlo_small():
    lam = model.make_spectrum("geometric", 8, gamma=0.8).eigenvalues
    ts = model.make_sparse_signal(lam, 2).theta
    N = 100_000
    for s in range(5):
        th = model.stream(s, "est").standard_normal(8)
        pc = metrics.poe_closed_form(th, lam, 2)
        pm = metrics.poe_monte_carlo(th, ts, lam, N, seed=s)
        assert abs(pc - pm) <= 3 * np.sqrt(pc * (1 - pc) / N) + 1e-12


def test_biased_unbiased_same_poe():
    sp = model.make_spectrum("isotropic", 30)
    ts = model.make_sparse_signal(sp, 0).theta
    d = model.make_dataset(sp, ts, 20, 0, kind="classification", noise=0.1)
    a = metrics.classification_metrics(estimate.solve_aerm(d.X, d.y, augment.mask_unbiased(0.3)).theta, sp, 0)
    b = metrics.classification_metrics(estimate.solve_aerm(d.X, d.y, augment.mask_biased(0.3)).theta, sp, 0)
    assert a.poe == pytest.approx(b.poe, abs=1e-15)


def _brute_ranks(lam, c, n, k):
    tail = sum(lam[i] for i in range(k, len(lam)))
    tail2 = sum(lam[i] ** 2 for i in range(k, len(lam)))
    return (c + tail) / (n * lam[k]), (c + tail) ** 2 / tail2


def test_effective_ranks():
    rho, R = metrics.effective_ranks(np.ones(10), 0.0, 5, 0)
    assert (rho, R) == (2.0, 10.0)
    psi, n, p = 0.5, 8, 12
    for k in range(p):
        rho, _ = metrics.effective_ranks(np.full(p, 1 / psi), n, n, k)
        assert rho == pytest.approx((psi * n + p - k) / n)
    lam = 0.97 ** np.arange(200)
    arr = metrics.effective_rank_arrays(lam, 3.0, 50)
    for k in range(200):
        r, Rk = _brute_ranks(lam, 3.0, 50, k)
        assert metrics.effective_ranks(lam, 3.0, 50, k) == pytest.approx((r, Rk), rel=1e-12)
        assert arr.rho[k] == pytest.approx(r, rel=1e-12) and arr.bigR[k] == pytest.approx(Rk, rel=1e-12)
    with pytest.raises(ZeroTailEigenvalue):
        metrics.effective_ranks(np.array([1.0, 0.0]), 0.0, 2, 1)


def test_aug_transformed_examples():
    lam = model.make_spectrum("geometric", 10, gamma=0.8).eigenvalues
    theta = np.linspace(-1, 1, 10)
    beta = 0.25
    psi = beta / (1 - beta)
    m = metrics.aug_transformed(lam, theta, augment.mask_unbiased(beta))
    np.testing.assert_allclose(m.sigma_aug, np.eye(10) / psi, rtol=1e-12)
    np.testing.assert_allclose(m.theta_aug, np.sqrt(psi) * np.sqrt(lam) * theta, rtol=1e-12)
    assert m.kappa == pytest.approx(1.0)
    g = metrics.aug_transformed(lam, theta, augment.gaussian_noise(0.5))
    np.testing.assert_allclose(g.sigma_aug, np.diag(lam) / 0.5, rtol=1e-12)
    gm = metrics.aug_transformed(lam, theta, augment.group_mix(lam))
    np.testing.assert_allclose(gm.sigma_aug, np.eye(10), atol=1e-12)
    np.testing.assert_allclose(gm.sigma_bar, np.diag(lam) / 2, rtol=1e-12)


def test_aug_transformed_permutation():
    lam = np.array([4.0, 2.0, 1.0, 0.5])
    betas = np.array([0.9, 0.1, 0.5, 0.2])
    m = metrics.aug_transformed(lam, np.ones(4), augment.mask_nonuniform(betas))
    expected = (1 - betas) / betas
    np.testing.assert_allclose(m.eigenvalues, np.sort(expected)[::-1])
    np.testing.assert_allclose(expected[m.perm], m.eigenvalues)
    np.testing.assert_allclose(m.theta_coords, m.theta_aug[m.perm])


def test_harmonic_identity_variance_form():
    lam = model.make_spectrum("geometric", 12, gamma=0.85).eigenvalues
    beta, s2 = 0.3, 0.8
    th = np.ones(12)
    pep = metrics.aug_transformed(lam, th, augment.salt_pepper(beta, s2)).sigma_aug.diagonal()
    rm = metrics.aug_transformed(lam, th, augment.mask_unbiased(beta)).sigma_aug.diagonal()
    tau2 = beta * s2 / (1 - beta) ** 2
    gn = metrics.aug_transformed(lam, th, augment.gaussian_noise(tau2)).sigma_aug.diagonal()
    np.testing.assert_allclose(1 / pep, 1 / rm + 1 / gn, rtol=1e-12)


def test_bias_shift():
    lam = np.array([3.0, 2.0, 1.0])
    theta = np.array([1.0, -1.0, 0.5])
    s = metrics.bias_shift(augment.mask_unbiased(0.4), lam, theta)
    assert np.all(s.cov_xi == 0) and s.theta_norm_xi == 0
    s = metrics.bias_shift(augment.mask_biased(0.4), lam, theta)
    np.testing.assert_allclose(s.cov_xi, 0.16 * np.diag(lam), rtol=1e-12)
    s = metrics.bias_shift(augment.group_mix(lam), lam, theta)
    np.testing.assert_allclose(s.cov_xi, (1 - 1 / np.sqrt(2)) ** 2 * np.diag(lam), rtol=1e-12)
    X = model.sample_covariates(lam, 50, seed=0)
    s = metrics.bias_shift(augment.mask_biased(0.4), lam, theta, X)
    assert s.delta_xi == pytest.approx(np.linalg.norm(0.16 * (X.T @ X / 50 - np.diag(lam)), 2), rel=1e-10)
