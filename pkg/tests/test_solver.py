import dataclasses
import warnings

import numpy as np
import pytest

import oracles
from mdwtnn.noise import apply_noise, case_spec
from mdwtnn.metrics import evaluate
from mdwtnn.prox import ShrinkSpec, dw_svt
from mdwtnn.solver import (
    DivergenceError,
    SolverConfig,
    default_lambda,
    denoise,
    init_state,
    update_multipliers,
    update_n,
    update_s,
    update_x,
    update_z,
)
from mdwtnn.synthetic import cp_cube
from mdwtnn.tensor_core import ipermute_mode, permute_mode
from mdwtnn.weights import build_weight_plan, uniform_weight_plan


def random_state(rng, shape=(4, 5, 3), cfg=None):
    cfg = (cfg or SolverConfig()).resolved(shape)
    y = rng.uniform(size=shape)
    st = init_state(y, cfg)
    st.x, st.s, st.n, st.lam = (rng.standard_normal(shape) for _ in range(4))
    st.z = [rng.standard_normal(permute_mode(y, p).shape) for p in (1, 2, 3)]
    st.gamma = [rng.standard_normal(permute_mode(y, p).shape) for p in (1, 2, 3)]
    st.mu = rng.uniform(0.1, 5.0, size=3)
    st.beta = float(rng.uniform(0.1, 5.0))
    return y, st, cfg


def x_gradient(st, y, x):
    g = st.beta * (x - (y - st.s - st.n + st.lam / st.beta))
    for p in (1, 2, 3):
        mu = st.mu[p - 1]
        g = g + mu * ipermute_mode(permute_mode(x, p) - st.z[p - 1] + st.gamma[p - 1] / mu, p)
    return g


def test_config_defaults_and_validation():
    cfg = SolverConfig()
    assert cfg.mu0 == cfg.beta0 == 1e-3 and cfg.rho == 1.2 and cfg.mu_max == 1e10
    assert cfg.tol == 1e-6 and cfg.max_iter == 100
    assert cfg.resolved((10, 20, 5)).lam == pytest.approx(default_lambda((10, 20, 5)))
    for bad in (dict(rho=1.0), dict(tol=0), dict(max_iter=0), dict(alpha=(1, 1, 1)),
                dict(eta=1.0), dict(c1=0), dict(tau_n=-1), dict(truncation="x"),
                dict(tw_init="y"), dict(threads=0), dict(lam=-1)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_update_x_stationarity(rng):
    for _ in range(20):
        y, st, cfg = random_state(rng)
        x = update_x(st, cfg, y)
        assert np.linalg.norm(x_gradient(st, y, x)) < 1e-8


def test_update_x_degenerate_and_fixed_point(rng):
    y, st, cfg = random_state(rng)
    st.mu = np.zeros(3)
    st.gamma = [np.zeros_like(g) for g in st.gamma]
    np.testing.assert_allclose(update_x(st, cfg, y), y - st.s - st.n + st.lam / st.beta, atol=1e-12)
    x = rng.uniform(size=(3, 4, 5))
    st = init_state(x, cfg)
    st.mu = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(update_x(st, cfg, x), x, atol=1e-12)


def test_update_n_stationarity(rng):
    for _ in range(20):
        y, st, cfg = random_state(rng)
        n = update_n(st, cfg, y)
        g = 2 * cfg.tau_n * n - st.beta * (y - st.x - st.s - n + st.lam / st.beta)
        assert np.linalg.norm(g) < 1e-8


def test_update_n_limits(rng):
    y, st, cfg = random_state(rng)
    big = dataclasses.replace(cfg, tau_n=1e12)
    assert np.abs(update_n(st, big, y)).max() < 1e-9
    zero = dataclasses.replace(cfg, tau_n=0.0)
    np.testing.assert_allclose(update_n(st, zero, y), y - st.x - st.s + st.lam / st.beta, atol=1e-12)


def test_update_s(rng):
    y, st, cfg = random_state(rng)
    arg = y - st.x - st.n + st.lam / st.beta
    t = cfg.lam / st.beta
    want = np.vectorize(lambda v: np.sign(v) * max(abs(v) - t, 0.0))(arg)
    np.testing.assert_allclose(update_s(st, cfg, y), want, atol=1e-15)
    no_l1 = dataclasses.replace(cfg, lam=0.0)
    np.testing.assert_array_equal(update_s(st, no_l1, y), arg)
    st.x = y - st.n + st.lam / st.beta
    assert np.all(update_s(st, cfg, y) == 0)


def test_update_z_matches_standalone_prox(rng):
    y, st, cfg = random_state(rng, (4, 4, 2))
    plan = build_weight_plan(y, eta=0.5)
    z = update_z(st, cfg, plan)
    for p in (1, 2, 3):
        mu = st.mu[p - 1]
        w, tw = plan.mode(p)
        want = dw_svt(permute_mode(st.x, p) + st.gamma[p - 1] / mu,
                      ShrinkSpec(cfg.alpha[p - 1] / mu, w, tw))
        np.testing.assert_array_equal(z[p - 1], want)


def test_update_z_limits(rng):
    y, st, cfg = random_state(rng)
    plan = build_weight_plan(y)
    st.gamma = [np.zeros_like(g) for g in st.gamma]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        only3 = dataclasses.replace(cfg, alpha=(0.0, 0.0, 1.0))
    z = update_z(st, only3, plan)
    for p in (1, 2):
        np.testing.assert_allclose(z[p - 1], permute_mode(st.x, p), atol=1e-10)
    y, st, cfg = random_state(rng)
    st.mu = np.full(3, 1e12)
    z = update_z(st, cfg, plan)
    for p in (1, 2, 3):
        np.testing.assert_allclose(z[p - 1], permute_mode(st.x, p) + st.gamma[p - 1] / 1e12, atol=1e-9)


def test_update_multipliers(rng):
    y, st, cfg = random_state(rng)
    g0 = [g.copy() for g in st.gamma]
    l0 = st.lam.copy()
    gamma, lam = update_multipliers(st, cfg, y)
    # negating both residuals undoes the step
    st2 = dataclasses.replace(st, gamma=gamma, lam=lam,
                              z=[2 * permute_mode(st.x, p) - st.z[p - 1] for p in (1, 2, 3)],
                              n=2 * (y - st.x - st.s) - st.n)
    back_g, back_l = update_multipliers(st2, cfg, y)
    for a, b in zip(back_g, g0):
        np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(back_l, l0, atol=1e-12)

    x = np.ones((2, 3, 4))
    st = init_state(x, cfg)
    st.z = [np.zeros_like(z) for z in st.z]
    st.mu = np.array([1.0, 2.0, 3.0])
    gamma, lam = update_multipliers(st, cfg, x)
    for p in (1, 2, 3):
        np.testing.assert_allclose(gamma[p - 1], p * np.ones(permute_mode(x, p).shape))
    assert np.all(lam == 0)


def test_zero_observation():
    res = denoise(np.zeros((4, 4, 3)))
    assert res.iterations == 1 and res.converged
    for a in (res.x_hat, res.s_hat, res.n_hat):
        assert np.all(a == 0)


def test_noiseless_recovery():
    x = cp_cube((16, 16, 8), 2, seed=0)
    res = denoise(x, SolverConfig(lam=10.0, tau_n=1e3))
    assert res.converged and res.iterations <= 100
    assert np.linalg.norm(res.x_hat - x) / np.linalg.norm(x) < 1e-3
    assert np.abs(res.s_hat).max() < 1e-6


def test_constraint_within_reported_residual(rng):
    y = rng.uniform(size=(8, 8, 5))
    res = denoise(y, SolverConfig(max_iter=30))
    gap = np.linalg.norm(y - res.x_hat - res.s_hat - res.n_hat) / np.linalg.norm(y)
    assert gap == pytest.approx(res.constraint_residual, rel=1e-9)
    assert len(res.history) == res.iterations


def test_small_case1_gain():
    x = cp_cube((30, 30, 10), 3, seed=5)
    y = apply_noise(x, case_spec(1, seed=1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        noisy = evaluate(x, y).mpsnr
        res = denoise(y)
    out = evaluate(x, res.x_hat).mpsnr
    assert out >= noisy + 12
    tail = [r.constraint for r in res.history[-10:]]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(tail, tail[1:]))


def test_tnn_reduction_tracks_slice_svt(rng):
    y = rng.uniform(size=(5, 4, 3))
    cfg = SolverConfig(alpha=(0, 0, 1), truncation="none", frequency_weighting=False).resolved(y.shape)
    plan = uniform_weight_plan(y.shape)
    st = init_state(y, cfg)
    for _ in range(5):
        st.z = update_z(st, cfg, plan)
        want = oracles.slice_svt_ref(st.x + st.gamma[2] / st.mu[2], 1.0 / st.mu[2])
        np.testing.assert_allclose(st.z[2], want, atol=1e-8)
        st.x = update_x(st, cfg, y)
        st.s = update_s(st, cfg, y)
        st.n = update_n(st, cfg, y)
        st.gamma, st.lam = update_multipliers(st, cfg, y)
        st.mu, st.beta = cfg.rho * st.mu, cfg.rho * st.beta


def test_callback_sees_every_iteration(rng):
    seen = []
    res = denoise(rng.uniform(size=(5, 4, 3)), SolverConfig(max_iter=7), callback=seen.append)
    assert [r.iteration for r in seen] == list(range(1, res.iterations + 1))


def test_determinism_and_threads(rng):
    y = rng.uniform(size=(10, 9, 6))
    cfg = SolverConfig(max_iter=15)
    a = denoise(y, cfg)
    b = denoise(y, cfg)
    c = denoise(y, dataclasses.replace(cfg, threads=3))
    assert np.array_equal(a.x_hat, b.x_hat) and np.array_equal(a.x_hat, c.x_hat)
    strip = [(r.constraint, r.consensus, r.change) for r in a.history]
    assert strip == [(r.constraint, r.consensus, r.change) for r in c.history]


def test_divergence_is_detected(monkeypatch, rng):
    import mdwtnn.solver as solver

    def poison(state, cfg, y):
        return np.full_like(y, np.nan)

    monkeypatch.setattr(solver, "update_n", poison)
    with pytest.raises(DivergenceError) as info:
        denoise(rng.uniform(size=(4, 4, 3)))
    assert info.value.iteration == 1 and info.value.variable == "n"


def test_rejects_non_finite_and_warns_on_range():
    y = np.zeros((3, 3, 3))
    y[0, 0, 0] = np.inf
    with pytest.raises(ValueError):
        denoise(y)
    with pytest.warns(UserWarning):
        denoise(np.full((3, 3, 3), 5.0), SolverConfig(max_iter=2))


def test_weight_refresh_options(rng):
    y = rng.uniform(size=(6, 6, 4))
    for kw in (dict(tw_init="zero", tw_refresh=2), dict(weight_refresh=False),
               dict(truncation="energy-ratio", eta=0.3)):
        res = denoise(y, SolverConfig(max_iter=6, **kw))
        assert np.all(np.isfinite(res.x_hat))
    res = denoise(y, SolverConfig(max_iter=6, tw_init="zero"))
    assert all(np.all(t == 0) for t in res.plan.trunc_counts)
