import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mdwtnn.linalg import psvt
from mdwtnn.prox import ShrinkSpec, check_alpha, dw_svt, dwtnn, fwtnn, mdwtnn, tnn
from mdwtnn.synthetic import t_product
from mdwtnn.tensor_core import fft_mode3, permute_mode
from mdwtnn.weights import build_weight_plan, frequency_weights, slice_singular_values


def spec(n3, tau=0.5, w=None, tw=None):
    return ShrinkSpec(tau, np.ones(n3) if w is None else w,
                      np.zeros(n3, dtype=int) if tw is None else tw)


def low_rank(rng, shape, r):
    n1, n2, n3 = shape
    return t_product(rng.standard_normal((n1, r, n3)), rng.standard_normal((r, n2, n3)))


def test_tau_zero_is_identity(rng):
    y = rng.standard_normal((5, 4, 6))
    np.testing.assert_allclose(dw_svt(y, spec(6, tau=0.0)), y, atol=1e-10)


def test_single_slice_reduces_to_psvt(rng):
    y = rng.standard_normal((6, 5, 1))
    out = dw_svt(y, ShrinkSpec(0.8, [1.0], [2]))
    np.testing.assert_allclose(out[:, :, 0], psvt(y[:, :, 0], 0.8, 2).real, atol=1e-10)


@pytest.mark.parametrize("n3", [1, 2, 5, 8])
def test_plain_weights_match_slice_svt(rng, n3):
    y = rng.standard_normal((6, 4, n3))
    np.testing.assert_allclose(dw_svt(y, spec(n3, tau=0.9)), oracles.slice_svt_ref(y, 0.9), atol=1e-10)


def test_local_optimality(rng):
    y = low_rank(rng, (8, 8, 4), 2) + 0.1 * rng.standard_normal((8, 8, 4))
    w = frequency_weights(fft_mode3(y), 1.0, 0.5)
    tw = np.array([1, 0, 2, 0])
    tau = 0.4
    out = dw_svt(y, ShrinkSpec(tau, w, tw))

    def objective(x):
        return tau * oracles.dwtnn_ref(x, w, tw) + 0.5 * np.sum((x - y) ** 2)

    best = objective(out)
    assert best <= objective(y)
    for _ in range(1000):
        d = rng.standard_normal(y.shape)
        assert objective(out + 1e-2 * d / np.linalg.norm(d)) >= best - 1e-12


def test_spec_validation():
    with pytest.raises(ValueError):
        ShrinkSpec(-1.0, [1.0], [0])
    with pytest.raises(ValueError):
        ShrinkSpec(1.0, [1.0, 1.0], [0])
    with pytest.raises(ValueError):
        ShrinkSpec(1.0, [1.0], [-1])
    with pytest.raises(ValueError):
        dw_svt(np.zeros((2, 2, 3)), ShrinkSpec(1.0, [1.0, 1.0], [0, 0]))


def test_tnn_of_repeated_slice(rng):
    a = rng.standard_normal((4, 3))
    x = np.repeat(a[:, :, None], 5, axis=2)
    assert tnn(x) == pytest.approx(oracles.gram_singular_values(a).sum(), abs=1e-10)
    assert tnn(np.zeros((3, 3, 3))) == 0
    assert tnn(2.5 * x) == pytest.approx(2.5 * tnn(x), rel=1e-12)


def test_fwtnn(rng):
    x = rng.standard_normal((4, 5, 6))
    assert fwtnn(x, np.full(6, 1 / 6)) == pytest.approx(tnn(x), abs=1e-10)
    assert fwtnn(x, np.zeros(6)) == 0
    w = frequency_weights(fft_mode3(x), 1.0, 0.1)
    xb = oracles.to_freq(x)
    hand = sum(w[k] * oracles.gram_singular_values(xb[:, :, k]).sum() for k in range(6))
    assert fwtnn(x, w) == pytest.approx(hand, rel=1e-10)
    with pytest.raises(ValueError):
        fwtnn(x, np.ones(5))


def test_dwtnn_frozen(frozen):
    case = frozen["dwtnn_6x6x3"]
    x = np.array(case["x"])
    assert dwtnn(x, case["w"], case["tw"]) == pytest.approx(case["value"], abs=1e-10)
    assert dwtnn(x, np.ones(3), np.full(3, 6)) == 0
    with pytest.raises(ValueError):
        dwtnn(x, np.ones(3), np.zeros(2, dtype=int))


def test_mdwtnn_composition(rng):
    x = rng.standard_normal((4, 5, 6))
    plan = build_weight_plan(x, eta=0.3)
    alpha = (0.2, 0.3, 0.5)
    parts = [oracles.dwtnn_ref(oracles.permute(x, p), *plan.mode(p)) for p in (1, 2, 3)]
    assert mdwtnn(x, alpha, plan) == pytest.approx(np.dot(alpha, parts), abs=1e-10)
    assert mdwtnn(np.zeros((4, 5, 6)), (1 / 3, 1 / 3, 1 / 3), plan) == 0


def test_alpha_validation():
    with pytest.raises(ValueError):
        check_alpha((0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        check_alpha((-0.1, 0.6, 0.5))
    with pytest.raises(ValueError):
        check_alpha((0.5, 0.5))
    with pytest.warns(UserWarning):
        check_alpha((0, 0, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_alpha((0.2, 0.3, 0.5))


seeds = st.integers(0, 2**32 - 1)
shapes = st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 7))


def random_spec(rng, y, tau):
    n3 = y.shape[2]
    w = frequency_weights(fft_mode3(y), 1.0, rng.uniform(0, 1))
    tw = rng.integers(0, min(y.shape[:2]) + 1, size=n3)
    tw = np.minimum(tw, tw[(-np.arange(n3)) % n3])  # mirror-consistent counts
    return ShrinkSpec(tau, w, tw)


@given(shapes, seeds, st.floats(0.01, 3.0))
def test_prop_shrink_rule(shape, seed, tau):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(shape)
    sp = random_spec(rng, y, tau)
    s_in = slice_singular_values(y)
    s_out = slice_singular_values(dw_svt(y, sp))
    for k in range(shape[2]):
        r = min(sp.trunc_counts[k], s_in.shape[1])
        want = np.concatenate([s_in[k, :r], np.maximum(s_in[k, r:] - tau * sp.freq_weights[k], 0)])
        np.testing.assert_allclose(s_out[k], np.sort(want)[::-1], atol=1e-8)


@given(shapes, seeds, st.floats(0.01, 3.0))
def test_prop_shrinkage_never_increases_norm(shape, seed, tau):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(shape)
    sp = random_spec(rng, y, tau)
    assert dwtnn(dw_svt(y, sp), sp.freq_weights, sp.trunc_counts) <= \
        dwtnn(y, sp.freq_weights, sp.trunc_counts) + 1e-10


@given(seeds, st.integers(1, 3), st.floats(0.01, 3.0))
def test_prop_identity_on_exempt_cube(seed, r, tau):
    rng = np.random.default_rng(seed)
    y = low_rank(rng, (6, 5, 4), r)
    sp = ShrinkSpec(tau, np.ones(4), np.full(4, r))
    np.testing.assert_allclose(dw_svt(y, sp), y, atol=1e-10)


@given(shapes, seeds, st.floats(0.0, 2.0))
def test_prop_reductions(shape, seed, tau):
    x = np.random.default_rng(seed).standard_normal(shape)
    n3 = shape[2]
    t = tnn(x)
    assert abs(dwtnn(x, np.ones(n3), np.zeros(n3, dtype=int)) - t) <= 1e-10 * max(1, t)
    assert abs(fwtnn(x, np.full(n3, 1 / n3)) - t) <= 1e-10 * max(1, t)
    plan = build_weight_plan(x, eta=0.4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = mdwtnn(x, (0, 0, 1), plan)
    assert abs(m - dwtnn(permute_mode(x, 3), *plan.mode(3))) <= 1e-10 * max(1, m)
