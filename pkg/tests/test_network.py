import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsc.dsp import DemodKernel, build_weighted_kernel, classify_dsp, demodulate, fit_bisector
from qsc.errors import ConfigError, FitError, ShapeError
from qsc.network import (FeatureScaler, QscModel, TrainConfig, classify_qsc, fit_feature_scaler, forward,
                         init_from_dsp, loss_and_gradient, train)
from qsc.signal import BasisState, SignalModelConfig, generate_dataset


def model_from(params, n):
    w1, b1, w2, b2 = params
    return QscModel(FeatureScaler.identity(n), w1, b1, w2, b2)


def oracle_loss(w1, b1, w2, b2, x, labels):
    """Plain-loop logistic loss, used for finite differences."""
    total = 0.0
    for xi, li in zip(x, labels):
        h = [sum(w1[r, k] * xi[k] for k in range(len(xi))) + b1[r] for r in range(2)]
        p = w2[0] * np.tanh(h[0]) + w2[1] * np.tanh(h[1]) + b2
        y = 1.0 if li else -1.0
        total += np.log1p(np.exp(-y * p))
    return total / len(x)


# ---- scaler -------------------------------------------------------------------

def test_constant_dataset_scale_floored():
    sc = fit_feature_scaler(np.full((5, 3), 2.5))
    assert np.all(sc.scale == 1e-12)
    assert np.all(sc(np.full((5, 3), 2.5)) == 0)


def test_two_shot_statistics():
    sc = fit_feature_scaler(np.array([np.zeros(4), np.full(4, 2.0)]))
    assert sc.shift.tolist() == [1.0] * 4
    assert sc.scale.tolist() == [1.0] * 4


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 40), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_scaled_training_set_is_standardised(m, n, seed):
    x = np.random.default_rng(seed).normal(3.0, 2.0, (m, n))
    z = fit_feature_scaler(x)(x)
    assert np.all(np.abs(z.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(z.var(axis=0) - 1) < 1e-9)


def test_scaler_validation():
    with pytest.raises(ShapeError):
        FeatureScaler(np.zeros(3), np.zeros(3))
    with pytest.raises(ShapeError):
        fit_feature_scaler(np.zeros((0, 4)))


# ---- forward ---------------------------------------------------------------------

def test_zero_network():
    m = model_from((np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0), 3)
    assert forward(m, np.ones(3)) == 0.0
    assert classify_qsc(m, np.ones(3)) == 0


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_input_independent_path(u, v, a, b, d):
    m = model_from((np.zeros((2, 4)), [u, v], [a, b], d), 4)
    x = np.random.default_rng(0).normal(size=(3, 4))
    np.testing.assert_allclose(forward(m, x), a * np.tanh(u) + b * np.tanh(v) + d, atol=1e-12)


def test_hand_set_two_by_two():
    m = model_from((np.eye(2), np.zeros(2), np.ones(2), 0.0), 2)
    assert forward(m, [1.0, -1.0]) == 0.0
    assert classify_qsc(m, [1.0, -1.0]) == 0
    assert classify_qsc(m, [1.0, -0.5]) == 1


def test_model_shape_checks():
    with pytest.raises(ShapeError):
        model_from((np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0), 4)
    with pytest.raises(ShapeError):
        model_from((np.full((2, 3), np.nan), np.zeros(2), np.zeros(2), 0.0), 3)
    m = model_from((np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0), 3)
    with pytest.raises(ShapeError):
        forward(m, np.ones(4))


def test_effective_kernel_reproduces_hidden_layer():
    rng = np.random.default_rng(1)
    sc = FeatureScaler(rng.normal(size=6), rng.uniform(0.5, 2, 6))
    m = QscModel(sc, rng.normal(size=(2, 6)), rng.normal(size=2), rng.normal(size=2), 0.1)
    x = rng.normal(size=(10, 6))
    np.testing.assert_allclose(demodulate(m.effective_kernel(), x), m.hidden(x), rtol=1e-12, atol=1e-12)


# ---- loss and gradient ---------------------------------------------------------------

def test_zero_margin_loss_is_ln2():
    m = model_from((np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0), 3)
    loss, _ = loss_and_gradient(m, (np.ones((4, 3)), [0, 1, 1, 0]))
    assert loss == pytest.approx(np.log(2), abs=1e-15)


def test_saturated_loss():
    x = np.array([[1.0, 0], [-1.0, 0]])
    m = model_from((np.eye(2) * 50, np.zeros(2), [30.0, 0.0], 0.0), 2)
    assert np.all(np.abs(forward(m, x)) >= 20)
    loss, g = loss_and_gradient(m, (x, [1, 0]))
    norm = np.sqrt(sum(np.sum(np.square(v)) for v in g.values()))
    assert loss < 1e-8 and norm < 1e-7


def test_loss_is_overflow_safe():
    m = model_from((np.eye(2), np.zeros(2), [1e6, 0.0], 0.0), 2)
    loss, g = loss_and_gradient(m, ([[1.0, 0.0]], [0]))
    assert np.isfinite(loss) and loss == pytest.approx(1e6 * np.tanh(1.0))
    assert all(np.all(np.isfinite(v)) for v in g.values())


def test_empty_batch_rejected():
    m = model_from((np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0), 3)
    with pytest.raises(ConfigError):
        loss_and_gradient(m, (np.zeros((0, 3)), []))


def finite_difference_check(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 9), rng.integers(1, 17)
    x = rng.normal(size=(m, n))
    labels = rng.integers(0, 2, m)
    params = [rng.normal(size=(2, n)), rng.normal(size=2), rng.normal(size=2), float(rng.normal())]
    _, grads = loss_and_gradient(model_from(params, n), (x, labels))
    h = 1e-6
    worst = 0.0
    for pi, key in enumerate(("w1", "b1", "w2", "b2")):
        base = np.array(params[pi], dtype=float)
        num = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += h
            minus[idx] -= h
            pp = list(params); pp[pi] = plus
            pm = list(params); pm[pi] = minus
            num[idx] = (oracle_loss(*pp, x, labels) - oracle_loss(*pm, x, labels)) / (2 * h)
        ana = np.asarray(grads[key])
        worst = max(worst, np.max(np.abs(ana - num)) / max(np.max(np.abs(num)), 1e-12))
    return worst


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    assert finite_difference_check(seed) < 1e-6


def test_gradient_invariant_to_shot_order():
    rng = np.random.default_rng(3)
    x, labels = rng.normal(size=(50, 5)), rng.integers(0, 2, 50)
    m = model_from((rng.normal(size=(2, 5)), rng.normal(size=2), rng.normal(size=2), 0.2), 5)
    perm = rng.permutation(50)
    la, ga = loss_and_gradient(m, (x, labels))
    lb, gb = loss_and_gradient(m, (x[perm], labels[perm]))
    assert la == pytest.approx(lb, rel=1e-13)
    for key in ga:
        np.testing.assert_allclose(ga[key], gb[key], rtol=1e-12, atol=1e-15)


# ---- initialisation ---------------------------------------------------------------------

def test_symmetric_clouds_need_no_bias():
    x = np.array([[-1.0, 0.5], [1.0, -0.5], [-2.0, 1.0], [2.0, -1.0]])
    m = init_from_dsp(DemodKernel(np.eye(2)), FeatureScaler.identity(2), (x, [0, 1, 0, 1]))
    np.testing.assert_allclose(m.b1, 0.0, atol=1e-15)


def test_centroid_example():
    x = np.array([[1.0, 0.0], [3.0, 2.0]])
    m = init_from_dsp(DemodKernel(np.eye(2)), FeatureScaler.identity(2), (x, [0, 1]))
    gamma = 0.2 / np.sqrt(2)  # half the centroid distance maps to 0.2
    np.testing.assert_allclose(m.w1, gamma * np.eye(2), rtol=1e-12)
    np.testing.assert_allclose(m.b1 / gamma, [-2.0, -1.0], rtol=1e-12)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose([*m.w2, m.b2], [r, r, 0.0], atol=1e-12)
    assert classify_qsc(m, x).tolist() == [0, 1]


def test_init_absorbs_scaler():
    rng = np.random.default_rng(4)
    kernel = DemodKernel(rng.normal(size=(2, 6)))
    x = rng.normal(size=(40, 6))
    labels = np.r_[np.zeros(20), np.ones(20)].astype(int)
    x[labels == 1] += 0.8
    sc = fit_feature_scaler(x)
    m = init_from_dsp(kernel, sc, (x, labels))
    # hidden layer is an affine image of the kernel's I-Q plane, scaled to radius 0.2
    iq = demodulate(kernel, x)
    mid = 0.5 * (iq[labels == 0].mean(axis=0) + iq[labels == 1].mean(axis=0))
    gamma = 0.2 / (0.5 * np.linalg.norm(iq[labels == 1].mean(axis=0) - iq[labels == 0].mean(axis=0)))
    np.testing.assert_allclose(m.hidden(x), gamma * (iq - mid), rtol=1e-10, atol=1e-12)


def test_init_errors():
    with pytest.raises(FitError):
        init_from_dsp(DemodKernel(np.eye(2)), FeatureScaler.identity(2), (np.ones((3, 2)), [1, 1, 1]))
    with pytest.raises(FitError):
        init_from_dsp(DemodKernel(np.eye(2)), FeatureScaler.identity(2), (np.ones((2, 2)), [0, 1]))
    with pytest.raises(ShapeError):
        init_from_dsp(DemodKernel(np.eye(2)), FeatureScaler.identity(3), (np.ones((2, 2)), [0, 1]))


@pytest.fixture(scope="module")
def small_readout():
    kappa = np.zeros((6, 6))
    kappa[2, 1] = kappa[2, 3] = 0.1
    cfg = SignalModelConfig(crosstalk=kappa, noise_sigma=6.0, seed=9)
    states = [BasisState.from_string(s) for s in ("000000", "001000", "010000", "011000",
                                                  "000100", "001100", "010100", "011100")]
    ds = generate_dataset(cfg, 150, states, 2)
    return ds, build_weighted_kernel(ds, 2, 540e6)


def test_init_agrees_with_dsp_chain(small_readout):
    ds, kernel = small_readout
    m = init_from_dsp(kernel, fit_feature_scaler(ds), ds)
    line = fit_bisector(demodulate(kernel, ds.samples), ds.labels)
    agree = np.mean(classify_qsc(m, ds.samples) == classify_dsp(kernel, line, ds.samples))
    assert agree >= 0.99


# ---- training ------------------------------------------------------------------------------

def test_zero_iterations_is_a_no_op(small_readout):
    ds, kernel = small_readout
    m0 = init_from_dsp(kernel, fit_feature_scaler(ds), ds)
    m, trace = train(m0, ds, TrainConfig(iterations=0))
    assert trace.loss == []
    np.testing.assert_array_equal(classify_qsc(m, ds.samples), classify_qsc(m0, ds.samples))
    np.testing.assert_array_equal(m.w1, m0.w1)


def test_training_leaves_input_model_untouched(small_readout):
    ds, kernel = small_readout
    m0 = init_from_dsp(kernel, fit_feature_scaler(ds), ds)
    w1 = m0.w1.copy()
    train(m0, ds, TrainConfig(iterations=3))
    np.testing.assert_array_equal(m0.w1, w1)


def test_training_is_bit_deterministic(small_readout):
    ds, kernel = small_readout
    m0 = init_from_dsp(kernel, fit_feature_scaler(ds), ds)
    a, ta = train(m0, ds, TrainConfig(iterations=40))
    b, tb = train(m0, ds, TrainConfig(iterations=40))
    assert a.w1.tobytes() == b.w1.tobytes() and a.b2 == b.b2
    assert ta.loss == tb.loss and len(ta.loss) == 40


def test_training_reduces_loss(small_readout):
    ds, kernel = small_readout
    m0 = init_from_dsp(kernel, fit_feature_scaler(ds), ds)
    _, trace = train(m0, ds, TrainConfig(iterations=200))
    assert trace.final_loss <= trace.loss[0]


def exhaustive_separable(x, labels, n_angle=720):
    """Brute-force search over lines through pairs' bisectors for a separating direction."""
    for th in np.linspace(0, np.pi, n_angle, endpoint=False):
        for v in (np.array([np.cos(th), np.sin(th)]), -np.array([np.cos(th), np.sin(th)])):
            p = x @ v
            if p[labels == 1].min() > p[labels == 0].max():
                return True
    return False


def test_four_shot_toy_reaches_full_accuracy():
    x = np.array([[1.0, 0.2, -0.3, 0.5], [0.8, -0.1, 0.4, 0.2], [-0.6, 0.3, 0.1, -0.9], [-1.1, -0.2, 0.2, -0.4]])
    labels = np.array([1, 1, 0, 0])
    # separable in the plane of the first and last samples
    assert exhaustive_separable(x[:, [0, 3]], labels)
    kernel = DemodKernel(np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]))  # deliberately poor start
    m0 = init_from_dsp(kernel, fit_feature_scaler(x), (x, labels))
    m, trace = train(m0, (x, labels), TrainConfig(iterations=500, lr=0.01))
    assert trace.final_accuracy == 1.0
    assert np.all(classify_qsc(m, x) == labels)


def test_train_config_validation():
    for kw in (dict(iterations=-1), dict(lr=0.0), dict(rho=1.0)):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"iterations": 5, "momentum": 0.9})
    cfg = TrainConfig(iterations=7, lr=0.02)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
