import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mploss import dispatch
from mploss.data import Dataset, generate_synthetic
from mploss.dispatch import CANONICAL, DEFICIT_DEAR
from mploss.errors import DimensionMismatch, SpecMismatch
from mploss.loss_synth import loss_eval, synthesize_loss
from mploss.train_eval import (MlpModel, TrainConfig, ams, diffopt_slopes, rmse, train_diffopt, train_quality,
                               train_value)

C = CANONICAL.wind_capacity


class Fixed:
    """Stand-in model returning preset forecasts."""

    def __init__(self, yhat):
        self.yhat = np.asarray(yhat, dtype=float)

    def predict(self, features):
        return self.yhat


def tiny_dataset(y, l):
    n = len(y)
    return Dataset(np.zeros((n, 4)), y, l, [str(i) for i in range(n)])


@pytest.fixture(scope="module")
def data():
    return generate_synthetic(256, C, CANONICAL.load_range, seed=5)


def test_zero_weights_give_half_capacity():
    m = MlpModel.init(C, hidden=(3,), seed=0)
    for p in m.params:
        p[...] = 0.0
    np.testing.assert_array_equal(m.predict(np.ones((2, 4))), [C / 2, C / 2])


def test_single_neuron_forward_by_hand():
    m = MlpModel.init(C, hidden=(), seed=0, feat_mean=[1, 2, 3, 4], feat_std=[2, 2, 2, 2])
    m.params[0][:, 0] = [0.5, -0.25, 0.1, 0.0]
    m.params[1][0] = 0.3
    s = np.array([3.0, 0.0, 5.0, 9.0])
    z = 0.5 * 1.0 + -0.25 * -1.0 + 0.1 * 1.0 + 0.3
    assert abs(m.predict(s)[0] - C / (1 + np.exp(-z))) <= 1e-12


def test_feature_count_checked():
    with pytest.raises(DimensionMismatch):
        MlpModel.init(C, hidden=(3,)).predict(np.ones((1, 5)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 50.0))
def test_forecasts_stay_in_capacity(seed, scale):
    m = MlpModel.init(C, hidden=(5, 5), seed=seed)
    for p in m.params:
        p *= scale
    yhat = m.predict(np.random.default_rng(seed).normal(size=(50, 4)) * 10)
    assert np.all((yhat >= 0) & (yhat <= C))


def _param_fd(model, f, h=1e-6):
    base = model.vector()
    out = np.empty_like(base)
    for i in range(base.size):
        v = base.copy()
        v[i] += h
        model.set_vector(v)
        up = f(model)
        v[i] -= 2 * h
        model.set_vector(v)
        out[i] = (up - f(model)) / (2 * h)
    model.set_vector(base)
    return out


def test_backward_matches_finite_difference_for_both_losses(canonical_loss, data):
    m = MlpModel.for_dataset(data, C, hidden=(6, 5), seed=2)
    s, l, y = data.features[:1], data.l[0], data.y[0]
    yhat, cache = m._forward(s)
    # MSE
    g = np.concatenate([x.ravel() for x in m.backward(cache, 2 * (yhat - y))])
    fd = _param_fd(m, lambda mm: float((mm.predict(s)[0] - y) ** 2))
    np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-8)
    # derived loss
    slope = canonical_loss.grad_yhat(yhat, l, y)
    g = np.concatenate([x.ravel() for x in m.backward(cache, slope)])
    fd = _param_fd(m, lambda mm: loss_eval(canonical_loss, mm.predict(s)[0], l, y))
    np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-6)


def test_first_adam_step_on_one_sample(canonical_loss, data):
    m = MlpModel.for_dataset(data, C, hidden=(6,), seed=3)
    one = data[:1]
    cfg = TrainConfig(learning_rate=1e-3, batch_size=1, epochs=1, hidden=(6,))
    trained, _ = train_value(m, one, canonical_loss, cfg, CANONICAL)
    fd = _param_fd(m, lambda mm: loss_eval(canonical_loss, mm.predict(one.features)[0], one.l[0], one.y[0]))
    # first Adam step: m_hat = g, v_hat = g^2
    expected = -cfg.learning_rate * fd / (np.abs(fd) + cfg.eps)
    step = trained.vector() - m.vector()
    big = np.abs(fd) > 1e-3
    assert big.any()
    np.testing.assert_allclose(step[big], expected[big], rtol=1e-4)


def test_zero_epochs_is_identity(canonical_loss, data):
    m = MlpModel.for_dataset(data, C, hidden=(4,), seed=1)
    cfg = TrainConfig(epochs=0, hidden=(4,))
    for trained, _ in (train_quality(m, data, cfg), train_value(m, data, canonical_loss, cfg, CANONICAL),
                       train_diffopt(m, data, CANONICAL, cfg)):
        np.testing.assert_array_equal(trained.vector(), m.vector())


def test_training_is_deterministic(canonical_loss, data):
    m = MlpModel.for_dataset(data, C, hidden=(8,), seed=1)
    cfg = TrainConfig(epochs=2, batch_size=32, hidden=(8,), seed=9)
    a, ma = train_value(m, data, canonical_loss, cfg, CANONICAL)
    b, mb = train_value(m, data, canonical_loss, cfg, CANONICAL)
    assert a.vector().tobytes() == b.vector().tobytes()
    assert ma.rmse == mb.rmse


def test_quality_loss_decreases_on_constant_target():
    rng = np.random.default_rng(0)
    ds = Dataset(rng.normal(size=(200, 4)), np.full(200, 7.0), np.full(200, 50.0), [""] * 200)
    m = MlpModel.for_dataset(ds, C, hidden=(16,), seed=0)
    _, metrics = train_quality(m, ds, TrainConfig(epochs=5, batch_size=50, hidden=(16,), learning_rate=1e-2))
    assert all(b < a for a, b in zip(metrics.loss_trace, metrics.loss_trace[1:]))


def test_value_and_diffopt_slopes_agree(canonical_loss):
    rng = np.random.default_rng(11)
    yhat, l, y = rng.uniform(0, C, 200), rng.uniform(40, 60, 200), rng.uniform(0, C, 200)
    _, slope = diffopt_slopes(CANONICAL, yhat, l, y)
    np.testing.assert_allclose(slope, canonical_loss.grad_yhat(yhat, l, y), atol=1e-8)


def test_value_training_rejects_foreign_loss(canonical_loss, data):
    m = MlpModel.for_dataset(data, C, hidden=(4,))
    with pytest.raises(SpecMismatch):
        train_value(m, data, canonical_loss, TrainConfig(epochs=1), DEFICIT_DEAR)
    with pytest.raises(SpecMismatch):
        train_value(MlpModel.for_dataset(data, 20.0, hidden=(4,)), data, canonical_loss, TrainConfig(epochs=1))


def test_rmse_hand_values():
    ds = tiny_dataset([1.0, 2.0, 4.0], [50, 50, 50])
    assert rmse(Fixed([1.0, 2.0, 4.0]), ds) == 0.0
    assert rmse(Fixed([3.5, 4.5, 6.5]), ds) == pytest.approx(2.5, abs=1e-12)
    assert rmse(Fixed([2.0, 2.0, 1.0]), ds) == pytest.approx(np.sqrt(10 / 3), abs=1e-12)


def test_ams_hand_values(canonical_loss):
    assert ams(Fixed([10.0]), tiny_dataset([10.0], [50.0]), CANONICAL) == pytest.approx(600.0, abs=1e-9)
    ds = tiny_dataset([10.0, 25.0], [50.0, 50.0])
    assert ams(Fixed([15.0, 10.0]), ds, CANONICAL) == pytest.approx(662.5, abs=1e-9)
    rng = np.random.default_rng(2)
    ds = tiny_dataset(rng.uniform(0, C, 40), rng.uniform(40, 60, 40))
    yhat = rng.uniform(0, C, 40)
    ref = np.mean(canonical_loss.evaluate(yhat, ds.l, ds.y))
    assert ams(Fixed(yhat), ds, CANONICAL) == pytest.approx(ref, rel=1e-6)


def test_value_model_predicts_less_when_deficit_is_dear():
    spec = DEFICIT_DEAR
    ds = generate_synthetic(1000, spec.wind_capacity, spec.load_range, seed=1)
    cfg = TrainConfig.desk(epochs=40)
    init = MlpModel.for_dataset(ds, spec.wind_capacity, cfg.hidden, seed=0)
    mq, _ = train_quality(init, ds, cfg)
    mv, _ = train_value(init, ds, synthesize_loss(spec), cfg, spec)
    assert mv.predict(ds.features).mean() < mq.predict(ds.features).mean()
    assert ams(mv, ds, spec) <= ams(mq, ds, spec)


def test_checkpoint_round_trip(data):
    m = MlpModel.for_dataset(data, C, hidden=(4, 3), seed=4)
    again = MlpModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(again.predict(data.features), m.predict(data.features))
    assert again.hidden == (4, 3)
