from __future__ import annotations

import math

import numpy as np
import pytest

from mixcode import model as M
from mixcode.represent import encode_label


def separable():
    """Eight bag-style vectors; class 1 puts more mass on coordinate 0."""
    X = np.array([
        [0.9, 0.1, 0.0, 0.0], [0.7, 0.1, 0.2, 0.0], [0.8, 0.0, 0.1, 0.1], [0.6, 0.2, 0.1, 0.1],
        [0.1, 0.5, 0.2, 0.2], [0.2, 0.3, 0.3, 0.2], [0.0, 0.4, 0.4, 0.2], [0.3, 0.1, 0.3, 0.3],
    ])
    y = np.array([1, 1, 1, 1, 0, 0, 0, 0])
    return X, y


def logistic_oracle(X, y, steps=5000, lr=1.0):
    # plain full-batch logistic regression, independent of the package
    Xb = np.hstack([X, np.ones((len(X), 1))])
    w = np.zeros(Xb.shape[1])
    for _ in range(steps):
        p = 1 / (1 + np.exp(-Xb @ w))
        w -= lr * Xb.T @ (p - y) / len(y)
    return np.mean((Xb @ w > 0) == y)


def fixed_provider(X, y, C):
    T = np.stack([encode_label(int(k), C) for k in y])
    return lambda epoch: (X, T)


def bag(inp=4, hidden=8, C=2, seed=0):
    return M.init(M.BAG, {"input": inp, "hidden": hidden}, C, seed)


def seq(L=5, V=6, embed=4, hidden=8, C=3, seed=0):
    return M.init(M.SEQ, {"seq_len": L, "vocab": V, "embed": embed, "hidden": hidden}, C, seed)


def test_parameter_count():
    m = M.init(M.BAG, {"input": 512, "hidden": 64}, 8, 0)
    assert m.parameter_count() == 512 * 64 + 64 + 64 * 8 + 8 == 33_352


def test_init_is_deterministic():
    a, b = bag(seed=3), bag(seed=3)
    assert all(a.params[k].tobytes() == b.params[k].tobytes() for k in a.params)
    assert not np.array_equal(a.params["W1"], bag(seed=4).params["W1"])


def test_init_glorot_bounds_and_zero_bias():
    m = M.init(M.BAG, {"input": 100, "hidden": 50}, 3, 0)
    assert np.abs(m.params["W1"]).max() <= math.sqrt(6 / 150)
    assert not m.params["b1"].any() and not m.params["b2"].any()


@pytest.mark.parametrize("kind,dims,C", [
    (M.BAG, {"input": 4}, 0),
    (M.BAG, {"input": 0}, 2),
    (M.SEQ, {"seq_len": 4}, 2),
    ("cnn", {"input": 4}, 2),
])
def test_invalid_dims(kind, dims, C):
    with pytest.raises(M.InvalidDims):
        M.init(kind, dims, C, 0)


def test_forward_sums_to_one():
    rng = np.random.default_rng(0)
    m = bag()
    p = M.forward(m, rng.random(4))
    assert (p > 0).all() and abs(p.sum() - 1) <= 1e-9
    s = seq()
    x = np.eye(6)[rng.integers(0, 6, 5)]
    assert abs(M.forward(s, x).sum() - 1) <= 1e-9


def test_forward_shape_mismatch():
    with pytest.raises(M.ShapeMismatch):
        M.forward(bag(), np.zeros(5))
    with pytest.raises(M.ShapeMismatch):
        M.predict(seq(), np.zeros((4, 6)))


def test_all_pad_sequence_is_well_defined():
    s = seq()
    x = np.zeros((5, 6))
    x[:, 0] = 1.0
    p = M.forward(s, x)
    # mean of identical pad rows is the pad row, whose embedding is E[0]
    h = np.maximum(s.params["E"][0] @ s.params["W1"] + s.params["b1"], 0)
    z = h @ s.params["W2"] + s.params["b2"]
    assert np.allclose(p, np.exp(z) / np.exp(z).sum())


def test_zero_weights_give_uniform_output():
    m = bag(C=5)
    for k in m.params:
        m.params[k][...] = 0.0
    assert np.allclose(M.forward(m, np.ones(4)), 0.2)


def test_loss_examples():
    assert M.loss([0.25, 0.7, 0.05], [0.2, 0.8, 0.0]) == pytest.approx(
        -(0.2 * math.log(0.25) + 0.8 * math.log(0.7)))
    # the formula gives 0.562599, which is 0.56258 up to the last printed digit
    assert M.loss([0.25, 0.7, 0.05], [0.2, 0.8, 0.0]) == pytest.approx(0.5626, abs=5e-5)
    assert M.loss(np.full(4, 0.25), [0.1, 0.2, 0.3, 0.4]) == pytest.approx(math.log(4))
    # smoothed one-hot: loss shrinks towards 0 as probs approach the target
    values = [M.loss([1 - e, e], [1.0, 0.0]) for e in (1e-1, 1e-3, 1e-6)]
    assert values == sorted(values, reverse=True) and values[-1] < 1e-5
    with pytest.raises(M.ShapeMismatch):
        M.loss([0.5, 0.5], [1.0, 0.0, 0.0])


def test_separable_dataset_reaches_full_accuracy():
    X, y = separable()
    assert logistic_oracle(X, y) == 1.0
    m = bag(seed=1)
    trained, trace = M.fit(m, fixed_provider(X, y, 2), M.TrainConfig(epochs=50))
    assert np.mean(M.predict_batch(trained, X) == y) == 1.0
    assert trace.loss[-1] < trace.loss[0]
    assert len(trace.loss) == len(trace.heldout_acc) == 50


def test_separable_dataset_with_sgd():
    X, y = separable()
    trained, trace = M.fit(bag(seed=1), fixed_provider(X, y, 2),
                           M.TrainConfig(epochs=50, optimizer="sgd", learning_rate=1.0))
    assert trace.loss[-1] < trace.loss[0]
    assert np.mean(M.predict_batch(trained, X) == y) == 1.0


def test_fit_leaves_input_untouched():
    X, y = separable()
    m = bag()
    before = m.params["W1"].copy()
    M.fit(m, fixed_provider(X, y, 2), M.TrainConfig(epochs=2))
    assert np.array_equal(m.params["W1"], before)


@pytest.mark.parametrize("kwargs", [
    {"epochs": 0}, {"learning_rate": 0.0}, {"batch_size": 0}, {"optimizer": "rmsprop"},
])
def test_train_config_rejects(kwargs):
    with pytest.raises(ValueError):
        M.TrainConfig(**kwargs)


def test_fit_is_deterministic():
    X, y = separable()
    cfg = M.TrainConfig(epochs=10, batch_size=3)
    a = M.fit(bag(seed=2), fixed_provider(X, y, 2), cfg, heldout=(X, y))
    b = M.fit(bag(seed=2), fixed_provider(X, y, 2), cfg, heldout=(X, y))
    assert a[1] == b[1]
    assert all(np.array_equal(a[0].params[k], b[0].params[k]) for k in a[0].params)


def test_divergence_is_reported():
    X, y = separable()
    with pytest.raises(M.DivergedError), np.errstate(invalid="ignore"):
        M.fit(bag(), fixed_provider(X * np.inf, y, 2), M.TrainConfig(epochs=1))


def test_predict_examples_and_ties():
    m = bag(C=3)
    for k in m.params:
        m.params[k][...] = 0.0
    m.params["b2"][:] = np.log([0.1, 0.7, 0.2])
    assert M.predict(m, np.zeros(4)) == 1
    t = bag(C=2)
    for k in t.params:
        t.params[k][...] = 0.0
    assert M.predict(t, np.zeros(4)) == 0


def numeric_grad(model, X, T, key, h=1e-5):
    g = np.zeros_like(model.params[key])
    it = np.nditer(g, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = model.params[key][i]
        model.params[key][i] = old + h
        up, _ = M.loss_and_grads(model, X, T)
        model.params[key][i] = old - h
        down, _ = M.loss_and_grads(model, X, T)
        model.params[key][i] = old
        g[i] = (up - down) / (2 * h)
    return g


def rel_error(a, b):
    return np.abs(a - b).max() / max(np.abs(a).max(), np.abs(b).max(), 1e-8)


@pytest.mark.parametrize("make", [bag, seq])
def test_gradients_match_finite_differences(make):
    rng = np.random.default_rng(9)
    m = make(C=3, seed=5)
    B = 4
    if m.kind == M.BAG:
        X = rng.random((B, 4))
    else:
        X = np.eye(6)[rng.integers(0, 6, (B, 5))]
    T = rng.dirichlet(np.ones(3), B)
    _, grads = M.loss_and_grads(m, X, T)
    assert set(grads) == set(m.params)
    for k in m.params:
        assert rel_error(grads[k], numeric_grad(m, X, T, k)) <= 1e-4, k


def test_logit_gradient_is_probs_minus_target():
    # the output-bias gradient is the batch mean of probs - target
    rng = np.random.default_rng(1)
    m = bag(C=3)
    X = rng.random((5, 4))
    T = rng.dirichlet(np.ones(3), 5)
    _, g = M.loss_and_grads(m, X, T)
    assert np.allclose(g["b2"], (M.forward_batch(m, X) - T).mean(axis=0))


def test_log_softmax_is_stable():
    z = np.array([[100.0, -100.0, 0.0], [-100.0, -100.0, -100.0], [100.0, 100.0, 99.0]])
    out = M.log_softmax(z)
    assert np.isfinite(out).all()
    assert np.allclose(np.exp(out).sum(axis=1), 1.0)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    for m in (bag(seed=7), seq(seed=7)):
        X, y = (rng.random((6, 4)), rng.integers(0, 2, 6)) if m.kind == M.BAG else \
            (np.eye(6)[rng.integers(0, 6, (6, 5))], rng.integers(0, 3, 6))
        trained, _ = M.fit(m, fixed_provider(X, y, m.num_classes), M.TrainConfig(epochs=3))
        path = tmp_path / f"{m.kind}.json"
        M.save(trained, path, extra={"note": "x"})
        back, doc = M.load(path)
        assert doc["note"] == "x"
        for k in trained.params:
            assert back.params[k].tobytes() == trained.params[k].tobytes()
        assert M.forward_batch(back, X).tobytes() == M.forward_batch(trained, X).tobytes()
        M.save(back, tmp_path / "again.json", extra={"note": "x"})
        assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_checkpoint_rejects_bad_documents():
    doc = M.to_document(bag())
    with pytest.raises(ValueError):
        M.from_document({**doc, "format_version": 99})
    broken = {**doc, "weights": {k: v for k, v in doc["weights"].items() if k != "W2"}}
    with pytest.raises(ValueError):
        M.from_document(broken)
