"""Neural engine: forward passes, loss, backprop, SGD, training loop,
gradient checks, and checkpoint files."""

import math

import numpy as np
import pytest

from moodtunes.nn import (
    Conv1dSpec,
    Conv2dSpec,
    DenseSpec,
    EmbeddingSpec,
    EmptyDataset,
    GlobalMaxPoolSpec,
    IndexOutOfRange,
    MaxPool2dSpec,
    Model,
    ReluSpec,
    ShapeMismatch,
    SoftmaxSpec,
    TrainConfig,
    grad_check,
    init_velocity,
    load_checkpoint,
    loss_cross_entropy,
    predict_classes,
    save_checkpoint,
    sgd_step,
    train,
)


def softmax_model(in_dim=5, seed=0):
    return Model([DenseSpec(5), SoftmaxSpec()], (in_dim,), seed=seed)


class TestForward:
    def test_softmax_uniform_on_zero_logits(self):
        m = Model([SoftmaxSpec()], (5,), seed=0)
        out = m.forward(np.zeros(5, dtype=np.float32))
        np.testing.assert_allclose(out, 0.2, atol=1e-7)

    def test_softmax_sums_to_one_for_large_logits(self):
        m = Model([SoftmaxSpec()], (5,), seed=0)
        rng = np.random.default_rng(0)
        for _ in range(50):
            logits = rng.uniform(-50, 50, size=5).astype(np.float32)
            assert abs(float(m.forward(logits).sum()) - 1.0) <= 1e-6

    def test_conv2d_identity_kernel(self):
        m = Model([Conv2dSpec(filters=1, kernel_size=1)], (3, 3, 1), seed=0)
        m.params[0]["w"] = np.ones((1, 1, 1, 1), dtype=np.float32)
        m.params[0]["b"] = np.zeros(1, dtype=np.float32)
        x = np.arange(9, dtype=np.float32).reshape(3, 3, 1)
        np.testing.assert_allclose(m.forward(x), x)

    def test_maxpool_window(self):
        m = Model([MaxPool2dSpec(2)], (2, 2, 1), seed=0)
        x = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32).reshape(2, 2, 1)
        assert m.forward(x).reshape(-1).tolist() == [4.0]

    def test_input_shape_mismatch_reports_layer_zero(self):
        m = softmax_model()
        with pytest.raises(ShapeMismatch) as err:
            m.forward(np.zeros(7, dtype=np.float32))
        assert err.value.layer_index == 0

    def test_incompatible_specs_rejected_at_build(self):
        with pytest.raises(ShapeMismatch) as err:
            Model([Conv2dSpec(filters=2, kernel_size=9)], (4, 4, 1), seed=0)
        assert err.value.layer_index == 0

    def test_batched_and_single_inputs_agree(self):
        m = softmax_model(seed=3)
        rng = np.random.default_rng(1)
        xs = rng.standard_normal((4, 5)).astype(np.float32)
        batched = m.forward(xs)
        for i in range(4):
            np.testing.assert_allclose(m.forward(xs[i]), batched[i], atol=1e-7)

    def test_no_nan_inf_across_random_models(self):
        rng = np.random.default_rng(7)
        specs = [
            EmbeddingSpec(vocab_size=9, dim=4),
            Conv1dSpec(filters=5, width=2),
            ReluSpec(),
            GlobalMaxPoolSpec(),
            DenseSpec(5),
            SoftmaxSpec(),
        ]
        for seed in range(5):
            m = Model(specs, (8,), seed=seed)
            ids = rng.integers(0, 9, size=(6, 8))
            out = m.forward(ids)
            assert np.isfinite(out).all()
            loss, grads = m.backward(ids, rng.integers(0, 5, size=6))
            assert math.isfinite(loss)
            for d in grads:
                for g in d.values():
                    assert np.isfinite(g).all()


class TestLoss:
    def test_uniform_is_log_classes(self):
        assert loss_cross_entropy([0.2] * 5, 3) == pytest.approx(math.log(5), abs=1e-6)

    def test_perfect_prediction_is_zero(self):
        assert loss_cross_entropy([0.0, 1.0, 0.0, 0.0, 0.0], 1) == pytest.approx(0.0)

    def test_quarter_probability(self):
        assert loss_cross_entropy([0.25, 0.25, 0.25, 0.25], 2) == pytest.approx(
            math.log(4), abs=1e-9
        )

    def test_clamps_zero_probability(self):
        assert loss_cross_entropy([1.0, 0.0], 1) == pytest.approx(-math.log(1e-12))

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            loss_cross_entropy([0.5, 0.5], 2)


class TestBackward:
    def test_zero_input_dense_gradients(self):
        # with x == 0: dL/dW = 0 and dL/db = probs - onehot(true)
        m = softmax_model(seed=2)
        x = np.zeros(5, dtype=np.float32)
        probs = m.forward(x)
        _, grads = m.backward(x, 3)
        np.testing.assert_allclose(grads[0]["w"], 0.0, atol=1e-8)
        expected = probs.astype(np.float64)
        expected[3] -= 1.0
        np.testing.assert_allclose(grads[0]["b"], expected, atol=1e-6)

    def test_duplicated_sample_doubles_summed_gradient(self):
        m = softmax_model(seed=4)
        x = np.random.default_rng(0).standard_normal(5).astype(np.float32)
        loss1, grads1 = m.backward(x[None, :], [2])
        loss2, grads2 = m.backward(np.stack([x, x]), [2, 2])
        assert loss2 == pytest.approx(2 * loss1, rel=1e-6)
        for d1, d2 in zip(grads1, grads2):
            for name in d1:
                np.testing.assert_allclose(d2[name], 2 * d1[name], rtol=1e-5, atol=1e-6)

    def test_label_count_mismatch(self):
        m = softmax_model()
        with pytest.raises(ShapeMismatch):
            m.backward(np.zeros((2, 5), dtype=np.float32), [0, 1, 2])


class TestSgd:
    def test_zero_learning_rate_changes_nothing(self):
        m = softmax_model(seed=5)
        before = [{k: v.copy() for k, v in d.items()} for d in m.params]
        grads = [{k: np.ones_like(v) for k, v in d.items()} for d in m.params]
        sgd_step(m, grads, TrainConfig(learning_rate=0.0))
        for b, d in zip(before, m.params):
            for name in b:
                np.testing.assert_array_equal(b[name], d[name])

    def test_single_scalar_step(self):
        m = Model([DenseSpec(1)], (1,), seed=0)
        m.params[0]["w"] = np.array([[1.0]], dtype=np.float32)
        grads = [{"w": np.array([[0.5]], dtype=np.float32), "b": np.zeros(1, dtype=np.float32)}]
        sgd_step(m, grads, TrainConfig(learning_rate=0.1, momentum=0.0))
        assert m.params[0]["w"][0, 0] == pytest.approx(0.95)

    def test_momentum_recurrence(self):
        # constant gradient g: second velocity is (1 + momentum) * g
        m = Model([DenseSpec(1)], (1,), seed=0)
        m.params[0]["w"] = np.array([[0.0]], dtype=np.float32)
        g = 0.5
        grads = [{"w": np.array([[g]], dtype=np.float32), "b": np.zeros(1, dtype=np.float32)}]
        config = TrainConfig(learning_rate=0.1, momentum=0.9)
        velocity = init_velocity(m)
        sgd_step(m, grads, config, velocity)
        first = float(m.params[0]["w"][0, 0])
        sgd_step(m, grads, config, velocity)
        second = float(m.params[0]["w"][0, 0])
        assert first == pytest.approx(-0.1 * g, rel=1e-6)
        assert second - first == pytest.approx(-0.1 * 1.9 * g, rel=1e-6)

    def test_gradient_shape_mismatch(self):
        m = softmax_model()
        grads = [{"w": np.zeros((2, 2), dtype=np.float32), "b": np.zeros(5, dtype=np.float32)}, {}]
        with pytest.raises(ValueError):
            sgd_step(m, grads, TrainConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=-0.1)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainConfig(momentum=1.0)


def toy_dataset(n=20, seed=0):
    rng = np.random.default_rng(seed)
    data = []
    for i in range(n):
        v = rng.random(6, dtype=np.float32)
        cls = i % 2
        v[cls] += 2.0
        data.append((v, cls))
    return data


class TestTrain:
    def test_zero_lr_single_epoch_reports_initial_loss(self):
        m = Model([DenseSpec(5), SoftmaxSpec()], (6,), seed=1)
        data = toy_dataset()
        config = TrainConfig(learning_rate=0.0, epochs=1, seed=0)
        trained, history = train(m, data, config)
        for d0, d1 in zip(m.params, trained.params):
            for name in d0:
                np.testing.assert_array_equal(d0[name], d1[name])
        losses = [m.backward(x[None, :], [t])[0] for x, t in data]
        assert history[0] == pytest.approx(sum(losses) / len(losses), rel=1e-6)

    def test_same_seed_same_final_parameters(self):
        m = Model([DenseSpec(5), SoftmaxSpec()], (6,), seed=1)
        data = toy_dataset()
        config = TrainConfig(epochs=5, seed=9)
        t1, _ = train(m, data, config)
        t2, _ = train(m, data, config)
        for d1, d2 in zip(t1.params, t2.params):
            for name in d1:
                np.testing.assert_array_equal(d1[name], d2[name])

    def test_separable_toy_problem_loss_decreases(self):
        m = Model([DenseSpec(2), SoftmaxSpec()], (6,), seed=2)
        data = toy_dataset()
        trained, history = train(m, data, TrainConfig(epochs=50, seed=3))
        assert history[-1] < history[0]
        preds = predict_classes(trained, [x for x, _ in data])
        assert (preds == np.array([t for _, t in data])).mean() == 1.0

    def test_input_model_is_untouched(self):
        m = Model([DenseSpec(5), SoftmaxSpec()], (6,), seed=1)
        before = [{k: v.copy() for k, v in d.items()} for d in m.params]
        train(m, toy_dataset(), TrainConfig(epochs=2, seed=0))
        for b, d in zip(before, m.params):
            for name in b:
                np.testing.assert_array_equal(b[name], d[name])

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            train(softmax_model(), [], TrainConfig())

    def test_zero_epochs_is_noop(self):
        m = Model([DenseSpec(5), SoftmaxSpec()], (6,), seed=1)
        trained, history = train(m, toy_dataset(), TrainConfig(epochs=0))
        assert history == []
        for d0, d1 in zip(m.params, trained.params):
            for name in d0:
                np.testing.assert_array_equal(d0[name], d1[name])


class TestDeterminism:
    def test_same_specs_and_seed_bit_identical_parameters(self):
        specs = [
            EmbeddingSpec(vocab_size=11, dim=6),
            Conv1dSpec(filters=4, width=2),
            ReluSpec(),
            GlobalMaxPoolSpec(),
            DenseSpec(5),
            SoftmaxSpec(),
        ]
        m1 = Model(specs, (7,), seed=42)
        m2 = Model(specs, (7,), seed=42)
        for d1, d2 in zip(m1.params, m2.params):
            for name in d1:
                assert d1[name].tobytes() == d2[name].tobytes()

    def test_different_seed_differs(self):
        m1 = softmax_model(seed=0)
        m2 = softmax_model(seed=1)
        assert m1.params[0]["w"].tobytes() != m2.params[0]["w"].tobytes()


class TestGradCheck:
    def test_dense_only_model(self):
        m = Model([DenseSpec(8), ReluSpec(), DenseSpec(5), SoftmaxSpec()], (6,), seed=0)
        x = np.random.default_rng(3).standard_normal(6).astype(np.float32)
        assert grad_check(m, x, 2) <= 1e-3

    def test_conv2d_pool_model(self):
        specs = [
            Conv2dSpec(filters=3, kernel_size=3),
            ReluSpec(),
            MaxPool2dSpec(2),
            DenseSpec(5),
            SoftmaxSpec(),
        ]
        m = Model(specs, (8, 8, 1), seed=1)
        x = np.random.default_rng(4).random((8, 8, 1), dtype=np.float32)
        assert grad_check(m, x, 1) <= 1e-3

    def test_embedding_conv1d_text_model(self):
        specs = [
            EmbeddingSpec(vocab_size=10, dim=4),
            Conv1dSpec(filters=6, width=3),
            ReluSpec(),
            GlobalMaxPoolSpec(),
            DenseSpec(5),
            SoftmaxSpec(),
        ]
        m = Model(specs, (9,), seed=7)
        ids = np.random.default_rng(5).integers(0, 10, size=9)
        assert grad_check(m, ids, 4) <= 1e-3

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            grad_check(softmax_model(), np.zeros(5, dtype=np.float32), 0, epsilon=0.0)


class TestCheckpoint:
    def test_round_trip_reproduces_outputs_exactly(self, tmp_path):
        specs = [
            EmbeddingSpec(vocab_size=12, dim=5),
            Conv1dSpec(filters=4, width=3),
            ReluSpec(),
            GlobalMaxPoolSpec(),
            DenseSpec(5),
            SoftmaxSpec(),
        ]
        m = Model(specs, (10,), seed=3)
        ids = np.random.default_rng(0).integers(0, 12, size=(4, 10))
        trained, _ = train(
            m,
            [(np.random.default_rng(i).integers(0, 12, size=10), i % 5) for i in range(10)],
            TrainConfig(epochs=2, seed=0),
        )
        path = tmp_path / "model.ckpt"
        save_checkpoint(trained, path, meta={"note": "test"})
        loaded, meta = load_checkpoint(path)
        assert meta == {"note": "test"}
        np.testing.assert_array_equal(trained.forward(ids), loaded.forward(ids))

    def test_header_is_text_manifest(self, tmp_path):
        m = softmax_model(seed=1)
        path = tmp_path / "m.ckpt"
        save_checkpoint(m, path)
        header = open(path, "rb").readline().decode("utf-8")
        assert '"seed"' in header and '"layers"' in header and '"offset"' in header

    def test_rejects_non_checkpoint_file(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b'{"format": "something-else"}\n')
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_frozen_model_saves_and_loads(self, tmp_path):
        m = softmax_model(seed=6).freeze()
        path = tmp_path / "frozen.ckpt"
        save_checkpoint(m, path)
        loaded, _ = load_checkpoint(path)
        x = np.random.default_rng(1).standard_normal(5).astype(np.float32)
        np.testing.assert_array_equal(m.forward(x), loaded.forward(x))
