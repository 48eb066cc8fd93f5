"""Initialization, Adam, the fit loop, and checkpoint persistence."""

import numpy as np
import pytest

from memefuse import SynthConfig, Tensor, TrainConfig, evaluate, fit, generate_synthetic, init_params
from memefuse.checkpoint import load_model, save_model
from memefuse.exceptions import CheckpointError, ConfigError, ContractError
from memefuse.models import build_variant
from memefuse.optim import AdamState, adam_step
from memefuse.params import expected_param_count


class TestInit:
    def test_biases_are_exactly_zero(self):
        params = init_params(8, 6, "bimodal", seed=0)
        for name, t in params.named():
            if name.split(".")[-1].startswith(("b", "c")):
                assert np.all(t.data == 0.0), name

    def test_same_seed_bitwise_identical(self):
        a = init_params(8, 6, "bimodal", seed=3)
        b = init_params(8, 6, "bimodal", seed=3)
        for (na, ta), (nb, tb) in zip(a.named(), b.named()):
            assert na == nb
            assert ta.data.tobytes() == tb.data.tobytes()

    def test_different_seed_differs(self):
        a = init_params(8, 6, seed=0)
        b = init_params(8, 6, seed=1)
        assert a.gmf.W_i.data.tobytes() != b.gmf.W_i.data.tobytes()

    def test_weight_variance_matches_xavier(self):
        d = 64
        params = init_params(d, 6, "bimodal", seed=5)
        for name, t in params.named():
            if t.ndim != 2 or 1 in t.shape:
                continue
            fan_in, fan_out = t.shape
            want = 2.0 / (fan_in + fan_out)
            got = t.data.var()
            assert abs(got - want) / want < 0.10, f"{name}: var {got} vs {want}"

    def test_param_count_formula(self):
        for mode in ("bimodal", "literal"):
            for d, C in ((8, 6), (16, 7), (5, 2)):
                params = init_params(d, C, mode, seed=0)
                assert params.count() == expected_param_count(d, C, mode)

    def test_names_are_a_bijection(self):
        params = init_params(8, 6, "bimodal", seed=0)
        names = [name for name, _ in params.named()]
        assert len(names) == len(set(names))
        tensors = [id(t) for _, t in params.named()]
        assert len(tensors) == len(set(tensors))


def adam_oracle_steps(x0, grads, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Scalar hand-rolled Adam, independent of the package implementation."""
    import math

    x, m, v = x0, 0.0, 0.0
    trace = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        x = x - lr * mh / (math.sqrt(vh) + eps)
        trace.append(x)
    return trace


class TestAdam:
    def test_zero_gradient_keeps_parameters(self):
        t = Tensor([1.0, -2.0], requires_grad=True)
        state = AdamState([("p", t)])
        before = t.data.copy()
        for _ in range(5):
            adam_step([("p", t)], state, lr=0.1)
        np.testing.assert_array_equal(t.data, before)

    def test_first_step_magnitude_is_learning_rate(self):
        t = Tensor([4.0], requires_grad=True)
        t.grad[:] = 0.37
        state = AdamState([("p", t)])
        adam_step([("p", t)], state, lr=0.01)
        assert abs((4.0 - t.data[0]) - 0.01) < 1e-6

    def test_three_steps_match_scalar_oracle(self):
        lr = 0.1
        t = Tensor([1.0], requires_grad=True)
        state = AdamState([("p", t)])
        seen = []
        for _ in range(3):
            t.zero_grad()
            t.grad[:] = 2.0 * t.data  # gradient of x^2
            adam_step([("p", t)], state, lr)
            seen.append(float(t.data[0]))
        x, m, v = 1.0, 0.0, 0.0
        want = []
        for step in range(1, 4):
            g = 2.0 * x
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            x = x - lr * (m / (1 - 0.9 ** step)) / (np.sqrt(v / (1 - 0.999 ** step)) + 1e-8)
            want.append(x)
        np.testing.assert_allclose(seen, want, rtol=0, atol=1e-12)

    def test_missing_gradient_names_parameter(self):
        t = Tensor([1.0])  # no requires_grad, no grad buffer
        state = AdamState([("gmf.W_i", t)])
        with pytest.raises(ContractError, match="gmf.W_i"):
            adam_step([("gmf.W_i", t)], state, lr=0.1)


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    cfg = SynthConfig(samples_per_class=10, d=8, s_e=3.0, noise=1.0, seed=21)
    return generate_synthetic(cfg, out)


class TestFit:
    def test_zero_epochs_returns_initial_params(self, small_dataset):
        cfg = TrainConfig(d=8, num_classes=6, epochs=0, loss="ce")
        result = fit(small_dataset, cfg)
        assert result.history == []
        fresh = build_variant("full", 8, 6, "bimodal", cfg.seed)
        for (n1, t1), (n2, t2) in zip(result.model.named_params(), fresh.named_params()):
            assert n1 == n2
            np.testing.assert_array_equal(t1.data, t2.data)

    def test_identical_seeds_identical_runs(self, small_dataset):
        cfg = TrainConfig(d=8, num_classes=6, epochs=3, loss="ols", seed=4, lr=1e-3)
        r1 = fit(small_dataset, cfg)
        r2 = fit(small_dataset, cfg)
        assert r1.history == r2.history
        for key in r1.final_state:
            assert r1.final_state[key].tobytes() == r2.final_state[key].tobytes()

    def test_history_schema(self, small_dataset):
        cfg = TrainConfig(d=8, num_classes=6, epochs=2, loss="ce")
        result = fit(small_dataset, cfg)
        assert [sorted(row) for row in result.history] == [
            ["epoch", "train_loss", "val_accuracy", "val_macro_f1"]
        ] * 2

    def test_config_dimension_mismatch_rejected(self, small_dataset):
        with pytest.raises(ConfigError):
            fit(small_dataset, TrainConfig(d=16, num_classes=6, epochs=1))

    def test_zero_signal_stays_at_chance_on_heldout(self, tmp_path):
        cfg = SynthConfig(samples_per_class=40, d=8, s_e=0.0, s_t=0.0, s_i=0.0, seed=22)
        manifest = generate_synthetic(cfg, tmp_path)
        tc = TrainConfig(d=8, num_classes=6, epochs=8, loss="ce", lr=1e-3, seed=0)
        result = fit(manifest, tc)
        report = evaluate(result.use_final(), manifest, "test")
        n_test = report.total
        stderr = np.sqrt((1 / 6) * (5 / 6) / n_test)
        assert report.accuracy <= 1 / 6 + 3 * stderr


class TestCheckpoint:
    def test_save_load_save_is_byte_identical(self, tmp_path):
        model = build_variant("full", 8, 6, "bimodal", seed=31)
        p1 = tmp_path / "a.ckpt"
        p2 = tmp_path / "b.ckpt"
        save_model(model, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_lists_exact_parameter_names(self, tmp_path):
        import json

        model = build_variant("full", 4, 6, "literal", seed=0)
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
        names = [rec["name"] for rec in header["tensors"]]
        assert names == [name for name, _ in model.named_params()]
        assert len(names) == len(set(names))

    def test_roundtrip_preserves_values_exactly(self, tmp_path):
        model = build_variant("no_gmf", 6, 6, "bimodal", seed=1)
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        back = load_model(path)
        for (n1, t1), (n2, t2) in zip(model.named_params(), back.named_params()):
            assert n1 == n2
            np.testing.assert_array_equal(t1.data.astype("<f4"), t2.data.astype("<f4"))

    def test_tampered_offset_is_structured_error(self, tmp_path):
        import json

        model = build_variant("full", 4, 6, "bimodal", seed=2)
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            blob = fh.read()
        header["tensors"][-1]["offset"] = len(blob) + 64
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode())
            fh.write(b"\n")
            fh.write(blob)
        with pytest.raises(CheckpointError):
            load_model(path)

    def test_fuzzed_headers_never_crash(self, tmp_path):
        import json

        model = build_variant("full", 4, 6, "bimodal", seed=3)
        path = tmp_path / "m.ckpt"
        save_model(model, path)
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            blob = fh.read()
        rng = np.random.default_rng(33)
        for _ in range(40):
            doc = json.loads(json.dumps(header))
            mutation = rng.integers(5)
            if mutation == 0:
                doc["tensors"][int(rng.integers(len(doc["tensors"])))]["offset"] = int(
                    rng.integers(-100, len(blob) + 100)
                )
            elif mutation == 1:
                doc["tensors"][int(rng.integers(len(doc["tensors"])))]["shape"] = [3, 3, 3]
            elif mutation == 2:
                doc["tensors"][int(rng.integers(len(doc["tensors"])))]["name"] = "nope"
            elif mutation == 3:
                doc["meta"]["variant"] = "bogus"
            else:
                del doc["tensors"][int(rng.integers(len(doc["tensors"])))]
            with open(path, "wb") as fh:
                fh.write(json.dumps(doc).encode())
                fh.write(b"\n")
                fh.write(blob[: int(rng.integers(0, len(blob)))])
            with pytest.raises((CheckpointError, ConfigError)):
                load_model(path)

    def test_checkpoint_roundtrip_preserves_metrics(self, tmp_path, small_dataset):
        cfg = TrainConfig(d=8, num_classes=6, epochs=2, loss="ce", lr=1e-3)
        result = fit(small_dataset, cfg)
        path = tmp_path / "m.ckpt"
        save_model(result.use_best(), path)
        loaded = load_model(path)
        before = evaluate(loaded, small_dataset, "test")
        save_model(loaded, tmp_path / "m2.ckpt")
        after = evaluate(load_model(tmp_path / "m2.ckpt"), small_dataset, "test")
        assert before.to_json() == after.to_json()
