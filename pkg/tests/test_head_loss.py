"""Classification head, cross-entropy, and online label smoothing."""

import math

import numpy as np
import pytest

from memefuse import Tensor
from memefuse.autodiff import cross_entropy_logits
from memefuse.exceptions import ContractError
from memefuse.head import head_forward, predict
from memefuse.losses import OLSState, ce_loss, ols_loss, one_hot
from memefuse.params import HeadParams


def make_head(d, C, seed=0):
    return HeadParams.init(d, C, np.random.default_rng(seed))


class TestHeadForward:
    def test_zero_inputs_give_uniform_probs(self):
        d, C = 4, 6
        params = make_head(d, C)
        logits, probs = head_forward(Tensor(np.zeros((3, d))), Tensor(np.zeros((3, d))), params)
        np.testing.assert_array_equal(logits.data, np.zeros(C))
        np.testing.assert_allclose(probs.data, np.full(C, 1 / C), atol=1e-15)

    def test_probs_sum_to_one(self):
        d, C = 5, 7
        params = make_head(d, C, seed=1)
        rng = np.random.default_rng(2)
        for _ in range(25):
            _, probs = head_forward(
                Tensor(rng.standard_normal((4, d)) * 3), Tensor(rng.standard_normal((4, d)) * 3), params
            )
            assert np.all(probs.data >= 0)
            assert abs(probs.data.sum() - 1.0) < 1e-9

    def test_matches_scalar_oracle(self):
        d, C = 2, 2
        params = make_head(d, C, seed=3)
        params.W1.data[...] = [[0.5, -0.3], [0.2, 0.4], [-0.1, 0.6], [0.3, -0.2]]
        params.b1.data[...] = [0.05, -0.15]
        params.W2.data[...] = [[0.7, -0.4], [-0.5, 0.3]]
        params.b2.data[...] = [0.1, -0.1]
        img = [[0.4, -0.8]]
        txt = [[1.2, 0.3]]
        logits, _ = head_forward(Tensor(np.array(img)), Tensor(np.array(txt)), params)

        joint = [img[0][0], img[0][1], txt[0][0], txt[0][1]]
        hidden = []
        for j in range(d):
            acc = sum(joint[k] * params.W1.data[k][j] for k in range(2 * d)) + params.b1.data[j]
            hidden.append(max(0.0, acc))
        want = [
            sum(hidden[k] * params.W2.data[k][j] for k in range(d)) + params.b2.data[j]
            for j in range(C)
        ]
        np.testing.assert_allclose(logits.data, want, rtol=0, atol=1e-12)


class TestPredict:
    def test_examples(self):
        assert predict(np.array([0.1, 0.7, 0.2, 0.0, 0.0, 0.0])) == 1
        assert predict(np.full(6, 1 / 6)) == 0  # tie -> lowest index

    def test_against_linear_scan_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            probs = rng.dirichlet(np.ones(6))
            best, best_val = 0, probs[0]
            for i, v in enumerate(probs):
                if v > best_val:
                    best, best_val = i, v
            assert predict(probs) == best

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            predict(np.array([]))


class TestCrossEntropy:
    def test_uniform_probs_equal_log_c(self):
        loss = ce_loss(Tensor(np.zeros(6)), 3)
        assert abs(loss.item() - math.log(6)) < 1e-9
        assert abs(loss.item() - 1.791759469228055) < 1e-9

    def test_confident_correct_prediction_is_zero(self):
        logits = np.zeros(6)
        logits[1:] = -1000.0
        assert ce_loss(Tensor(logits), 0).item() == 0.0

    def test_nonnegative_and_zero_iff_certain(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            logits = rng.standard_normal(6) * 4
            assert ce_loss(Tensor(logits), 2).item() >= 0.0

    def test_matches_scalar_logsumexp_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            logits = rng.standard_normal(6) * 5
            label = int(rng.integers(6))
            mx = max(logits)
            lse = mx + math.log(sum(math.exp(v - mx) for v in logits))
            want = lse - logits[label]
            t = Tensor(logits, requires_grad=True)
            loss = ce_loss(t, label)
            assert abs(loss.item() - want) < 1e-12
            loss.backward()
            soft = [math.exp(v - lse) for v in logits]
            want_grad = [s - (1.0 if i == label else 0.0) for i, s in enumerate(soft)]
            np.testing.assert_allclose(t.grad, want_grad, atol=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(ContractError):
            ce_loss(Tensor(np.zeros(6)), 6)
        with pytest.raises(ContractError):
            ce_loss(Tensor(np.zeros(6)), -1)


class TestOnlineLabelSmoothing:
    def test_hard_weight_one_is_exactly_cross_entropy(self):
        state = OLSState(6, smoothing=0.1, hard_weight=1.0)
        rng = np.random.default_rng(7)
        for _ in range(20):
            logits = rng.standard_normal(6) * 3
            label = int(rng.integers(6))
            assert ols_loss(Tensor(logits), label, state).item() == ce_loss(Tensor(logits), label).item()

    def test_initial_rows_are_smoothed_one_hot(self):
        state = OLSState(4, smoothing=0.2)
        want = 0.8 * np.eye(4) + 0.05
        np.testing.assert_allclose(state.soft, want, atol=1e-15)
        np.testing.assert_allclose(state.soft.sum(axis=1), 1.0, atol=1e-12)

    def test_rows_stay_distributions_after_updates(self):
        state = OLSState(6)
        rng = np.random.default_rng(8)
        for _ in range(50):
            for _ in range(30):
                probs = rng.dirichlet(np.ones(6) * 0.7)
                state.observe(probs, int(rng.integers(6)))
            state.epoch_end()
            assert np.all(state.soft >= 0)
            np.testing.assert_allclose(state.soft.sum(axis=1), 1.0, atol=1e-9)

    def test_single_correct_observation_becomes_the_row(self):
        state = OLSState(6)
        probs = np.array([0.1, 0.05, 0.6, 0.1, 0.1, 0.05])  # predicted class 2
        state.observe(probs, 2)
        state.epoch_end()
        np.testing.assert_allclose(state.soft[2], probs, atol=1e-15)
        # other rows keep their initial smoothed values
        np.testing.assert_allclose(state.soft[0], 0.9 * one_hot(0, 6) + 0.1 / 6, atol=1e-15)

    def test_incorrect_predictions_are_ignored(self):
        state = OLSState(6)
        probs = np.array([0.6, 0.05, 0.1, 0.1, 0.1, 0.05])  # predicted class 0
        state.observe(probs, 2)
        assert state.counts[2] == 0
        state.epoch_end()
        np.testing.assert_allclose(state.soft[2], 0.9 * one_hot(2, 6) + 0.1 / 6, atol=1e-15)

    def test_loss_with_hard_weight_one_ignores_state(self):
        s1 = OLSState(6, hard_weight=1.0)
        s2 = OLSState(6, hard_weight=1.0)
        s2.soft = np.full((6, 6), 1 / 6)
        logits = Tensor(np.arange(6.0))
        assert ols_loss(logits, 1, s1).item() == ols_loss(logits, 1, s2).item()

    def test_mixed_target_matches_direct_formula(self):
        state = OLSState(6, smoothing=0.1, hard_weight=0.5)
        rng = np.random.default_rng(9)
        logits = rng.standard_normal(6)
        label = 4
        q = 0.5 * one_hot(label, 6) + 0.5 * state.soft[label]
        want = cross_entropy_logits(Tensor(logits), q).item()
        assert abs(ols_loss(Tensor(logits), label, state).item() - want) < 1e-15
