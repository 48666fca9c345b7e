"""Tests for the boosted pair-preference model."""

import math

import numpy as np
import pytest

from coldpref.boosting import (
    BoostConfig,
    PairEnsemble,
    default_tree_depth,
    dumps_ensemble,
    loads_ensemble,
    logistic_loss,
    pair_features,
    serialize_tree,
)


def small_config(**overrides):
    defaults = dict(max_depth=3, rounds_warmup=20, rounds_increment=5)
    defaults.update(overrides)
    return BoostConfig(**defaults)


def naive_best_stump(Z, grad, hess, lam, min_child=1):
    """Brute-force depth-1 split search over every feature and threshold.

    Independent of the library's sorted-scan path: thresholds are midpoints
    of consecutive distinct values, statistics come from boolean masks.
    """
    n, d = Z.shape
    total_g, total_h = grad.sum(), hess.sum()
    parent = total_g * total_g / (total_h + lam)
    best = None
    for f in range(d):
        levels = sorted(set(Z[:, f].tolist()))
        for a, b in zip(levels, levels[1:]):
            thr = 0.5 * (a + b)
            left = Z[:, f] < thr
            if left.sum() < min_child or (n - left.sum()) < min_child:
                continue
            gl, hl = grad[left].sum(), hess[left].sum()
            gr, hr = total_g - gl, total_h - hl
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
            if gain <= 0:
                continue
            if best is None or gain > best[0]:
                best = (
                    gain,
                    f,
                    thr,
                    -gl / (hl + lam),
                    -gr / (hr + lam),
                )
    return best


class TestDepthHeuristic:
    @pytest.mark.parametrize(
        "features,depth", [(1, 1), (2, 1), (4, 2), (9, 3), (10, 3), (16, 4), (20, 4)]
    )
    def test_round_sqrt(self, features, depth):
        assert default_tree_depth(features) == depth

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            default_tree_depth(0)


class TestFitInitial:
    def test_single_class_saturates(self):
        rng = np.random.default_rng(0)
        Z = rng.normal(size=(30, 4))
        model = PairEnsemble.fit_initial(Z, np.ones(30), small_config())
        probe = rng.normal(size=(10, 4))
        assert np.all(model.predict_prob(probe) > 0.99)

    def test_depth_one_split_threshold(self):
        Z = np.array([[0.0], [1.0], [2.0], [3.0]])
        labels = np.array([0, 0, 1, 1])
        config = BoostConfig(max_depth=1, rounds_warmup=1)
        model = PairEnsemble.fit_initial(Z, labels, config)
        tree = model.trees[0]
        assert tree.feature[0] == 0
        assert 1.0 < tree.threshold[0] < 2.0

    def test_matches_exhaustive_stump_oracle(self):
        rng = np.random.default_rng(1)
        lam = 1.0
        for trial in range(25):
            n = int(rng.integers(5, 100))
            d = int(rng.integers(1, 6))
            Z = rng.normal(size=(n, d))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            config = BoostConfig(max_depth=1, rounds_warmup=1, l2_lambda=lam)
            model = PairEnsemble.fit_initial(Z, labels, config)

            rate = labels.mean()
            base = math.log(rate / (1 - rate))
            p0 = 1.0 / (1.0 + math.exp(-base))
            grad = np.full(n, p0) - labels
            hess = np.full(n, p0 * (1 - p0))
            expected = naive_best_stump(Z, grad, hess, lam)

            tree = model.trees[0]
            if expected is None:
                assert tree.feature[0] == -1
                continue
            _, f, thr, w_left, w_right = expected
            assert tree.feature[0] == f
            assert tree.threshold[0] == pytest.approx(thr, abs=1e-12)
            assert tree.value[tree.left[0]] == pytest.approx(w_left, rel=1e-9)
            assert tree.value[tree.right[0]] == pytest.approx(w_right, rel=1e-9)

    def test_separable_data_reaches_perfect_training_f1(self):
        rng = np.random.default_rng(2)
        Z = rng.normal(size=(60, 3))
        labels = (Z[:, 1] > 0.2).astype(int)
        config = BoostConfig(max_depth=2, rounds_warmup=50)
        model = PairEnsemble.fit_initial(Z, labels, config)
        preds = (model.predict_prob(Z) > 0.5).astype(int)
        assert np.array_equal(preds, labels)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            PairEnsemble.fit_initial(np.empty((0, 2)), np.empty(0), small_config())

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError, match="labels"):
            PairEnsemble.fit_initial(
                np.zeros((3, 2)), np.array([0, 1, 2]), small_config()
            )


class TestPredict:
    def test_blank_model_predicts_exactly_half(self):
        model = PairEnsemble(small_config())
        assert model.predict_prob(np.zeros(6)) == 0.5
        probs = model.predict_prob(np.random.default_rng(3).normal(size=(5, 6)))
        assert np.all(probs == 0.5)

    def test_wrong_feature_length_rejected(self):
        rng = np.random.default_rng(4)
        model = PairEnsemble.fit_initial(
            rng.normal(size=(20, 4)), rng.integers(0, 2, 20), small_config()
        )
        with pytest.raises(ValueError, match="feature length"):
            model.predict_prob(np.zeros(5))

    def test_probabilities_in_open_interval(self):
        rng = np.random.default_rng(5)
        model = PairEnsemble.fit_initial(
            rng.normal(size=(40, 3)), rng.integers(0, 2, 40), small_config()
        )
        probs = model.predict_prob(rng.normal(size=(30, 3)))
        assert np.all((probs > 0) & (probs < 1))


class TestUpdate:
    def test_zero_round_update_is_identity(self):
        rng = np.random.default_rng(6)
        Z = rng.normal(size=(25, 3))
        labels = rng.integers(0, 2, 25)
        model = PairEnsemble.fit_initial(
            Z, labels, small_config(rounds_increment=0)
        )
        before = model.predict_prob(Z).copy()
        n_trees = len(model.trees)
        model.update(Z, labels)
        assert len(model.trees) == n_trees
        np.testing.assert_array_equal(model.predict_prob(Z), before)

    def test_update_on_saturated_predictions_barely_moves(self):
        rng = np.random.default_rng(7)
        Z = rng.normal(size=(100, 2))
        labels = (Z[:, 0] > 0).astype(int)
        model = PairEnsemble.fit_initial(
            Z, labels, small_config(max_depth=1, rounds_warmup=300)
        )
        before = model.predict_prob(Z).copy()
        assert np.all((before < 0.01) | (before > 0.99))
        first_new = len(model.trees)
        model.update(Z, labels)
        for tree in model.trees[first_new:]:
            assert np.max(np.abs(tree.value)) < 0.05
        after = model.predict_prob(Z)
        assert np.max(np.abs(after - before)) < 1e-3

    def test_prior_trees_byte_identical_after_update(self):
        rng = np.random.default_rng(8)
        Z = rng.normal(size=(30, 3))
        labels = rng.integers(0, 2, 30)
        model = PairEnsemble.fit_initial(Z, labels, small_config())
        snapshot = [serialize_tree(t) for t in model.trees]
        model.update(rng.normal(size=(10, 3)), rng.integers(0, 2, 10))
        assert len(model.trees) == len(snapshot) + model.config.rounds_increment
        for tree, frozen in zip(model.trees, snapshot):
            assert serialize_tree(tree) == frozen

    def test_successive_updates_each_decrease_their_own_loss(self):
        rng = np.random.default_rng(9)
        model = PairEnsemble(small_config())
        for _ in range(3):
            Z = rng.normal(size=(40, 3))
            labels = (Z[:, 0] + 0.3 * rng.normal(size=40) > 0).astype(int)
            model.update(Z, labels)
            diffs = np.diff(model.last_round_losses)
            assert np.all(diffs <= 1e-9)


class TestLossAndGradient:
    def test_loss_non_increasing_within_fit(self):
        rng = np.random.default_rng(10)
        Z = rng.normal(size=(200, 4))
        labels = (Z @ np.array([1.0, -0.5, 0.2, 0.0]) > 0).astype(int)
        flip = rng.random(200) < 0.1
        labels[flip] = 1 - labels[flip]
        model = PairEnsemble.fit_initial(
            Z, labels, small_config(rounds_warmup=60)
        )
        assert len(model.last_round_losses) == 61
        assert np.all(np.diff(model.last_round_losses) <= 1e-9)

    def test_analytic_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            s = float(rng.normal(scale=3.0))
            label = int(rng.integers(0, 2))
            eps = 1e-5

            def loss_at(score):
                return logistic_loss(np.array([score]), np.array([label]))

            numeric = (loss_at(s + eps) - loss_at(s - eps)) / (2 * eps)
            analytic = 1.0 / (1.0 + math.exp(-s)) - label
            assert analytic == pytest.approx(numeric, abs=1e-6)

    def test_symmetric_labels_keep_half_probability(self):
        rng = np.random.default_rng(12)
        base = rng.normal(size=(10, 3))
        Z = np.vstack([base, base])
        labels = np.concatenate([np.ones(10), np.zeros(10)])
        model = PairEnsemble.fit_initial(
            Z, labels, small_config(rounds_warmup=30)
        )
        probs = model.predict_prob(base)
        assert np.all(np.abs(probs - 0.5) <= 1e-6)


class TestDeterminismAndSerialization:
    def test_identical_inputs_identical_ensembles(self):
        rng = np.random.default_rng(13)
        Z = rng.normal(size=(50, 4))
        labels = rng.integers(0, 2, 50)
        a = PairEnsemble.fit_initial(Z, labels, small_config())
        b = PairEnsemble.fit_initial(Z, labels, small_config())
        assert dumps_ensemble(a) == dumps_ensemble(b)

    def test_roundtrip_predictions_bit_exact(self):
        rng = np.random.default_rng(14)
        Z = rng.normal(size=(60, 4))
        labels = rng.integers(0, 2, 60)
        model = PairEnsemble.fit_initial(Z, labels, small_config())
        model.update(rng.normal(size=(15, 4)), rng.integers(0, 2, 15))
        restored = loads_ensemble(dumps_ensemble(model))
        probe = rng.normal(size=(40, 4))
        np.testing.assert_array_equal(
            model.predict_prob(probe), restored.predict_prob(probe)
        )
        assert restored.config == model.config

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError, match="serialization"):
            loads_ensemble('{"format": "something-else"}')


def test_pair_features_concatenates_rows():
    X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    Z = pair_features(X, np.array([0, 2]), np.array([1, 0]))
    np.testing.assert_array_equal(
        Z, [[0.0, 1.0, 2.0, 3.0], [4.0, 5.0, 0.0, 1.0]]
    )
