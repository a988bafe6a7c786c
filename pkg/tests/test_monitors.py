"""Baseline monitors: determinism, tie rules, and order invariance."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from fuzzymon import (
    DecisionTreeMonitor,
    FuzzyMonitorAdapter,
    FuzzyMonitorClassifier,
    GaussianNBMonitor,
    RandomMonitor,
)


class TestRandomMonitor:
    def test_p_zero_never_intervenes(self):
        monitor = RandomMonitor(p=0.0, random_state=0).fit()
        assert monitor.predict(np.zeros((100, 2))).sum() == 0

    def test_p_one_always_intervenes(self):
        monitor = RandomMonitor(p=1.0, random_state=0).fit()
        assert monitor.predict(np.zeros((100, 2))).sum() == 100

    def test_seeded_stream_deterministic(self):
        a = RandomMonitor(p=0.5, random_state=42).predict(np.zeros((50, 2)))
        b = RandomMonitor(p=0.5, random_state=42).predict(np.zeros((50, 2)))
        np.testing.assert_array_equal(a, b)

    def test_rate_concentration(self):
        n = 10_000
        preds = RandomMonitor(p=0.5, random_state=7).predict(np.zeros((n, 1)))
        sigma = np.sqrt(0.25 / n)
        assert abs(preds.mean() - 0.5) < 3 * sigma + 1e-12

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            RandomMonitor(p=1.5).predict(np.zeros((2, 1)))


class TestGaussianNBMonitor:
    def test_likelihood_dominance(self):
        rng = np.random.default_rng(0)
        X = np.concatenate([rng.normal(0.0, 1.0, 200), rng.normal(10.0, 1.0, 200)])[:, None]
        y = np.array([0] * 200 + [1] * 200)
        monitor = GaussianNBMonitor().fit(X, y)
        assert monitor.predict(np.array([[9.8]]))[0] == 1
        assert monitor.predict(np.array([[0.3]]))[0] == 0

    def test_single_class_training_constant(self):
        X = np.random.default_rng(1).random((20, 3))
        y = np.zeros(20, dtype=int)
        monitor = GaussianNBMonitor().fit(X, y)
        assert monitor.degenerate_
        assert monitor.predict(X).tolist() == [0] * 20

    def test_symmetric_tie_predicts_one(self):
        X = np.array([[-1.0], [-1.0], [1.0], [1.0]])
        y = np.array([0, 0, 1, 1])
        monitor = GaussianNBMonitor().fit(X, y)
        assert monitor.predict(np.array([[0.0]]))[0] == 1

    def test_order_invariant_parameters(self):
        rng = np.random.default_rng(2)
        X = rng.random((200, 4))
        y = rng.integers(2, size=200)
        perm = rng.permutation(200)
        a = GaussianNBMonitor().fit(X, y)
        b = GaussianNBMonitor().fit(X[perm], y[perm])
        np.testing.assert_array_equal(a.theta_, b.theta_)
        np.testing.assert_array_equal(a.var_, b.var_)
        np.testing.assert_array_equal(a.class_count_, b.class_count_)

    def test_variance_floor_applied(self):
        X = np.array([[1.0], [1.0], [2.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        monitor = GaussianNBMonitor().fit(X, y)
        assert np.all(monitor.var_ >= monitor.var_floor)

    def test_unfitted_rejected(self):
        with pytest.raises(NotFittedError):
            GaussianNBMonitor().predict(np.zeros((1, 1)))


def _tree_shape(node):
    if node.feature is None:
        return ("leaf", node.label)
    return ("split", node.feature, node.threshold, _tree_shape(node.left), _tree_shape(node.right))


class TestDecisionTreeMonitor:
    def test_separable_at_depth_one(self):
        X = np.concatenate([np.linspace(0, 1, 10), np.linspace(5, 6, 10)])[:, None]
        y = np.array([0] * 10 + [1] * 10)
        monitor = DecisionTreeMonitor(max_depth=1).fit(X, y)
        assert (monitor.predict(X) == y).all()
        shape = _tree_shape(monitor.tree_)
        assert shape[0] == "split" and shape[3][0] == "leaf" and shape[4][0] == "leaf"

    def test_constant_labels_single_leaf(self):
        X = np.random.default_rng(3).random((30, 2))
        y = np.ones(30, dtype=int)
        monitor = DecisionTreeMonitor().fit(X, y)
        assert _tree_shape(monitor.tree_) == ("leaf", 1)

    def test_depth_zero_predicts_majority(self):
        rng = np.random.default_rng(4)
        X = rng.random((50, 2))
        y = np.array([0] * 30 + [1] * 20)
        monitor = DecisionTreeMonitor(max_depth=0).fit(X, y)
        assert monitor.predict(X).tolist() == [0] * 50

    def test_leaf_tie_predicts_one(self):
        X = np.random.default_rng(5).random((10, 1)) * 1e-12
        y = np.array([0] * 5 + [1] * 5)
        monitor = DecisionTreeMonitor(max_depth=0).fit(X, y)
        assert monitor.predict(X).tolist() == [1] * 10

    def test_order_invariant_fit(self):
        rng = np.random.default_rng(6)
        X = rng.random((300, 3))
        y = (X[:, 0] + 0.3 * rng.random(300) > 0.6).astype(int)
        perm = rng.permutation(300)
        a = DecisionTreeMonitor().fit(X, y)
        b = DecisionTreeMonitor().fit(X[perm], y[perm])
        assert _tree_shape(a.tree_) == _tree_shape(b.tree_)

    def test_min_leaf_respected(self):
        def leaf_supports(X, node):
            if node.feature is None:
                return [len(X)]
            mask = X[:, node.feature] <= node.threshold
            return leaf_supports(X[mask], node.left) + leaf_supports(X[~mask], node.right)

        rng = np.random.default_rng(7)
        X = rng.random((100, 2))
        y = rng.integers(2, size=100)
        monitor = DecisionTreeMonitor(max_depth=5, min_leaf=5).fit(X, y)
        assert min(leaf_supports(X, monitor.tree_)) >= 5

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError, match="min_leaf"):
            DecisionTreeMonitor(min_leaf=5).fit(np.zeros((3, 1)), np.array([0, 1, 0]))


class TestFuzzyAdapter:
    def _trained_model(self):
        rng = np.random.default_rng(8)
        model = FuzzyMonitorClassifier()
        for _ in range(300):
            center = rng.choice([0.0, 1.0])
            model.learn_one(rng.normal(center, 0.05, 2), int(center))
        return model

    def test_constant_rule_always_intervenes(self):
        model = FuzzyMonitorClassifier()
        model.learn_one(np.array([0.5, 0.5]), 1)
        adapter = FuzzyMonitorAdapter(model)
        assert adapter.predict(np.random.default_rng(0).random((20, 2))).tolist() == [1] * 20

    def test_delegation_matches_model(self):
        model = self._trained_model()
        adapter = FuzzyMonitorAdapter(model)
        X = np.random.default_rng(9).random((100, 2))
        np.testing.assert_array_equal(adapter.predict(X), model.predict(X))

    def test_prediction_is_read_only(self):
        import json

        model = self._trained_model()
        adapter = FuzzyMonitorAdapter(model)
        before = json.dumps(model.to_state(), sort_keys=True)
        adapter.predict(np.random.default_rng(10).random((50, 2)))
        assert json.dumps(model.to_state(), sort_keys=True) == before

    def test_fit_continues_learning(self):
        model = self._trained_model()
        n_before = model.n_seen_
        adapter = FuzzyMonitorAdapter(model)
        X = np.random.default_rng(11).random((20, 2))
        adapter.fit(X, np.zeros(20, dtype=int))
        assert model.n_seen_ == n_before + 20

    def test_untrained_model_raises(self):
        adapter = FuzzyMonitorAdapter(FuzzyMonitorClassifier())
        with pytest.raises(NotFittedError):
            adapter.predict(np.zeros((1, 2)))
