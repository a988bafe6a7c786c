"""Runtime monitors sharing a fit/predict interface.

All monitors are binary: predict returns 1 where the perception component is
expected to misbehave. Baselines are implemented from scratch with fixed
tie-breaking so that fitted parameters and predictions are deterministic and
invariant to record order.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .engine import FuzzyMonitorClassifier


class RandomMonitor(BaseEstimator, ClassifierMixin):
    """Coin-flip monitor: i.i.d. Bernoulli(p) predictions from a seeded stream."""

    trainable = False

    def __init__(self, p: float = 0.5, random_state: int | None = None):
        self.p = p
        self.random_state = random_state

    def fit(self, X=None, y=None):
        return self

    def predict(self, X) -> np.ndarray:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not hasattr(self, "rng_"):
            self.rng_ = np.random.default_rng(self.random_state)
        n = len(X)
        return (self.rng_.random(n) < self.p).astype(int)


class GaussianNBMonitor(BaseEstimator, ClassifierMixin):
    """Gaussian naive Bayes with a variance floor and deterministic ties.

    Per-class feature statistics are computed on sorted columns so the fitted
    parameters do not depend on record order. Posterior ties predict class 1.
    """

    trainable = True

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = y.astype(int)
        self.classes_ = np.array([0, 1])
        self.class_count_ = np.array([(y == 0).sum(), (y == 1).sum()])
        self.degenerate_ = bool((self.class_count_ == 0).any())
        if self.class_count_.sum() == 0:
            raise ValueError("fit requires at least one sample")
        self.theta_ = np.zeros((2, X.shape[1]))
        self.var_ = np.full((2, X.shape[1]), self.var_floor)
        for cls in (0, 1):
            rows = X[y == cls]
            if len(rows) == 0:
                continue
            canonical = np.sort(rows, axis=0)  # order-invariant statistics
            self.theta_[cls] = canonical.mean(axis=0)
            self.var_[cls] = np.maximum(canonical.var(axis=0), self.var_floor)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "theta_"):
            raise NotFittedError("GaussianNBMonitor must be fitted before predicting")
        X = check_array(X, dtype=np.float64)
        if self.degenerate_:
            present = 0 if self.class_count_[1] == 0 else 1
            return np.full(len(X), present, dtype=int)
        log_post = np.zeros((len(X), 2))
        for cls in (0, 1):
            var = self.var_[cls]
            log_post[:, cls] = np.log(self.class_count_[cls] / self.class_count_.sum())
            log_post[:, cls] += (
                -0.5 * np.log(2.0 * np.pi * var) - ((X - self.theta_[cls]) ** 2) / (2.0 * var)
            ).sum(axis=1)
        return (log_post[:, 1] >= log_post[:, 0]).astype(int)  # ties -> 1


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self, label, feature=None, threshold=None, left=None, right=None):
        self.label = label
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


class DecisionTreeMonitor(BaseEstimator, ClassifierMixin):
    """Greedy binary decision tree maximizing Gini gain.

    Deterministic under fixed tie-breaking: among equal gains the lowest
    feature index wins, then the lowest threshold. Leaf ties predict class 1.
    """

    trainable = True

    def __init__(self, max_depth: int = 5, min_leaf: int = 5):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    @staticmethod
    def _gini(n0: int, n1: int) -> float:
        n = n0 + n1
        if n == 0:
            return 0.0
        return 1.0 - (n0 * n0 + n1 * n1) / (n * n)

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = y.astype(int)
        if len(y) < self.min_leaf:
            raise ValueError(f"fit requires at least min_leaf={self.min_leaf} samples")
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        self.tree_ = self._build(X, y, depth=0)
        return self

    def _build(self, X, y, depth: int) -> _TreeNode:
        n0 = int((y == 0).sum())
        n1 = int((y == 1).sum())
        label = 1 if n1 >= n0 else 0
        if depth >= self.max_depth or n0 == 0 or n1 == 0 or len(y) < 2 * self.min_leaf:
            return _TreeNode(label)
        parent_gini = self._gini(n0, n1)
        best_gain = 0.0
        best: tuple[int, float] | None = None
        n = len(y)
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            ys = y[order]
            ones = np.cumsum(ys)
            for cut in range(self.min_leaf, n - self.min_leaf + 1):
                if xs[cut - 1] == xs[cut]:
                    continue  # not a boundary between distinct values
                l1 = int(ones[cut - 1])
                l0 = cut - l1
                r1 = n1 - l1
                r0 = n0 - l0
                gain = parent_gini - (
                    cut / n * self._gini(l0, l1) + (n - cut) / n * self._gini(r0, r1)
                )
                if gain > best_gain:
                    best_gain = gain
                    best = (f, (xs[cut - 1] + xs[cut]) / 2.0)
        if best is None or best_gain <= 0.0:
            return _TreeNode(label)
        feature, threshold = best
        mask = X[:, feature] <= threshold
        return _TreeNode(
            label,
            feature=feature,
            threshold=threshold,
            left=self._build(X[mask], y[mask], depth + 1),
            right=self._build(X[~mask], y[~mask], depth + 1),
        )

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "tree_"):
            raise NotFittedError("DecisionTreeMonitor must be fitted before predicting")
        X = check_array(X, dtype=np.float64)
        out = np.empty(len(X), dtype=int)
        for i, row in enumerate(X):
            node = self.tree_
            while node.feature is not None:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.label
        return out


class FuzzyMonitorAdapter(BaseEstimator, ClassifierMixin):
    """Expose a fuzzy monitor model through the common monitor interface.

    predict delegates to the model and is read-only; fit continues online
    learning over the given samples.
    """

    trainable = True

    def __init__(self, model: FuzzyMonitorClassifier):
        self.model = model

    def fit(self, X, y, hmp=None):
        self.model.partial_fit(X, y, hmp=hmp)
        return self

    def predict(self, X) -> np.ndarray:
        return self.model.predict(X)
