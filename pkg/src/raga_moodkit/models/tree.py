"""CART decision tree with gini or entropy impurity."""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .base import BaseClassifier
from .serialize import decode_array, encode_array

CRITERIA = ("gini", "entropy")

_LEAF = -1


def gini_impurity(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def entropy_impurity(counts) -> float:
    """Shannon entropy in bits."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity of each row of a (k, n_classes) count matrix."""
    totals = counts.sum(axis=1, keepdims=True)
    safe = np.maximum(totals, 1.0)
    p = counts / safe
    if criterion == "gini":
        return 1.0 - np.sum(p * p, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log2(np.maximum(p, 1e-300)), 0.0)
    return -np.sum(p * logs, axis=1)


class DecisionTreeClassifier(BaseClassifier):
    """Greedy best-split CART.

    At each node ``ceil(max_features * n_features)`` candidate features are
    sampled without replacement (seeded); candidate thresholds are midpoints
    of consecutive distinct sorted values. The split minimizing the weighted
    child impurity wins, ties going to the lowest feature index and then the
    lowest threshold. Rows with value <= threshold go left.
    """

    family = "tree"

    def __init__(
        self,
        criterion: str = "gini",
        max_depth: int | None = None,
        max_features: float = 1.0,
        min_samples_leaf: int = 1,
        min_samples_split: int = 2,
        seed: int = 0,
    ):
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.seed = seed

    def _validate_params(self):
        if self.criterion not in CRITERIA:
            raise ValidationError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if not 0 < self.max_features <= 1:
            raise ValidationError(f"max_features must be in (0, 1], got {self.max_features}")
        if self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise ValidationError(
                f"need min_samples_leaf >= 1 and min_samples_split >= 2, "
                f"got {self.min_samples_leaf}/{self.min_samples_split}"
            )
        if self.max_depth is not None and self.max_depth < 1:
            raise ValidationError(f"max_depth must be >= 1, got {self.max_depth}")

    def fit(self, X, y, classes=None):
        """Grow the tree. ``classes`` may widen the label set (used by forests
        so every tree's leaf histograms align on the same columns)."""
        self._validate_params()
        X, y = self._check_fit_inputs(X, y)
        if classes is not None:
            self.classes_ = np.asarray(classes, dtype=str)
        y_index = np.searchsorted(self.classes_, y)

        self._rng = np.random.default_rng(self.seed)
        self._n_sampled = max(1, int(np.ceil(self.max_features * X.shape[1])))

        features: list[int] = []
        thresholds: list[float] = []
        lefts: list[int] = []
        rights: list[int] = []
        counts: list[np.ndarray] = []

        def new_node():
            features.append(_LEAF)
            thresholds.append(0.0)
            lefts.append(_LEAF)
            rights.append(_LEAF)
            counts.append(np.zeros(len(self.classes_)))
            return len(features) - 1

        def build(rows: np.ndarray, depth: int) -> int:
            node = new_node()
            node_counts = np.bincount(y_index[rows], minlength=len(self.classes_)).astype(np.float64)
            counts[node] = node_counts
            n = len(rows)
            pure = np.count_nonzero(node_counts) <= 1
            if (
                pure
                or n < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)
            ):
                return node
            split = self._best_split(X, y_index, rows)
            if split is None:
                return node
            feature, threshold = split
            left_rows = rows[X[rows, feature] <= threshold]
            right_rows = rows[X[rows, feature] > threshold]
            features[node] = feature
            thresholds[node] = threshold
            lefts[node] = build(left_rows, depth + 1)
            rights[node] = build(right_rows, depth + 1)
            return node

        build(np.arange(X.shape[0]), depth=0)
        self.feature_ = np.asarray(features, dtype=np.int64)
        self.threshold_ = np.asarray(thresholds)
        self.left_ = np.asarray(lefts, dtype=np.int64)
        self.right_ = np.asarray(rights, dtype=np.int64)
        self.counts_ = np.vstack(counts)
        del self._rng
        return self

    def _best_split(self, X, y_index, rows):
        n = len(rows)
        n_classes = len(self.classes_)
        sampled = np.sort(
            self._rng.choice(X.shape[1], size=min(self._n_sampled, X.shape[1]), replace=False)
        )
        best = None  # (impurity, feature, threshold)
        for feature in sampled:
            values = X[rows, feature]
            order = np.argsort(values, kind="stable")
            sorted_values = values[order]
            sorted_labels = y_index[rows][order]
            boundaries = np.flatnonzero(sorted_values[:-1] != sorted_values[1:])
            if boundaries.size == 0:
                continue
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), sorted_labels] = 1.0
            prefix = np.cumsum(onehot, axis=0)
            left_counts = prefix[boundaries]
            right_counts = prefix[-1] - left_counts
            n_left = boundaries + 1
            n_right = n - n_left
            valid = (n_left >= self.min_samples_leaf) & (n_right >= self.min_samples_leaf)
            if not valid.any():
                continue
            weighted = (
                n_left * _impurity_rows(left_counts, self.criterion)
                + n_right * _impurity_rows(right_counts, self.criterion)
            ) / n
            weighted = np.where(valid, weighted, np.inf)
            pick = int(np.argmin(weighted))
            if not np.isfinite(weighted[pick]):
                continue
            threshold = 0.5 * (sorted_values[boundaries[pick]] + sorted_values[boundaries[pick] + 1])
            if best is None or weighted[pick] < best[0]:
                best = (weighted[pick], int(feature), float(threshold))
        if best is None:
            return None
        return best[1], best[2]

    def _leaf_for(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature_[node] != _LEAF
        while active.any():
            idx = np.flatnonzero(active)
            current = node[idx]
            go_left = X[idx, self.feature_[current]] <= self.threshold_[current]
            node[idx] = np.where(go_left, self.left_[current], self.right_[current])
            active = self.feature_[node] != _LEAF
        return node

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        leaf_counts = self.counts_[self._leaf_for(X)]
        return leaf_counts / leaf_counts.sum(axis=1, keepdims=True)

    @property
    def n_nodes(self) -> int:
        return len(self.feature_)

    def _encode_params(self) -> dict:
        return {
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "min_samples_leaf": self.min_samples_leaf,
            "min_samples_split": self.min_samples_split,
            "seed": self.seed,
            "n_features": self.n_features_,
            "feature": encode_array(self.feature_),
            "threshold": encode_array(self.threshold_),
            "left": encode_array(self.left_),
            "right": encode_array(self.right_),
            "counts": encode_array(self.counts_),
        }

    def _decode_params(self, params: dict) -> None:
        self.criterion = params["criterion"]
        self.max_depth = params["max_depth"]
        self.max_features = float(params["max_features"])
        self.min_samples_leaf = int(params["min_samples_leaf"])
        self.min_samples_split = int(params["min_samples_split"])
        self.seed = int(params["seed"])
        self.feature_ = decode_array(params["feature"]).astype(np.int64)
        self.threshold_ = decode_array(params["threshold"])
        self.left_ = decode_array(params["left"]).astype(np.int64)
        self.right_ = decode_array(params["right"]).astype(np.int64)
        self.counts_ = decode_array(params["counts"])
        self.n_features_ = int(params["n_features"])
