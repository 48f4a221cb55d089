"""Random forest: bagged CART trees voting with their leaf distributions."""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .base import BaseClassifier
from .tree import CRITERIA, DecisionTreeClassifier


class RandomForestClassifier(BaseClassifier):
    """Seeded bootstrap resamples (with replacement, size n) feed one tree
    each; scores are the mean of the per-tree leaf class distributions.

    ``bootstrap=False`` is a test hook that trains every tree on the full
    sample.
    """

    family = "forest"

    def __init__(
        self,
        n_estimators: int = 100,
        criterion: str = "gini",
        max_depth: int | None = None,
        max_features: float = 1.0,
        min_samples_leaf: int = 1,
        min_samples_split: int = 2,
        seed: int = 0,
        bootstrap: bool = True,
    ):
        self.n_estimators = n_estimators
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.seed = seed
        self.bootstrap = bootstrap

    def fit(self, X, y):
        if self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.criterion not in CRITERIA:
            raise ValidationError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        X, y = self._check_fit_inputs(X, y)
        master = np.random.default_rng(self.seed)
        n = X.shape[0]
        self.trees_ = []
        for _ in range(self.n_estimators):
            boot_seed, tree_seed = master.integers(0, 2**63 - 1, size=2)
            if self.bootstrap:
                rows = np.random.default_rng(boot_seed).integers(0, n, size=n)
            else:
                rows = np.arange(n)
            tree = DecisionTreeClassifier(
                criterion=self.criterion,
                max_depth=self.max_depth,
                max_features=self.max_features,
                min_samples_leaf=self.min_samples_leaf,
                min_samples_split=self.min_samples_split,
                seed=int(tree_seed),
            )
            tree.fit(X[rows], y[rows], classes=self.classes_)
            self.trees_.append(tree)
        return self

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        total = np.zeros((X.shape[0], len(self.classes_)))
        for tree in self.trees_:
            total += tree.predict_scores(X)
        return total / len(self.trees_)

    def _encode_params(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "min_samples_leaf": self.min_samples_leaf,
            "min_samples_split": self.min_samples_split,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "trees": [tree._encode_params() for tree in self.trees_],
        }

    def _decode_params(self, params: dict) -> None:
        self.n_estimators = int(params["n_estimators"])
        self.criterion = params["criterion"]
        self.max_depth = params["max_depth"]
        self.max_features = float(params["max_features"])
        self.min_samples_leaf = int(params["min_samples_leaf"])
        self.min_samples_split = int(params["min_samples_split"])
        self.seed = int(params["seed"])
        self.bootstrap = bool(params["bootstrap"])
        self.trees_ = []
        for tree_params in params["trees"]:
            tree = DecisionTreeClassifier()
            tree.classes_ = self.classes_
            tree._decode_params(tree_params)
            self.trees_.append(tree)
        self.n_features_ = self.trees_[0].n_features_
