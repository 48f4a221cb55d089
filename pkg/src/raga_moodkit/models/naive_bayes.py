"""Gaussian naive Bayes with per-class diagonal covariance."""
from __future__ import annotations

import numpy as np

from ..errors import ClassTooSmall
from .base import BaseClassifier
from .serialize import decode_array, encode_array


class GaussianNbClassifier(BaseClassifier):
    """Class priors from frequencies; per-feature means and floored variances.

    Posteriors are accumulated in log space and normalized with a
    log-sum-exp, so widely separated classes stay representable.
    """

    family = "gnb"

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = self._check_fit_inputs(X, y)
        n_classes = len(self.classes_)
        self.theta_ = np.empty((n_classes, X.shape[1]))
        self.var_ = np.empty((n_classes, X.shape[1]))
        self.priors_ = np.empty(n_classes)
        for i, cls in enumerate(self.classes_):
            rows = X[y == cls]
            if rows.shape[0] < 2:
                raise ClassTooSmall(f"class {cls!r} has {rows.shape[0]} row(s); need at least 2")
            self.theta_[i] = rows.mean(axis=0)
            self.var_[i] = np.maximum(rows.var(axis=0), self.var_floor)
            self.priors_[i] = rows.shape[0] / X.shape[0]
        return self

    def _joint_log_likelihood(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        delta = X[:, None, :] - self.theta_[None, :, :]
        log_density = -0.5 * (np.log(2.0 * np.pi * self.var_) + delta * delta / self.var_)
        return np.log(self.priors_) + log_density.sum(axis=2)

    def predict_scores(self, X) -> np.ndarray:
        joint = self._joint_log_likelihood(X)
        shifted = joint - joint.max(axis=1, keepdims=True)
        likelihood = np.exp(shifted)
        return likelihood / likelihood.sum(axis=1, keepdims=True)

    def _encode_params(self) -> dict:
        return {
            "var_floor": self.var_floor,
            "theta": encode_array(self.theta_),
            "var": encode_array(self.var_),
            "priors": encode_array(self.priors_),
        }

    def _decode_params(self, params: dict) -> None:
        self.var_floor = float(params["var_floor"])
        self.theta_ = decode_array(params["theta"])
        self.var_ = decode_array(params["var"])
        self.priors_ = decode_array(params["priors"])
        self.n_features_ = self.theta_.shape[1]
