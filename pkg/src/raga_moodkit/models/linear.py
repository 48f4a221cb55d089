"""Multinomial softmax regression trained by full-batch gradient descent."""
from __future__ import annotations

import numpy as np

from ..errors import DivergenceDetected, ValidationError
from .base import BaseClassifier
from .serialize import decode_array, encode_array


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _loss_and_grad(weights, X_bias, onehot):
    """Mean cross-entropy and its gradient w.r.t. the (F+1, C) weight matrix."""
    probs = softmax(X_bias @ weights)
    n = X_bias.shape[0]
    loss = -np.sum(onehot * np.log(np.maximum(probs, 1e-300))) / n
    grad = X_bias.T @ (probs - onehot) / n
    return loss, grad


class SoftmaxRegression(BaseClassifier):
    """Deterministic zero-initialized weights; fixed learning rate.

    ``max_iter=0`` is allowed as a hook: the untrained model scores every
    class uniformly.
    """

    family = "logreg"

    def __init__(self, max_iter: int = 1000, learning_rate: float = 0.01):
        self.max_iter = max_iter
        self.learning_rate = learning_rate

    def fit(self, X, y):
        if self.max_iter < 0:
            raise ValidationError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        X, y = self._check_fit_inputs(X, y)
        n, f = X.shape
        c = len(self.classes_)
        X_bias = np.hstack([X, np.ones((n, 1))])
        onehot = (y[:, None] == self.classes_[None, :]).astype(np.float64)

        self.weights_ = np.zeros((f + 1, c))
        self.loss_curve_ = []
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.max_iter):
                loss, grad = _loss_and_grad(self.weights_, X_bias, onehot)
                if not np.isfinite(loss):
                    raise DivergenceDetected(
                        f"loss became non-finite after {len(self.loss_curve_)} steps"
                    )
                self.loss_curve_.append(loss)
                self.weights_ -= self.learning_rate * grad
            final_loss, _ = _loss_and_grad(self.weights_, X_bias, onehot)
        if not np.isfinite(final_loss):
            raise DivergenceDetected("loss became non-finite at the final iterate")
        self.loss_curve_.append(final_loss)
        return self

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        X_bias = np.hstack([X, np.ones((X.shape[0], 1))])
        return softmax(X_bias @ self.weights_)

    def _encode_params(self) -> dict:
        return {
            "max_iter": self.max_iter,
            "learning_rate": self.learning_rate,
            "weights": encode_array(self.weights_),
        }

    def _decode_params(self, params: dict) -> None:
        self.max_iter = int(params["max_iter"])
        self.learning_rate = float(params["learning_rate"])
        self.weights_ = decode_array(params["weights"])
        self.n_features_ = self.weights_.shape[0] - 1
