"""Four-hidden-layer perceptron: ReLU activations, softmax output,
cross-entropy loss, mini-batch gradient descent."""
from __future__ import annotations

import numpy as np

from ..errors import DivergenceDetected, ValidationError
from .base import BaseClassifier
from .linear import softmax
from .serialize import decode_array, encode_array


def _init_layers(sizes, rng):
    """Glorot-style uniform init for weights, zeros for biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X):
    """Activations per layer; the last entry holds the softmax output."""
    activations = [np.asarray(X, dtype=np.float64)]
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = activations[-1] @ w + b
        activations.append(softmax(z) if i == len(weights) - 1 else np.maximum(z, 0.0))
    return activations


def loss_and_grads(weights, biases, X, onehot):
    """Mean cross-entropy plus gradients for every weight matrix and bias."""
    activations = forward(weights, biases, X)
    probs = activations[-1]
    n = X.shape[0]
    loss = -np.sum(onehot * np.log(np.maximum(probs, 1e-300))) / n

    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    delta = (probs - onehot) / n
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0.0)
    return loss, grad_w, grad_b


class MlpClassifier(BaseClassifier):
    """Fully connected n_features -> h1 -> h2 -> h3 -> h4 -> n_classes net.

    Exactly four hidden layers; batch order is reshuffled every epoch from
    the seeded generator, so training is deterministic given the seed.
    ``epochs=0`` is a hook that leaves the freshly initialized net untrained.
    """

    family = "mlp"

    def __init__(
        self,
        hidden=(256, 128, 64, 32),
        epochs: int = 100,
        batch_size: int = 50,
        learning_rate: float = 1e-3,
        seed: int = 0,
    ):
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X, y):
        hidden = tuple(int(h) for h in self.hidden)
        if len(hidden) != 4 or any(h < 1 for h in hidden):
            raise ValidationError(f"hidden must be four positive layer sizes, got {self.hidden}")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValidationError(
                f"need epochs >= 0, batch_size >= 1, learning_rate > 0; "
                f"got {self.epochs}/{self.batch_size}/{self.learning_rate}"
            )
        X, y = self._check_fit_inputs(X, y)
        onehot = (y[:, None] == self.classes_[None, :]).astype(np.float64)
        rng = np.random.default_rng(self.seed)
        self.weights_, self.biases_ = _init_layers(
            [X.shape[1], *hidden, len(self.classes_)], rng
        )

        n = X.shape[0]
        self.loss_curve_ = []
        with np.errstate(over="ignore", invalid="ignore"):
            for epoch in range(self.epochs):
                order = rng.permutation(n)
                for start in range(0, n, self.batch_size):
                    batch = order[start : start + self.batch_size]
                    _, grad_w, grad_b = loss_and_grads(
                        self.weights_, self.biases_, X[batch], onehot[batch]
                    )
                    for layer in range(len(self.weights_)):
                        self.weights_[layer] -= self.learning_rate * grad_w[layer]
                        self.biases_[layer] -= self.learning_rate * grad_b[layer]
                epoch_loss, _, _ = loss_and_grads(self.weights_, self.biases_, X, onehot)
                if not np.isfinite(epoch_loss):
                    raise DivergenceDetected(f"loss became non-finite at epoch {epoch}")
                self.loss_curve_.append(epoch_loss)
        return self

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        return forward(self.weights_, self.biases_, X)[-1]

    def _encode_params(self) -> dict:
        return {
            "hidden": list(self.hidden),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "weights": [encode_array(w) for w in self.weights_],
            "biases": [encode_array(b) for b in self.biases_],
        }

    def _decode_params(self, params: dict) -> None:
        self.hidden = tuple(int(h) for h in params["hidden"])
        self.epochs = int(params["epochs"])
        self.batch_size = int(params["batch_size"])
        self.learning_rate = float(params["learning_rate"])
        self.seed = int(params["seed"])
        self.weights_ = [decode_array(w) for w in params["weights"]]
        self.biases_ = [decode_array(b) for b in params["biases"]]
        self.n_features_ = self.weights_[0].shape[0]
