"""K-nearest-neighbour classifier over euclidean, manhattan or hamming distance."""
from __future__ import annotations

import numpy as np

from ..errors import KTooLarge, ValidationError
from .base import BaseClassifier
from .serialize import decode_array, encode_array

METRICS = ("euclidean", "manhattan", "hamming")
WEIGHTS = ("uniform", "distance")


def pairwise_distances(queries, points, metric: str, chunk_size: int = 256) -> np.ndarray:
    """Distance matrix (n_queries, n_points) for one of the supported metrics.

    Hamming on continuous values is the fraction of coordinates that are not
    exactly equal (so it saturates near 1 on real-valued data).
    """
    if metric not in METRICS:
        raise ValidationError(f"metric must be one of {METRICS}, got {metric!r}")
    queries = np.asarray(queries, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    out = np.empty((len(queries), len(points)))
    for start in range(0, len(queries), chunk_size):
        delta = queries[start : start + chunk_size, None, :] - points[None, :, :]
        if metric == "euclidean":
            out[start : start + chunk_size] = np.sqrt(np.sum(delta * delta, axis=2))
        elif metric == "manhattan":
            out[start : start + chunk_size] = np.sum(np.abs(delta), axis=2)
        else:
            out[start : start + chunk_size] = np.mean(delta != 0.0, axis=2)
    return out


class KnnClassifier(BaseClassifier):
    """Stores the training set at fit; all work happens at prediction.

    Neighbour selection is stable: equal distances resolve to the earlier
    training row. With ``weights="distance"`` votes are 1/d, and exact
    matches (d = 0) dominate: only the zero-distance neighbours vote, each
    with equal weight.
    """

    family = "knn"

    def __init__(self, k: int = 5, metric: str = "manhattan", weights: str = "uniform"):
        self.k = k
        self.metric = metric
        self.weights = weights

    def fit(self, X, y):
        if self.metric not in METRICS:
            raise ValidationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.weights not in WEIGHTS:
            raise ValidationError(f"weights must be one of {WEIGHTS}, got {self.weights!r}")
        X, y = self._check_fit_inputs(X, y)
        if not 1 <= self.k:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.k > X.shape[0]:
            raise KTooLarge(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.X_ = X
        self.y_index_ = np.searchsorted(self.classes_, y)
        return self

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        distances = pairwise_distances(X, self.X_, self.metric)
        nearest = np.argsort(distances, axis=1, kind="stable")[:, : self.k]
        n_classes = len(self.classes_)
        scores = np.zeros((len(X), n_classes))
        for row in range(len(X)):
            idx = nearest[row]
            labels = self.y_index_[idx]
            if self.weights == "uniform":
                weights = np.full(self.k, 1.0 / self.k)
            else:
                d = distances[row, idx]
                exact = d == 0.0
                if exact.any():
                    weights = exact / exact.sum()
                else:
                    weights = (1.0 / d) / np.sum(1.0 / d)
            np.add.at(scores[row], labels, weights)
        return scores

    def _encode_params(self) -> dict:
        return {
            "k": self.k,
            "metric": self.metric,
            "weights": self.weights,
            "X": encode_array(self.X_),
            "y_index": encode_array(self.y_index_),
        }

    def _decode_params(self, params: dict) -> None:
        self.k = int(params["k"])
        self.metric = params["metric"]
        self.weights = params["weights"]
        self.X_ = decode_array(params["X"])
        self.y_index_ = decode_array(params["y_index"]).astype(np.int64)
        self.n_features_ = self.X_.shape[1]
