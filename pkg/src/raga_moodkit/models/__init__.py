"""Classifier families behind one contract (fit / predict / predict_scores).

A fitted model's label space lives in ``classes_`` (sorted order); scores
are one value per class summing to 1 per row, and ``predict`` is the score
argmax with ties resolved to the earliest class.
"""
from __future__ import annotations

from ..errors import ValidationError
from .base import BaseClassifier
from .forest import RandomForestClassifier
from .linear import SoftmaxRegression
from .mlp import MlpClassifier
from .naive_bayes import GaussianNbClassifier
from .neighbors import KnnClassifier
from .serialize import FORMAT_VERSION, from_envelope, to_envelope
from .svm import BinarySvmModel, RbfSvmClassifier, kkt_violations, ovo_train, rbf_kernel, smo_train_binary
from .tree import DecisionTreeClassifier

#: Family tag -> class, in canonical family order (used for tie-breaking).
FAMILIES = {
    "knn": KnnClassifier,
    "gnb": GaussianNbClassifier,
    "logreg": SoftmaxRegression,
    "svm": RbfSvmClassifier,
    "forest": RandomForestClassifier,
    "mlp": MlpClassifier,
}

FAMILY_ORDER = tuple(FAMILIES)


def make_classifier(family: str, **params) -> BaseClassifier:
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {FAMILY_ORDER}")
    return FAMILIES[family](**params)


__all__ = [
    "BaseClassifier",
    "BinarySvmModel",
    "DecisionTreeClassifier",
    "FAMILIES",
    "FAMILY_ORDER",
    "FORMAT_VERSION",
    "GaussianNbClassifier",
    "KnnClassifier",
    "MlpClassifier",
    "RandomForestClassifier",
    "RbfSvmClassifier",
    "SoftmaxRegression",
    "from_envelope",
    "kkt_violations",
    "make_classifier",
    "ovo_train",
    "rbf_kernel",
    "smo_train_binary",
    "to_envelope",
]
