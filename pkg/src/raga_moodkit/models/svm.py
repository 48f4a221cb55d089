"""RBF-kernel support vector machine trained by pairwise dual ascent (SMO),
with one-vs-one reduction for multiclass problems."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..base import as_float_matrix
from ..errors import SingleClass, ValidationError
from .base import BaseClassifier
from .serialize import decode_array, encode_array


def rbf_kernel(a, b, gamma: float) -> float:
    """exp(-gamma * ||a - b||^2) for two vectors."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"vectors must share a dimension, got {a.shape} vs {b.shape}")
    delta = a - b
    return float(np.exp(-gamma * np.dot(delta, delta)))


def rbf_kernel_matrix(A, B, gamma: float) -> np.ndarray:
    """Kernel values between every row of A and every row of B."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class BinarySvmModel:
    """Fitted two-class machine: support vectors, dual coefficients and bias.

    ``dual_coef`` holds alpha_i * y_i for the retained (alpha > 0) rows;
    ``alphas``/``labels`` keep the raw pieces and ``support_indices`` their
    positions in the training set, for optimality checks.
    ``objective_history`` records the dual objective after every accepted
    update, starting from the zero initial point.
    """

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    gamma: float
    C: float
    alphas: np.ndarray
    labels: np.ndarray
    support_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    objective_history: list = field(default_factory=list, repr=False)
    n_sweeps: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        if len(self.support_vectors) == 0:
            return np.full(X.shape[0], self.bias)
        k = rbf_kernel_matrix(X, self.support_vectors, self.gamma)
        return k @ self.dual_coef + self.bias


def _dual_objective(alphas, labels, gram) -> float:
    coef = alphas * labels
    return float(alphas.sum() - 0.5 * coef @ gram @ coef)


def smo_train_binary(
    X,
    y,
    C: float = 10.0,
    gamma: float = 0.1,
    tol: float = 1e-3,
    max_passes: int = 10,
    seed: int = 0,
    max_sweeps: int = 10000,
) -> BinarySvmModel:
    """Pairwise coordinate ascent on the dual with +-1 labels.

    Sweeps the training set looking for multipliers that violate optimality
    beyond ``tol``; each violator is paired with a random partner (seeded)
    and the two multipliers are moved to the constrained pairwise optimum.
    After ``max_passes`` consecutive sweeps without a change the bias is
    consolidated from the margin constraints; sweeping resumes until the
    optimality conditions actually hold within ``tol`` (or the ``max_sweeps``
    budget runs out).

    When the pairwise curvature vanishes (duplicate or antipodal kernel
    rows) the update falls back to whichever feasible endpoint improves the
    dual, so duplicated points with conflicting labels still converge to
    bound multipliers.
    """
    X = as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != len(y):
        raise ValidationError(f"{X.shape[0]} rows vs {len(y)} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise SingleClass("binary training needs both labels present")
    if C <= 0:
        raise ValidationError(f"C must be > 0, got {C}")
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")

    n = X.shape[0]
    gram = rbf_kernel_matrix(X, X, gamma)
    alphas = np.zeros(n)
    bias = 0.0
    rng = np.random.default_rng(seed)
    objective = 0.0
    history = [objective]

    def margins(i):
        return float((alphas * y) @ gram[i] + bias)

    def delta_objective(i, j, t, g_i, g_j):
        # Change of the dual when alpha_j moves to t along the equality
        # constraint (g_* are kernel expansions without the bias).
        s = y[i] * y[j]
        d_j = t - alphas[j]
        d_i = -s * d_j
        return (
            d_i
            + d_j
            - d_i * y[i] * g_i
            - d_j * y[j] * g_j
            - 0.5 * (d_i * d_i * gram[i, i] + d_j * d_j * gram[j, j])
            - s * d_i * d_j * gram[i, j]
        )

    def consolidated_bias() -> float:
        # Recompute b globally from the margin constraints: the mean over
        # free support vectors, or the midpoint of the feasible interval
        # when every multiplier sits at a bound.
        expansion = (alphas * y) @ gram
        free = (alphas > 1e-9) & (alphas < C - 1e-9)
        if free.any():
            return float(np.mean(y[free] - expansion[free]))
        boundary = y - expansion
        at_zero = alphas <= 1e-9
        is_lower = (at_zero & (y > 0)) | (~at_zero & (y < 0))
        lower = boundary[is_lower]
        upper = boundary[~is_lower]
        if lower.size and upper.size:
            return 0.5 * (float(lower.max()) + float(upper.min()))
        if lower.size:
            return float(lower.max())
        if upper.size:
            return float(upper.min())
        return bias

    def worst_violation() -> float:
        margins_all = y * ((alphas * y) @ gram + bias)
        at_zero = alphas <= 1e-12
        at_c = alphas >= C - 1e-12
        slack = np.abs(margins_all - 1.0)
        slack[at_zero] = np.maximum(0.0, 1.0 - margins_all[at_zero])
        slack[at_c] = np.maximum(0.0, margins_all[at_c] - 1.0)
        return float(slack.max())

    sweeps = 0
    while sweeps < max_sweeps:
        passes_clean = 0
        while passes_clean < max_passes and sweeps < max_sweeps:
            changed = 0
            for i in range(n):
                f_i = margins(i)
                e_i = f_i - y[i]
                r_i = y[i] * e_i
                if not ((r_i < -tol and alphas[i] < C) or (r_i > tol and alphas[i] > 0)):
                    continue
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                f_j = margins(j)
                e_j = f_j - y[j]

                if y[i] != y[j]:
                    low = max(0.0, alphas[j] - alphas[i])
                    high = min(C, C + alphas[j] - alphas[i])
                else:
                    low = max(0.0, alphas[i] + alphas[j] - C)
                    high = min(C, alphas[i] + alphas[j])
                if high - low < 1e-12:
                    continue

                g_i = f_i - bias
                g_j = f_j - bias
                eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
                if eta < 0.0:
                    candidate = alphas[j] - y[j] * (e_i - e_j) / eta
                    candidate = min(max(candidate, low), high)
                else:
                    # Flat or concave-up direction: the pairwise optimum sits
                    # at a feasible endpoint.
                    gain_low = delta_objective(i, j, low, g_i, g_j)
                    gain_high = delta_objective(i, j, high, g_i, g_j)
                    candidate = low if gain_low > gain_high else high

                if abs(candidate - alphas[j]) < 1e-9 * (candidate + alphas[j] + 1e-9):
                    continue
                gain = delta_objective(i, j, candidate, g_i, g_j)
                if gain < -1e-9:
                    continue

                alpha_j_old = alphas[j]
                alpha_i_old = alphas[i]
                alphas[j] = candidate
                alphas[i] = alpha_i_old + y[i] * y[j] * (alpha_j_old - candidate)

                b1 = (
                    bias
                    - e_i
                    - y[i] * (alphas[i] - alpha_i_old) * gram[i, i]
                    - y[j] * (alphas[j] - alpha_j_old) * gram[i, j]
                )
                b2 = (
                    bias
                    - e_j
                    - y[i] * (alphas[i] - alpha_i_old) * gram[i, j]
                    - y[j] * (alphas[j] - alpha_j_old) * gram[j, j]
                )
                if 0.0 < alphas[i] < C:
                    bias = b1
                elif 0.0 < alphas[j] < C:
                    bias = b2
                else:
                    bias = 0.5 * (b1 + b2)

                objective += gain
                history.append(objective)
                changed += 1
            sweeps += 1
            passes_clean = passes_clean + 1 if changed == 0 else 0
        # sweeping stalled: consolidate b and stop only if the optimality
        # conditions genuinely hold; otherwise resume with the better bias
        bias = consolidated_bias()
        if worst_violation() <= tol:
            break

    keep = np.flatnonzero(alphas > 0.0)
    return BinarySvmModel(
        support_vectors=X[keep].copy(),
        dual_coef=(alphas * y)[keep],
        bias=float(bias),
        gamma=gamma,
        C=C,
        alphas=alphas[keep].copy(),
        labels=y[keep].copy(),
        support_indices=keep,
        objective_history=history,
        n_sweeps=sweeps,
    )


def kkt_violations(model: BinarySvmModel, X, y) -> np.ndarray:
    """Per-row slack by which the optimality conditions are violated.

    ``X``/``y`` must be the training rows in their original order; the
    bound for each row depends on whether its multiplier is 0, C, or
    strictly between. A trained model should have every slack within the
    training tolerance.
    """
    X = as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    margins = y * model.decision_function(X)
    alphas = np.zeros(len(y))
    alphas[model.support_indices] = model.alphas
    violations = np.zeros(len(y))
    at_zero = alphas <= 1e-12
    at_c = alphas >= model.C - 1e-12
    interior = ~at_zero & ~at_c
    violations[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    violations[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    violations[interior] = np.abs(margins[interior] - 1.0)
    return violations


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    exp_x = np.exp(x[~pos])
    out[~pos] = exp_x / (1.0 + exp_x)
    return out


class RbfSvmClassifier(BaseClassifier):
    """One binary machine per unordered class pair; votes decide the label.

    Scores are a probability proxy: a softmax over the per-class vote tally
    plus a squashed sum of signed decision values. Because the squash stays
    inside (0, 1), the score argmax equals the vote argmax with ties broken
    by the summed decision values, then by class order.
    """

    family = "svm"

    def __init__(
        self,
        C: float = 10.0,
        gamma: float = 0.1,
        tol: float = 1e-3,
        max_passes: int = 10,
        seed: int = 0,
    ):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_fit_inputs(X, y)
        if len(self.classes_) < 2:
            raise SingleClass("need at least two classes")
        pairs = list(itertools.combinations(range(len(self.classes_)), 2))
        seeds = np.random.default_rng(self.seed).integers(0, 2**63 - 1, size=len(pairs))
        self.pair_models_ = {}
        for (a, b), pair_seed in zip(pairs, seeds):
            mask = (y == self.classes_[a]) | (y == self.classes_[b])
            signs = np.where(y[mask] == self.classes_[a], 1.0, -1.0)
            self.pair_models_[(a, b)] = smo_train_binary(
                X[mask],
                signs,
                C=self.C,
                gamma=self.gamma,
                tol=self.tol,
                max_passes=self.max_passes,
                seed=int(pair_seed),
            )
        return self

    def decision_values(self, X) -> dict:
        """Per-pair signed decision values, keyed by class-index pair."""
        X = self._check_predict_input(X)
        return {pair: model.decision_function(X) for pair, model in self.pair_models_.items()}

    def predict_scores(self, X) -> np.ndarray:
        X = self._check_predict_input(X)
        n_classes = len(self.classes_)
        votes = np.zeros((X.shape[0], n_classes))
        decision_sums = np.zeros((X.shape[0], n_classes))
        for (a, b), model in self.pair_models_.items():
            values = model.decision_function(X)
            wins_a = values >= 0.0
            votes[:, a] += wins_a
            votes[:, b] += ~wins_a
            decision_sums[:, a] += values
            decision_sums[:, b] -= values
        combined = votes + _sigmoid(decision_sums)
        shifted = combined - combined.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def _encode_params(self) -> dict:
        pairs = []
        for (a, b), model in sorted(self.pair_models_.items()):
            pairs.append(
                {
                    "classes": [int(a), int(b)],
                    "support_vectors": encode_array(model.support_vectors),
                    "dual_coef": encode_array(model.dual_coef),
                    "alphas": encode_array(model.alphas),
                    "labels": encode_array(model.labels),
                    "bias": model.bias,
                }
            )
        return {
            "C": self.C,
            "gamma": self.gamma,
            "tol": self.tol,
            "max_passes": self.max_passes,
            "seed": self.seed,
            "pairs": pairs,
        }

    def _decode_params(self, params: dict) -> None:
        self.C = float(params["C"])
        self.gamma = float(params["gamma"])
        self.tol = float(params["tol"])
        self.max_passes = int(params["max_passes"])
        self.seed = int(params["seed"])
        self.pair_models_ = {}
        n_features = None
        for pair in params["pairs"]:
            a, b = pair["classes"]
            model = BinarySvmModel(
                support_vectors=decode_array(pair["support_vectors"]),
                dual_coef=decode_array(pair["dual_coef"]),
                bias=float(pair["bias"]),
                gamma=self.gamma,
                C=self.C,
                alphas=decode_array(pair["alphas"]),
                labels=decode_array(pair["labels"]),
            )
            self.pair_models_[(int(a), int(b))] = model
            if model.support_vectors.size:
                n_features = model.support_vectors.shape[1]
        if n_features is None:
            raise ValidationError("serialized SVM has no support vectors")
        self.n_features_ = n_features


def ovo_train(X, y, C: float = 10.0, gamma: float = 0.1, tol: float = 1e-3, seed: int = 0):
    """Convenience wrapper returning a fitted one-vs-one classifier."""
    return RbfSvmClassifier(C=C, gamma=gamma, tol=tol, seed=seed).fit(X, y)
