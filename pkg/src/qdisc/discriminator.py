"""The quantum discriminator model.

A model over ``b`` binary features owns one 2x2 block per feature pattern
of a ``2B x 2B`` block-diagonal unitary (``B = 2**b``). A block is the
identity (class 0) or Pauli-X (class 1), so the model reduces to the set of
1-based block indices whose parameter is 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import qcore
from ._validation import check_binary_features, check_binary_labels

MODEL_FORMAT = "qdisc-model-v1"
MAX_DENSE_FEATURES = 11


class ModelError(ValueError):
    pass


def place_values(b: int) -> np.ndarray:
    """``[2**(b-1), ..., 2, 1]``, the weights that turn a bit pattern into its block offset."""
    return np.left_shift(np.int64(1), np.arange(b - 1, -1, -1, dtype=np.int64))


def feature_index(x: Sequence[int]) -> int:
    """1-based block index ``j = 1 + tau . x`` owning pattern ``x``.

    The block covers rows/columns ``2j - 1`` and ``2j`` (1-based).
    """
    bits = check_binary_features([x])[0]
    if bits.size == 0:
        raise ModelError("feature vector must have at least one bit")
    return 1 + int(bits.astype(np.int64) @ place_values(bits.size))


def block_offsets(X) -> np.ndarray:
    """Zero-based block offsets ``tau . x`` for every row of a binary matrix."""
    X = check_binary_features(X)
    return X.astype(np.int64) @ place_values(X.shape[1])


@dataclass(frozen=True)
class DiscriminatorModel:
    """Feature width ``b`` and the block indices ``j`` with ``theta_j = 1``."""

    b: int
    theta: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.b < 1:
            raise ModelError(f"feature width must be >= 1, got {self.b}")
        theta = self.theta
        if not (isinstance(theta, frozenset) and all(type(j) is int for j in theta)):
            theta = frozenset(int(j) for j in theta)
        if theta and (min(theta) < 1 or max(theta) > 2**self.b):
            raise ModelError(f"block indices must lie in 1..{2**self.b}")
        object.__setattr__(self, "theta", theta)

    @property
    def tau(self) -> np.ndarray:
        return place_values(self.b)

    @property
    def num_blocks(self) -> int:
        return 2**self.b

    def theta_ones(self) -> list[int]:
        return sorted(self.theta)

    def to_dict(self) -> dict:
        return {"format": MODEL_FORMAT, "b": self.b, "theta_ones": self.theta_ones()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "DiscriminatorModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelError(f"expected format {MODEL_FORMAT!r}, got {data.get('format')!r}")
        try:
            b = data["b"]
            ones = data["theta_ones"]
        except KeyError as exc:
            raise ModelError(f"model file is missing {exc.args[0]!r}") from None
        if not isinstance(b, int) or not all(isinstance(j, int) for j in ones):
            raise ModelError("b and theta_ones must be integers")
        return cls(b, frozenset(ones))

    @classmethod
    def from_json(cls, text: str) -> "DiscriminatorModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def train(features, labels) -> DiscriminatorModel:
    """Set ``theta_j = 1`` for every block owned by a class-1 training pattern.

    A single pass over the data; a pattern seen with both labels ends up
    in class 1. Runs in O(N b) plus the sort that deduplicates indices.
    """
    X = check_binary_features(features)
    y = check_binary_labels(labels, len(X))
    if X.shape[1] == 0:
        raise ModelError("feature vectors must have at least one bit")
    offsets = X[y == 1].astype(np.int64) @ place_values(X.shape[1])
    ones = np.unique(offsets) + 1
    return DiscriminatorModel(X.shape[1], frozenset(ones.tolist()))


def _check_width(model: DiscriminatorModel, width: int) -> None:
    if width != model.b:
        raise ModelError(f"model expects {model.b} feature bit(s), got {width}")


def predict(model: DiscriminatorModel, x: Sequence[int]) -> int:
    bits = check_binary_features([x])
    _check_width(model, bits.shape[1])
    return int(feature_index(bits[0]) in model.theta)


def predict_many(model: DiscriminatorModel, X) -> np.ndarray:
    """Index-lookup predictions for each row of ``X``."""
    X = check_binary_features(X)
    _check_width(model, X.shape[1])
    ones = np.fromiter(model.theta, dtype=np.int64, count=len(model.theta))
    return np.isin(block_offsets(X) + 1, ones).astype(np.int8)


def build_unitary(model: DiscriminatorModel) -> np.ndarray:
    """Dense ``2B x 2B`` block-diagonal matrix: I for theta_j = 0, X for theta_j = 1."""
    if model.b > MAX_DENSE_FEATURES:
        raise ModelError(f"dense unitary is capped at b = {MAX_DENSE_FEATURES}, got {model.b}")
    dim = 2 * model.num_blocks
    mat = np.eye(dim, dtype=np.complex128)
    for j in model.theta:
        r = 2 * (j - 1)
        mat[r : r + 2, r : r + 2] = [[0, 1], [1, 0]]
    return mat


def predict_by_matrix(model: DiscriminatorModel, x: Sequence[int]) -> int:
    """Prediction read from ``U |x 0>`` with the dense unitary."""
    state = qcore.basis_state([*x, 0])
    _check_width(model, state.num_qubits - 1)
    out = qcore.StateVector(build_unitary(model) @ state.amplitudes, state.num_qubits)
    return qcore.readout(out)[-1]


def l1_error(predicted, actual) -> float:
    """Mean absolute disagreement between two 0/1 label vectors."""
    p = np.asarray(predicted, dtype=np.int64).reshape(-1)
    y = np.asarray(actual, dtype=np.int64).reshape(-1)
    if p.size == 0 or y.size == 0:
        raise ValueError("l1_error needs non-empty inputs")
    if p.size != y.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {y.size} labels")
    return float(np.abs(p - y).mean())


def recommended_feature_width(n: int) -> int:
    """``ceil(log2 n)``, at least 1, so the 2**b patterns roughly match n points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(1, math.ceil(math.log2(n)))


class QuantumDiscriminator(ClassifierMixin, BaseEstimator):
    """scikit-learn classifier wrapping :func:`train` and the inference paths.

    Parameters
    ----------
    inference : {"lookup", "circuit", "matrix"}, default="lookup"
        How ``predict`` evaluates a point: index lookup, simulation of the
        synthesized circuit, or the dense unitary (``b <= 11``).
    """

    def __init__(self, inference: str = "lookup"):
        self.inference = inference

    def fit(self, X, y):
        if self.inference not in ("lookup", "circuit", "matrix"):
            raise ValueError(f"unknown inference mode {self.inference!r}")
        X = check_binary_features(X)
        y = check_binary_labels(y, len(X))
        self.model_ = train(X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_binary_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} "
                f"is expecting {self.n_features_in_} features as input"
            )
        if self.inference == "lookup":
            return predict_many(self.model_, X).astype(np.int64)
        if self.inference == "matrix":
            return np.array([predict_by_matrix(self.model_, x) for x in X], dtype=np.int64)
        from .synth import circuit_predict, synthesize

        circuit = synthesize(self.model_)
        return np.array([circuit_predict(circuit, x) for x in X], dtype=np.int64)
