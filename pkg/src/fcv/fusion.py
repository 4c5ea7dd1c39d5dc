"""Score aggregation and weighted late fusion of the two streams, plus a
small linear softmax classifier so the whole pipeline runs end to end.

The classifier stands in for the stream networks: it consumes pooled
tensor features (per-band averages for the frequency stream, per-channel
moments for the temporal stream) and trains with plain minibatch gradient
descent under a step-decay schedule.
"""

import struct
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_X_y

from .errors import ParameterError, TensorFormatError, UnsupportedFormatError

CHECKPOINT_MAGIC = b"FCVC"
CHECKPOINT_VERSION = 1

DEFAULT_WEIGHTS = (2.0, 1.0)


def video_score(frame_scores) -> np.ndarray:
    """Per-class arithmetic mean of the frame scores."""
    if len(frame_scores) == 0:
        raise ParameterError("need at least one frame score")
    arr = np.asarray(frame_scores, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError("frame scores must share one class count")
    return arr.mean(axis=0)


@dataclass(frozen=True)
class FusionWeights:
    w_freq: float
    w_temp: float

    def __post_init__(self):
        if self.w_freq < 0 or self.w_temp < 0:
            raise ParameterError("fusion weights must be non-negative")
        if self.w_freq == 0 and self.w_temp == 0:
            raise ParameterError("fusion weights must not both be zero")


def late_fuse(s_freq, s_temp, weights=DEFAULT_WEIGHTS) -> np.ndarray:
    """Weighted average of the two streams' video scores."""
    if not isinstance(weights, FusionWeights):
        weights = FusionWeights(*weights)
    a = np.asarray(s_freq, dtype=np.float64)
    b = np.asarray(s_temp, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"score shapes differ: {a.shape} vs {b.shape}")
    return (weights.w_freq * a + weights.w_temp * b) / (weights.w_freq + weights.w_temp)


# ------------------------------------------------------------------- pooling

def pool_frequency(tensor) -> np.ndarray:
    """Global average per band-channel: (h, w, C) -> (C,)."""
    return np.asarray(tensor, dtype=np.float64).mean(axis=(0, 1))


def pool_temporal(tensor) -> np.ndarray:
    """Mean and variance per motion channel: (h, w, 2) -> (4,)."""
    arr = np.asarray(tensor, dtype=np.float64).reshape(-1, tensor.shape[-1])
    return np.concatenate([arr.mean(axis=0), arr.var(axis=0)])


# ---------------------------------------------------------------- classifier

def softmax_cross_entropy(weights, bias, X, y_idx):
    """Mean cross-entropy of a linear softmax model and its gradients."""
    logits = X @ weights.T + bias
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = X.shape[0]
    loss = -np.log(probs[np.arange(n), y_idx] + 1e-300).mean()
    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    delta /= n
    return loss, delta.T @ X, delta.sum(axis=0)


class ToyClassifier(ClassifierMixin, BaseEstimator):
    """Linear softmax classifier trained by minibatch gradient descent.

    The learning rate divides by 10 at each milestone epoch.  Training is
    a pure function of (data, hyperparameters, seed).
    """

    def __init__(self, lr=0.1, epochs=100, batch_size=32, milestones=(), seed=0):
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.milestones = milestones
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ParameterError("training needs at least two classes")
        n, dim = X.shape
        c = len(self.classes_)
        rng = np.random.default_rng(self.seed)
        self.weights_ = np.zeros((c, dim))
        self.bias_ = np.zeros(c)
        self.loss_curve_ = []
        lr = self.lr
        milestones = set(self.milestones)
        for epoch in range(self.epochs):
            if epoch in milestones:
                lr /= 10.0
            order = rng.permutation(n)
            losses = []
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                loss, grad_w, grad_b = softmax_cross_entropy(
                    self.weights_, self.bias_, X[batch], y_idx[batch]
                )
                self.weights_ -= lr * grad_w
                self.bias_ -= lr * grad_b
                losses.append(loss)
            self.loss_curve_.append(float(np.mean(losses)))
        return self

    def predict_scores(self, X) -> np.ndarray:
        """Raw per-class scores, one row per sample."""
        X = check_array(X)
        if X.shape[1] != self.weights_.shape[1]:
            raise ParameterError(
                f"feature dim {X.shape[1]} != trained dim {self.weights_.shape[1]}"
            )
        return X @ self.weights_.T + self.bias_

    decision_function = predict_scores

    def predict(self, X):
        return self.classes_[self.predict_scores(X).argmax(axis=1)]

    # ------------------------------------------------------------ checkpoint

    def save(self, path):
        c, dim = self.weights_.shape
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack(">BHI", CHECKPOINT_VERSION, c, dim))
            fh.write(self.classes_.astype("<i4").tobytes())
            fh.write(self.weights_.astype("<f4").tobytes())
            fh.write(self.bias_.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "ToyClassifier":
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:4] != CHECKPOINT_MAGIC:
            raise UnsupportedFormatError(f"bad checkpoint magic {blob[:4]!r}")
        version, c, dim = struct.unpack_from(">BHI", blob, 4)
        if version != CHECKPOINT_VERSION:
            raise UnsupportedFormatError(f"unsupported checkpoint version {version}")
        pos = 4 + struct.calcsize(">BHI")
        need = pos + 4 * c + 4 * c * dim + 4 * c
        if len(blob) != need:
            raise TensorFormatError(
                f"checkpoint holds {len(blob)} bytes, expected {need}"
            )
        clf = cls()
        clf.classes_ = np.frombuffer(blob, dtype="<i4", count=c, offset=pos).copy()
        pos += 4 * c
        clf.weights_ = np.frombuffer(blob, dtype="<f4", count=c * dim, offset=pos
                                     ).reshape(c, dim).astype(np.float64)
        pos += 4 * c * dim
        clf.bias_ = np.frombuffer(blob, dtype="<f4", count=c, offset=pos
                                  ).astype(np.float64)
        return clf
