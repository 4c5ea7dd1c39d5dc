"""Frequency band selection: keep the lowest-frequency prefix of the
zigzag bands in each color channel.

"Lowest-frequency prefix" is the auditable interpretation of relevance
used here; `band_energy` exists so the choice can be checked against
measured spectra of real tensors.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ParameterError
from .features import CoeffTensor

MAX_BANDS = 64


def _split_channels(values):
    depth = values.shape[-1]
    if depth % 3:
        raise ParameterError(f"channel depth {depth} is not 3 x bands")
    return depth // 3


def select_bands(tensor, k: int):
    """First `k` zigzag bands of each channel, values untouched.

    Accepts a CoeffTensor or a plain (..., 3 * bands) array; tensors that
    were already narrowed keep min(k, bands) bands per channel.
    """
    if not 1 <= k <= MAX_BANDS:
        raise ParameterError(f"band count must be in 1..={MAX_BANDS}, got {k}")
    values = tensor.values if isinstance(tensor, CoeffTensor) else np.asarray(tensor)
    bands = _split_channels(values)
    keep = min(k, bands)
    idx = np.concatenate([np.arange(keep) + c * bands for c in range(3)])
    out = values[..., idx]
    if isinstance(tensor, CoeffTensor):
        return CoeffTensor(values=out, bands=keep)
    return out


def band_energy(tensor) -> np.ndarray:
    """Mean squared coefficient per zigzag band, pooled over blocks and
    channels."""
    values = tensor.values if isinstance(tensor, CoeffTensor) else np.asarray(tensor)
    if values.size == 0:
        raise ParameterError("empty coefficient tensor")
    bands = _split_channels(values)
    stacked = values.reshape(-1, 3, bands).astype(np.float64)
    return (stacked ** 2).mean(axis=(0, 1))


def energy_retained(tensor, k: int) -> float:
    """Fraction of total band energy kept by select_bands(tensor, k)."""
    energy = band_energy(tensor)
    total = energy.sum()
    if total == 0:
        return 1.0
    return float(energy[:k].sum() / total)


class BandSelector(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping select_bands for pipeline use.

    Works on single tensors (h, w, 3*bands) or batches with any number of
    leading axes.
    """

    def __init__(self, k=64):
        self.k = k

    def fit(self, X, y=None):
        if not 1 <= self.k <= MAX_BANDS:
            raise ParameterError(f"band count must be in 1..={MAX_BANDS}, got {self.k}")
        return self

    def transform(self, X):
        return select_bands(X, self.k)
