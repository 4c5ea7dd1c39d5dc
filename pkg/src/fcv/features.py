"""Feature containers shared by the encoder, the partial decoder and the
data pipeline."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError


@dataclass
class CoeffTensor:
    """Block-grid of quantized transform coefficients.

    `values` has shape (h_blocks, w_blocks, 3 * bands): the three color
    channels each contribute `bands` zigzag-ordered coefficients, luma
    first, with chroma grids replicated 2x2 onto the luma block grid.
    Band 0 of each channel is the DC coefficient.
    """

    values: np.ndarray
    bands: int = 64

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ParameterError("coefficient tensor must be 3-dimensional")
        if self.values.shape[2] != 3 * self.bands:
            raise ParameterError(
                f"depth {self.values.shape[2]} != 3 channels x {self.bands} bands"
            )

    @property
    def h_blocks(self):
        return self.values.shape[0]

    @property
    def w_blocks(self):
        return self.values.shape[1]

    @property
    def channels(self):
        return 3

    def channel(self, index: int) -> np.ndarray:
        """(h_blocks, w_blocks, bands) view of one color channel."""
        return self.values[:, :, index * self.bands : (index + 1) * self.bands]


@dataclass
class FrameFeatures:
    """Partial-decode output for one frame: coefficients or motion field."""

    frame_no: int
    kind: str  # "I" or "P"
    dct: Optional[CoeffTensor] = None
    mv_field: Optional[np.ndarray] = None  # (mb_rows, mb_cols, 2) int32
    intra_mask: Optional[np.ndarray] = None  # (mb_rows, mb_cols) bool, P only
    residual: Optional[CoeffTensor] = None  # P only, opt-in

    def __post_init__(self):
        if self.kind not in ("I", "P"):
            raise ParameterError(f"frame kind must be I or P, got {self.kind!r}")
        if (self.dct is not None) == (self.mv_field is not None):
            raise ParameterError("exactly one of dct/mv_field must be populated")


def assemble_coeff_tensor(yq: np.ndarray, cbq: np.ndarray, crq: np.ndarray) -> np.ndarray:
    """Stack per-plane coefficient grids onto the luma block grid.

    Chroma grids are half the luma grid in both directions and are
    replicated 2x2 so every luma block carries a full 3 x 64 band column.
    """
    up = lambda c: np.repeat(np.repeat(c, 2, axis=0), 2, axis=1)
    return np.concatenate([yq, up(cbq), up(crq)], axis=2).astype(np.int32)
