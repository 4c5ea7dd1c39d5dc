"""8x8 orthonormal block transform, quantizer and zigzag scan.

The transform basis is stored with its mirror symmetry enforced bitwise,
`BASIS[u, 7 - x] == (-1)**u * BASIS[u, x]`, so that a horizontal flip
expressed in the coefficient domain (column reversal plus sign flip of the
odd horizontal bands) reproduces the pixel-domain flip bit-exactly.  Do not
rebuild the basis from raw cosines elsewhere; that guarantee depends on the
stored values.
"""

import numpy as np

from ..errors import ParameterError
from ..instrumentation import counters


def _build_basis() -> np.ndarray:
    basis = np.zeros((8, 8))
    for u in range(8):
        scale = np.sqrt(1.0 / 8.0) if u == 0 else 0.5
        for x in range(4):
            basis[u, x] = scale * np.cos((2 * x + 1) * u * np.pi / 16.0)
        for x in range(4, 8):
            basis[u, x] = (-1.0) ** u * basis[u, 7 - x]
    return basis


BASIS = _build_basis()
BASIS.setflags(write=False)


def dct8x8_forward(blocks: np.ndarray) -> np.ndarray:
    """DCT-II of one (8, 8) block or a stack (..., 8, 8) of them."""
    blocks = np.asarray(blocks, dtype=np.float64)
    return BASIS @ blocks @ BASIS.T


def dct8x8_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Inverse transform; ticks the pixel-work counter per block."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    counters.idct_calls += 1 if coeffs.ndim == 2 else int(np.prod(coeffs.shape[:-2]))
    return BASIS.T @ coeffs @ BASIS


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Symmetric rounding: round_half_away(-x) == -round_half_away(x)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(coeffs: np.ndarray, q_step: int) -> np.ndarray:
    if q_step < 1:
        raise ParameterError(f"q_step must be >= 1, got {q_step}")
    return round_half_away(np.asarray(coeffs, dtype=np.float64) / q_step).astype(np.int32)


def dequantize(qcoeffs: np.ndarray, q_step: int) -> np.ndarray:
    if q_step < 1:
        raise ParameterError(f"q_step must be >= 1, got {q_step}")
    return np.asarray(qcoeffs, dtype=np.float64) * q_step


def _zigzag_positions():
    order = []
    for d in range(15):
        cells = [(r, d - r) for r in range(max(0, d - 7), min(7, d) + 1)]
        order.extend(cells if d % 2 else reversed(cells))
    return order


_POS = _zigzag_positions()
ZIGZAG_FLAT = np.array([r * 8 + c for r, c in _POS], dtype=np.intp)
INV_ZIGZAG_FLAT = np.argsort(ZIGZAG_FLAT)
# horizontal frequency of each zigzag band; odd entries change sign under
# a horizontal flip
BAND_COLS = np.array([c for _, c in _POS], dtype=np.intp)


def zigzag(block: np.ndarray) -> np.ndarray:
    """(..., 8, 8) -> (..., 64) in low-to-high-frequency scan order."""
    block = np.asarray(block)
    return block.reshape(block.shape[:-2] + (64,))[..., ZIGZAG_FLAT]


def inverse_zigzag(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.shape[-1] != 64:
        raise ParameterError("zigzag vector must have 64 entries")
    return vec[..., INV_ZIGZAG_FLAT].reshape(vec.shape[:-1] + (8, 8))
