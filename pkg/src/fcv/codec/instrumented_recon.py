"""Per-block frame reconstruction used by the full decoder.

Walks coefficient blocks one at a time, skipping blocks with no coded
coefficients, and ticks the pixel-work counters.  The arithmetic
(dequantize, inverse transform, plane-wise clip) is value-identical to the
encoder's internal reconstruction; tests compare the two bit for bit.

Returns the clipped float reconstruction, which doubles as the anchor for
the following P-frame; output frames round it to uint8 separately so that
rounding noise never enters the prediction loop.
"""

import numpy as np

from ..instrumentation import counters
from .dct import INV_ZIGZAG_FLAT, dct8x8_inverse
from .video import Frame420


def reconstruct_frame(geo, ptr, bands, values, q_step, base: Frame420 | None) -> Frame420:
    h, w = geo.height, geo.width
    if base is None:
        planes = [np.zeros((h, w)), np.zeros((h // 2, w // 2)),
                  np.zeros((h // 2, w // 2))]
    else:
        planes = [base.y, base.cb, base.cr]
    block_plane = geo.block_plane
    block_row = geo.block_row
    block_col = geo.block_col
    q = float(q_step)
    inv = INV_ZIGZAG_FLAT
    for b in range(geo.n_blocks):
        lo, hi = ptr[b], ptr[b + 1]
        if lo == hi:
            continue  # no coded coefficients: block is pure prediction
        vec = np.zeros(64)
        vec[bands[lo:hi]] = values[lo:hi]
        coeff = (vec * q)[inv].reshape(8, 8)
        pix = dct8x8_inverse(coeff)
        plane = planes[block_plane[b]]
        y0 = block_row[b] * 8
        x0 = block_col[b] * 8
        plane[y0 : y0 + 8, x0 : x0 + 8] += pix
        counters.pixel_writes += 64
    return Frame420(y=np.clip(planes[0], 0.0, 255.0),
                    cb=np.clip(planes[1], 0.0, 255.0),
                    cr=np.clip(planes[2], 0.0, 255.0))
