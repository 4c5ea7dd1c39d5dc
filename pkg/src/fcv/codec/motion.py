"""Block motion estimation, compensation and differential MV coding.

Sign convention: a motion vector (dx, dy) points from the target
macroblock to its match in the anchor frame, i.e. the prediction for the
block at (x0, y0) is read from the anchor at (x0 + dx, y0 + dy).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import CorruptStreamError
from ..instrumentation import counters
from .video import Frame420

MB = 16


def motion_estimate(target_mb, anchor, center, search_range):
    """Best-SAD motion vector for one 16x16 luma block.

    `center` is the (y0, x0) top-left corner of the block in the target
    frame.  The search window is clipped to the anchor bounds.  Ties are
    broken by smallest |dx|+|dy|, then smallest dy, then smallest dx.
    Returns ((dx, dy), sad).
    """
    y0, x0 = center
    h, w = anchor.shape
    anchor = np.asarray(anchor)
    if np.issubdtype(anchor.dtype, np.integer):
        work = np.int32
    elif anchor.dtype == np.float32:
        work = np.float32  # pre-cast planes avoid a copy per macroblock
    else:
        work = np.float64
    target = np.asarray(target_mb, dtype=work)
    dy_lo = max(-search_range, -y0)
    dy_hi = min(search_range, h - MB - y0)
    dx_lo = max(-search_range, -x0)
    dx_hi = min(search_range, w - MB - x0)
    window = anchor[y0 + dy_lo : y0 + dy_hi + MB, x0 + dx_lo : x0 + dx_hi + MB]
    views = sliding_window_view(window.astype(work, copy=False), (MB, MB))
    sad = np.abs(views - target).sum(axis=(2, 3))
    best = sad.min()
    ys, xs = np.nonzero(sad == best)
    dys = ys + dy_lo
    dxs = xs + dx_lo
    pick = np.lexsort((dxs, dys, np.abs(dxs) + np.abs(dys)))[0]
    cost = int(best) if work is np.int32 else float(best)
    return (int(dxs[pick]), int(dys[pick])), cost


def chroma_mv(dx, dy):
    """4:2:0 convention: luma MV halved, rounded toward zero."""
    return int(dx / 2), int(dy / 2)


def motion_compensate(anchor: Frame420, mv_field, inter_mask=None) -> Frame420:
    """Prediction frame built by copying anchor blocks at MV offsets.

    `mv_field` has shape (mb_rows, mb_cols, 2) holding (dx, dy).  Intra
    macroblocks (inter_mask False) predict as zero; their content is coded
    without a reference.  Plane dtype follows the anchor (the codec anchors
    on pre-rounding float reconstructions).  Raises on out-of-bounds
    references.
    """
    rows, cols = mv_field.shape[:2]
    h, w = anchor.y.shape
    dtype = anchor.y.dtype
    pred_y = np.zeros((h, w), dtype=dtype)
    pred_cb = np.zeros((h // 2, w // 2), dtype=dtype)
    pred_cr = np.zeros_like(pred_cb)
    anchor_y = anchor.y
    anchor_cb = anchor.cb
    anchor_cr = anchor.cr
    for r in range(rows):
        y0 = r * MB
        for c in range(cols):
            if inter_mask is not None and not inter_mask[r, c]:
                continue
            dx, dy = int(mv_field[r, c, 0]), int(mv_field[r, c, 1])
            x0 = c * MB
            sy, sx = y0 + dy, x0 + dx
            if not (0 <= sy <= h - MB and 0 <= sx <= w - MB):
                raise CorruptStreamError(
                    f"motion vector ({dx},{dy}) at macroblock ({r},{c}) "
                    f"references outside the anchor"
                )
            pred_y[y0 : y0 + MB, x0 : x0 + MB] = anchor_y[sy : sy + MB, sx : sx + MB]
            cdx, cdy = chroma_mv(dx, dy)
            cy, cx = r * 8 + cdy, c * 8 + cdx
            pred_cb[r * 8 : r * 8 + 8, c * 8 : c * 8 + 8] = anchor_cb[cy : cy + 8, cx : cx + 8]
            pred_cr[r * 8 : r * 8 + 8, c * 8 : c * 8 + 8] = anchor_cr[cy : cy + 8, cx : cx + 8]
            counters.pixel_writes += MB * MB + 2 * 64
    return Frame420(y=pred_y, cb=pred_cb, cr=pred_cr)


def diff_code_mv(mv_field, inter_mask):
    """Raster-order MV deltas for inter macroblocks.

    The predictor is the previous inter macroblock's MV, starting from
    (0, 0) at the frame start; intra macroblocks are skipped by the
    predictor chain and emit nothing.
    """
    deltas = []
    px, py = 0, 0
    rows, cols = inter_mask.shape
    for r in range(rows):
        for c in range(cols):
            if not inter_mask[r, c]:
                continue
            dx, dy = int(mv_field[r, c, 0]), int(mv_field[r, c, 1])
            deltas.append((dx - px, dy - py))
            px, py = dx, dy
    return deltas


def diff_decode_mv(deltas, inter_mask):
    """Inverse of diff_code_mv; intra macroblocks get MV (0, 0)."""
    rows, cols = inter_mask.shape
    field = np.zeros((rows, cols, 2), dtype=np.int32)
    it = iter(deltas)
    px, py = 0, 0
    for r in range(rows):
        for c in range(cols):
            if not inter_mask[r, c]:
                continue
            try:
                ddx, ddy = next(it)
            except StopIteration:
                raise CorruptStreamError("motion-vector stream shorter than inter count") from None
            px += int(ddx)
            py += int(ddy)
            field[r, c] = (px, py)
    if next(it, None) is not None:
        raise CorruptStreamError("motion-vector stream longer than inter count")
    return field
