"""Frame geometry: the mapping between plane block grids and the
per-macroblock serialization order (4 luma blocks, Cb, Cr)."""

from dataclasses import dataclass

import numpy as np

MB = 16


@dataclass
class Geometry:
    width: int
    height: int

    def __post_init__(self):
        self.mb_rows = self.height // MB
        self.mb_cols = self.width // MB
        self.n_mbs = self.mb_rows * self.mb_cols
        self.n_blocks = 6 * self.n_mbs
        hb, wb = self.height // 8, self.width // 8
        by, bx = np.mgrid[0:hb, 0:wb]
        mb = (by // 2) * self.mb_cols + (bx // 2)
        self.y_ids = (mb * 6 + (by % 2) * 2 + (bx % 2)).astype(np.intp)
        r, c = np.mgrid[0 : self.mb_rows, 0 : self.mb_cols]
        self.cb_ids = ((r * self.mb_cols + c) * 6 + 4).astype(np.intp)
        self.cr_ids = self.cb_ids + 1
        # serial block id -> (plane, block row, block col)
        self.block_plane = np.empty(self.n_blocks, dtype=np.uint8)
        self.block_row = np.empty(self.n_blocks, dtype=np.int32)
        self.block_col = np.empty(self.n_blocks, dtype=np.int32)
        for plane_id, ids in ((0, self.y_ids), (1, self.cb_ids), (2, self.cr_ids)):
            rows, cols = np.mgrid[0 : ids.shape[0], 0 : ids.shape[1]]
            flat = ids.ravel()
            self.block_plane[flat] = plane_id
            self.block_row[flat] = rows.ravel()
            self.block_col[flat] = cols.ravel()


_cache = {}


def geometry(width, height) -> Geometry:
    key = (width, height)
    if key not in _cache:
        _cache[key] = Geometry(width, height)
    return _cache[key]


def split_blocks(plane: np.ndarray) -> np.ndarray:
    """(H, W) -> (H/8 * W/8, 8, 8) in row-major block order."""
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2).reshape(-1, 8, 8)


def join_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    return blocks.reshape(h // 8, w // 8, 8, 8).swapaxes(1, 2).reshape(h, w)
