"""Video encoder: I/P group-of-pictures structure over the block transform,
motion search and entropy layer.

The encoder carries its own decode loop so every P-frame predicts from the
*reconstructed* anchor, exactly as the decoder will see it.  Quantization
uses a flat step equal to `quality`.
"""

from dataclasses import dataclass, field

import numpy as np

from ..bitio import HuffmanTable
from ..errors import ParameterError
from ..features import CoeffTensor, FrameFeatures, assemble_coeff_tensor
from . import coefcode, stream_format
from .coefcode import BitSink
from .dct import BASIS, dct8x8_forward, quantize, round_half_away, zigzag, inverse_zigzag
from .layout import MB, geometry, join_blocks, split_blocks
from .motion import diff_code_mv, motion_compensate, motion_estimate
from .video import Frame420, RawVideo

# inter mode is chosen when the best match beats this fraction of the
# intra proxy cost (sum of |pixel - block mean|)
INTER_BIAS = 0.9


def _quantized_zigzag(plane, q_step):
    coeffs = dct8x8_forward(split_blocks(plane.astype(np.float64)))
    return zigzag(quantize(coeffs, q_step))


def _serial_blocks(geo, yq, cbq, crq):
    """Assemble plane grids into the (n_blocks, 64) serialization order."""
    dense = np.empty((geo.n_blocks, 64), dtype=np.int32)
    dense[geo.y_ids.ravel()] = yq.reshape(-1, 64)
    dense[geo.cb_ids.ravel()] = cbq.reshape(-1, 64)
    dense[geo.cr_ids.ravel()] = crq.reshape(-1, 64)
    return dense


def _reconstruct(geo, dense_zz, q_step, base: Frame420 | None) -> Frame420:
    """Shared reconstruction arithmetic: base + inverse transform, clipped.

    `base` is the motion-compensated prediction (zero for intra blocks) or
    None for an all-intra frame.  The result keeps float precision: the
    codec anchors prediction on the pre-rounding reconstruction, so that
    requantizing an unchanged macroblock yields an all-zero residual.
    Output frames are rounded separately (see anchor_to_frame).  Must stay
    value-identical to the decoder's per-block path.
    """
    coeffs = inverse_zigzag(dense_zz.astype(np.float64) * q_step)
    pix = BASIS.T @ coeffs @ BASIS
    h, w = geo.height, geo.width
    planes = []
    for ids, (ph, pw), base_plane in (
        (geo.y_ids, (h, w), None if base is None else base.y),
        (geo.cb_ids, (h // 2, w // 2), None if base is None else base.cb),
        (geo.cr_ids, (h // 2, w // 2), None if base is None else base.cr),
    ):
        grid = join_blocks(pix[ids.ravel()], ph, pw)
        if base_plane is not None:
            grid = grid + base_plane
        planes.append(np.clip(grid, 0.0, 255.0))
    return Frame420(y=planes[0], cb=planes[1], cr=planes[2])


def anchor_to_frame(anchor: Frame420) -> Frame420:
    """Round a float reconstruction to the uint8 output frame."""
    return Frame420(y=round_half_away(anchor.y).astype(np.uint8),
                    cb=round_half_away(anchor.cb).astype(np.uint8),
                    cr=round_half_away(anchor.cr).astype(np.uint8))


@dataclass
class _FramePlan:
    ftype: int
    block_ids: np.ndarray
    bands: np.ndarray
    values: np.ndarray
    inter_mask: np.ndarray | None = None
    mv_deltas: list = field(default_factory=list)


def _mode_decisions(target_y, anchor_y, geo, search_range):
    """Per-macroblock motion search and inter/intra choice."""
    rows, cols = geo.mb_rows, geo.mb_cols
    mbs = target_y.reshape(rows, MB, cols, MB).swapaxes(1, 2).astype(np.float64)
    means = mbs.mean(axis=(2, 3), keepdims=True)
    intra_cost = np.abs(mbs - means).sum(axis=(2, 3))
    mv_field = np.zeros((rows, cols, 2), dtype=np.int32)
    inter_mask = np.zeros((rows, cols), dtype=bool)
    # float32 is exact for sample-scale sums and halves the search cost
    anchor32 = anchor_y.astype(np.float32)
    target32 = target_y.astype(np.float32)
    for r in range(rows):
        for c in range(cols):
            (dx, dy), sad = motion_estimate(
                target32[r * MB : r * MB + MB, c * MB : c * MB + MB],
                anchor32,
                (r * MB, c * MB),
                search_range,
            )
            if sad < INTER_BIAS * intra_cost[r, c]:
                inter_mask[r, c] = True
                mv_field[r, c] = (dx, dy)
    return mv_field, inter_mask


def _apply_residual_skip(geo, dense, src_y, src_cb, src_cr, q_step, inter_mask):
    """Zero out residuals of inter macroblocks that coding would not improve.

    Quantization noise re-quantizes to nonzero levels whenever a
    coefficient sits exactly on a half step, so an unchanged macroblock
    would otherwise oscillate forever.  Skipping whenever the coded
    residual's distortion is no lower than the skip distortion settles the
    chain (and saves the bits).
    """
    res = np.empty((geo.n_blocks, 8, 8))
    res[geo.y_ids.ravel()] = split_blocks(src_y)
    res[geo.cb_ids.ravel()] = split_blocks(src_cb)
    res[geo.cr_ids.ravel()] = split_blocks(src_cr)
    coded = BASIS.T @ inverse_zigzag(dense.astype(np.float64) * q_step) @ BASIS
    d_skip = (res ** 2).sum(axis=(1, 2)).reshape(-1, 6).sum(axis=1)
    d_coded = ((res - coded) ** 2).sum(axis=(1, 2)).reshape(-1, 6).sum(axis=1)
    # the >= comparison needs slack: a coefficient sitting exactly on a half
    # step codes to a mathematically distortion-neutral level, and float
    # noise in the pixel-domain sums would otherwise break the tie randomly
    skip = (d_coded >= d_skip * (1.0 - 1e-9)) & inter_mask.ravel()
    dense[np.repeat(skip, 6)] = 0


def _plan_frame(frame, anchor, geo, q_step, search_range, collect):
    """Transform one frame into its sparse coefficient plan (plus features
    and the reconstruction that becomes the next anchor)."""
    if anchor is None:
        yq = _quantized_zigzag(frame.y, q_step).reshape(geo.height // 8, geo.width // 8, 64)
        cbq = _quantized_zigzag(frame.cb, q_step).reshape(geo.height // 16, geo.width // 16, 64)
        crq = _quantized_zigzag(frame.cr, q_step).reshape(geo.height // 16, geo.width // 16, 64)
        dense = _serial_blocks(geo, yq, cbq, crq)
        recon = _reconstruct(geo, dense, q_step, None)
        features = None
        if collect:
            features = CoeffTensor(values=assemble_coeff_tensor(yq, cbq, crq))
        block_ids, bands = np.nonzero(dense)
        plan = _FramePlan(ftype=stream_format.FRAME_I,
                          block_ids=block_ids.astype(np.int32),
                          bands=bands.astype(np.int32),
                          values=dense[block_ids, bands])
        return plan, recon, features

    mv_field, inter_mask = _mode_decisions(frame.y, anchor.y, geo, search_range)
    # the prediction for intra macroblocks is zero, exactly the decoder's base
    base = motion_compensate(anchor, mv_field, inter_mask)
    src_y = frame.y.astype(np.float64) - base.y
    src_cb = frame.cb.astype(np.float64) - base.cb
    src_cr = frame.cr.astype(np.float64) - base.cr
    yq = _quantized_zigzag(src_y, q_step).reshape(geo.height // 8, geo.width // 8, 64)
    cbq = _quantized_zigzag(src_cb, q_step).reshape(geo.height // 16, geo.width // 16, 64)
    crq = _quantized_zigzag(src_cr, q_step).reshape(geo.height // 16, geo.width // 16, 64)
    dense = _serial_blocks(geo, yq, cbq, crq)
    _apply_residual_skip(geo, dense, src_y, src_cb, src_cr, q_step, inter_mask)
    recon = _reconstruct(geo, dense, q_step, base)
    features = None
    if collect:
        features = (mv_field.copy(), ~inter_mask)
    block_ids, bands = np.nonzero(dense)
    plan = _FramePlan(ftype=stream_format.FRAME_P,
                      block_ids=block_ids.astype(np.int32),
                      bands=bands.astype(np.int32),
                      values=dense[block_ids, bands],
                      inter_mask=inter_mask,
                      mv_deltas=diff_code_mv(mv_field, inter_mask))
    return plan, recon, features


def _encode_payload(plan: _FramePlan, geo, enc_coef, enc_mv):
    """Frame payload sections: P-frames lead with one raw mode bit per
    macroblock and the motion deltas of the inter ones; coefficient blocks
    for the whole frame follow in serialization order."""
    sink = BitSink()
    if plan.ftype == stream_format.FRAME_P:
        for bit in plan.inter_mask.ravel():
            sink.put(1 if bit else 0, 1)
        for ddx, ddy in plan.mv_deltas:
            coefcode.encode_mv_delta(sink, enc_mv, ddx, ddy)
    ptr = np.searchsorted(plan.block_ids, np.arange(geo.n_blocks + 1)).tolist()
    bands = plan.bands.tolist()
    values = plan.values.tolist()
    for b in range(geo.n_blocks):
        coefcode.encode_block(sink, enc_coef, bands[ptr[b] : ptr[b + 1]],
                              values[ptr[b] : ptr[b + 1]])
    return sink.finish()


def encode_video(video: RawVideo, gop_size=12, quality=4, search_range=8):
    """Encode to the container format; returns the stream bytes."""
    stream, _ = encode_video_traced(video, gop_size, quality, search_range,
                                    collect_features=False)
    return stream


def encode_video_traced(video: RawVideo, gop_size=12, quality=4, search_range=8,
                        collect_features=True, collect_recon=False):
    """Encode and also return the per-frame features the encoder saw.

    The returned FrameFeatures are the ground truth that partial decoding
    must reproduce bit-for-bit.  With collect_recon the encoder's own
    reconstructed output frames are returned as a third element; the full
    decoder must reproduce them exactly.
    """
    video.validate()
    if video.n_frames < 1:
        raise ParameterError("need at least one frame")
    if gop_size < 1 or gop_size > 255:
        raise ParameterError(f"gop_size must be in 1..=255, got {gop_size}")
    if not 1 <= quality <= 255:
        raise ParameterError(f"quality must be in 1..=255, got {quality}")
    if not 0 <= search_range <= 120:
        raise ParameterError(f"search_range must be in 0..=120, got {search_range}")
    geo = geometry(video.width, video.height)

    plans = []
    features = []
    recons = []
    coef_freqs = np.zeros(coefcode.COEF_ALPHABET, dtype=np.int64)
    mv_freqs = np.zeros(coefcode.MV_ALPHABET, dtype=np.int64)
    anchor = None
    for i, frame in enumerate(video.frames):
        is_i = i % gop_size == 0
        plan, recon, feat = _plan_frame(frame, None if is_i else anchor, geo,
                                        quality, search_range, collect_features)
        anchor = recon
        if collect_recon:
            recons.append(anchor_to_frame(recon))
        plans.append(plan)
        coef_freqs += coefcode.block_symbol_frequencies(
            plan.block_ids, plan.bands, plan.values, geo.n_blocks
        )
        mv_freqs += coefcode.mv_symbol_frequencies(plan.mv_deltas)
        if collect_features:
            if is_i:
                features.append(FrameFeatures(frame_no=i, kind="I", dct=feat))
            else:
                mv_field, intra_mask = feat
                mv_field[intra_mask] = 0
                features.append(FrameFeatures(frame_no=i, kind="P",
                                              mv_field=mv_field,
                                              intra_mask=intra_mask))

    if not mv_freqs.any():
        mv_freqs[0] = 1  # keep the table section well-formed for all-I streams
    tables = {
        stream_format.TABLE_COEF: HuffmanTable.from_frequencies(
            {s: int(c) for s, c in enumerate(coef_freqs) if c}, max_len=16
        ),
        stream_format.TABLE_MV: HuffmanTable.from_frequencies(
            {s: int(c) for s, c in enumerate(mv_freqs) if c}, max_len=16
        ),
    }
    enc_coef = coefcode.build_encode_table(tables[stream_format.TABLE_COEF],
                                           coefcode.COEF_ALPHABET)
    enc_mv = coefcode.build_encode_table(tables[stream_format.TABLE_MV],
                                         coefcode.MV_ALPHABET)

    out = bytearray(stream_format.write_header(
        video.width, video.height, video.fps, gop_size, quality, search_range,
        video.n_frames, tables,
    ))
    for i, plan in enumerate(plans):
        payload, pad = _encode_payload(plan, geo, enc_coef, enc_mv)
        out += stream_format.write_frame_header(i, plan.ftype, pad, len(payload))
        out += payload
    if collect_recon:
        return bytes(out), features, recons
    return bytes(out), features
