"""Reference full decoder: entropy decode, dequantize, inverse transform,
motion compensation.

The pixel path deliberately mirrors the encoder's reconstruction block by
block; it is the correctness oracle for the codec and the cost baseline
against which partial extraction is benchmarked.  Phase wall-clock is
accumulated into an optional DecodeStats for the benchmark harness.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import CorruptStreamError, FcvError
from ..instrumentation import counters
from . import coefcode, stream_format
from .coefcode import BitSource
from .encoder import anchor_to_frame
from .instrumented_recon import reconstruct_frame
from .layout import geometry
from .motion import diff_decode_mv, motion_compensate
from .video import RawVideo


@dataclass
class DecodeStats:
    phases: dict = field(default_factory=lambda: {
        "header_parse": 0.0, "entropy_decode": 0.0,
        "idct_recon": 0.0, "motion_comp": 0.0,
    })
    bytes_read: int = 0
    frames: int = 0


def read_mode_bits(src: BitSource, n_mbs: int) -> np.ndarray:
    bits = np.empty(n_mbs, dtype=bool)
    pos = 0
    while pos < n_mbs:
        chunk = min(32, n_mbs - pos)
        word = src.read(chunk)
        for j in range(chunk - 1, -1, -1):
            bits[pos + j] = word & 1
            word >>= 1
        pos += chunk
    return bits


def decode_p_sections(src: BitSource, info, luts, keep_blocks: bool):
    """Mode bits, motion field, then every coefficient block of a P-frame."""
    geo = geometry(info.width, info.height)
    inter_mask = read_mode_bits(src, geo.n_mbs).reshape(geo.mb_rows, geo.mb_cols)
    lut_mv, width_mv = luts[stream_format.TABLE_MV]
    deltas = [
        coefcode.decode_mv_delta(src, lut_mv, width_mv)
        for _ in range(int(inter_mask.sum()))
    ]
    mv_field = diff_decode_mv(deltas, inter_mask)
    lut_coef, width_coef = luts[stream_format.TABLE_COEF]
    sparse = coefcode.decode_blocks(src, lut_coef, width_coef, geo.n_blocks,
                                    keep=keep_blocks)
    return inter_mask, mv_field, sparse


def decode_i_section(src: BitSource, info, luts, keep_blocks: bool):
    geo = geometry(info.width, info.height)
    lut_coef, width_coef = luts[stream_format.TABLE_COEF]
    return coefcode.decode_blocks(src, lut_coef, width_coef, geo.n_blocks,
                                  keep=keep_blocks)


def check_payload_consumed(src: BitSource, entry):
    if src.consumed() != src.limit:
        raise CorruptStreamError(
            f"payload length mismatch: consumed {src.consumed()} of "
            f"{src.limit} bits", frame_no=entry.frame_no,
        )


def build_luts(info):
    return {tid: coefcode.build_decode_table(t) for tid, t in info.tables.items()}


def decode_video_full(stream: bytes, stats: DecodeStats | None = None) -> RawVideo:
    t0 = time.perf_counter()
    info = stream_format.parse_headers(stream)
    luts = build_luts(info)
    geo = geometry(info.width, info.height)
    if stats is not None:
        stats.phases["header_parse"] += time.perf_counter() - t0
        stats.bytes_read += info.bytes_touched

    frames = []
    anchor = None
    mb_range = np.arange(geo.n_blocks + 1, dtype=np.int64)
    for entry in info.frames:
        payload = stream[entry.payload_offset : entry.payload_offset + entry.payload_len]
        if stats is not None:
            stats.bytes_read += len(payload)
        src = BitSource(payload, entry.pad_bits)
        try:
            t1 = time.perf_counter()
            if entry.ftype == stream_format.FRAME_I:
                sparse = decode_i_section(src, info, luts, keep_blocks=True)
                inter_mask = mv_field = None
            else:
                if anchor is None:
                    raise CorruptStreamError("P-frame without an anchor",
                                             frame_no=entry.frame_no)
                inter_mask, mv_field, sparse = decode_p_sections(
                    src, info, luts, keep_blocks=True
                )
            check_payload_consumed(src, entry)
            t2 = time.perf_counter()

            if entry.ftype == stream_format.FRAME_I:
                base = None
                t3 = t2
            else:
                base = motion_compensate(anchor, mv_field, inter_mask)
                t3 = time.perf_counter()

            block_ids, bands, values = sparse
            ptr = np.searchsorted(block_ids, mb_range)
            recon = reconstruct_frame(geo, ptr, bands, values, info.quality, base)
            frame = anchor_to_frame(recon)
            counters.pixel_writes += frame.y.size + frame.cb.size + frame.cr.size
            t4 = time.perf_counter()
            if stats is not None:
                stats.phases["entropy_decode"] += t2 - t1
                stats.phases["motion_comp"] += t3 - t2
                stats.phases["idct_recon"] += t4 - t3
                stats.frames += 1
        except FcvError as err:
            if getattr(err, "frame_no", None) is None:
                raise type(err)(
                    f"frame {entry.frame_no}: {err}"
                ) from err
            raise
        frames.append(frame)
        anchor = recon
    return RawVideo(width=info.width, height=info.height, fps=info.fps,
                    frames=frames)
