"""Feature extraction by parsing and entropy decoding only.

No inverse transform, no motion compensation, no pixel reconstruction:
I-frames yield their quantized coefficient grids exactly as the encoder
emitted them, P-frames yield their motion-vector fields.  The stream's
frame index allows unwanted payloads to be skipped byte-wise.
"""

from dataclasses import dataclass, field

import numpy as np

from .codec import coefcode, stream_format
from .codec.coefcode import BitSource
from .codec.decoder import (
    build_luts,
    check_payload_consumed,
    decode_i_section,
    decode_p_sections,
    read_mode_bits,
)
from .codec.layout import geometry
from .codec.motion import diff_decode_mv
from .codec.stream_format import StreamInfo, parse_headers
from .errors import ParameterError
from .features import CoeffTensor, FrameFeatures, assemble_coeff_tensor

WANT_I_DCT = "i_dct"
WANT_P_MV = "p_mv"


@dataclass
class ExtractStats:
    """Byte accounting for skip-versus-decode comparisons."""

    header_bytes: int = 0
    payload_bytes: int = 0
    frames_decoded: int = 0

    @property
    def total_bytes(self):
        return self.header_bytes + self.payload_bytes


def _coeff_tensor_from_sparse(info, sparse) -> CoeffTensor:
    geo = geometry(info.width, info.height)
    block_ids, bands, values = sparse
    hb, wb = info.height // 8, info.width // 8
    grids = [
        np.zeros((hb, wb, 64), dtype=np.int32),
        np.zeros((hb // 2, wb // 2, 64), dtype=np.int32),
        np.zeros((hb // 2, wb // 2, 64), dtype=np.int32),
    ]
    plane = geo.block_plane[block_ids]
    rows = geo.block_row[block_ids]
    cols = geo.block_col[block_ids]
    for p in range(3):
        sel = plane == p
        grids[p][rows[sel], cols[sel], bands[sel]] = values[sel]
    return CoeffTensor(values=assemble_coeff_tensor(*grids))


def _extract_entry(stream, info, luts, entry, want_residuals=False,
                   stats: ExtractStats | None = None) -> FrameFeatures:
    payload = stream[entry.payload_offset : entry.payload_offset + entry.payload_len]
    if stats is not None:
        stats.payload_bytes += len(payload)
        stats.frames_decoded += 1
    src = BitSource(payload, entry.pad_bits)
    if entry.ftype == stream_format.FRAME_I:
        sparse = decode_i_section(src, info, luts, keep_blocks=True)
        check_payload_consumed(src, entry)
        return FrameFeatures(frame_no=entry.frame_no, kind="I",
                             dct=_coeff_tensor_from_sparse(info, sparse))
    # P-frame: mode bits and motion field; residual coefficients are
    # entropy-decoded to advance the cursor but not materialized unless asked
    inter_mask, mv_field, sparse = decode_p_sections(
        src, info, luts, keep_blocks=want_residuals
    )
    check_payload_consumed(src, entry)
    features = FrameFeatures(frame_no=entry.frame_no, kind="P",
                             mv_field=mv_field, intra_mask=~inter_mask)
    if want_residuals:
        features.residual = _coeff_tensor_from_sparse(info, sparse)
    return features


def extract_frame(stream: bytes, frame_no: int, info: StreamInfo | None = None,
                  want_residuals: bool = False) -> FrameFeatures:
    """Features of one frame; the index table makes access random."""
    if info is None:
        info = parse_headers(stream)
    if not 0 <= frame_no < info.n_frames:
        raise ParameterError(f"frame {frame_no} outside 0..{info.n_frames - 1}")
    luts = build_luts(info)
    return _extract_entry(stream, info, luts, info.frames[frame_no],
                          want_residuals=want_residuals)


class StreamReader:
    """Random-access feature extraction with cached headers and tables."""

    def __init__(self, stream: bytes):
        self.stream = stream
        self.info = parse_headers(stream)
        self._luts = build_luts(self.info)

    def frame(self, frame_no: int, want_residuals: bool = False) -> FrameFeatures:
        if not 0 <= frame_no < self.info.n_frames:
            raise ParameterError(
                f"frame {frame_no} outside 0..{self.info.n_frames - 1}"
            )
        return _extract_entry(self.stream, self.info, self._luts,
                              self.info.frames[frame_no],
                              want_residuals=want_residuals)

    def iter(self, want=(WANT_I_DCT, WANT_P_MV), stats=None):
        return extract_all(self.stream, want=want, info=self.info, stats=stats)


def extract_all(stream: bytes, want=(WANT_I_DCT, WANT_P_MV),
                info: StreamInfo | None = None,
                stats: ExtractStats | None = None):
    """Iterate FrameFeatures in display order, byte-skipping unwanted frames."""
    want = set(want)
    unknown = want - {WANT_I_DCT, WANT_P_MV}
    if unknown:
        raise ParameterError(f"unknown extraction targets {sorted(unknown)}")
    if info is None:
        info = parse_headers(stream)
    if stats is not None:
        stats.header_bytes += info.bytes_touched
    luts = build_luts(info)
    for entry in info.frames:
        if entry.ftype == stream_format.FRAME_I and WANT_I_DCT not in want:
            continue
        if entry.ftype == stream_format.FRAME_P and WANT_P_MV not in want:
            continue
        yield _extract_entry(stream, info, luts, entry, stats=stats)
