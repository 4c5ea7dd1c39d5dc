"""Bitstream container layout.

Grammar (all header integers big-endian, payload bits MSB-first):

    stream  := magic "FCV1" | version u8 | width u16 | height u16 | fps u8
             | gop_size u8 | quality u8 | search_range u8 | n_frames u32
             | table_section | frame*
    table_section := n_tables u8 | (table_id u8 | alphabet_size u16
             | code_length u8 * alphabet_size)*
    frame   := frame_no u32 | flags u8 | payload_len u32 | payload bytes

`flags` packs the frame type in its top two bits (I=0, P=1, B=2 reserved)
and the count of zero pad bits closing the payload in the next three.
Every frame payload is byte-aligned.  Huffman tables are canonical, so the
code-length arrays reconstruct them exactly.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..bitio import HuffmanTable
from ..errors import CorruptStreamError, TruncatedStreamError, UnsupportedFormatError

MAGIC = b"FCV1"
VERSION = 1

FRAME_I = 0
FRAME_P = 1
FRAME_B = 2  # reserved code point; never emitted

TABLE_COEF = 0
TABLE_MV = 1

_FIXED_HEADER = struct.Struct(">BHHBBBBI")
_FRAME_HEADER = struct.Struct(">IBI")
FRAME_HEADER_BYTES = _FRAME_HEADER.size


@dataclass
class FrameEntry:
    frame_no: int
    ftype: int
    payload_offset: int
    payload_len: int
    pad_bits: int

    @property
    def kind(self):
        return "I" if self.ftype == FRAME_I else "P"


@dataclass
class StreamInfo:
    width: int
    height: int
    fps: int
    gop_size: int
    quality: int
    search_range: int
    n_frames: int
    tables: dict
    frames: list = field(default_factory=list)
    bytes_touched: int = 0

    @property
    def mb_cols(self):
        return self.width // 16

    @property
    def mb_rows(self):
        return self.height // 16

    def frame_types(self):
        return [f.kind for f in self.frames]


def write_header(width, height, fps, gop_size, quality, search_range, n_frames,
                 tables: dict) -> bytes:
    out = bytearray(MAGIC)
    out += _FIXED_HEADER.pack(VERSION, width, height, fps, gop_size, quality,
                              search_range, n_frames)
    out.append(len(tables))
    for table_id in sorted(tables):
        table = tables[table_id]
        lengths = np.zeros(256, dtype=np.uint8)
        for sym, ln in table.code_lengths().items():
            lengths[sym] = ln
        out.append(table_id)
        out += struct.pack(">H", len(lengths))
        out += lengths.tobytes()
    return bytes(out)


def write_frame_header(frame_no, ftype, pad_bits, payload_len) -> bytes:
    flags = (ftype << 6) | (pad_bits << 3)
    return _FRAME_HEADER.pack(frame_no, flags, payload_len)


def parse_headers(stream: bytes) -> StreamInfo:
    """Index of the whole stream from headers alone; payloads stay untouched."""
    touched = 0
    if len(stream) < 4 + _FIXED_HEADER.size:
        raise TruncatedStreamError("stream shorter than the fixed header")
    if stream[:4] != MAGIC:
        raise UnsupportedFormatError(f"bad magic {stream[:4]!r}")
    touched += 4
    version, width, height, fps, gop_size, quality, search_range, n_frames = (
        _FIXED_HEADER.unpack_from(stream, 4)
    )
    touched += _FIXED_HEADER.size
    if version != VERSION:
        raise UnsupportedFormatError(f"unsupported stream version {version}")
    pos = 4 + _FIXED_HEADER.size
    n_tables = stream[pos]
    pos += 1
    touched += 1
    tables = {}
    for _ in range(n_tables):
        if pos + 3 > len(stream):
            raise TruncatedStreamError("table section truncated")
        table_id = stream[pos]
        (size,) = struct.unpack_from(">H", stream, pos + 1)
        pos += 3
        if pos + size > len(stream):
            raise TruncatedStreamError("table section truncated")
        lengths = {sym: stream[pos + sym] for sym in range(size) if stream[pos + sym]}
        pos += size
        touched += 3 + size
        tables[table_id] = HuffmanTable.from_code_lengths(lengths)
    info = StreamInfo(width=width, height=height, fps=fps, gop_size=gop_size,
                      quality=quality, search_range=search_range,
                      n_frames=n_frames, tables=tables)
    for i in range(n_frames):
        if pos + FRAME_HEADER_BYTES > len(stream):
            raise TruncatedStreamError(f"stream ends inside frame header", frame_no=i)
        frame_no, flags, payload_len = _FRAME_HEADER.unpack_from(stream, pos)
        touched += FRAME_HEADER_BYTES
        pos += FRAME_HEADER_BYTES
        ftype = flags >> 6
        pad_bits = (flags >> 3) & 0x7
        if ftype not in (FRAME_I, FRAME_P):
            raise CorruptStreamError(f"unsupported frame type code {ftype}", frame_no=i)
        if frame_no != i:
            raise CorruptStreamError(
                f"frame header number {frame_no} out of order", frame_no=i
            )
        if pos + payload_len > len(stream):
            raise TruncatedStreamError("stream ends inside frame payload", frame_no=i)
        info.frames.append(FrameEntry(frame_no=frame_no, ftype=ftype,
                                      payload_offset=pos, payload_len=payload_len,
                                      pad_bits=pad_bits))
        pos += payload_len
    if i := _gop_violation(info):
        raise CorruptStreamError("GOP does not start with an I-frame", frame_no=i - 1)
    info.bytes_touched = touched
    return info


def _gop_violation(info: StreamInfo):
    for i, entry in enumerate(info.frames):
        if i % info.gop_size == 0 and entry.ftype != FRAME_I:
            return i + 1
    return 0
