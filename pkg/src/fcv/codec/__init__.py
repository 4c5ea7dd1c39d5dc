"""Block-transform video codec: I/P GOP structure, 4:2:0 macroblocks,
8x8 transform coding, motion compensation and the bitstream container."""

from .dct import (
    dct8x8_forward,
    dct8x8_inverse,
    dequantize,
    inverse_zigzag,
    quantize,
    zigzag,
)
from .decoder import DecodeStats, decode_video_full
from .encoder import encode_video, encode_video_traced
from .motion import diff_code_mv, diff_decode_mv, motion_compensate, motion_estimate
from .stream_format import StreamInfo, parse_headers
from .video import Frame420, RawVideo, max_pixel_error, psnr

__all__ = [
    "DecodeStats",
    "Frame420",
    "RawVideo",
    "StreamInfo",
    "dct8x8_forward",
    "dct8x8_inverse",
    "decode_video_full",
    "dequantize",
    "diff_code_mv",
    "diff_decode_mv",
    "encode_video",
    "encode_video_traced",
    "inverse_zigzag",
    "max_pixel_error",
    "motion_compensate",
    "motion_estimate",
    "parse_headers",
    "psnr",
    "quantize",
    "zigzag",
]
