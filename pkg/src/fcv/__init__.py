"""fcv: a compressed-domain video toolkit.

Encode synthetic video with a block-transform I/P codec, extract transform
coefficients and motion vectors by parsing and entropy decoding alone,
select frequency bands, build augmented two-stream tensors, account
network costs, and fuse per-stream scores.
"""

from .codec import (
    RawVideo,
    decode_video_full,
    encode_video,
    encode_video_traced,
    parse_headers,
)
from .errors import FcvError
from .fbs import BandSelector, band_energy, select_bands
from .features import CoeffTensor, FrameFeatures
from .flops import average_gflops, count_cost, load_arch
from .fusion import ToyClassifier, late_fuse, video_score
from .partial import StreamReader, extract_all, extract_frame
from .pipeline import SampleSpec, TensorNormalizer, export, import_tensors

__version__ = "0.1.0"

__all__ = [
    "BandSelector",
    "CoeffTensor",
    "FcvError",
    "FrameFeatures",
    "RawVideo",
    "SampleSpec",
    "StreamReader",
    "TensorNormalizer",
    "ToyClassifier",
    "average_gflops",
    "band_energy",
    "count_cost",
    "decode_video_full",
    "encode_video",
    "encode_video_traced",
    "export",
    "extract_all",
    "extract_frame",
    "import_tensors",
    "late_fuse",
    "load_arch",
    "parse_headers",
    "select_bands",
    "video_score",
]
