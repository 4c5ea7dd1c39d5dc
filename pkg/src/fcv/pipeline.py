"""Data plumbing between the partial decoder and a classifier: GOP-aware
sampling, coefficient-domain augmentation, motion-field rasterization,
test-time expansion, normalization and the tensor export container.

Tensor file grammar (header integers big-endian, payload little-endian):

    file := magic "FCVT" | version u8 | kind u8 (0 frequency, 1 temporal)
          | fbs_k u8 | ndim u8 | dims u32 * ndim
          | meta_len u16 | metadata JSON (UTF-8)
          | payload float32-LE, row-major

Every randomized operation is a pure function of (input, seed).
"""

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .codec.dct import BAND_COLS
from .codec.layout import MB
from .errors import EmptyStreamError, ParameterError, TensorFormatError, UnsupportedFormatError
from .fbs import select_bands
from .features import CoeffTensor
from .partial import StreamReader

EXPORT_MAGIC = b"FCVT"
EXPORT_VERSION = 1
KIND_FREQUENCY = "frequency"
KIND_TEMPORAL = "temporal"
_KIND_CODES = {KIND_FREQUENCY: 0, KIND_TEMPORAL: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

FREQUENCY_SCALES = (1.0, 0.875, 0.75, 0.66)
TEMPORAL_SCALES = (1.0, 0.875, 0.75)
ALLOWED_SCALES = frozenset((1.0, 0.875, 0.75, 0.66))
TEST_CROPS = 5
TEST_FLIPS = 2


@dataclass
class SampleSpec:
    """How many frames to draw and how to turn each one into tensors."""

    n_frames: int
    mode: str  # "train" or "test"
    crop_scales: tuple = FREQUENCY_SCALES
    target: tuple = (28, 28)
    flip_prob: float = 0.5

    def __post_init__(self):
        if self.mode not in ("train", "test"):
            raise ParameterError(f"mode must be train or test, got {self.mode!r}")
        if not set(self.crop_scales) <= ALLOWED_SCALES:
            raise ParameterError(f"crop scales must be within {sorted(ALLOWED_SCALES)}")
        if self.n_frames < 1:
            raise ParameterError("need at least one sampled frame")

    @classmethod
    def train_frequency(cls, n_frames=3, target=(28, 28)):
        return cls(n_frames=n_frames, mode="train", crop_scales=FREQUENCY_SCALES,
                   target=target)

    @classmethod
    def train_temporal(cls, n_frames=3, target=(224, 224)):
        return cls(n_frames=n_frames, mode="train", crop_scales=TEMPORAL_SCALES,
                   target=target)

    @classmethod
    def test_frequency(cls, n_frames=25, target=(28, 28)):
        return cls(n_frames=n_frames, mode="test", crop_scales=FREQUENCY_SCALES,
                   target=target)

    @classmethod
    def test_temporal(cls, n_frames=25, target=(224, 224)):
        return cls(n_frames=n_frames, mode="test", crop_scales=TEMPORAL_SCALES,
                   target=target)


def uniform_sample(stream_info, n, kind, mode="test", rng=None):
    """Evenly spaced frame numbers over the eligible frames.

    Frequency tensors come from I-frames, temporal ones from P-frames.
    Test mode picks the center of each of the n segments; train mode draws
    uniformly within each segment.  With fewer than n eligible frames the
    indices repeat cyclically.
    """
    if kind not in (KIND_FREQUENCY, KIND_TEMPORAL):
        raise ParameterError(f"unknown stream kind {kind!r}")
    want = "I" if kind == KIND_FREQUENCY else "P"
    eligible = [f.frame_no for f in stream_info.frames if f.kind == want]
    m = len(eligible)
    if m == 0:
        raise EmptyStreamError(f"stream has no {want}-frames")
    if m < n:
        return [eligible[j % m] for j in range(n)]
    if mode == "train":
        if rng is None:
            raise ParameterError("train-mode sampling needs an rng")
        picks = [int(rng.integers(j * m // n, (j + 1) * m // n)) for j in range(n)]
    else:
        picks = [int(j * m // n + m // (2 * n)) for j in range(n)]
    return [eligible[p] for p in picks]


def bilinear_resize(img: np.ndarray, target) -> np.ndarray:
    """Half-pixel-center bilinear resize of (H, W, C) to target (h, w)."""
    h_out, w_out = target
    h, w = img.shape[:2]
    img = np.asarray(img, dtype=np.float64)
    ys = np.clip((np.arange(h_out) + 0.5) * h / h_out - 0.5, 0, h - 1)
    xs = np.clip((np.arange(w_out) + 0.5) * w / w_out - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def crop_jitter(tensor: np.ndarray, scales, target, rng) -> np.ndarray:
    """Random crop with scale jittering, resized to `target`.

    The crop side per axis is round(scale * target side) in grid units
    (blocks for coefficient tensors, pixels for rasterized motion), so
    frequency-stream windows always land on whole-block boundaries.  Scales
    whose crop would not fit the source are not drawn; if none fit, the
    source is too small.
    """
    h, w = tensor.shape[:2]
    th, tw = target
    sides = [(s, _round_half_up(s * th), _round_half_up(s * tw)) for s in scales]
    usable = [side for side in sides if side[1] <= h and side[2] <= w]
    if not usable:
        raise ParameterError(
            f"source {h}x{w} smaller than the smallest crop for target {target}"
        )
    _, ch, cw = usable[int(rng.integers(len(usable)))]
    y0 = int(rng.integers(h - ch + 1))
    x0 = int(rng.integers(w - cw + 1))
    window = tensor[y0 : y0 + ch, x0 : x0 + cw]
    if (ch, cw) == (th, tw):
        return window.copy()
    return bilinear_resize(window, target)


def _flip_band_signs(bands_per_channel):
    # odd horizontal frequency changes sign under a horizontal flip
    signs = np.where(BAND_COLS[:bands_per_channel] % 2 == 1, -1, 1)
    return np.tile(signs, 3)


def hflip_dct(tensor):
    """Horizontal flip expressed on coefficient tensors.

    Mirrors the block-grid columns and negates the bands with odd
    horizontal frequency; equivalent to flipping the decoded pixels.
    Accepts a CoeffTensor or a (..., h, w, 3*bands) array; an involution
    either way, and commutes with band selection because the sign pattern
    is per band.
    """
    values = tensor.values if isinstance(tensor, CoeffTensor) else np.asarray(tensor)
    bands = values.shape[-1] // 3
    if values.shape[-1] != 3 * bands:
        raise ParameterError("coefficient tensor depth is not 3 x bands")
    flipped = values[..., ::-1, :] * _flip_band_signs(bands)
    flipped = flipped.astype(values.dtype)
    if isinstance(tensor, CoeffTensor):
        return CoeffTensor(values=flipped, bands=bands)
    return flipped


def hflip_mv(tensor: np.ndarray, negate_dx: bool = False) -> np.ndarray:
    """Mirror a rasterized motion tensor's columns.

    Channel values are kept by default so that motion direction remains a
    class-discriminative signal under test-time flips; negate_dx gives the
    strict geometric flip.
    """
    out = np.asarray(tensor)[..., ::-1, :].copy()
    if negate_dx:
        out[..., 0] = -out[..., 0]
    return out


def rasterize_mv(field: np.ndarray, target=(224, 224)) -> np.ndarray:
    """Replicate each macroblock's vector over its 16x16 footprint and
    resize bilinearly; returns a float (h, w, 2) tensor."""
    field = np.asarray(field)
    if field.size == 0:
        raise ParameterError("empty motion field")
    px = np.repeat(np.repeat(field, MB, axis=0), MB, axis=1).astype(np.float64)
    if px.shape[:2] == tuple(target):
        return px
    return bilinear_resize(px, target)


def test_expand(tensor: np.ndarray, target, kind=KIND_FREQUENCY):
    """Four corner crops plus the center crop, each with its horizontal
    flip: [tl, tl', tr, tr', bl, bl', br, br', center, center']."""
    h, w = tensor.shape[:2]
    th, tw = target
    if h < th or w < tw:
        raise ParameterError(f"source {h}x{w} smaller than target {target}")
    flip = hflip_dct if kind == KIND_FREQUENCY else hflip_mv
    corners = [(0, 0), (0, w - tw), (h - th, 0), (h - th, w - tw),
               ((h - th) // 2, (w - tw) // 2)]
    out = []
    for y0, x0 in corners:
        crop = tensor[y0 : y0 + th, x0 : x0 + tw].copy()
        out.append(crop)
        out.append(flip(crop))
    return out


# --------------------------------------------------------------- export file

def export(tensors, metadata: dict, path, kind: str, fbs_k: int = 0):
    """Write tensors (stacked on a new leading axis) to the container.

    The write is atomic: a sibling temp file is renamed over `path`.
    """
    if kind not in _KIND_CODES:
        raise ParameterError(f"unknown tensor kind {kind!r}")
    arr = np.stack([np.asarray(t, dtype=np.float32) for t in tensors]) \
        if isinstance(tensors, (list, tuple)) else np.asarray(tensors, dtype=np.float32)
    meta = json.dumps(metadata, sort_keys=True).encode("utf-8")
    if len(meta) > 0xFFFF:
        raise ParameterError("metadata too large")
    header = bytearray(EXPORT_MAGIC)
    header += struct.pack(">BBBB", EXPORT_VERSION, _KIND_CODES[kind], fbs_k, arr.ndim)
    header += struct.pack(f">{arr.ndim}I", *arr.shape)
    header += struct.pack(">H", len(meta))
    header += meta
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bytes(header))
            fh.write(arr.astype("<f4").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


@dataclass
class TensorFileRecord:
    kind: str
    fbs_k: int
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


def import_tensors(path) -> TensorFileRecord:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != EXPORT_MAGIC:
        raise UnsupportedFormatError(f"bad tensor-file magic {blob[:4]!r}")
    version, kind_code, fbs_k, ndim = struct.unpack_from(">BBBB", blob, 4)
    if version != EXPORT_VERSION:
        raise UnsupportedFormatError(f"unsupported tensor-file version {version}")
    if kind_code not in _KIND_NAMES:
        raise TensorFormatError(f"unknown tensor kind code {kind_code}")
    pos = 8
    dims = struct.unpack_from(f">{ndim}I", blob, pos)
    pos += 4 * ndim
    (meta_len,) = struct.unpack_from(">H", blob, pos)
    pos += 2
    try:
        metadata = json.loads(blob[pos : pos + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise TensorFormatError(f"metadata does not parse: {err}") from err
    pos += meta_len
    count = int(np.prod(dims)) if dims else 1
    expected = count * 4
    payload = blob[pos:]
    if len(payload) != expected:
        raise TensorFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return TensorFileRecord(kind=_KIND_NAMES[kind_code], fbs_k=fbs_k,
                            values=values.copy(), metadata=metadata)


# ------------------------------------------------------------- normalization

class TensorNormalizer(TransformerMixin, BaseEstimator):
    """Per-band standardization fitted on reference tensors.

    The fitted statistics are serializable so that a frozen sidecar file
    can ship with the package and keep normalization reproducible.
    """

    def __init__(self, eps=1e-6):
        self.eps = eps

    def fit(self, X, y=None):
        stacked = np.concatenate([np.asarray(t, dtype=np.float64).reshape(-1, t.shape[-1])
                                  for t in X], axis=0)
        self.mean_ = stacked.mean(axis=0)
        self.std_ = stacked.std(axis=0)
        return self

    def transform(self, X):
        scale = self.std_ + self.eps
        if isinstance(X, (list, tuple)):
            return [((np.asarray(t, dtype=np.float64) - self.mean_) / scale)
                    for t in X]
        return (np.asarray(X, dtype=np.float64) - self.mean_) / scale

    def to_json(self) -> str:
        return json.dumps({"eps": self.eps, "mean": self.mean_.tolist(),
                           "std": self.std_.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "TensorNormalizer":
        data = json.loads(text)
        norm = cls(eps=data["eps"])
        norm.mean_ = np.asarray(data["mean"], dtype=np.float64)
        norm.std_ = np.asarray(data["std"], dtype=np.float64)
        return norm


def normalize_mv(tensor: np.ndarray, search_range: int) -> np.ndarray:
    """Motion tensors scale by the search range so values sit in [-1, 1]."""
    return np.asarray(tensor, dtype=np.float64) / max(1, search_range)


# ------------------------------------------------------- per-video assembly

def _band_slice_normalizer(normalizer, k):
    if normalizer is None:
        return None
    if k == 64 or normalizer.mean_.shape[0] == 3 * k:
        return normalizer
    sliced = TensorNormalizer(eps=normalizer.eps)
    idx = np.concatenate([np.arange(k) + c * (normalizer.mean_.shape[0] // 3)
                          for c in range(3)])
    sliced.mean_ = normalizer.mean_[idx]
    sliced.std_ = normalizer.std_[idx]
    return sliced


def frequency_tensors(stream: bytes, spec: SampleSpec, fbs_k=64, seed=0,
                      normalizer=None):
    """Float32 frequency-stream tensors for one video.

    Train mode: per sampled I-frame, coin-flip coefficient-domain flip
    then one jittered crop.  Test mode: the 5-crop x 2-flip expansion of
    each sampled frame.  Band selection runs after augmentation (the flip
    commutes with it); normalization last.
    Returns (tensors, sampled frame numbers).
    """
    reader = StreamReader(stream)
    rng = np.random.default_rng(seed)
    frame_nos = uniform_sample(reader.info, spec.n_frames, KIND_FREQUENCY,
                               mode=spec.mode, rng=rng)
    norm = _band_slice_normalizer(normalizer, fbs_k)
    out = []
    for no in frame_nos:
        values = reader.frame(no).dct.values
        if spec.mode == "train":
            if rng.random() < spec.flip_prob:
                values = hflip_dct(values)
            variants = [crop_jitter(values, spec.crop_scales, spec.target, rng)]
        else:
            variants = test_expand(values, spec.target, KIND_FREQUENCY)
        for v in variants:
            v = select_bands(np.asarray(v, dtype=np.float64), fbs_k)
            if norm is not None:
                v = norm.transform(v)
            out.append(v.astype(np.float32))
    return out, frame_nos


def temporal_tensors(stream: bytes, spec: SampleSpec, seed=0):
    """Float32 motion-stream tensors for one video.

    The field is rasterized at its native pixel size (16 px per
    macroblock) and crops are taken from that grid, like the frequency
    path; values are scaled by the encoder's search range.  Returns
    (tensors, sampled frame numbers).
    """
    reader = StreamReader(stream)
    rng = np.random.default_rng(seed)
    frame_nos = uniform_sample(reader.info, spec.n_frames, KIND_TEMPORAL,
                               mode=spec.mode, rng=rng)
    out = []
    for no in frame_nos:
        field = reader.frame(no).mv_field
        native = (field.shape[0] * MB, field.shape[1] * MB)
        raster = normalize_mv(rasterize_mv(field, native), reader.info.search_range)
        if spec.mode == "train":
            if rng.random() < spec.flip_prob:
                raster = hflip_mv(raster)
            variants = [crop_jitter(raster, spec.crop_scales, spec.target, rng)]
        else:
            variants = test_expand(raster, spec.target, KIND_TEMPORAL)
        out.extend(np.asarray(v, dtype=np.float32) for v in variants)
    return out, frame_nos
