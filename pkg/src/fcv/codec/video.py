"""Raw 4:2:0 video container and quality metrics."""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, UnsupportedFormatError

RAW_MAGIC = b"FCVR"
RAW_VERSION = 1


@dataclass
class Frame420:
    """One YCbCr frame; chroma planes at half resolution."""

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    def validate(self, width, height):
        if self.y.shape != (height, width):
            raise ParameterError(f"luma plane shape {self.y.shape} != {(height, width)}")
        if self.cb.shape != (height // 2, width // 2) or self.cr.shape != self.cb.shape:
            raise ParameterError("chroma planes must be half resolution")
        for plane in (self.y, self.cb, self.cr):
            if plane.dtype != np.uint8:
                raise ParameterError("sample planes must be uint8")


@dataclass
class RawVideo:
    width: int
    height: int
    fps: int
    frames: list = field(default_factory=list)

    def validate(self):
        if self.width % 16 or self.height % 16:
            raise ParameterError(
                f"dimensions must be multiples of 16, got {self.width}x{self.height}"
            )
        if not 1 <= self.width <= 0xFFFF or not 1 <= self.height <= 0xFFFF:
            raise ParameterError("dimensions out of range")
        for frame in self.frames:
            frame.validate(self.width, self.height)

    @property
    def n_frames(self):
        return len(self.frames)

    def save(self, path):
        self.validate()
        with open(path, "wb") as fh:
            fh.write(RAW_MAGIC)
            fh.write(struct.pack(">BHHBI", RAW_VERSION, self.width, self.height,
                                 self.fps, len(self.frames)))
            for frame in self.frames:
                fh.write(frame.y.tobytes())
                fh.write(frame.cb.tobytes())
                fh.write(frame.cr.tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != RAW_MAGIC:
                raise UnsupportedFormatError(f"bad raw-video magic {magic!r}")
            version, width, height, fps, n = struct.unpack(">BHHBI", fh.read(10))
            if version != RAW_VERSION:
                raise UnsupportedFormatError(f"unsupported raw-video version {version}")
            frames = []
            ysize = width * height
            csize = ysize // 4
            for _ in range(n):
                y = np.frombuffer(fh.read(ysize), dtype=np.uint8).reshape(height, width)
                cb = np.frombuffer(fh.read(csize), dtype=np.uint8).reshape(height // 2, width // 2)
                cr = np.frombuffer(fh.read(csize), dtype=np.uint8).reshape(height // 2, width // 2)
                frames.append(Frame420(y=y.copy(), cb=cb.copy(), cr=cr.copy()))
        video = cls(width=width, height=height, fps=fps, frames=frames)
        video.validate()
        return video


def frame_mse(a: Frame420, b: Frame420) -> float:
    """Mean squared error over all samples of all three planes."""
    num = 0.0
    den = 0
    for pa, pb in ((a.y, b.y), (a.cb, b.cb), (a.cr, b.cr)):
        diff = pa.astype(np.float64) - pb.astype(np.float64)
        num += float(np.sum(diff * diff))
        den += diff.size
    return num / den


def psnr(a: RawVideo, b: RawVideo) -> float:
    if a.n_frames != b.n_frames:
        raise ParameterError("videos differ in frame count")
    mse = float(np.mean([frame_mse(fa, fb) for fa, fb in zip(a.frames, b.frames)]))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(255.0 ** 2 / mse)


def max_pixel_error(a: RawVideo, b: RawVideo) -> int:
    worst = 0
    for fa, fb in zip(a.frames, b.frames):
        for pa, pb in ((fa.y, fb.y), (fa.cb, fb.cb), (fa.cr, fb.cr)):
            worst = max(worst, int(np.max(np.abs(pa.astype(np.int16) - pb.astype(np.int16)))))
    return worst
