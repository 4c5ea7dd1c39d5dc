"""Deterministic synthetic video fixtures.

Everything here is a pure function of its arguments; the same seed yields
byte-identical videos.  The textures are smooth random fields so that
every macroblock has nonzero detail (flat regions would make mode
decisions and rate comparisons degenerate).
"""

import csv
import os

import numpy as np

from .codec.video import Frame420, RawVideo
from .errors import ParameterError


def _smooth_field(rng, h, w, cell=8, lo=0.0, hi=1.0):
    """Coarse random grid blown up bilinearly to (h, w), values in [lo, hi]."""
    gh, gw = h // cell + 2, w // cell + 2
    grid = rng.random((gh, gw))
    ys = np.linspace(0, gh - 1.001, h)
    xs = np.linspace(0, gw - 1.001, w)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    field = (
        grid[np.ix_(y0, x0)] * (1 - fy) * (1 - fx)
        + grid[np.ix_(y0 + 1, x0)] * fy * (1 - fx)
        + grid[np.ix_(y0, x0 + 1)] * (1 - fy) * fx
        + grid[np.ix_(y0 + 1, x0 + 1)] * fy * fx
    )
    return lo + field * (hi - lo)


def _to_u8(a):
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def _textured_frame(rng, width, height, y_base=128, y_amp=60):
    y = _to_u8(_smooth_field(rng, height, width, 8, y_base - y_amp, y_base + y_amp)
               + rng.normal(0, 2.0, (height, width)))
    cb = _to_u8(_smooth_field(rng, height // 2, width // 2, 8, 108, 148))
    cr = _to_u8(_smooth_field(rng, height // 2, width // 2, 8, 108, 148))
    return Frame420(y=y, cb=cb, cr=cr)


def _check_dims(width, height):
    if width % 16 or height % 16 or width <= 0 or height <= 0:
        raise ParameterError(f"dimensions must be positive multiples of 16, "
                             f"got {width}x{height}")


def make_static(width, height, n_frames, seed, fps=25) -> RawVideo:
    """Identical textured frames."""
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    frame = _textured_frame(rng, width, height)
    frames = [Frame420(y=frame.y.copy(), cb=frame.cb.copy(), cr=frame.cr.copy())
              for _ in range(n_frames)]
    return RawVideo(width=width, height=height, fps=fps, frames=frames)


def make_translate(width, height, n_frames, seed, dx=3, dy=0, detail=0.0,
                   fps=25) -> RawVideo:
    """Frame t is the base frame rolled by (dx*t, dy*t) with wraparound.

    With detail > 0 every frame also carries a fresh smooth low-frequency
    field of that amplitude: the natural-video statistic where residual
    energy sits in a few low bands of nearly every block.
    """
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    base = _textured_frame(rng, width, height)
    frames = []
    for t in range(n_frames):
        sx, sy = dx * t, dy * t
        y = np.roll(base.y, (sy, sx), axis=(0, 1))
        cb = np.roll(base.cb, (sy // 2, sx // 2), axis=(0, 1))
        cr = np.roll(base.cr, (sy // 2, sx // 2), axis=(0, 1))
        if detail > 0:
            y = _to_u8(y.astype(np.float64)
                       + _smooth_field(rng, height, width, 4, -detail, detail))
            cb = _to_u8(cb.astype(np.float64)
                        + _smooth_field(rng, height // 2, width // 2, 4,
                                        -detail, detail))
            cr = _to_u8(cr.astype(np.float64)
                        + _smooth_field(rng, height // 2, width // 2, 4,
                                        -detail, detail))
        else:
            y, cb, cr = y.copy(), cb.copy(), cr.copy()
        frames.append(Frame420(y=y, cb=cb, cr=cr))
    return RawVideo(width=width, height=height, fps=fps, frames=frames)


def make_noise(width, height, n_frames, seed, fps=25) -> RawVideo:
    """Independent uniform noise; the incompressible reference."""
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(n_frames):
        frames.append(Frame420(
            y=rng.integers(0, 256, (height, width), dtype=np.uint8),
            cb=rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8),
            cr=rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8),
        ))
    return RawVideo(width=width, height=height, fps=fps, frames=frames)


def make_moving_square(width, height, n_frames, seed, direction, speed=2,
                       square=32, y_base=128, fps=25) -> RawVideo:
    """Textured square sliding horizontally over a textured background.

    `direction` is +1 (rightward), -1 (leftward) or 0 (static square).
    `y_base` sets the background luma level, the appearance cue the
    frequency stream can pick up.
    """
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    bg = _textured_frame(rng, width, height, y_base=y_base, y_amp=30)
    patch = _to_u8(_smooth_field(rng, square, square, 4, 0, 255))
    top = int(rng.integers(0, max(1, height - square)))
    start = int(rng.integers(0, width))
    frames = []
    for t in range(n_frames):
        left = (start + direction * speed * t) % width
        y = bg.y.copy()
        cols = (np.arange(square) + left) % width
        y[top : top + square, cols] = patch
        frames.append(Frame420(y=y, cb=bg.cb.copy(), cr=bg.cr.copy()))
    return RawVideo(width=width, height=height, fps=fps, frames=frames)


KINDS = ("static", "translate", "noise", "two-class-motion")


def make_video(kind, width, height, n_frames, seed, **kw) -> RawVideo:
    if kind == "static":
        return make_static(width, height, n_frames, seed, **kw)
    if kind == "translate":
        return make_translate(width, height, n_frames, seed, **kw)
    if kind == "noise":
        return make_noise(width, height, n_frames, seed, **kw)
    raise ParameterError(f"unknown fixture kind {kind!r}")


def make_two_class_dataset(out_dir, count, width=64, height=64, n_frames=24,
                           seed=0, neutral_brightness=False,
                           freq_ambiguous_frac=0.0, temp_ambiguous_frac=0.0):
    """Labeled motion-direction videos plus labels.csv.

    Class 0 moves left, class 1 moves right.  Unless neutral_brightness is
    set, class 0 is dark and class 1 bright, giving the frequency stream
    its own cue.  The two ambiguity fractions neutralize one stream's cue
    on disjoint video subsets (brightness for the frequency stream, motion
    for the temporal stream), so each stream errs on its own subset only.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    n_freq_amb = int(count * freq_ambiguous_frac)
    n_temp_amb = int(count * temp_ambiguous_frac)
    for i in range(count):
        label = i % 2
        direction = 1 if label else -1
        y_base = 125 if neutral_brightness else (160 if label else 90)
        if i < n_freq_amb:
            y_base = 125  # brightness cue removed
        elif i < n_freq_amb + n_temp_amb:
            direction = 0  # motion cue removed
        video = make_moving_square(width, height, n_frames,
                                   seed=int(rng.integers(0, 2**31)),
                                   direction=direction, y_base=y_base)
        name = f"video_{i:04d}.fcvr"
        video.save(os.path.join(out_dir, name))
        rows.append((name, label))
    with open(os.path.join(out_dir, "labels.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "label"])
        writer.writerows(rows)
    return rows
