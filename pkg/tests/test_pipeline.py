import numpy as np
import pytest

from fcv.codec.dct import dct8x8_inverse, inverse_zigzag, round_half_away
from fcv.codec.stream_format import FRAME_I, FRAME_P, FrameEntry, StreamInfo
from fcv.errors import EmptyStreamError, ParameterError, TensorFormatError, UnsupportedFormatError
from fcv.fbs import select_bands
from fcv.partial import extract_frame
from fcv.pipeline import test_expand as expand_ten
from fcv.pipeline import (
    SampleSpec,
    TensorNormalizer,
    bilinear_resize,
    crop_jitter,
    export,
    frequency_tensors,
    hflip_dct,
    hflip_mv,
    import_tensors,
    normalize_mv,
    rasterize_mv,
    temporal_tensors,
    uniform_sample,
)


def fake_info(types):
    frames = [FrameEntry(frame_no=i, ftype=FRAME_I if t == "I" else FRAME_P,
                         payload_offset=0, payload_len=0, pad_bits=0)
              for i, t in enumerate(types)]
    return StreamInfo(width=64, height=64, fps=25, gop_size=8, quality=4,
                      search_range=8, n_frames=len(types), tables={}, frames=frames)


# ------------------------------------------------------------------ sampling

def test_sample_exact_count_returns_all_in_order():
    info = fake_info(["I"] * 25)
    assert uniform_sample(info, 25, "frequency") == list(range(25))


def test_sample_center_of_segment_rule():
    info = fake_info(["I"] + ["P"] * 100)
    picks = uniform_sample(info, 4, "temporal")
    # positions floor(j*100/4 + 100/8) within the P-frame list
    assert picks == [13, 38, 63, 88]


def test_sample_cyclic_repeat_when_short():
    info = fake_info(["I", "P", "I"])
    assert uniform_sample(info, 3, "frequency") == [0, 2, 0]


def test_sample_gap_regularity():
    info = fake_info(["P"] * 97)
    picks = uniform_sample(info, 7, "temporal")
    gaps = np.diff(picks)
    assert gaps.max() - gaps.min() <= np.ceil(97 / 7)


def test_sample_empty_kind_raises():
    info = fake_info(["I"] * 4)
    with pytest.raises(EmptyStreamError):
        uniform_sample(info, 2, "temporal")


def test_sample_train_mode_stays_within_segments():
    info = fake_info(["P"] * 80)
    rng = np.random.default_rng(0)
    for _ in range(50):
        picks = uniform_sample(info, 4, "temporal", mode="train", rng=rng)
        for j, p in enumerate(picks):
            assert j * 20 <= p < (j + 1) * 20


# ------------------------------------------------------------------ cropping

def test_crop_scale_one_on_target_sized_source_is_identity():
    rng = np.random.default_rng(1)
    t = np.arange(28 * 28 * 6).reshape(28, 28, 6).astype(np.int32)
    out = crop_jitter(t, (1.0,), (28, 28), rng)
    assert out.dtype == t.dtype
    assert np.array_equal(out, t)


def test_crop_output_shape_over_seeded_draws():
    src = np.random.default_rng(2).normal(size=(40, 30, 4))
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        out = crop_jitter(src, (1.0, 0.875, 0.75, 0.66), (28, 28), rng)
        assert out.shape == (28, 28, 4)


def test_crop_too_small_source_rejected():
    rng = np.random.default_rng(3)
    with pytest.raises(ParameterError):
        crop_jitter(np.zeros((10, 10, 3)), (1.0,), (28, 28), rng)


def test_crop_windows_are_block_aligned_by_construction():
    # grid units are blocks: any crop of an integer tensor keeps exact values
    rng = np.random.default_rng(4)
    src = np.random.default_rng(5).integers(-100, 100, (36, 36, 6))
    out = crop_jitter(src, (1.0,), (28, 28), rng)
    assert out.dtype == src.dtype  # pure window copy, no resampling at scale 1


def test_bilinear_resize_identity_and_means():
    src = np.random.default_rng(6).normal(size=(17, 13, 2))
    assert np.allclose(bilinear_resize(src, (17, 13)), src)
    up = bilinear_resize(src, (170, 130))
    assert np.abs(up.mean(axis=(0, 1)) - src.mean(axis=(0, 1))).max() < 0.01


# ------------------------------------------------------------------- flipping

def test_hflip_is_involution():
    t = np.random.default_rng(7).integers(-300, 300, (5, 6, 192))
    assert np.array_equal(hflip_dct(hflip_dct(t)), t)


def test_hflip_keeps_dc_band():
    t = np.random.default_rng(8).integers(-300, 300, (5, 6, 192))
    f = hflip_dct(t)
    for c in range(3):
        assert np.array_equal(f[..., c * 64], t[..., ::-1, c * 64])


def test_hflip_commutes_with_band_selection():
    t = np.random.default_rng(9).integers(-300, 300, (5, 6, 192))
    for k in (1, 16, 32, 64):
        a = select_bands(hflip_dct(t), k)
        b = hflip_dct(select_bands(t, k))
        assert np.array_equal(a, b)


def test_hflip_matches_pixel_domain_flip_bit_exactly(translate_coded):
    # algebraic oracle via the codec's own inverse transform, at the
    # stream's quantizer step with symmetric rounding
    tensor = extract_frame(translate_coded[0], 0).dct
    q = 2.0
    flipped = hflip_dct(tensor)
    wb = tensor.w_blocks
    for by in range(tensor.h_blocks):
        for bx in range(wb):
            orig = tensor.values[by, bx, :64]
            flip = flipped.values[by, wb - 1 - bx, :64]
            pix_orig = round_half_away(dct8x8_inverse(inverse_zigzag(orig * q)))
            pix_flip = round_half_away(dct8x8_inverse(inverse_zigzag(flip * q)))
            assert np.array_equal(pix_flip, pix_orig[:, ::-1])


def test_hflip_mv_mirrors_and_optionally_negates():
    t = np.random.default_rng(10).normal(size=(8, 8, 2))
    assert np.array_equal(hflip_mv(hflip_mv(t)), t)
    assert np.array_equal(hflip_mv(t), t[:, ::-1, :])
    neg = hflip_mv(t, negate_dx=True)
    assert np.array_equal(neg[..., 0], -t[:, ::-1, 0])
    assert np.array_equal(neg[..., 1], t[:, ::-1, 1])


# --------------------------------------------------------------- rasterizing

def test_rasterize_uniform_field_is_constant():
    field = np.zeros((4, 5, 2), dtype=np.int32)
    field[..., 0] = 3
    field[..., 1] = -1
    out = rasterize_mv(field, (64, 80))
    assert out.shape == (64, 80, 2)
    assert (out[..., 0] == 3).all()
    assert (out[..., 1] == -1).all()


def test_rasterize_all_intra_is_zero():
    out = rasterize_mv(np.zeros((3, 3, 2), dtype=np.int32), (48, 48))
    assert (out == 0).all()


def test_rasterize_preserves_channel_means():
    rng = np.random.default_rng(11)
    field = rng.integers(-8, 9, (15, 20, 2)).astype(np.int32)
    out = rasterize_mv(field, (224, 224))
    native_means = field.reshape(-1, 2).mean(axis=0)
    resized_means = out.reshape(-1, 2).mean(axis=0)
    assert np.abs(resized_means - native_means).max() <= 0.01 * (np.abs(native_means).max() + 1)


def test_normalize_mv_scales_by_search_range():
    t = np.full((4, 4, 2), 8.0)
    assert (normalize_mv(t, 8) == 1.0).all()


# ------------------------------------------------------------ test expansion

def test_expand_count_and_center_identity():
    t = np.random.default_rng(12).normal(size=(28, 28, 6))
    out = expand_ten(t, (28, 28))
    assert len(out) == 10
    assert np.array_equal(out[8], t)  # center crop of exact-size source


def test_expand_flip_pairs_are_involutions():
    t = np.random.default_rng(13).integers(-100, 100, (10, 12, 6))
    out = expand_ten(t, (8, 8))
    for i in range(0, 10, 2):
        assert np.array_equal(hflip_dct(out[i + 1]), out[i])


def test_expand_rejects_small_source():
    with pytest.raises(ParameterError):
        expand_ten(np.zeros((6, 6, 6)), (8, 8))


# ------------------------------------------------------------------- exports

def test_export_import_roundtrip(tmp_path):
    rng = np.random.default_rng(14)
    tensors = [rng.normal(size=(7, 5, 6)).astype(np.float32) for _ in range(4)]
    meta = {"video_id": "v0", "frame_indices": [0, 4, 8], "seed": 7}
    path = tmp_path / "t.fcvt"
    export(tensors, meta, path, kind="frequency", fbs_k=2)
    rec = import_tensors(path)
    assert rec.kind == "frequency"
    assert rec.fbs_k == 2
    assert rec.metadata == meta
    assert rec.values.shape == (4, 7, 5, 6)
    assert np.array_equal(rec.values, np.stack(tensors))


def test_export_file_size_formula(tmp_path):
    tensors = [np.zeros((3, 4, 5), dtype=np.float32)] * 2
    meta = {"id": 1}
    path = tmp_path / "size.fcvt"
    export(tensors, meta, path, kind="temporal")
    header = 4 + 4 + 4 * 4 + 2 + len(b'{"id": 1}')
    assert path.stat().st_size == header + 4 * 2 * 3 * 4 * 5


def test_export_deterministic_bytes(tmp_path):
    t = [np.arange(24, dtype=np.float32).reshape(2, 3, 4)]
    meta = {"video_id": "x", "seed": 0}
    p1, p2 = tmp_path / "a.fcvt", tmp_path / "b.fcvt"
    export(t, meta, p1, kind="frequency", fbs_k=64)
    export(t, meta, p2, kind="frequency", fbs_k=64)
    assert p1.read_bytes() == p2.read_bytes()


def test_import_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.fcvt"
    p.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(UnsupportedFormatError):
        import_tensors(p)


def test_import_rejects_truncation(tmp_path):
    p = tmp_path / "short.fcvt"
    export([np.zeros((4, 4, 2), dtype=np.float32)], {}, p, kind="temporal")
    blob = p.read_bytes()
    p.write_bytes(blob[:-8])
    with pytest.raises(TensorFormatError) as exc:
        import_tensors(p)
    assert "expected" in str(exc.value)


def test_import_rejects_wrong_version(tmp_path):
    p = tmp_path / "ver.fcvt"
    export([np.zeros((2, 2, 2), dtype=np.float32)], {}, p, kind="frequency")
    blob = bytearray(p.read_bytes())
    blob[4] = 9
    p.write_bytes(bytes(blob))
    with pytest.raises(UnsupportedFormatError):
        import_tensors(p)


# -------------------------------------------------------------- normalization

def test_normalizer_fit_transform_and_sidecar_roundtrip():
    rng = np.random.default_rng(15)
    tensors = [rng.normal(5, 3, size=(6, 6, 9)) for _ in range(10)]
    norm = TensorNormalizer().fit(tensors)
    out = np.concatenate([norm.transform(t).reshape(-1, 9) for t in tensors])
    assert np.abs(out.mean(axis=0)).max() < 1e-9
    assert np.abs(out.std(axis=0) - 1).max() < 1e-3
    clone = TensorNormalizer.from_json(norm.to_json())
    assert np.array_equal(clone.mean_, norm.mean_)
    assert np.array_equal(clone.std_, norm.std_)


# ------------------------------------------------------- per-video pipelines

def test_frequency_test_mode_tensor_count(translate_coded):
    spec = SampleSpec.test_frequency(n_frames=25, target=(8, 8))
    tensors, frames = frequency_tensors(translate_coded[0], spec, fbs_k=32, seed=1)
    assert len(tensors) == 250
    assert all(t.shape == (8, 8, 96) for t in tensors)
    assert all(t.dtype == np.float32 for t in tensors)
    assert len(frames) == 25


def test_temporal_test_mode_tensor_count(translate_coded):
    spec = SampleSpec.test_temporal(n_frames=25, target=(64, 64))
    tensors, _ = temporal_tensors(translate_coded[0], spec, seed=1)
    assert len(tensors) == 250
    assert all(t.shape == (64, 64, 2) for t in tensors)


def test_train_mode_counts_and_determinism(translate_coded):
    stream = translate_coded[0]
    spec = SampleSpec.train_frequency(n_frames=3, target=(8, 8))
    a, fa = frequency_tensors(stream, spec, fbs_k=16, seed=9)
    b, fb = frequency_tensors(stream, spec, fbs_k=16, seed=9)
    assert len(a) == 3
    assert fa == fb
    for ta, tb in zip(a, b):
        assert np.array_equal(ta, tb)
    c, _ = frequency_tensors(stream, spec, fbs_k=16, seed=10)
    assert any(not np.array_equal(ta, tc) for ta, tc in zip(a, c))


def test_temporal_train_mode(translate_coded):
    spec = SampleSpec.train_temporal(n_frames=3, target=(48, 48))
    a, _ = temporal_tensors(translate_coded[0], spec, seed=2)
    assert len(a) == 3
    assert all(t.shape == (48, 48, 2) for t in a)
    # translation of -3 px with search range 8 shows up as dx == -3/8
    assert a[0][..., 0].min() >= -1.0


def test_sample_spec_validation():
    with pytest.raises(ParameterError):
        SampleSpec(n_frames=3, mode="night")
    with pytest.raises(ParameterError):
        SampleSpec(n_frames=3, mode="train", crop_scales=(0.5,))
    with pytest.raises(ParameterError):
        SampleSpec(n_frames=0, mode="train")
