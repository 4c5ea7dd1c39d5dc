"""Acceptance criteria, one test per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion including its measured figure and elapsed time.
"""

import itertools
import random
import time

import numpy as np
import pytest

from fcv.bench import REFERENCE_CLAIM_RATIO, run_bench, write_bench_csv
from fcv.bitio import HuffmanTable, huffman_decode, huffman_encode, rle_decode, rle_encode
from fcv.codec import (
    decode_video_full,
    encode_video,
    encode_video_traced,
    max_pixel_error,
    psnr,
)
from fcv.codec.dct import dct8x8_inverse, inverse_zigzag, round_half_away
from fcv.demo import DemoConfig, evaluate, train_streams
from fcv.flops import average_gflops, count_cost, load_arch
from fcv.fusion import softmax_cross_entropy
from fcv.instrumentation import counters
from fcv.partial import extract_all
from fcv.pipeline import SampleSpec, frequency_tensors, hflip_dct, temporal_tensors
from fcv.synth import make_moving_square, make_noise, make_static, make_translate, make_two_class_dataset


def report(name, elapsed, budget, detail=""):
    print(f"\n[PASS] {name}: {detail} ({elapsed:.1f}s, budget {budget}s)")
    assert elapsed < budget, f"{name} exceeded its runtime budget"


@pytest.fixture(scope="module")
def bench_fixture(tmp_path_factory):
    """The reference speed fixture: 320x240, 300 frames, quality 4."""
    video = make_translate(320, 240, 300, seed=20, dx=3, detail=6)
    return encode_video(video, gop_size=12, quality=4)


@pytest.fixture(scope="module")
def small_fixtures():
    videos = {
        "static": make_static(64, 48, 6, seed=3),
        "translate": make_translate(64, 64, 12, seed=11, dx=3),
        "translate_detail": make_translate(64, 48, 8, seed=4, dx=2, detail=6),
        "noise": make_noise(48, 48, 6, seed=7),
        "motion": make_moving_square(64, 64, 12, seed=8, direction=1),
    }
    return videos


def test_entropy_coding_soundness():
    t0 = time.perf_counter()
    rng = random.Random(0xACCE)
    tables_checked = 0
    for _ in range(10_000):
        n = rng.randint(1, 12)
        freqs = {s: rng.randint(1, 200) for s in range(n)}
        table = HuffmanTable.from_frequencies(freqs)
        symbols = [rng.randrange(n) for _ in range(rng.randint(0, 24))]
        buf = huffman_encode(table, symbols)
        assert huffman_decode(table, buf, len(symbols)) == symbols
        if tables_checked < 300:
            codes = [format(c, f"0{l}b") for c, l in table.codes.values()]
            for a, b in itertools.permutations(codes, 2):
                assert not b.startswith(a)
            tables_checked += 1
    for _ in range(10_000):
        coeffs = [0] * 64
        for _ in range(rng.randint(0, 16)):
            coeffs[rng.randrange(64)] = rng.randint(-2048, 2048) or 3
        assert rle_decode(rle_encode(coeffs)) == coeffs
    report("entropy-coding soundness", time.perf_counter() - t0, 10,
           "10^4 Huffman + 10^4 RLE roundtrips, prefix-freeness exhaustive")


def test_codec_fidelity(small_fixtures):
    t0 = time.perf_counter()
    for name, video in small_fixtures.items():
        stream = encode_video(video, gop_size=4, quality=1)
        err = max_pixel_error(video, decode_video_full(stream))
        assert err <= 2, f"{name}: per-pixel error {err} at unit quality"
    translate = small_fixtures["translate"]
    values = []
    for q in (1, 2, 4, 8, 16):
        decoded = decode_video_full(encode_video(translate, gop_size=4, quality=q))
        values.append(psnr(translate, decoded))
    assert values[0] >= 30 and values[1] >= 30 and values[2] >= 30
    assert all(a >= b for a, b in zip(values, values[1:]))
    report("codec fidelity", time.perf_counter() - t0, 60,
           f"unit-quality error <= 2 on {len(small_fixtures)} fixtures; "
           f"PSNR at q<=4 >= 30 dB and non-increasing over q")


def test_partial_decode_exactness(small_fixtures):
    t0 = time.perf_counter()
    frames_checked = 0
    coded = [encode_video_traced(video, gop_size=4, quality=2)
             for video in small_fixtures.values()]
    counters.reset()  # encoding itself runs the pixel paths; extraction must not
    for stream, golden in coded:
        for got, want in zip(extract_all(stream), golden):
            assert got.kind == want.kind
            if want.kind == "I":
                assert np.array_equal(got.dct.values, want.dct.values)
            else:
                assert np.array_equal(got.mv_field, want.mv_field)
                assert np.array_equal(got.intra_mask, want.intra_mask)
            frames_checked += 1
    assert counters.snapshot() == (0, 0), "partial decode touched pixel paths"
    report("partial-decode exactness", time.perf_counter() - t0, 30,
           f"{frames_checked} frames bit-identical, pixel-work counters zero")


def test_partial_decode_speed(bench_fixture, tmp_path):
    t0 = time.perf_counter()
    rep = run_bench(bench_fixture, repeats=3)
    csv_path = write_bench_csv(rep, tmp_path / "bench.csv")
    text = (tmp_path / "bench.csv").read_text()
    assert "ratio_partial_over_full" in text
    assert str(REFERENCE_CLAIM_RATIO) in text
    assert rep.ratio <= 0.50, f"partial/full ratio {rep.ratio:.3f} over the gate"
    report("partial-decode speed", time.perf_counter() - t0, 120,
           f"ratio {rep.ratio:.3f} <= 0.50 hard gate "
           f"(reference claim {REFERENCE_CLAIM_RATIO}); CSV at {csv_path}")


def test_network_cost_reproduction():
    t0 = time.perf_counter()
    rgb = count_cost(load_arch("resnet50_rgb"))
    assert abs(rgb.gflops - 3.86) / 3.86 <= 0.03
    assert abs(rgb.params - 25.6e6) / 25.6e6 <= 0.03
    targets = {"resnet50_dct": (5.40, 28.4e6), "resnet50_fbs32": (3.68, 26.2e6),
               "resnet50_fbs16": (3.18, 25.6e6)}
    reports = {}
    for name, (g, p) in targets.items():
        rep = count_cost(load_arch(name))
        reports[name] = rep
        assert abs(rep.gflops - g) / g <= 0.05
        assert abs(rep.params - p) / p <= 0.05
    assert (reports["resnet50_dct"].gflops > reports["resnet50_fbs32"].gflops
            > reports["resnet50_fbs16"].gflops)
    report("network cost reproduction", time.perf_counter() - t0, 5,
           f"rgb {rgb.gflops:.2f}G/{rgb.params/1e6:.1f}M within 3%; "
           f"variants within 5%, strictly ordered")


def test_frame_mix_average_reconstruction():
    t0 = time.perf_counter()
    i_costs = np.array([5.40, 3.68, 3.18])
    avgs = np.array([2.7, 2.3, 2.1])
    design = np.stack([i_costs, np.ones(3)], axis=1)
    (mix, intercept), *_ = np.linalg.lstsq(design, avgs, rcond=None)
    p = intercept / (1.0 - mix)
    for name, want in (("resnet50_dct", 2.7), ("resnet50_fbs32", 2.3),
                       ("resnet50_fbs16", 2.1)):
        got = average_gflops(count_cost(load_arch(name)), p, mix)
        assert abs(got - want) <= 0.1
        got_round = average_gflops(count_cost(load_arch(name)), 1.78, 0.25)
        assert abs(got_round - want) <= 0.1
    report("frame-mix average reconstruction", time.perf_counter() - t0, 1,
           f"fitted mix {mix:.3f}, temporal cost {p:.2f}G reproduce "
           f"2.7/2.3/2.1 within 0.1")


def test_pipeline_tensor_counts():
    t0 = time.perf_counter()
    video = make_translate(320, 240, 16, seed=2, dx=3, detail=4)
    stream = encode_video(video, gop_size=4, quality=6)
    freq, _ = frequency_tensors(stream, SampleSpec.test_frequency(n_frames=25),
                                fbs_k=32, seed=0)
    temp, _ = temporal_tensors(stream, SampleSpec.test_temporal(n_frames=25),
                               seed=0)
    assert len(freq) == 250
    assert len(temp) == 250
    assert all(t.shape == (28, 28, 96) for t in freq)
    assert all(t.shape == (224, 224, 2) for t in temp)
    report("pipeline tensor counts", time.perf_counter() - t0, 30,
           "250 tensors per video per stream in test mode "
           "(25 frames x 5 crops x 2 flips)")


def test_coefficient_domain_flip_correctness():
    t0 = time.perf_counter()
    video_a = make_noise(48, 48, 50, seed=31)
    video_b = make_translate(48, 48, 50, seed=32, dx=2, detail=8)
    checked = 0
    for video in (video_a, video_b):
        stream, golden = encode_video_traced(video, gop_size=1, quality=1)
        for feat in golden:
            tensor = feat.dct
            flipped = hflip_dct(tensor)
            wb = tensor.w_blocks
            for by in range(tensor.h_blocks):
                for bx in range(wb):
                    for ch in range(3):
                        orig = tensor.values[by, bx, ch * 64 : ch * 64 + 64]
                        flip = flipped.values[by, wb - 1 - bx, ch * 64 : ch * 64 + 64]
                        pix = round_half_away(dct8x8_inverse(
                            inverse_zigzag(orig.astype(np.float64))))
                        pix_f = round_half_away(dct8x8_inverse(
                            inverse_zigzag(flip.astype(np.float64))))
                        assert np.array_equal(pix_f, pix[:, ::-1])
            checked += 1
    assert checked == 100
    report("coefficient-domain flip correctness", time.perf_counter() - t0, 120,
           f"{checked} unit-quality frames flip bit-exactly vs the "
           f"pixel-domain oracle")


def test_toy_end_to_end(tmp_path):
    t0 = time.perf_counter()
    # gradient oracle first
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 5))
    y = rng.integers(0, 3, size=10)
    W = rng.normal(size=(3, 5))
    b = rng.normal(size=3)
    _, grad_w, grad_b = softmax_cross_entropy(W, b, X, y)
    eps = 1e-6
    for _ in range(10):
        i, j = rng.integers(3), rng.integers(5)
        Wp, Wm = W.copy(), W.copy()
        Wp[i, j] += eps
        Wm[i, j] -= eps
        fd = (softmax_cross_entropy(Wp, b, X, y)[0]
              - softmax_cross_entropy(Wm, b, X, y)[0]) / (2 * eps)
        assert abs(grad_w[i, j] - fd) <= 1e-4 * max(1.0, abs(fd))

    # two-class motion set: the temporal stream alone must carry the label
    data = tmp_path / "motion_set"
    cache = tmp_path / "motion_cache"
    make_two_class_dataset(str(data), 200, width=64, height=64, n_frames=24,
                           seed=5)
    cfg = DemoConfig(seed=1)
    trained = train_streams(str(data), cfg, str(cache))
    metrics, _ = evaluate(str(data), trained, str(cache))
    assert metrics["videos"] >= 50
    assert metrics["accuracy_temp"] >= 0.9

    # mixed set with disjoint per-stream ambiguity: fusion must not trail
    mixed = tmp_path / "mixed_set"
    mixed_cache = tmp_path / "mixed_cache"
    make_two_class_dataset(str(mixed), 200, width=64, height=64, n_frames=24,
                           seed=9, freq_ambiguous_frac=0.15,
                           temp_ambiguous_frac=0.15)
    trained_m = train_streams(str(mixed), DemoConfig(seed=2), str(mixed_cache))
    metrics_m, _ = evaluate(str(mixed), trained_m, str(mixed_cache))
    best_single = max(metrics_m["accuracy_freq"], metrics_m["accuracy_temp"])
    assert metrics_m["accuracy_fused"] >= best_single - 0.02
    report("toy end-to-end", time.perf_counter() - t0, 300,
           f"gradient check 1e-4; temporal accuracy "
           f"{metrics['accuracy_temp']:.2f} >= 0.9 on {metrics['videos']} test "
           f"videos; mixed-set fused {metrics_m['accuracy_fused']:.2f} >= "
           f"best single {best_single:.2f} - 0.02")


def test_out_of_scope_statement():
    print("\n[NOTE] not reproducible at desk scale: benchmark-dataset "
          "accuracies and the full-network inference-speed comparison need "
          "GPU training of the stream networks; the training schedules ship "
          "as provenance configs only (configs/train_schedules.json).")
