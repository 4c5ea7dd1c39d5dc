import csv
import os

import numpy as np
import pytest

from fcv.cli import main
from fcv.codec import parse_headers
from fcv.codec.video import RawVideo
from fcv.pipeline import import_tensors


def run(args):
    return main([str(a) for a in args])


def test_synth_static_all_frames_identical(tmp_path):
    out = tmp_path / "static.fcvr"
    assert run(["synth", "--kind", "static", "--width", 48, "--height", 48,
                "--frames", 4, "-o", out]) == 0
    video = RawVideo.load(out)
    for frame in video.frames[1:]:
        assert np.array_equal(frame.y, video.frames[0].y)


def test_synth_translate_shifts_with_wraparound(tmp_path):
    out = tmp_path / "t.fcvr"
    assert run(["synth", "--kind", "translate", "--width", 48, "--height", 48,
                "--frames", 3, "--dx", 3, "-o", out]) == 0
    video = RawVideo.load(out)
    assert np.array_equal(video.frames[1].y, np.roll(video.frames[0].y, 3, axis=1))
    assert np.array_equal(video.frames[2].y, np.roll(video.frames[0].y, 6, axis=1))


def test_synth_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a.fcvr", tmp_path / "b.fcvr"
    for out in (a, b):
        assert run(["--seed", 5, "synth", "--kind", "noise", "--width", 32,
                    "--height", 32, "--frames", 3, "-o", out]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.fixture(scope="module")
def small_stream(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    raw = tmp / "v.fcvr"
    stream = tmp / "v.fcv"
    assert run(["synth", "--kind", "translate", "--width", 64, "--height", 64,
                "--frames", 10, "--dx", 2, "-o", raw]) == 0
    assert run(["encode", raw, "--gop", 5, "--quality", 3, "-o", stream]) == 0
    return stream


def test_encode_decode_roundtrip(small_stream, tmp_path):
    out = tmp_path / "back.fcvr"
    assert run(["decode", small_stream, "-o", out]) == 0
    video = RawVideo.load(out)
    assert video.n_frames == 10
    info = parse_headers(small_stream.read_bytes())
    assert info.gop_size == 5


def test_inspect_stream_output(small_stream, capsys):
    assert run(["inspect", small_stream]) == 0
    text = capsys.readouterr().out
    assert "64x64" in text
    assert "IPPPP" in text


def test_extract_writes_tensor_file(small_stream, tmp_path):
    out_dir = tmp_path / "tensors"
    assert run(["extract", small_stream, "--stream", "freq", "--fbs", 16,
                "--mode", "test", "--frames", 4, "--target", 8, 8,
                "-o", out_dir]) == 0
    rec = import_tensors(out_dir / "v_freq.fcvt")
    assert rec.kind == "frequency"
    assert rec.fbs_k == 16
    assert rec.values.shape == (40, 8, 8, 48)
    assert rec.metadata["mode"] == "test"

    assert run(["extract", small_stream, "--stream", "mv", "--mode", "train",
                "--frames", 2, "--target", 48, 48, "-o", out_dir]) == 0
    rec = import_tensors(out_dir / "v_mv.fcvt")
    assert rec.kind == "temporal"
    assert rec.values.shape == (2, 48, 48, 2)


def test_bench_csv_schema_and_idct_phase(small_stream, tmp_path):
    out_dir = tmp_path / "bench"
    assert run(["bench", small_stream, "--repeats", 5, "-o", out_dir]) == 0
    with open(out_dir / "bench.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = dict((r[0], r[1]) for r in reader)
    assert header == ["metric", "value"]
    assert rows["schema_version"] == "1"
    assert rows["repeats"] == "5"
    assert float(rows["partial_idct_recon_s"]) == 0.0
    assert float(rows["partial_motion_comp_s"]) == 0.0
    assert float(rows["reference_claim_ratio"]) == 0.20
    assert len(rows["full_total_samples"].split(";")) == 5
    assert len(rows["partial_total_samples"].split(";")) == 5
    # phase times account for the totals, up to untimed glue
    phases = ["header_parse", "entropy_decode", "idct_recon", "motion_comp"]
    full_sum = sum(float(rows[f"full_{p}_s"]) for p in phases)
    assert full_sum <= 1.05 * float(rows["full_total_s"])
    partial_sum = sum(float(rows[f"partial_{p}_s"]) for p in phases)
    assert partial_sum <= 1.05 * float(rows["partial_total_s"])
    assert (out_dir / "bench.svg").exists()
    svg = (out_dir / "bench.svg").read_text()
    assert "20% reference" in svg


def test_flops_table_output(capsys):
    assert run(["flops", "--arch", "resnet50_rgb", "--arch", "resnet50_dct",
                "--mix", "0.25"]) == 0
    text = capsys.readouterr().out
    assert "resnet50_rgb" in text
    assert "3.86" in text
    assert "5.44" in text
    assert "average GFLOPs" in text


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run(["bogus-command"])
    assert exc.value.code == 1


def test_data_error_exit_code(tmp_path):
    bad = tmp_path / "junk.fcv"
    bad.write_bytes(b"JUNKJUNKJUNK")
    assert run(["decode", bad]) == 2
    assert run(["inspect", bad]) == 2
    missing = tmp_path / "missing.fcv"
    assert run(["decode", missing]) == 2


def test_demo_train_eval_smoke(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(["synth", "--kind", "two-class-motion", "--count", 24,
                "--width", 64, "--height", 64, "--frames", 16,
                "-o", data]) == 0
    assert (data / "labels.csv").exists()
    cache = tmp_path / "cache"
    models = tmp_path / "models"
    metrics_dir = tmp_path / "metrics"
    assert run(["demo-train", data, "--epochs", 40, "--cache", cache,
                "-o", models]) == 0
    assert (models / "frequency.fcvc").exists()
    assert (models / "temporal.fcvc").exists()
    assert run(["demo-eval", data, "--models", models, "--weights", "2,1",
                "--cache", cache, "-o", metrics_dir]) == 0
    with open(metrics_dir / "metrics.csv", newline="") as fh:
        reader = csv.reader(fh)
        assert next(reader) == ["metric", "value"]
        rows = dict(reader)
    assert "accuracy_fused" in rows
    assert (metrics_dir / "metrics_videos.csv").exists()
    assert (metrics_dir / "accuracy.svg").exists()
