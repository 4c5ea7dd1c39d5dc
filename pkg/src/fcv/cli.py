"""Command-line entry point.

Subcommands: synth, encode, decode, extract, inspect, bench, flops,
demo-train, demo-eval.  Exit codes: 0 success, 1 usage error, 2 data or
format error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import bench as bench_mod
from . import demo as demo_mod
from .codec import decode_video_full, encode_video, parse_headers
from .codec.video import RawVideo
from .errors import FcvError, ParameterError
from .flops import average_gflops, bundled_archs, count_cost, load_arch
from .fusion import FusionWeights
from .partial import StreamReader
from .pipeline import (
    KIND_FREQUENCY,
    KIND_TEMPORAL,
    SampleSpec,
    TensorNormalizer,
    export,
    frequency_tensors,
    import_tensors,
    temporal_tensors,
)
from .svg import write_scatter
from .synth import KINDS, make_two_class_dataset, make_video

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _write(path, blob):
    with open(path, "wb") as fh:
        fh.write(blob)


# ----------------------------------------------------------------- commands

def cmd_synth(args):
    if args.kind == "two-class-motion":
        out_dir = args.out or "dataset"
        rows = make_two_class_dataset(
            out_dir, args.count, width=args.width, height=args.height,
            n_frames=args.frames, seed=args.seed,
            neutral_brightness=args.neutral_brightness,
            freq_ambiguous_frac=args.freq_ambiguous,
            temp_ambiguous_frac=args.temp_ambiguous,
        )
        print(f"wrote {len(rows)} labeled videos to {out_dir}/")
        return EXIT_OK
    video = make_video(args.kind, args.width, args.height, args.frames,
                       args.seed, dx=args.dx, detail=args.detail) \
        if args.kind == "translate" else \
        make_video(args.kind, args.width, args.height, args.frames, args.seed)
    out = args.out or f"{args.kind}.fcvr"
    video.save(out)
    print(f"wrote {video.n_frames} frames ({video.width}x{video.height}) to {out}")
    return EXIT_OK


def cmd_encode(args):
    video = RawVideo.load(args.input)
    stream = encode_video(video, gop_size=args.gop, quality=args.quality,
                          search_range=args.search_range)
    out = args.out or os.path.splitext(args.input)[0] + ".fcv"
    _write(out, stream)
    raw_bytes = os.path.getsize(args.input)
    print(f"encoded {video.n_frames} frames: {raw_bytes} -> {len(stream)} bytes "
          f"({raw_bytes / len(stream):.1f}x) in {out}")
    return EXIT_OK


def cmd_decode(args):
    video = decode_video_full(_read(args.input))
    out = args.out or os.path.splitext(args.input)[0] + "_decoded.fcvr"
    video.save(out)
    print(f"decoded {video.n_frames} frames to {out}")
    return EXIT_OK


def _default_normalizer():
    import importlib.resources

    text = importlib.resources.files("fcv.configs").joinpath(
        "freq_norm.json").read_text()
    return TensorNormalizer.from_json(text)


def cmd_extract(args):
    stream = _read(args.input)
    os.makedirs(args.out, exist_ok=True)
    video_id = os.path.splitext(os.path.basename(args.input))[0]
    target = tuple(args.target) if args.target else None
    if args.stream == "freq":
        spec = (SampleSpec.train_frequency(n_frames=args.frames)
                if args.mode == "train"
                else SampleSpec.test_frequency(n_frames=args.frames))
        if target:
            spec.target = target
        normalizer = None if args.no_normalize else _default_normalizer()
        tensors, frame_nos = frequency_tensors(stream, spec, fbs_k=args.fbs,
                                               seed=args.seed,
                                               normalizer=normalizer)
        kind, fbs_k = KIND_FREQUENCY, args.fbs
    else:
        spec = (SampleSpec.train_temporal(n_frames=args.frames)
                if args.mode == "train"
                else SampleSpec.test_temporal(n_frames=args.frames))
        if target:
            spec.target = target
        tensors, frame_nos = temporal_tensors(stream, spec, seed=args.seed)
        kind, fbs_k = KIND_TEMPORAL, 0
    out = os.path.join(args.out, f"{video_id}_{args.stream}.fcvt")
    export(tensors, {"video_id": video_id, "frame_indices": frame_nos,
                     "seed": args.seed, "mode": args.mode}, out,
           kind=kind, fbs_k=fbs_k)
    print(f"wrote {len(tensors)} tensors of shape "
          f"{tuple(tensors[0].shape)} to {out}")
    return EXIT_OK


def cmd_inspect(args):
    blob = _read(args.input)
    magic = blob[:4]
    if magic == b"FCV1":
        info = parse_headers(blob)
        print(f"stream: {info.width}x{info.height} @ {info.fps} fps, "
              f"{info.n_frames} frames, gop {info.gop_size}, "
              f"quality {info.quality}, search range {info.search_range}")
        types = info.frame_types()
        print(f"frame types: {''.join(types)}")
        payload = sum(f.payload_len for f in info.frames)
        print(f"payload bytes: {payload} of {len(blob)} total")
    elif magic == b"FCVT":
        rec = import_tensors(args.input)
        print(f"tensor file: kind={rec.kind} fbs_k={rec.fbs_k} "
              f"shape={tuple(rec.values.shape)}")
        print(f"metadata: {json.dumps(rec.metadata, sort_keys=True)}")
    else:
        raise ParameterError(f"unrecognized magic {magic!r}")
    return EXIT_OK


def cmd_bench(args):
    stream = _read(args.input)
    report = bench_mod.run_bench(stream, repeats=args.repeats)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "bench.csv")
    svg_path = os.path.join(args.out, "bench.svg")
    bench_mod.write_bench_csv(report, csv_path)
    bench_mod.write_bench_svg(report, svg_path)
    print(f"full decode:     {report.full_total:.3f} s "
          f"({report.frames_per_s_full:.1f} frames/s)")
    print(f"partial extract: {report.partial_total:.3f} s "
          f"({report.frames_per_s_partial:.1f} frames/s)")
    print(f"ratio partial/full: {report.ratio:.3f} "
          f"(reference claim: {bench_mod.REFERENCE_CLAIM_RATIO})")
    print(f"wrote {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_flops(args):
    names = args.arch or bundled_archs()
    rows = []
    for name in names:
        spec = load_arch(name)
        report = count_cost(spec)
        rows.append((spec.name, spec.input_shape, report))
    print(f"{'network':<18}{'input':<16}{'GFLOPs':>8}{'params':>10}")
    for name, shape, report in rows:
        print(f"{name:<18}{str(shape):<16}{report.gflops:>8.2f}"
              f"{report.params / 1e6:>9.1f}M")
    if args.mix is not None:
        temporal = count_cost(load_arch(args.temporal_arch))
        print(f"\naverage GFLOPs over frames at I-frame mix {args.mix} "
              f"(temporal cost {temporal.gflops:.2f}):")
        for name, _, report in rows:
            avg = average_gflops(report, temporal, args.mix)
            print(f"{name:<18}{avg:>8.2f}")
    return EXIT_OK


def cmd_demo_train(args):
    cfg = demo_mod.DemoConfig(fbs_k=args.fbs, epochs=args.epochs,
                              seed=args.seed, quality=args.quality,
                              gop_size=args.gop)
    trained = demo_mod.train_streams(args.dataset, cfg, args.cache)
    demo_mod.save_models(trained, args.out)
    print(f"trained both streams on {len(trained.train_files)} videos; "
          f"models in {args.out}/")
    return EXIT_OK


def cmd_demo_eval(args):
    trained = demo_mod.load_models(args.models)
    weights = FusionWeights(*(float(w) for w in args.weights.split(",")))
    metrics, per_video = demo_mod.evaluate(args.dataset, trained, args.cache,
                                           weights=(weights.w_freq,
                                                    weights.w_temp))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "metrics.csv")
    demo_mod.write_metrics_csv(metrics, per_video, csv_path)
    points = [(metrics["ms_per_video_freq"], metrics["accuracy_freq"], "frequency"),
              (metrics["ms_per_video_temp"], metrics["accuracy_temp"], "temporal"),
              (metrics["ms_per_video_fused"], metrics["accuracy_fused"], "fused")]
    write_scatter(os.path.join(args.out, "accuracy.svg"), points,
                  title="accuracy vs per-video scoring time",
                  x_label="ms per video", y_label="accuracy")
    for key in ("accuracy_freq", "accuracy_temp", "accuracy_fused"):
        print(f"{key}: {metrics[key]:.3f}")
    print(f"wrote {csv_path}")
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser():
    parser = _Parser(prog="fcv", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="global seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (reporting only; commands are "
                             "single-threaded)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        # accepted before or after the subcommand; SUPPRESS keeps the
        # subcommand occurrence from clobbering the global default
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("synth", help="generate a fixture video or dataset")
    p.add_argument("--kind", choices=KINDS, default="translate")
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--dx", type=int, default=3)
    p.add_argument("--detail", type=float, default=0.0,
                   help="per-frame smooth detail amplitude (translate only)")
    p.add_argument("--count", type=int, default=200,
                   help="dataset size (two-class-motion only)")
    p.add_argument("--neutral-brightness", action="store_true")
    p.add_argument("--freq-ambiguous", type=float, default=0.0)
    p.add_argument("--temp-ambiguous", type=float, default=0.0)
    p.add_argument("-o", "--out")
    add_seed(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="encode a raw video")
    p.add_argument("input")
    p.add_argument("--gop", type=int, default=12)
    p.add_argument("--quality", type=int, default=4)
    p.add_argument("--search-range", type=int, default=8)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="fully decode a stream to raw video")
    p.add_argument("input")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("extract", help="partial-decode tensors to a file")
    p.add_argument("input")
    p.add_argument("--stream", choices=("freq", "mv"), required=True)
    p.add_argument("--fbs", type=int, default=64, help="bands per channel")
    p.add_argument("--mode", choices=("train", "test"), default="test")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--target", type=int, nargs=2, default=None,
                   help="tensor height width (blocks for freq, px for mv)")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("-o", "--out", default="out")
    add_seed(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("inspect", help="print header info of a toolkit file")
    p.add_argument("input")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="benchmark partial vs full decode")
    p.add_argument("input")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("-o", "--out", default="bench_out")
    add_seed(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("flops", help="cost accounting for network configs")
    p.add_argument("--arch", action="append",
                   help="bundled name or .arch path; repeatable")
    p.add_argument("--mix", type=float, default=None,
                   help="I-frame fraction for the average-cost model")
    p.add_argument("--temporal-arch", default="resnet18_mv")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("demo-train", help="train the two-stream toy demo")
    p.add_argument("dataset")
    p.add_argument("--fbs", type=int, default=32)
    p.add_argument("--epochs", type=int, default=120)
    p.add_argument("--quality", type=int, default=4)
    p.add_argument("--gop", type=int, default=8)
    p.add_argument("--cache", default="demo_cache")
    p.add_argument("-o", "--out", default="demo_models")
    add_seed(p)
    p.set_defaults(func=cmd_demo_train)

    p = sub.add_parser("demo-eval", help="evaluate the two-stream toy demo")
    p.add_argument("dataset")
    p.add_argument("--models", default="demo_models")
    p.add_argument("--weights", default="2,1",
                   help="fusion weights w_freq,w_temp")
    p.add_argument("--cache", default="demo_cache")
    p.add_argument("-o", "--out", default="demo_metrics")
    add_seed(p)
    p.set_defaults(func=cmd_demo_eval)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "extract" and args.frames is None:
        args.frames = 3 if args.mode == "train" else 25
    try:
        return args.func(args)
    except FcvError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
