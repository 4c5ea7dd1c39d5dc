"""Benchmark harness: full decode versus partial feature extraction.

The interesting number is the wall-clock ratio partial/full on the same
stream.  The classic claim for compressed-domain analysis is that parsing
plus entropy decoding costs less than 20% of a full decode; the harness
reports the measured ratio side by side with that reference line.
"""

import csv
import platform
import statistics
import time
from dataclasses import dataclass, field

from .codec.decoder import DecodeStats, decode_video_full
from .codec.stream_format import parse_headers
from .partial import ExtractStats, extract_all
from .svg import write_bar_chart

CSV_SCHEMA_VERSION = 1
REFERENCE_CLAIM_RATIO = 0.20


@dataclass
class BenchReport:
    repeats: int
    frames: int
    full_samples: list = field(default_factory=list)
    partial_samples: list = field(default_factory=list)
    full_phases: dict = field(default_factory=dict)
    partial_phases: dict = field(default_factory=dict)
    bytes_read_full: int = 0
    bytes_read_partial: int = 0
    machine: str = ""
    threads: int = 1

    @property
    def full_total(self):
        return statistics.median(self.full_samples)

    @property
    def partial_total(self):
        return statistics.median(self.partial_samples)

    @property
    def ratio(self):
        return self.partial_total / self.full_total

    @property
    def frames_per_s_full(self):
        return self.frames / self.full_total

    @property
    def frames_per_s_partial(self):
        return self.frames / self.partial_total


def run_bench(stream: bytes, repeats: int = 3) -> BenchReport:
    report = BenchReport(repeats=repeats, frames=0,
                         machine=f"{platform.platform()} {platform.processor()}".strip(),
                         threads=1)
    full_phase_runs = []
    partial_phase_runs = []
    for i in range(repeats):
        full_stats = DecodeStats()
        t0 = time.perf_counter()
        video = decode_video_full(stream, stats=full_stats)
        report.full_samples.append(time.perf_counter() - t0)
        full_phase_runs.append(dict(full_stats.phases))
        partial_stats = ExtractStats()
        t0 = time.perf_counter()
        info = parse_headers(stream)
        t1 = time.perf_counter()
        for _ in extract_all(stream, info=info, stats=partial_stats):
            pass
        t2 = time.perf_counter()
        report.partial_samples.append(t2 - t0)
        # partial never runs the pixel phases, by construction
        partial_phase_runs.append({
            "header_parse": t1 - t0,
            "entropy_decode": t2 - t1,
            "idct_recon": 0.0,
            "motion_comp": 0.0,
        })
        if i == 0:
            report.frames = len(video.frames)
            report.bytes_read_full = full_stats.bytes_read
            report.bytes_read_partial = partial_stats.total_bytes
    # phase breakdowns belong to the repeat the median total came from
    full_median = report.full_samples.index(statistics.median_low(report.full_samples))
    partial_median = report.partial_samples.index(
        statistics.median_low(report.partial_samples))
    report.full_phases = full_phase_runs[full_median]
    report.partial_phases = partial_phase_runs[partial_median]
    return report


def write_bench_csv(report: BenchReport, path):
    rows = [
        ("schema_version", CSV_SCHEMA_VERSION),
        ("machine", report.machine),
        ("threads", report.threads),
        ("repeats", report.repeats),
        ("frames", report.frames),
        ("full_total_s", f"{report.full_total:.6f}"),
        ("partial_total_s", f"{report.partial_total:.6f}"),
        ("ratio_partial_over_full", f"{report.ratio:.4f}"),
        ("reference_claim_ratio", REFERENCE_CLAIM_RATIO),
        ("frames_per_s_full", f"{report.frames_per_s_full:.2f}"),
        ("frames_per_s_partial", f"{report.frames_per_s_partial:.2f}"),
        ("bytes_read_full", report.bytes_read_full),
        ("bytes_read_partial", report.bytes_read_partial),
        ("full_total_samples", ";".join(f"{s:.6f}" for s in report.full_samples)),
        ("partial_total_samples", ";".join(f"{s:.6f}" for s in report.partial_samples)),
    ]
    for phase, seconds in report.full_phases.items():
        rows.append((f"full_{phase}_s", f"{seconds:.6f}"))
    for phase, seconds in report.partial_phases.items():
        rows.append((f"partial_{phase}_s", f"{seconds:.6f}"))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerows(rows)
    return path


def write_bench_svg(report: BenchReport, path):
    bars = [("full decode", report.full_total),
            ("partial extract", report.partial_total)]
    reference = ("20% reference", REFERENCE_CLAIM_RATIO * report.full_total)
    return write_bar_chart(path, bars, reference_line=reference,
                           title="decode wall-clock (s), median of "
                                 f"{report.repeats}")
