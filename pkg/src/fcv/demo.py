"""End-to-end two-stream demo on synthetic labeled videos.

Workflow: encode raw fixture videos, extract features by partial decode,
build per-stream tensors, pool them into feature vectors, train one small
classifier per stream, then evaluate with frame-score averaging and
weighted late fusion.  Everything is deterministic given the seed.
"""

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .codec import encode_video
from .codec.video import RawVideo
from .errors import ParameterError
from .fusion import (
    DEFAULT_WEIGHTS,
    ToyClassifier,
    late_fuse,
    pool_frequency,
    pool_temporal,
    video_score,
)
from .pipeline import (
    SampleSpec,
    TensorNormalizer,
    frequency_tensors,
    temporal_tensors,
)


@dataclass
class DemoConfig:
    fbs_k: int = 32
    freq_target: tuple = (8, 8)       # block grid units
    temp_target: tuple = (64, 64)     # pixels
    train_frames: int = 3
    test_frames: int = 25
    gop_size: int = 8
    quality: int = 4
    search_range: int = 8
    epochs: int = 120
    lr_freq: float = 0.5
    lr_temp: float = 0.5
    milestones: tuple = (80, 100)
    batch_size: int = 32
    seed: int = 0
    weights: tuple = DEFAULT_WEIGHTS

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def load_labels(dataset_dir):
    path = os.path.join(dataset_dir, "labels.csv")
    if not os.path.exists(path):
        raise ParameterError(f"no labels.csv in {dataset_dir}")
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((row["file"], int(row["label"])))
    if not rows:
        raise ParameterError("labels.csv is empty")
    return rows


def split_rows(rows, test_every=4):
    """Deterministic split: every test_every-th video goes to the test set."""
    train, test = [], []
    for i, row in enumerate(rows):
        (test if i % test_every == test_every - 1 else train).append(row)
    return train, test


def encode_dataset(dataset_dir, rows, cache_dir, cfg: DemoConfig):
    """Encode each raw video once; returns {file: stream bytes}."""
    os.makedirs(cache_dir, exist_ok=True)
    streams = {}
    for name, _ in rows:
        out = os.path.join(cache_dir, name.replace(".fcvr", ".fcv"))
        if not os.path.exists(out):
            video = RawVideo.load(os.path.join(dataset_dir, name))
            stream = encode_video(video, gop_size=cfg.gop_size,
                                  quality=cfg.quality,
                                  search_range=cfg.search_range)
            with open(out, "wb") as fh:
                fh.write(stream)
        with open(out, "rb") as fh:
            streams[name] = fh.read()
    return streams


@dataclass
class TrainedStreams:
    freq_clf: ToyClassifier
    temp_clf: ToyClassifier
    normalizer: TensorNormalizer
    config: DemoConfig
    train_files: list = field(default_factory=list)


def train_streams(dataset_dir, cfg: DemoConfig, cache_dir, rows=None) -> TrainedStreams:
    rows = load_labels(dataset_dir) if rows is None else rows
    train_rows, _ = split_rows(rows)
    streams = encode_dataset(dataset_dir, train_rows, cache_dir, cfg)

    freq_spec = SampleSpec.train_frequency(n_frames=cfg.train_frames,
                                           target=cfg.freq_target)
    temp_spec = SampleSpec.train_temporal(n_frames=cfg.train_frames,
                                          target=cfg.temp_target)
    raw_freq, labels_freq = [], []
    temp_features, labels_temp = [], []
    for i, (name, label) in enumerate(train_rows):
        stream = streams[name]
        seed = cfg.seed * 1_000_003 + i
        tensors, _ = frequency_tensors(stream, freq_spec, fbs_k=cfg.fbs_k,
                                       seed=seed)
        raw_freq.extend(tensors)
        labels_freq.extend([label] * len(tensors))
        tensors, _ = temporal_tensors(stream, temp_spec, seed=seed + 1)
        temp_features.extend(pool_temporal(t) for t in tensors)
        labels_temp.extend([label] * len(tensors))

    normalizer = TensorNormalizer().fit(raw_freq)
    freq_features = [pool_frequency(normalizer.transform(t)) for t in raw_freq]

    freq_clf = ToyClassifier(lr=cfg.lr_freq, epochs=cfg.epochs,
                             batch_size=cfg.batch_size,
                             milestones=cfg.milestones, seed=cfg.seed)
    freq_clf.fit(np.stack(freq_features), np.asarray(labels_freq))
    temp_clf = ToyClassifier(lr=cfg.lr_temp, epochs=cfg.epochs,
                             batch_size=cfg.batch_size,
                             milestones=cfg.milestones, seed=cfg.seed)
    temp_clf.fit(np.stack(temp_features), np.asarray(labels_temp))
    return TrainedStreams(freq_clf=freq_clf, temp_clf=temp_clf,
                          normalizer=normalizer, config=cfg,
                          train_files=[name for name, _ in train_rows])


def save_models(trained: TrainedStreams, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    trained.freq_clf.save(os.path.join(out_dir, "frequency.fcvc"))
    trained.temp_clf.save(os.path.join(out_dir, "temporal.fcvc"))
    with open(os.path.join(out_dir, "freq_norm.json"), "w") as fh:
        fh.write(trained.normalizer.to_json())
    with open(os.path.join(out_dir, "demo_config.json"), "w") as fh:
        fh.write(trained.config.to_json())


def load_models(out_dir) -> TrainedStreams:
    with open(os.path.join(out_dir, "demo_config.json")) as fh:
        data = json.load(fh)
    for key in ("freq_target", "temp_target", "milestones", "weights"):
        data[key] = tuple(data[key])
    cfg = DemoConfig(**data)
    with open(os.path.join(out_dir, "freq_norm.json")) as fh:
        normalizer = TensorNormalizer.from_json(fh.read())
    return TrainedStreams(
        freq_clf=ToyClassifier.load(os.path.join(out_dir, "frequency.fcvc")),
        temp_clf=ToyClassifier.load(os.path.join(out_dir, "temporal.fcvc")),
        normalizer=normalizer, config=cfg,
    )


def _video_stream_score(clf, features):
    return video_score(clf.predict_scores(np.stack(features)))


def evaluate(dataset_dir, trained: TrainedStreams, cache_dir, rows=None,
             weights=None):
    """Test-split accuracies per stream and fused; returns (metrics, rows).

    Each test video contributes test_frames x 10 tensors per stream; frame
    scores average into a video score and the two streams fuse by weighted
    average.
    """
    cfg = trained.config
    rows = load_labels(dataset_dir) if rows is None else rows
    _, test_rows = split_rows(rows)
    if not test_rows:
        raise ParameterError("test split is empty")
    streams = encode_dataset(dataset_dir, test_rows, cache_dir, cfg)
    weights = cfg.weights if weights is None else weights

    freq_spec = SampleSpec.test_frequency(n_frames=cfg.test_frames,
                                          target=cfg.freq_target)
    temp_spec = SampleSpec.test_temporal(n_frames=cfg.test_frames,
                                         target=cfg.temp_target)
    per_video = []
    hits = {"freq": 0, "temp": 0, "fused": 0}
    stream_seconds = {"freq": 0.0, "temp": 0.0}
    for i, (name, label) in enumerate(test_rows):
        stream = streams[name]
        seed = cfg.seed * 7_000_003 + i
        t0 = time.perf_counter()
        f_tensors, _ = frequency_tensors(stream, freq_spec, fbs_k=cfg.fbs_k,
                                         seed=seed, normalizer=trained.normalizer)
        s_freq = _video_stream_score(trained.freq_clf,
                                     [pool_frequency(t) for t in f_tensors])
        t1 = time.perf_counter()
        t_tensors, _ = temporal_tensors(stream, temp_spec, seed=seed + 1)
        s_temp = _video_stream_score(trained.temp_clf,
                                     [pool_temporal(t) for t in t_tensors])
        t2 = time.perf_counter()
        stream_seconds["freq"] += t1 - t0
        stream_seconds["temp"] += t2 - t1
        fused = late_fuse(s_freq, s_temp, weights)
        pred = {
            "freq": trained.freq_clf.classes_[s_freq.argmax()],
            "temp": trained.temp_clf.classes_[s_temp.argmax()],
            "fused": trained.freq_clf.classes_[fused.argmax()],
        }
        for key in hits:
            hits[key] += int(pred[key] == label)
        per_video.append({
            "file": name, "label": label,
            "pred_freq": int(pred["freq"]), "pred_temp": int(pred["temp"]),
            "pred_fused": int(pred["fused"]),
            "tensors_freq": len(f_tensors), "tensors_temp": len(t_tensors),
        })
    n = len(test_rows)
    metrics = {
        "videos": n,
        "accuracy_freq": hits["freq"] / n,
        "accuracy_temp": hits["temp"] / n,
        "accuracy_fused": hits["fused"] / n,
        "ms_per_video_freq": 1000.0 * stream_seconds["freq"] / n,
        "ms_per_video_temp": 1000.0 * stream_seconds["temp"] / n,
        "ms_per_video_fused": 1000.0 * (stream_seconds["freq"]
                                        + stream_seconds["temp"]) / n,
        "w_freq": weights[0], "w_temp": weights[1],
    }
    return metrics, per_video


def write_metrics_csv(metrics, per_video, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for key, value in metrics.items():
            writer.writerow([key, value])
    rows_path = os.path.splitext(path)[0] + "_videos.csv"
    fieldnames = ["file", "label", "pred_freq", "pred_temp", "pred_fused",
                  "tensors_freq", "tensors_temp"]
    with open(rows_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(per_video)
    return path, rows_path
