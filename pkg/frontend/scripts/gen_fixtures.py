#!/usr/bin/env python3
"""Generate cross-language fixtures: randomized FCVT files plus a manifest
with the expected contents, written by the primary toolkit's exporter."""

import json
import os
import sys

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(os.path.dirname(ROOT), "src"))

from fcv.pipeline import export  # noqa: E402

OUT = os.path.join(ROOT, "tests", "fixtures")
COUNT = 100


def main():
    os.makedirs(OUT, exist_ok=True)
    rng = np.random.default_rng(0xF17)
    manifest = []
    for i in range(COUNT):
        kind = "frequency" if i % 2 == 0 else "temporal"
        fbs_k = int(rng.integers(1, 65)) if kind == "frequency" else 0
        n = int(rng.integers(1, 4))
        h = int(rng.integers(1, 7))
        w = int(rng.integers(1, 7))
        c = int(rng.integers(1, 9))
        tensors = (rng.normal(scale=100.0, size=(n, h, w, c))
                   .astype(np.float32))
        metadata = {
            "video_id": f"fixture_{i:03d}",
            "frame_indices": [int(x) for x in rng.integers(0, 100, size=3)],
            "seed": i,
        }
        name = f"fixture_{i:03d}.fcvt"
        export(tensors, metadata, os.path.join(OUT, name), kind=kind,
               fbs_k=fbs_k)
        manifest.append({
            "file": name,
            "kind": kind,
            "fbs_k": fbs_k,
            "dims": [n, h, w, c],
            "metadata": metadata,
            # float32 -> float64 is exact, so JSON carries the exact values
            "values": [float(v) for v in tensors.ravel()],
        })
    with open(os.path.join(OUT, "manifest.json"), "w") as fh:
        json.dump(manifest, fh)
    print(f"wrote {COUNT} fixtures to {OUT}")


if __name__ == "__main__":
    main()
