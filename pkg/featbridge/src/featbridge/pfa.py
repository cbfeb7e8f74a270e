"""Minimal PFA1 feature-archive writer.

Container layout: 4-byte magic, little-endian uint32 header length,
UTF-8 JSON header, then raw float32 payload.  Payload is frame-major,
layer-minor: for each frame id in order, each layer's (c, h, w) tensor
flattened in C order.  Kept dependency-free on the engine package so the
two implementations stay independently testable against each other.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"PFA1"
FORMAT_VERSION = 1


def write_archive(path, frame_ids, layer_names, features, normalized):
    """Serialize per-frame, per-layer float32 tensors to a PFA1 file.

    features maps frame_id -> list of np.ndarray, one (c, h, w) tensor
    per entry of layer_names.  Every frame must carry the same layer
    shapes; frame order in the file follows frame_ids.
    """
    frame_ids = [str(f) for f in frame_ids]
    layer_names = [str(n) for n in layer_names]
    if not frame_ids:
        raise ValueError("archive needs at least one frame")
    if len(set(frame_ids)) != len(frame_ids):
        raise ValueError("duplicate frame ids")
    if not layer_names:
        raise ValueError("archive needs at least one layer")

    ref = features[frame_ids[0]]
    if len(ref) != len(layer_names):
        raise ValueError(
            f"frame {frame_ids[0]!r} has {len(ref)} tensors for "
            f"{len(layer_names)} layers"
        )
    layers = []
    for name, t in zip(layer_names, ref):
        t = np.asarray(t)
        if t.ndim != 3:
            raise ValueError(f"layer {name!r} tensor must be (c, h, w), got {t.shape}")
        c, h, w = t.shape
        layers.append({"name": name, "c": int(c), "h": int(h), "w": int(w)})

    header = {
        "version": FORMAT_VERSION,
        "frame_ids": frame_ids,
        "layers": layers,
        "normalized": bool(normalized),
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")

    chunks = [MAGIC, struct.pack("<I", len(blob)), blob]
    for fid in frame_ids:
        row = features[fid]
        if len(row) != len(layer_names):
            raise ValueError(f"frame {fid!r} layer count mismatch")
        for spec, t in zip(layers, row):
            t = np.asarray(t)
            want = (spec["c"], spec["h"], spec["w"])
            if t.shape != want:
                raise ValueError(
                    f"frame {fid!r} layer {spec['name']!r}: "
                    f"expected {want}, got {t.shape}"
                )
            chunks.append(np.ascontiguousarray(t, dtype="<f4").tobytes())

    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))
