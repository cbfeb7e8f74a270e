"""Export per-channel calibration weights from linear-head checkpoints.

The classic perceptual-calibration checkpoints store one 1x1 conv per
tap layer under keys like ``lin0.model.1.weight`` with shape
(1, c, 1, 1).  This module flattens those to the engine's weight JSON,
a flat ``{layer_name: [c nonnegative floats]}`` mapping.  Plain mappings
of layer name to vector are accepted too.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class WeightExportError(Exception):
    pass


def _as_vector(name, value, expected_c):
    arr = np.asarray(
        value.detach().numpy() if hasattr(value, "detach") else value,
        dtype=np.float64,
    )
    squeezed = np.squeeze(arr)
    if squeezed.ndim == 0:
        squeezed = squeezed.reshape(1)
    if squeezed.ndim != 1:
        raise WeightExportError(
            f"layer {name!r}: cannot interpret weight of shape {arr.shape} "
            f"as a channel vector"
        )
    if expected_c is not None and squeezed.shape[0] != expected_c:
        raise WeightExportError(
            f"layer {name!r}: checkpoint has shape {arr.shape} "
            f"({squeezed.shape[0]} channels) but the archive expects "
            f"{expected_c} channels"
        )
    # negative channel weights would let the metric reward differences;
    # clamp like the reference calibration does at inference time
    return np.maximum(squeezed, 0.0)


def _load_checkpoint(source):
    if isinstance(source, (str, Path)):
        import torch

        return torch.load(source, map_location="cpu", weights_only=True)
    return source


def export_weights(source, layer_names, out_path, channel_counts=None):
    """Write engine-ready weight JSON for the named tap layers.

    source is a checkpoint path or an already-loaded mapping.  Keys may
    be the linear-head convention (``lin{i}.model.1.weight``, positional
    over layer_names) or the layer names themselves.  channel_counts,
    when given, must align with layer_names and is enforced.
    """
    layer_names = list(layer_names)
    if channel_counts is not None:
        channel_counts = list(channel_counts)
        if len(channel_counts) != len(layer_names):
            raise WeightExportError(
                f"{len(layer_names)} layer names but "
                f"{len(channel_counts)} channel counts"
            )

    state = _load_checkpoint(source)
    if not hasattr(state, "items"):
        raise WeightExportError(f"checkpoint of type {type(state).__name__} "
                                f"is not a mapping")

    out = {}
    for i, name in enumerate(layer_names):
        expected = channel_counts[i] if channel_counts is not None else None
        lin_key = f"lin{i}.model.1.weight"
        if lin_key in state:
            out[name] = _as_vector(name, state[lin_key], expected)
        elif name in state:
            out[name] = _as_vector(name, state[name], expected)
        else:
            raise WeightExportError(
                f"checkpoint has no weights for layer {name!r} "
                f"(looked for {lin_key!r} and {name!r}; "
                f"available keys: {sorted(map(str, state))[:10]})"
            )

    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({k: v.tolist() for k, v in out.items()}, fh, indent=2)
        fh.write("\n")
    return out
