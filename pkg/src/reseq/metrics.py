"""Pairwise perceptual distances and toy-scale calibration fitting.

Four metrics are supported:
  lpips       weighted squared activation differences, spatially averaged
              and summed over layers (requires a channel-normalized archive)
  cosine      one minus the spatially averaged channel dot product, summed
              over layers (requires a channel-normalized archive)
  l2_image    Euclidean distance over raw pixel values
  l2_feature  Euclidean distance over flat per-frame feature vectors

Calibration weights rescale per-channel activation differences; they are
fitted by gradient descent on a cross-entropy loss over human-judgment
triples, with a two-parameter logistic readout sigma(a*(d0-d1)+b).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .errors import ContractError, NumericalError
from .frameset import DistanceMatrix, FeatureArchive, FrameCollection, FrameRecord

METRICS = ("lpips", "cosine", "l2_image", "l2_feature")

THREADS_ENV = "RESEQ_THREADS"


@dataclass(frozen=True, eq=False)
class CalibrationWeights:
    """One nonnegative per-channel weight vector per archive layer."""

    by_layer: dict[str, np.ndarray]

    def __post_init__(self):
        frozen = {}
        for name, vec in self.by_layer.items():
            v = np.asarray(vec, dtype=np.float64).reshape(-1)
            if not np.isfinite(v).all() or (v < 0).any():
                raise ContractError(f"layer {name!r}: weights must be finite and >= 0")
            v.flags.writeable = False
            frozen[name] = v
        object.__setattr__(self, "by_layer", frozen)

    @classmethod
    def uniform(cls, archive: FeatureArchive) -> "CalibrationWeights":
        return cls({s.name: np.ones(s.c) for s in archive.layers})

    @classmethod
    def from_json(cls, path: str | Path) -> "CalibrationWeights":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        return cls({str(k): np.asarray(v, dtype=np.float64) for k, v in raw.items()})

    def to_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump({k: v.tolist() for k, v in self.by_layer.items()}, f, indent=2)
            f.write("\n")

    def aligned(self, archive: FeatureArchive) -> list[np.ndarray]:
        """Weight vectors in archive layer order; raises on shape mismatch."""
        out = []
        for spec in archive.layers:
            if spec.name not in self.by_layer:
                raise ContractError(f"no calibration weights for layer {spec.name!r}")
            v = self.by_layer[spec.name]
            if v.shape != (spec.c,):
                raise ContractError(
                    f"layer {spec.name!r}: weight length {v.shape[0]} != channel count {spec.c}"
                )
            out.append(v)
        return out


@dataclass(frozen=True)
class JudgmentTriple:
    """A two-alternative forced-choice record.

    h is the proportion of judges who saw distorted1 as closer to the
    reference than distorted0.
    """

    ref_id: str
    distorted0_id: str
    distorted1_id: str
    h: float

    def __post_init__(self):
        if not (0.0 <= self.h <= 1.0):
            raise ContractError(f"judgment h={self.h} outside [0, 1]")


@dataclass(frozen=True)
class JudgeNetParams:
    """Slope/bias of the logistic judgment predictor."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ContractError("judge parameters must be finite")


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    seed: int = 0


def _require_normalized(archive: FeatureArchive, op: str):
    if not archive.normalized:
        raise ContractError(f"{op} requires a channel-normalized archive")


def lpips_distance(
    archive: FeatureArchive, i: int, j: int, w: CalibrationWeights
) -> float:
    """Per-layer weighted squared activation difference, spatially averaged,
    summed over layers."""
    _require_normalized(archive, "lpips_distance")
    vecs = w.aligned(archive)
    total = 0.0
    for l, wvec in enumerate(vecs):
        a = archive.tensor(i, l).astype(np.float64)
        b = archive.tensor(j, l).astype(np.float64)
        diff = wvec[:, None, None] * (a - b)
        total += float(np.mean(np.sum(diff * diff, axis=0)))
    return total


def cosine_distance(archive: FeatureArchive, i: int, j: int) -> float:
    """Sum over layers of one minus the spatial mean of channel dot products."""
    _require_normalized(archive, "cosine_distance")
    total = 0.0
    for l in range(len(archive.layers)):
        a = archive.tensor(i, l).astype(np.float64)
        b = archive.tensor(j, l).astype(np.float64)
        total += float(1.0 - np.mean(np.sum(a * b, axis=0)))
    return total


def l2_image_distance(a: FrameRecord, b: FrameRecord) -> float:
    """Euclidean distance over all pixel channel values."""
    if a.pixels is None or b.pixels is None:
        missing = a.id if a.pixels is None else b.id
        raise ContractError(f"frame {missing!r} has no pixels")
    if a.pixels.shape != b.pixels.shape:
        raise ContractError(
            f"pixel shape mismatch: {a.id!r} {a.pixels.shape} vs {b.id!r} {b.pixels.shape}"
        )
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.sqrt(np.sum(diff * diff)))


def l2_feature_distance(vecs: Sequence[np.ndarray], i: int, j: int) -> float:
    """Euclidean distance between two flat feature vectors."""
    a = np.asarray(vecs[i], dtype=np.float64).reshape(-1)
    b = np.asarray(vecs[j], dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ContractError(f"feature length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n else 1


def compute_distance_matrix(
    source: FrameCollection | FeatureArchive,
    metric: str,
    w: CalibrationWeights | None = None,
    threads: int | None = None,
) -> DistanceMatrix:
    """Materialize all pairwise distances for the chosen metric.

    The result is identical regardless of thread count: each unordered pair
    is computed once and mirrored.
    """
    if metric not in METRICS:
        raise ContractError(f"unknown metric {metric!r}, expected one of {METRICS}")

    if metric in ("lpips", "cosine"):
        if not isinstance(source, FeatureArchive):
            raise ContractError(f"metric {metric!r} requires a feature archive")
        ids = source.frame_ids
        if metric == "lpips":
            weights = w if w is not None else CalibrationWeights.uniform(source)
            weights.aligned(source)  # fail fast on shape mismatch
            pair = lambda i, j: lpips_distance(source, i, j, weights)
        else:
            pair = lambda i, j: cosine_distance(source, i, j)
    elif metric == "l2_image":
        if not isinstance(source, FrameCollection):
            raise ContractError("metric 'l2_image' requires a frame collection")
        ids = source.ids
        frames = source.frames
        shapes = {f.pixels.shape for f in frames if f.pixels is not None}
        if any(f.pixels is None for f in frames):
            bad = next(f.id for f in frames if f.pixels is None)
            raise ContractError(f"frame {bad!r} has no pixels")
        if len(shapes) > 1:
            raise ContractError(
                f"l2_image requires identical image dimensions, got {sorted(shapes)}"
            )
        pair = lambda i, j: l2_image_distance(frames[i], frames[j])
    else:  # l2_feature: any archive works, flattened per frame; no normalization needed
        if not isinstance(source, FeatureArchive):
            raise ContractError("metric 'l2_feature' requires a feature archive")
        ids = source.frame_ids
        vecs = [source.flat_vector(i) for i in range(len(source))]
        pair = lambda i, j: l2_feature_distance(vecs, i, j)

    n = len(ids)
    values = np.zeros((n, n), dtype=np.float64)

    def fill_row(i: int):
        for j in range(i + 1, n):
            try:
                values[i, j] = pair(i, j)
            except ContractError as e:
                raise ContractError(f"pair ({ids[i]!r}, {ids[j]!r}): {e}") from e

    nthreads = threads if threads is not None else _thread_count()
    if nthreads <= 1 or n < 3:
        for i in range(n):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(fill_row, range(n)))
    iu = np.triu_indices(n, k=1)
    values[(iu[1], iu[0])] = values[iu]
    return DistanceMatrix(ids, values, metric_tag=metric)


# ---------------------------------------------------------------------------
# judgment predictor and calibration fitting


def judge(g: JudgeNetParams, d0: float, d1: float) -> float:
    """Probability that the second distortion is the closer one."""
    if not (np.isfinite(d0) and np.isfinite(d1)) or d0 < 0 or d1 < 0:
        raise ContractError("distances must be finite and >= 0")
    p = float(expit(g.a * (d0 - d1) + g.b))
    tiny = np.finfo(float).tiny
    return min(max(p, tiny), 1.0 - np.finfo(float).epsneg)


def _pair_channel_sq(archive: FeatureArchive, i: int, j: int) -> list[np.ndarray]:
    """Per layer: spatial mean of squared activation differences, per channel.

    With weights w the lpips distance is sum_l sum_c w_lc^2 * s_lc, which
    makes both the distance and its weight gradient cheap during fitting.
    """
    out = []
    for l in range(len(archive.layers)):
        a = archive.tensor(i, l).astype(np.float64)
        b = archive.tensor(j, l).astype(np.float64)
        out.append(np.mean((a - b) ** 2, axis=(1, 2)))
    return out


def _loss_and_grads(wvecs, a, b, s0, s1, hs):
    """Mean cross-entropy and analytic gradients over all triples."""
    t = len(hs)
    d0 = np.array([sum(float(w @ (w * s)) for w, s in zip(wvecs, row)) for row in s0])
    d1 = np.array([sum(float(w @ (w * s)) for w, s in zip(wvecs, row)) for row in s1])
    z = a * (d0 - d1) + b
    p = expit(z)
    eps = 1e-12
    pc = np.clip(p, eps, 1 - eps)
    loss = float(np.mean(-hs * np.log(pc) - (1 - hs) * np.log(1 - pc)))
    r = (p - hs) / t  # dLoss/dz per triple, averaged
    ga = float(r @ (d0 - d1))
    gb = float(np.sum(r))
    gw = []
    for l, w in enumerate(wvecs):
        acc = np.zeros_like(w)
        for k in range(t):
            acc += r[k] * a * 2.0 * w * (s0[k][l] - s1[k][l])
        gw.append(acc)
    return loss, ga, gb, gw


def fit_calibration(
    archive: FeatureArchive,
    judgments: Sequence[JudgmentTriple],
    config: FitConfig = FitConfig(),
) -> tuple[CalibrationWeights, JudgeNetParams, float]:
    """Fit per-channel weights and the logistic readout to judgment triples.

    Full-batch gradient descent from the unweighted metric (all weights 1,
    a=1, b=0); weights are clamped to >= 0 after every step.  The step size
    is halved whenever a step would increase the loss, so the final loss
    never exceeds the initial one.  Deterministic for a given seed.
    """
    _require_normalized(archive, "fit_calibration")
    if not judgments:
        raise ContractError("at least one judgment triple is required")
    for tr in judgments:
        for fid in (tr.ref_id, tr.distorted0_id, tr.distorted1_id):
            archive.index_of(fid)

    s0 = []
    s1 = []
    hs = np.array([tr.h for tr in judgments], dtype=np.float64)
    for tr in judgments:
        r = archive.index_of(tr.ref_id)
        s0.append(_pair_channel_sq(archive, r, archive.index_of(tr.distorted0_id)))
        s1.append(_pair_channel_sq(archive, r, archive.index_of(tr.distorted1_id)))

    wvecs = [np.ones(s.c, dtype=np.float64) for s in archive.layers]
    a, b = 1.0, 0.0
    lr = config.learning_rate

    loss, ga, gb, gw = _loss_and_grads(wvecs, a, b, s0, s1, hs)
    for epoch in range(config.epochs):
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite loss at epoch {epoch}")
        new_w = [np.maximum(w - lr * g, 0.0) for w, g in zip(wvecs, gw)]
        new_a = a - lr * ga
        new_b = b - lr * gb
        new_loss, nga, ngb, ngw = _loss_and_grads(new_w, new_a, new_b, s0, s1, hs)
        if new_loss > loss:
            lr *= 0.5  # reject the step, retry smaller
            continue
        wvecs, a, b = new_w, new_a, new_b
        loss, ga, gb, gw = new_loss, nga, ngb, ngw

    weights = CalibrationWeights(
        {s.name: w for s, w in zip(archive.layers, wvecs)}
    )
    return weights, JudgeNetParams(a, b), loss
