"""Frame ingestion and the on-disk PFA1 / PDM1 container formats.

Every other module reads and writes frames, feature archives, and distance
matrices through the types defined here.  All types are immutable after
construction (arrays are marked read-only) and safe to share across threads.

PFA1 (feature archive) layout:
    magic b"PFA1" | uint32-LE header length | UTF-8 JSON header | payload
    header = {"version", "frame_ids", "layers": [{"name","c","h","w"}], "normalized"}
    payload = float32-LE tensors, frame-major then layer-minor, each tensor
    C-ordered as (c, h, w).

PDM1 (distance matrix) layout:
    magic b"PDM1" | uint32-LE header length | UTF-8 JSON header | payload
    header = {"version", "frame_ids", "metric_tag"}
    payload = n*n float32-LE values, row-major.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ContractError, FormatError, IngestionError, ValidationError

PFA_MAGIC = b"PFA1"
PDM_MAGIC = b"PDM1"
FORMAT_VERSION = 1

SOURCE_KINDS = ("images", "features", "distances")

# Euclidean norm tolerance for the channel-normalization invariant.
NORM_TOL = 1e-4


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FrameRecord:
    """One frame: a stable identifier plus (optionally) its decoded pixels.

    Pixels are stored as a float32 array of shape (height, width, 3) with
    every channel value in [0, 1].
    """

    id: str
    pixels: np.ndarray | None = None
    source_path: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ContractError("frame id must be non-empty")
        if self.pixels is not None:
            px = np.asarray(self.pixels, dtype=np.float32)
            if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
                raise ContractError(
                    f"frame {self.id!r}: pixels must have shape (h, w, 3), got {px.shape}"
                )
            if not np.isfinite(px).all() or px.min() < 0.0 or px.max() > 1.0:
                raise ContractError(f"frame {self.id!r}: channel values must lie in [0, 1]")
            object.__setattr__(self, "pixels", _freeze(px))


@dataclass(frozen=True, eq=False)
class FrameCollection:
    """An ordered, identity-stable set of frames."""

    frames: tuple[FrameRecord, ...]
    source_kind: str = "images"

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.source_kind not in SOURCE_KINDS:
            raise ContractError(f"unknown source_kind {self.source_kind!r}")
        ids = [f.id for f in self.frames]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ContractError(f"duplicate frame ids: {dup}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.frames)

    def get(self, frame_id: str) -> FrameRecord:
        for f in self.frames:
            if f.id == frame_id:
                return f
        raise ContractError(f"unknown frame id {frame_id!r}")

    def subset(self, keep_ids: Sequence[str]) -> "FrameCollection":
        """Frames restricted to `keep_ids`, original relative order preserved."""
        keep = set(keep_ids)
        unknown = keep - set(self.ids)
        if unknown:
            raise ContractError(f"unknown frame ids: {sorted(unknown)}")
        return FrameCollection(
            tuple(f for f in self.frames if f.id in keep), self.source_kind
        )

    def reordered(self, ordered_ids: Sequence[str]) -> "FrameCollection":
        """The same frames rearranged into exactly `ordered_ids` order."""
        if sorted(ordered_ids) != sorted(self.ids):
            raise ContractError("reordered ids must be a permutation of the frame ids")
        return FrameCollection(
            tuple(self.get(i) for i in ordered_ids), self.source_kind
        )


@dataclass(frozen=True)
class LayerSpec:
    """Shape record for one activation layer: c channels over an h x w grid."""

    name: str
    c: int
    h: int
    w: int

    def __post_init__(self):
        if self.c < 1 or self.h < 1 or self.w < 1:
            raise ContractError(f"layer {self.name!r}: c, h, w must all be >= 1")


@dataclass(frozen=True, eq=False)
class FeatureArchive:
    """Per-frame, per-layer activation tensors.

    `data[i][l]` is the float32 tensor of shape (c_l, h_l, w_l) for frame i,
    layer l.  When `normalized` is set, every spatial channel vector has unit
    Euclidean norm (within NORM_TOL) or is exactly zero.
    """

    frame_ids: tuple[str, ...]
    layers: tuple[LayerSpec, ...]
    data: tuple[tuple[np.ndarray, ...], ...]
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "frame_ids", tuple(self.frame_ids))
        object.__setattr__(self, "layers", tuple(self.layers))
        ids = self.frame_ids
        if len(set(ids)) != len(ids) or any(not i for i in ids):
            raise ContractError("frame ids must be unique and non-empty")
        if len(self.data) != len(ids):
            raise ContractError(
                f"archive declares {len(ids)} frames but carries {len(self.data)} tensor rows"
            )
        frozen_rows = []
        for fi, row in enumerate(self.data):
            if len(row) != len(self.layers):
                raise ContractError(
                    f"frame {ids[fi]!r}: expected {len(self.layers)} layer tensors, got {len(row)}"
                )
            frozen = []
            for spec, t in zip(self.layers, row):
                t = np.asarray(t, dtype=np.float32)
                if t.shape != (spec.c, spec.h, spec.w):
                    raise ContractError(
                        f"frame {ids[fi]!r} layer {spec.name!r}: tensor shape {t.shape} "
                        f"!= declared {(spec.c, spec.h, spec.w)}"
                    )
                frozen.append(_freeze(t))
            frozen_rows.append(tuple(frozen))
        object.__setattr__(self, "data", tuple(frozen_rows))
        if self.normalized:
            self._check_normalized()

    def _check_normalized(self):
        for fi, row in enumerate(self.data):
            for spec, t in zip(self.layers, row):
                norms = np.sqrt(np.sum(t.astype(np.float64) ** 2, axis=0))
                bad = np.abs(norms - 1.0) > NORM_TOL
                # zero vectors are permitted (dead activations)
                bad &= norms != 0.0
                if bad.any():
                    h, w = np.argwhere(bad)[0]
                    raise ValidationError(
                        f"frame {self.frame_ids[fi]!r} layer {spec.name!r}: channel vector at "
                        f"({h},{w}) has norm {norms[h, w]:.6g}, expected 1 within {NORM_TOL}"
                    )

    def __len__(self) -> int:
        return len(self.frame_ids)

    def tensor(self, frame: int, layer: int) -> np.ndarray:
        return self.data[frame][layer]

    def index_of(self, frame_id: str) -> int:
        try:
            return self.frame_ids.index(frame_id)
        except ValueError:
            raise ContractError(f"unknown frame id {frame_id!r}") from None

    def flat_vector(self, frame: int) -> np.ndarray:
        """All layer tensors of one frame concatenated into a single vector."""
        return np.concatenate([t.reshape(-1) for t in self.data[frame]])


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distances with a zero diagonal.

    Values are stored as float32, matching the PDM1 payload, so that a
    save/load round trip is bit-exact.
    """

    frame_ids: tuple[str, ...]
    values: np.ndarray
    metric_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "frame_ids", tuple(self.frame_ids))
        n = len(self.frame_ids)
        if len(set(self.frame_ids)) != n:
            raise ContractError("frame ids must be unique")
        v = np.asarray(self.values, dtype=np.float32)
        if v.shape != (n, n):
            raise ContractError(f"values shape {v.shape} != ({n}, {n})")
        if n:
            if not np.isfinite(v).all() or (v < 0).any():
                raise ValidationError("distance values must be finite and >= 0")
            neq = v != v.T
            if neq.any():
                i, j = np.argwhere(neq)[0]
                raise ValidationError(
                    f"matrix is asymmetric at ({i},{j})/({j},{i}): "
                    f"{v[i, j]!r} != {v[j, i]!r}"
                )
            if (np.diag(v) != 0).any():
                i = int(np.argwhere(np.diag(v) != 0)[0][0])
                raise ValidationError(f"nonzero diagonal at ({i},{i}): {v[i, i]!r}")
        object.__setattr__(self, "values", _freeze(v))

    def __len__(self) -> int:
        return len(self.frame_ids)

    def index_of(self, frame_id: str) -> int:
        try:
            return self.frame_ids.index(frame_id)
        except ValueError:
            raise ContractError(f"unknown frame id {frame_id!r}") from None

    def submatrix(self, keep_ids: Sequence[str]) -> "DistanceMatrix":
        """Rows/columns restricted to `keep_ids`, original relative order kept."""
        keep = set(keep_ids)
        idx = [i for i, fid in enumerate(self.frame_ids) if fid in keep]
        unknown = keep - set(self.frame_ids)
        if unknown:
            raise ContractError(f"unknown frame ids: {sorted(unknown)}")
        sub = self.values[np.ix_(idx, idx)].copy()
        return DistanceMatrix(
            tuple(self.frame_ids[i] for i in idx), sub, self.metric_tag
        )


# ---------------------------------------------------------------------------
# ingestion


def _dedup_ids(stems: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for s in stems:
        count = seen.get(s, 0)
        out.append(s if count == 0 else f"{s}_{count}")
        seen[s] = count + 1
    if len(set(out)) != len(out):
        dup = sorted({i for i in out if out.count(i) > 1})
        raise FormatError(f"duplicate frame ids after suffixing: {dup}", 0)
    return out


def ingest_images(paths: Iterable[str | Path]) -> FrameCollection:
    """Decode PNG/JPEG files, in the given order, into a FrameCollection.

    Ids default to the file stem; repeated stems get numeric suffixes
    (a.png, dir/a.png -> "a", "a_1").
    """
    paths = [Path(p) for p in paths]
    ids = _dedup_ids([p.stem for p in paths])
    frames = []
    for fid, path in zip(ids, paths):
        try:
            with Image.open(path) as img:
                rgb = img.convert("RGB")
                px = np.asarray(rgb, dtype=np.float32) / 255.0
        except (OSError, UnidentifiedImageError, ValueError) as e:
            raise IngestionError(path, str(e)) from e
        frames.append(FrameRecord(id=fid, pixels=px, source_path=str(path)))
    return FrameCollection(tuple(frames), source_kind="images")


# ---------------------------------------------------------------------------
# normalization


def channel_unit_normalize(archive: FeatureArchive) -> FeatureArchive:
    """Divide every spatial channel vector by its Euclidean norm.

    Zero vectors are left as zero.  Refuses already-normalized input so the
    operation cannot be applied twice.
    """
    if archive.normalized:
        raise ContractError("archive is already channel-normalized")
    rows = []
    for row in archive.data:
        out_row = []
        for t in row:
            norms = np.sqrt(np.sum(t.astype(np.float64) ** 2, axis=0, keepdims=True))
            safe = np.where(norms == 0.0, 1.0, norms)
            out_row.append((t / safe).astype(np.float32))
        rows.append(tuple(out_row))
    return FeatureArchive(archive.frame_ids, archive.layers, tuple(rows), normalized=True)


# ---------------------------------------------------------------------------
# binary container I/O


def _write_container(path: str | Path, magic: bytes, header: dict, payload: bytes):
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(payload)


def _read_container(path: str | Path, magic: bytes) -> tuple[dict, bytes, int]:
    """Returns (header, payload, payload_offset)."""
    raw = Path(path).read_bytes()
    if raw[:4] != magic:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {magic!r}", 0)
    if len(raw) < 8:
        raise FormatError("truncated header length field", 4)
    (hlen,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + hlen:
        raise FormatError(f"truncated header: declared {hlen} bytes", 8)
    try:
        header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"header is not valid UTF-8 JSON: {e}", 8) from e
    if not isinstance(header, dict):
        raise FormatError("header must be a JSON object", 8)
    return header, raw[8 + hlen :], 8 + hlen


def save_archive(archive: FeatureArchive, path: str | Path) -> None:
    header = {
        "version": FORMAT_VERSION,
        "frame_ids": list(archive.frame_ids),
        "layers": [
            {"name": s.name, "c": s.c, "h": s.h, "w": s.w} for s in archive.layers
        ],
        "normalized": archive.normalized,
    }
    chunks = []
    for row in archive.data:
        for t in row:
            chunks.append(np.ascontiguousarray(t, dtype="<f4").tobytes())
    _write_container(path, PFA_MAGIC, header, b"".join(chunks))


def load_archive(path: str | Path) -> FeatureArchive:
    header, payload, off = _read_container(path, PFA_MAGIC)
    try:
        frame_ids = [str(i) for i in header["frame_ids"]]
        layers = tuple(
            LayerSpec(str(d["name"]), int(d["c"]), int(d["h"]), int(d["w"]))
            for d in header["layers"]
        )
        normalized = bool(header["normalized"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"header missing required field: {e}", 8) from e
    per_frame = sum(s.c * s.h * s.w for s in layers)
    expected = per_frame * len(frame_ids) * 4
    if len(payload) != expected:
        raise FormatError(
            f"payload size mismatch: expected {expected} bytes, got {len(payload)}", off
        )
    flat = np.frombuffer(payload, dtype="<f4")
    rows = []
    pos = 0
    for _ in frame_ids:
        row = []
        for s in layers:
            size = s.c * s.h * s.w
            row.append(flat[pos : pos + size].reshape(s.c, s.h, s.w))
            pos += size
        rows.append(tuple(row))
    return FeatureArchive(tuple(frame_ids), layers, tuple(rows), normalized=normalized)


def save_matrix(m: DistanceMatrix, path: str | Path) -> None:
    header = {
        "version": FORMAT_VERSION,
        "frame_ids": list(m.frame_ids),
        "metric_tag": m.metric_tag,
    }
    payload = np.ascontiguousarray(m.values, dtype="<f4").tobytes()
    _write_container(path, PDM_MAGIC, header, payload)


def load_matrix(path: str | Path) -> DistanceMatrix:
    header, payload, off = _read_container(path, PDM_MAGIC)
    try:
        frame_ids = [str(i) for i in header["frame_ids"]]
        metric_tag = str(header["metric_tag"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"header missing required field: {e}", 8) from e
    n = len(frame_ids)
    expected = n * n * 4
    if len(payload) != expected:
        raise FormatError(
            f"payload size mismatch: expected {expected} bytes, got {len(payload)}", off
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n, n)
    # constructor re-validates symmetry, zero diagonal, finiteness
    return DistanceMatrix(tuple(frame_ids), values, metric_tag)
