"""2D embedding of the MST for overview navigation, plus composite image
sheets (linear strip / radial ring) rendered from a sequence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ContractError
from .frameset import DistanceMatrix, FrameCollection
from .graphseq import MstTree, SequenceResult

GUTTER_PX = 8
_TIE_REL = 1e-9


@dataclass(frozen=True, eq=False)
class Embedding2D:
    """Classical-MDS coordinates, one (x, y) per frame.

    stress is the root of the summed squared residuals between embedded and
    source distances; degenerate marks rank < 2 inputs (y pinned to 0).
    """

    frame_ids: tuple[str, ...]
    coords: np.ndarray  # (n, 2) float64
    stress: float
    degenerate: bool
    source: str  # "tree_geodesic" | "matrix"

    def __post_init__(self):
        if self.coords.shape != (len(self.frame_ids), 2):
            raise ContractError("coords must be (n, 2)")
        if not np.all(np.isfinite(self.coords)):
            raise ContractError("coordinates must be finite")
        if self.stress < 0:
            raise ContractError("stress must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "points": {fid: [float(x), float(y)] for fid, (x, y) in zip(self.frame_ids, self.coords)},
            "stress": self.stress,
            "degenerate": self.degenerate,
            "source": self.source,
        }


def tree_geodesics(t: MstTree) -> np.ndarray:
    """All-pairs path lengths through the tree (n breadth-first sweeps)."""
    n = t.n
    d = np.zeros((n, n), dtype=np.float64)
    for s in range(n):
        dist = d[s]
        seen = [False] * n
        seen[s] = True
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v, w in t.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        dist[v] = dist[u] + w
                        nxt.append(v)
            frontier = nxt
    return d


def _fix_axis_signs(coords: np.ndarray) -> None:
    # flip each axis so the largest-magnitude coordinate is positive; exact
    # symmetric ties resolve to the highest frame index
    for axis in range(coords.shape[1]):
        col = coords[:, axis]
        amax = float(np.abs(col).max())
        if amax == 0.0:
            continue
        tied = np.where(np.abs(col) >= amax * (1.0 - _TIE_REL))[0]
        if col[tied[-1]] < 0:
            coords[:, axis] = -col


def embed_mst_2d(
    t: MstTree, m: DistanceMatrix, use_matrix_distances: bool = False
) -> Embedding2D:
    """Classical MDS of the tree-geodesic metric (or, optionally, the raw
    distance matrix) onto the top two spectral axes."""
    if t.frame_ids != m.frame_ids:
        raise ContractError("tree and matrix must cover the same frames in order")
    n = t.n
    if use_matrix_distances:
        dist = m.values.astype(np.float64)
        source = "matrix"
    else:
        dist = tree_geodesics(t)
        source = "tree_geodesic"

    sq = dist**2
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * (j @ sq @ j)
    b = (b + b.T) / 2.0  # symmetrize away roundoff before the eigensolve
    evals, evecs = np.linalg.eigh(b)  # ascending
    top = evals[::-1][:2]
    vecs = evecs[:, ::-1][:, :2]

    coords = np.zeros((n, 2), dtype=np.float64)
    degenerate = False
    scale = float(max(top[0], 0.0))
    for axis in range(2):
        lam = float(top[axis]) if axis < len(top) else 0.0
        if lam <= max(scale, 1.0) * 1e-12:
            degenerate = True
            continue
        coords[:, axis] = vecs[:, axis] * math.sqrt(lam)
    _fix_axis_signs(coords)

    diffs = coords[:, None, :] - coords[None, :, :]
    emb = np.sqrt((diffs**2).sum(axis=2))
    iu = np.triu_indices(n, k=1)
    stress = float(np.sqrt(((dist[iu] - emb[iu]) ** 2).sum()))
    return Embedding2D(
        frame_ids=t.frame_ids,
        coords=coords,
        stress=stress,
        degenerate=degenerate,
        source=source,
    )


@dataclass(frozen=True)
class Placement:
    frame_id: str
    x: float  # frame center, page pixels
    y: float
    rotation: float  # degrees counterclockwise


@dataclass(frozen=True, eq=False)
class LayoutSheet:
    style: str  # "linear" | "radial"
    placements: tuple[Placement, ...]
    page_w: int
    page_h: int


def _frame_image(frames: FrameCollection, fid: str) -> Image.Image:
    rec = frames.get(fid)
    if rec.pixels is None:
        raise ContractError(f"frame {fid!r} has no pixels to render")
    arr = np.clip(np.rint(rec.pixels * 255.0), 0, 255).astype(np.uint8)
    return Image.fromarray(arr, "RGB")


def plan_layout(
    seq: SequenceResult, frames: FrameCollection, style: str, gutter: int = GUTTER_PX
) -> LayoutSheet:
    if style not in ("linear", "radial"):
        raise ContractError(f"unknown layout style {style!r}")
    if not seq.order:
        raise ContractError("cannot lay out an empty sequence")
    sizes = []
    for fid in seq.order:
        rec = frames.get(fid)
        if rec.pixels is None:
            raise ContractError(f"frame {fid!r} has no pixels to render")
        h, w = rec.pixels.shape[:2]
        sizes.append((w, h))
    k = len(sizes)

    if style == "linear":
        page_w = sum(w for w, _ in sizes) + (k - 1) * gutter
        page_h = max(h for _, h in sizes)
        placements = []
        x = 0.0
        for fid, (w, h) in zip(seq.order, sizes):
            placements.append(Placement(fid, x + w / 2.0, page_h / 2.0, 0.0))
            x += w + gutter
        return LayoutSheet("linear", tuple(placements), int(page_w), int(page_h))

    max_w = max(w for w, _ in sizes)
    radius = (k * max_w) / (2.0 * math.pi)
    max_diag = max(math.hypot(w, h) for w, h in sizes)
    side = int(math.ceil(2.0 * radius + max_diag)) + 2 * gutter
    cx = cy = side / 2.0
    placements = []
    for i, fid in enumerate(seq.order):
        theta = 2.0 * math.pi * i / k  # counterclockwise from +x
        x = cx + radius * math.cos(theta)
        y = cy - radius * math.sin(theta)  # page y grows downward
        placements.append(Placement(fid, x, y, math.degrees(theta) + 90.0))
    return LayoutSheet("radial", tuple(placements), side, side)


def render_layout(
    seq: SequenceResult,
    frames: FrameCollection,
    style: str,
    out_path,
    gutter: int = GUTTER_PX,
) -> LayoutSheet:
    """Rasterize the sheet to a single composite PNG at out_path."""
    sheet = plan_layout(seq, frames, style, gutter=gutter)
    page = Image.new("RGBA", (sheet.page_w, sheet.page_h), (255, 255, 255, 255))
    for p in sheet.placements:
        img = _frame_image(frames, p.frame_id).convert("RGBA")
        if p.rotation:
            img = img.rotate(p.rotation, expand=True, resample=Image.BICUBIC)
        page.alpha_composite(
            img,
            (int(round(p.x - img.width / 2.0)), int(round(p.y - img.height / 2.0))),
        )
    page.convert("RGB").save(out_path, format="PNG")
    return sheet
