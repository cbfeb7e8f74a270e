// Scene geometry and drawing. The scene builders are pure so they can
// be tested without a DOM; main.ts feeds them to a canvas.

import { EmbeddingPayload, MstPayload, SequenceResponse } from "./api.js";

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

// screen = [sx * x + tx, sy * y + ty]; sy is negative so the
// embedding's y-up becomes the canvas's y-down
export interface Affine {
  sx: number;
  sy: number;
  tx: number;
  ty: number;
}

export interface ViewState {
  zoom: number;
  panX: number;
  panY: number;
}

export interface Dot {
  id: string;
  x: number;
  y: number;
  outlier: boolean;
  selected: boolean;
  selectionRank: number; // 0-based position in the selection, -1 if none
}

export interface EdgeSeg {
  from: [number, number];
  to: [number, number];
  weight: number;
}

export const THUMBNAIL_ZOOM_THRESHOLD = 2.5;

export function fitTransform(
  points: Record<string, [number, number]>,
  vp: Viewport,
): Affine {
  const ids = Object.keys(points);
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const id of ids) {
    const p = points[id]!;
    minX = Math.min(minX, p[0]);
    maxX = Math.max(maxX, p[0]);
    minY = Math.min(minY, p[1]);
    maxY = Math.max(maxY, p[1]);
  }
  if (ids.length === 0) return { sx: 1, sy: -1, tx: 0, ty: vp.height };

  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const innerW = vp.width - 2 * vp.margin;
  const innerH = vp.height - 2 * vp.margin;
  // uniform scale so the layout is not sheared; degenerate spans
  // (single point, all-collinear axis) fall back to scale 1
  const span = Math.max(spanX, spanY);
  const scale = span > 0 ? Math.min(innerW / spanX || Infinity, innerH / spanY || Infinity) : 1;
  const s = Number.isFinite(scale) ? scale : innerW / span;

  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return {
    sx: s,
    sy: -s,
    tx: vp.width / 2 - s * cx,
    ty: vp.height / 2 + s * cy,
  };
}

export function composeView(fit: Affine, view: ViewState, vp: Viewport): Affine {
  // zoom about the viewport center, then pan
  const z = view.zoom;
  return {
    sx: fit.sx * z,
    sy: fit.sy * z,
    tx: (fit.tx - vp.width / 2) * z + vp.width / 2 + view.panX,
    ty: (fit.ty - vp.height / 2) * z + vp.height / 2 + view.panY,
  };
}

export function applyAffine(t: Affine, p: [number, number]): [number, number] {
  return [t.sx * p[0] + t.tx, t.sy * p[1] + t.ty];
}

export function invertAffine(t: Affine, screen: [number, number]): [number, number] {
  return [(screen[0] - t.tx) / t.sx, (screen[1] - t.ty) / t.sy];
}

export function showThumbnails(view: ViewState): boolean {
  return view.zoom >= THUMBNAIL_ZOOM_THRESHOLD;
}

/** Project every embedded frame to screen space with selection flags. */
export function scatterDots(
  embedding: EmbeddingPayload,
  outliers: Set<string>,
  selection: string[],
  t: Affine,
): Dot[] {
  return Object.entries(embedding.points).map(([id, p]) => {
    const [x, y] = applyAffine(t, p);
    const rank = selection.indexOf(id);
    return {
      id,
      x,
      y,
      outlier: outliers.has(id),
      selected: rank >= 0,
      selectionRank: rank,
    };
  });
}

/** Tree edges as screen segments; edges to unembedded frames are dropped. */
export function treeSegments(
  mst: MstPayload,
  embedding: EmbeddingPayload,
  t: Affine,
): EdgeSeg[] {
  const segs: EdgeSeg[] = [];
  for (const [u, v, w] of mst.edges) {
    const a = embedding.points[u];
    const b = embedding.points[v];
    if (!a || !b) continue;
    segs.push({ from: applyAffine(t, a), to: applyAffine(t, b), weight: w });
  }
  return segs;
}

/**
 * Frame ids for the filmstrip, exactly as the engine ordered them.
 * The client never reorders: sequencing is the server's job.
 */
export function filmstripIds(seq: SequenceResponse | null): string[] {
  return seq ? [...seq.order] : [];
}

export function hitTest(dots: Dot[], x: number, y: number, radius = 8): Dot | null {
  let best: Dot | null = null;
  let bestD = radius * radius;
  for (const d of dots) {
    const dx = d.x - x;
    const dy = d.y - y;
    const dist = dx * dx + dy * dy;
    if (dist <= bestD) {
      best = d;
      bestD = dist;
    }
  }
  return best;
}
