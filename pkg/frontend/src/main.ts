// Browser entry point: wires the state store to a canvas scatter view,
// a key-frame toolbar, and the filmstrip.

import { EngineClient } from "./api.js";
import {
  Affine,
  Dot,
  ViewState,
  applyAffine,
  composeView,
  filmstripIds,
  fitTransform,
  hitTest,
  scatterDots,
  showThumbnails,
  treeSegments,
} from "./render.js";
import { StudioState } from "./state.js";

// ?engine=http://127.0.0.1:8765 points the UI at a remote engine; the
// service replies with open CORS, so same-origin hosting is optional
const engineBase = new URLSearchParams(window.location.search).get("engine") ?? "";
const api = new EngineClient(engineBase);
const state = new StudioState(api);
const view: ViewState = { zoom: 1, panX: 0, panY: 0 };

const canvas = document.getElementById("manifold") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const strip = document.getElementById("strip")!;
const errorBox = document.getElementById("error")!;
const seqButton = document.getElementById("run-keyframes") as HTMLButtonElement;
const pathButton = document.getElementById("run-path") as HTMLButtonElement;
const cycleButton = document.getElementById("run-cycle") as HTMLButtonElement;
const clearButton = document.getElementById("clear") as HTMLButtonElement;
const selectionBox = document.getElementById("selection")!;
const costBox = document.getElementById("cost")!;

const thumbCache = new Map<string, HTMLImageElement>();
let dots: Dot[] = [];

function thumb(id: string): HTMLImageElement {
  let img = thumbCache.get(id);
  if (!img) {
    img = new Image();
    img.src = api.frameUrl(id);
    img.onload = draw;
    thumbCache.set(id, img);
  }
  return img;
}

function currentTransform(): Affine | null {
  if (!state.embedding) return null;
  const vp = { width: canvas.width, height: canvas.height, margin: 30 };
  return composeView(fitTransform(state.embedding.points, vp), view, vp);
}

function draw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const t = currentTransform();
  if (!t || !state.embedding || !state.mst) {
    dots = [];
    return;
  }

  ctx.strokeStyle = "#3a4051";
  ctx.lineWidth = 1;
  for (const seg of treeSegments(state.mst, state.embedding, t)) {
    ctx.beginPath();
    ctx.moveTo(seg.from[0], seg.from[1]);
    ctx.lineTo(seg.to[0], seg.to[1]);
    ctx.stroke();
  }

  // the active sequence drawn over the tree
  if (state.sequence) {
    ctx.strokeStyle = "#d9832f";
    ctx.lineWidth = 2;
    ctx.beginPath();
    let started = false;
    for (const id of state.sequence.order) {
      const p = state.embedding.points[id];
      if (!p) continue;
      const [x, y] = applyAffine(t, p);
      if (started) ctx.lineTo(x, y);
      else ctx.moveTo(x, y);
      started = true;
    }
    ctx.stroke();
  }

  dots = scatterDots(state.embedding, state.outlierIds(), state.selection, t);
  const useThumbs = showThumbnails(view);
  for (const d of dots) {
    if (useThumbs && !d.outlier) {
      const img = thumb(d.id);
      if (img.complete && img.naturalWidth > 0) {
        ctx.drawImage(img, d.x - 16, d.y - 16, 32, 32);
      }
    }
    ctx.beginPath();
    ctx.arc(d.x, d.y, d.selected ? 7 : 5, 0, Math.PI * 2);
    if (d.outlier) {
      // outliers stay visible but muted; they are not selectable
      ctx.fillStyle = "#6b2f2f";
      ctx.fill();
      ctx.strokeStyle = "#b55";
      ctx.setLineDash([2, 2]);
      ctx.stroke();
      ctx.setLineDash([]);
    } else {
      ctx.fillStyle = d.selected ? "#e8c547" : "#7aa2f7";
      ctx.fill();
    }
    if (d.selected) {
      ctx.fillStyle = "#111";
      ctx.font = "10px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(String(d.selectionRank + 1), d.x, d.y + 3);
    }
  }
}

function renderStrip(): void {
  strip.replaceChildren();
  for (const [i, id] of filmstripIds(state.sequence).entries()) {
    const cell = document.createElement("figure");
    cell.className = "cell" + (i === state.playhead ? " active" : "");
    const img = document.createElement("img");
    img.src = api.frameUrl(id);
    img.alt = id;
    const cap = document.createElement("figcaption");
    cap.textContent = id;
    cell.append(img, cap);
    cell.addEventListener("click", () => {
      state.playhead = i;
      render();
    });
    strip.append(cell);
  }
}

function render(): void {
  errorBox.textContent = state.error ?? "";
  errorBox.style.display = state.error ? "block" : "none";
  seqButton.disabled = !state.canSequence;
  selectionBox.textContent = state.selection.length
    ? "key frames: " + state.selection.join(" → ")
    : "click frames to pick key frames";
  costBox.textContent = state.sequence
    ? `${state.sequence.kind} cost ${state.sequence.total_cost.toFixed(4)} (${state.sequence.solver})`
    : "";
  draw();
  renderStrip();
}

canvas.addEventListener("click", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const hit = hitTest(dots, ev.clientX - rect.left, ev.clientY - rect.top);
  if (hit) state.toggleFrame(hit.id);
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
  view.zoom = Math.min(40, Math.max(0.2, view.zoom * factor));
  draw();
});

let dragging: { x: number; y: number } | null = null;
canvas.addEventListener("mousedown", (ev) => {
  dragging = { x: ev.clientX - view.panX, y: ev.clientY - view.panY };
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  view.panX = ev.clientX - dragging.x;
  view.panY = ev.clientY - dragging.y;
  draw();
});
window.addEventListener("mouseup", () => {
  dragging = null;
});

window.addEventListener("keydown", (ev) => {
  if (ev.key === "ArrowRight") state.stepPlayhead(1);
  if (ev.key === "ArrowLeft") state.stepPlayhead(-1);
});

seqButton.addEventListener("click", () => void state.requestKeyframeSequence());
pathButton.addEventListener("click", () => void state.requestPath());
cycleButton.addEventListener("click", () => void state.requestCycle());
clearButton.addEventListener("click", () => state.clearSelection());
document.getElementById("reload")!.addEventListener("click", () => void state.refresh());

state.subscribe(render);
void state.refresh();
