// Client state: the engine snapshot mirrored from the API, an ordered
// key-frame selection, and the last sequencing result. Every piece of
// graph data here is a verbatim copy of a server response; a refresh
// rebuilds it all, so reloading against a restarted engine just works.

import {
  ApiError,
  EmbeddingPayload,
  EngineClient,
  FrameInfo,
  MstPayload,
  OutlierReport,
  SequenceRequest,
  SequenceResponse,
} from "./api.js";

export type Listener = () => void;

export class StudioState {
  readonly api: EngineClient;

  frames: FrameInfo[] = [];
  mst: MstPayload | null = null;
  embedding: EmbeddingPayload | null = null;
  outliers: OutlierReport | null = null;

  // ordered: clicks append, a second click on the same frame removes
  selection: string[] = [];
  sequence: SequenceResponse | null = null;
  error: string | null = null;
  playhead = 0;
  loading = false;

  private requestToken = 0;
  private listeners: Listener[] = [];

  constructor(api: EngineClient) {
    this.api = api;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  async refresh(): Promise<void> {
    this.loading = true;
    this.emit();
    try {
      const [frames, mst, embedding, outliers] = await Promise.all([
        this.api.frames(),
        this.api.mst(),
        this.api.embedding(),
        this.api.outliers(),
      ]);
      this.frames = frames;
      this.mst = mst;
      this.embedding = embedding;
      this.outliers = outliers;
      // drop selected frames that no longer survive pruning
      this.selection = this.selection.filter((id) => this.isSelectable(id));
      this.error = null;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.loading = false;
      this.emit();
    }
  }

  outlierIds(): Set<string> {
    return new Set(this.frames.filter((f) => f.outlier).map((f) => f.id));
  }

  isSelectable(id: string): boolean {
    const f = this.frames.find((fr) => fr.id === id);
    return f !== undefined && !f.outlier;
  }

  toggleFrame(id: string): void {
    if (!this.isSelectable(id)) return;
    const at = this.selection.indexOf(id);
    if (at >= 0) {
      this.selection = [
        ...this.selection.slice(0, at),
        ...this.selection.slice(at + 1),
      ];
    } else {
      this.selection = [...this.selection, id];
    }
    this.emit();
  }

  clearSelection(): void {
    this.selection = [];
    this.emit();
  }

  get canSequence(): boolean {
    return this.selection.length >= 2;
  }

  /** POST the current key-frame selection and adopt the response. */
  requestKeyframeSequence(): Promise<void> {
    return this.runSequence({ kind: "keyframe", keyframes: [...this.selection] });
  }

  requestPath(): Promise<void> {
    return this.runSequence({ kind: "path" });
  }

  requestCycle(): Promise<void> {
    return this.runSequence({ kind: "cycle" });
  }

  private async runSequence(req: SequenceRequest): Promise<void> {
    const token = ++this.requestToken;
    try {
      const result = await this.api.sequence(req);
      if (token !== this.requestToken) return; // a newer request superseded this one
      this.sequence = result;
      this.playhead = 0;
      this.error = null;
    } catch (err) {
      if (token !== this.requestToken) return;
      // surface the failure inline; the selection stays as-is so the
      // user can adjust and retry
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.emit();
  }

  stepPlayhead(delta: number): void {
    if (!this.sequence || this.sequence.order.length === 0) return;
    const n = this.sequence.order.length;
    this.playhead = ((this.playhead + delta) % n + n) % n;
    this.emit();
  }
}
