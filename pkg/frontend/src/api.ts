// Typed client for the engine's HTTP API. All sequencing happens
// server-side; this module only moves JSON.

export interface FrameInfo {
  id: string;
  outlier: boolean;
}

export interface MstPayload {
  edges: [string, string, number][];
  total_weight: number;
}

export interface EmbeddingPayload {
  points: Record<string, [number, number]>;
  stress: number;
  degenerate: boolean;
  source: string;
}

export interface OutlierFit {
  alpha: number;
  beta: number;
  gamma: number;
  mu: number;
  loglik: number;
  T: number;
}

export interface OutlierReport {
  removed: string[];
  kept: string[];
  stats: Record<string, number>;
  fit: OutlierFit | null;
  note?: string;
}

export type SequenceKind = "path" | "cycle" | "keyframe";

export interface SequenceRequest {
  kind: SequenceKind;
  keyframes?: string[];
  start?: string;
  end?: string;
  no_prune?: boolean;
}

export interface SequenceResponse {
  kind: SequenceKind;
  order: string[];
  total_cost: number;
  solver: string;
  seed: number | null;
  constraints: Record<string, unknown>;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(message: string, status: number) {
    super(message);
    this.status = status;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class EngineClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (u, i) => fetch(u, i)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  frameUrl(id: string): string {
    return `${this.base}/frames/${encodeURIComponent(id)}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.base + path);
    return this.decode<T>(resp);
  }

  private async decode<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
      let message = `request failed (${resp.status})`;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // non-JSON error body; keep the status message
      }
      throw new ApiError(message, resp.status);
    }
    return (await resp.json()) as T;
  }

  frames(): Promise<FrameInfo[]> {
    return this.getJson("/api/frames");
  }

  mst(): Promise<MstPayload> {
    return this.getJson("/api/mst");
  }

  embedding(): Promise<EmbeddingPayload> {
    return this.getJson("/api/embedding");
  }

  outliers(): Promise<OutlierReport> {
    return this.getJson("/api/outliers");
  }

  async sequence(req: SequenceRequest): Promise<SequenceResponse> {
    const resp = await this.fetchFn(this.base + "/api/sequence", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    return this.decode<SequenceResponse>(resp);
  }
}
