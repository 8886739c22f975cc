// Typed client for the flowscope service. Every request is appended to a
// log before it is sent, and any logged request can be re-issued verbatim,
// so a displayed result can always be traced back to, and checked against,
// the exact call that produced it.

export interface RequestLogEntry {
  method: "GET" | "POST";
  path: string; // path plus query string, relative to the base URL
  body?: unknown;
}

export interface DatasetInfo {
  id: string;
  key_schema: string;
  bucket_width_s: number;
  stream_count: number;
  t0: number;
  t1: number;
  n_buckets: number;
  pyramid_depth: number;
  source: string;
}

export interface ViewportEcho {
  width: number;
  height: number;
  t0: number;
  t1: number;
  v_lo: number;
  v_hi: number;
  norm: number | null;
}

export interface SelectionResponse {
  id: string;
  origin: string;
  stream_ids: number[];
  keys: string[];
  child_viewport: ViewportEcho | null;
}

export interface PickHit {
  stream_id: number;
  key: string;
  field_a: string;
  field_b: string | number;
  bucket_index: number;
  t: number;
  value: number;
}

export interface OverlayItem {
  stream_id: number;
  key: string;
  color: [number, number, number];
  polylines: [number, number][][];
  circles: [number, number][];
}

export interface CorrelationInfo {
  id: string;
  n: number;
  stream_ids: number[];
  window_t0: number;
  window_t1: number;
  order: string;
  perm: number[];
  angles: number[];
  degenerate: boolean;
}

export interface AnnotationItem {
  id: number;
  t: number;
  v: number;
  text: string;
}

export interface RasterResponse {
  bytes: Uint8Array;
  normUsed: number;
  level: number;
  t0: number;
  t1: number;
  vLo: number;
  vHi: number;
}

export interface RasterParams {
  width: number;
  height: number;
  t0?: number;
  t1?: number;
  v_lo?: number;
  v_hi?: number;
  mode?: string;
  norm?: number;
  level?: number;
}

function query(params: Record<string, number | string | undefined>): string {
  const q = new URLSearchParams();
  for (const [k, v] of Object.entries(params)) {
    if (v !== undefined) q.set(k, String(v));
  }
  const s = q.toString();
  return s ? `?${s}` : "";
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  readonly log: RequestLogEntry[] = [];

  constructor(
    readonly baseUrl: string,
    private fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async send(entry: RequestLogEntry): Promise<Response> {
    this.log.push(entry);
    const resp = await this.fetchFn(this.baseUrl + entry.path, {
      method: entry.method,
      headers: entry.body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: entry.body !== undefined ? JSON.stringify(entry.body) : undefined,
    });
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const parsed = await resp.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
        else detail = JSON.stringify(parsed);
      } catch {
        // body was not JSON; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  private async json<T>(entry: RequestLogEntry): Promise<T> {
    const resp = await this.send(entry);
    return (await resp.json()) as T;
  }

  /** Re-issue a logged request and return its parsed JSON body. */
  async replay(entry: RequestLogEntry): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + entry.path, {
      method: entry.method,
      headers: entry.body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: entry.body !== undefined ? JSON.stringify(entry.body) : undefined,
    });
    if (!resp.ok) throw new ApiError(resp.status, `replay failed: ${resp.status}`);
    return resp.json();
  }

  async health(): Promise<{ status: string }> {
    return this.json({ method: "GET", path: "/health" });
  }

  async createDataset(body: {
    scenario?: string;
    csv_text?: string;
    path?: string;
    seed?: number;
    key_schema?: string;
    bucket_width_s?: number;
  }): Promise<DatasetInfo> {
    return this.json({ method: "POST", path: "/datasets", body });
  }

  async dataset(id: string): Promise<DatasetInfo> {
    return this.json({ method: "GET", path: `/datasets/${id}` });
  }

  async raster(datasetId: string, params: RasterParams): Promise<RasterResponse> {
    const entry: RequestLogEntry = {
      method: "GET",
      path: `/datasets/${datasetId}/raster${query({ ...params })}`,
    };
    const resp = await this.send(entry);
    const bytes = new Uint8Array(await resp.arrayBuffer());
    return {
      bytes,
      normUsed: Number(resp.headers.get("x-norm-used")),
      level: Number(resp.headers.get("x-level")),
      t0: Number(resp.headers.get("x-t0")),
      t1: Number(resp.headers.get("x-t1")),
      vLo: Number(resp.headers.get("x-v-lo")),
      vHi: Number(resp.headers.get("x-v-hi")),
    };
  }

  async pick(
    datasetId: string,
    body: {
      x: number;
      y: number;
      tolerance: number;
      viewport: Partial<ViewportEcho> & { width: number; height: number };
    },
  ): Promise<PickHit[]> {
    const out = await this.json<{ hits: PickHit[] }>({
      method: "POST",
      path: `/datasets/${datasetId}/pick`,
      body,
    });
    return out.hits;
  }

  async createSelection(datasetId: string, body: unknown): Promise<SelectionResponse> {
    return this.json({ method: "POST", path: `/datasets/${datasetId}/selections`, body });
  }

  async overlay(
    datasetId: string,
    selectionId: string,
    params: { width: number; height: number; t0?: number; t1?: number; v_lo?: number; v_hi?: number; level?: number },
  ): Promise<OverlayItem[]> {
    const out = await this.json<{ items: OverlayItem[] }>({
      method: "GET",
      path: `/datasets/${datasetId}/selections/${selectionId}/overlay${query({ ...params })}`,
    });
    return out.items;
  }

  async correlation(
    datasetId: string,
    body: { t0?: number; t1?: number; selection_id?: string; order?: string },
  ): Promise<CorrelationInfo> {
    return this.json({ method: "POST", path: `/datasets/${datasetId}/correlation`, body });
  }

  async matrixRaster(matrixId: string, size: number, order?: string): Promise<Uint8Array> {
    const resp = await this.send({
      method: "GET",
      path: `/correlation/${matrixId}/raster${query({ size, order })}`,
    });
    return new Uint8Array(await resp.arrayBuffer());
  }

  async brush(matrixId: string, rowLo: number, rowHi: number): Promise<SelectionResponse> {
    return this.json({
      method: "POST",
      path: `/correlation/${matrixId}/brush`,
      body: { row_lo: rowLo, row_hi: rowHi },
    });
  }

  async annotate(datasetId: string, t: number, v: number, text: string): Promise<AnnotationItem> {
    return this.json({
      method: "POST",
      path: `/datasets/${datasetId}/annotations`,
      body: { t, v, text },
    });
  }

  async annotations(datasetId: string): Promise<AnnotationItem[]> {
    return this.json({ method: "GET", path: `/datasets/${datasetId}/annotations` });
  }
}
