// Orchestrates the console: every user gesture becomes one or more service
// calls, and the state only ever holds what the service answered. The view
// layer subscribes through ConsoleEvents and draws from the state; tests
// subscribe with a recorder and never need a DOM.

import {
  ApiClient,
  type CorrelationInfo,
  type DatasetInfo,
  type PickHit,
  type RasterResponse,
  type SelectionResponse,
} from "./api.js";
import { ViewState, type Highlight, type ZoomFrame } from "./state.js";

export interface PopupRow {
  hit: PickHit;
  /** line color if the stream is currently highlighted, else null */
  color: string | null;
}

export interface ConsoleEvents {
  mainViewChanged(): void;
  matrixChanged(ppmBytes: Uint8Array | null, info: CorrelationInfo | null): void;
  popup(rows: PopupRow[], at: { x: number; y: number }): void;
  error(message: string): void;
  prompt(message: string): void;
}

export interface PixelRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export const THRESHOLD_DEBOUNCE_MS = 150;
export const MIN_ZOOM_SIDE_PX = 2;

/** Trailing-edge debounce; rapid schedules collapse into one run and every
 * caller receives that run's result. */
export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private resolvers: Array<(v: unknown) => void> = [];
  private rejecters: Array<(e: unknown) => void> = [];

  constructor(readonly delayMs: number) {}

  schedule<T>(fn: () => Promise<T>): Promise<T> {
    if (this.timer !== null) clearTimeout(this.timer);
    return new Promise<T>((resolve, reject) => {
      this.resolvers.push(resolve as (v: unknown) => void);
      this.rejecters.push(reject);
      this.timer = setTimeout(() => {
        this.timer = null;
        const res = this.resolvers.splice(0);
        const rej = this.rejecters.splice(0);
        fn().then(
          (v) => res.forEach((r) => r(v)),
          (e) => rej.forEach((r) => r(e)),
        );
      }, this.delayMs);
    });
  }
}

export interface ReplayReport {
  checked: number;
  mismatches: Array<{ selectionId: string; displayed: number[]; replayed: number[] }>;
}

export class Controller {
  readonly state = new ViewState();
  dataset: DatasetInfo | null = null;
  matrixInfo: CorrelationInfo | null = null;

  private thresholdDebounce: Debouncer;
  private thresholdSelectionId: string | null = null;
  private canvasW: number;
  private canvasH: number;

  constructor(
    readonly api: ApiClient,
    private events: ConsoleEvents,
    opts: { canvasWidth?: number; canvasHeight?: number; debounceMs?: number } = {},
  ) {
    this.canvasW = opts.canvasWidth ?? 1024;
    this.canvasH = opts.canvasHeight ?? 512;
    this.thresholdDebounce = new Debouncer(opts.debounceMs ?? THRESHOLD_DEBOUNCE_MS);
  }

  private fail(e: unknown): null {
    this.events.error(e instanceof Error ? e.message : String(e));
    return null;
  }

  private frameRasterParams() {
    const vp = this.state.frame.viewport;
    return {
      width: vp.widthPx,
      height: vp.heightPx,
      t0: vp.t0,
      t1: vp.t1,
      v_lo: vp.vLo,
      v_hi: vp.vHi,
    };
  }

  private toFrame(resp: RasterResponse, widthPx: number, heightPx: number): ZoomFrame {
    return {
      viewport: {
        widthPx,
        heightPx,
        t0: resp.t0,
        t1: resp.t1,
        vLo: resp.vLo,
        vHi: resp.vHi,
        normUsed: resp.normUsed,
        level: resp.level,
      },
      rasterBytes: resp.bytes,
    };
  }

  async loadDataset(body: Parameters<ApiClient["createDataset"]>[0]): Promise<DatasetInfo | null> {
    try {
      const info = await this.api.createDataset(body);
      // the root view is the dataset's full extent: no explicit bounds
      const raster = await this.api.raster(info.id, {
        width: this.canvasW,
        height: this.canvasH,
      });
      this.dataset = info;
      this.state.datasetId = info.id;
      this.state.highlights.clear();
      this.state.activeSelectionId = null;
      this.state.matrixId = null;
      this.state.brushRange = null;
      this.state.setRoot(this.toFrame(raster, this.canvasW, this.canvasH));
      this.state.annotations = await this.api.annotations(info.id);
      this.matrixInfo = null;
      this.events.matrixChanged(null, null);
      this.events.mainViewChanged();
      return info;
    } catch (e) {
      return this.fail(e);
    }
  }

  private async installHighlight(sel: SelectionResponse, logIndex: number): Promise<Highlight> {
    const overlay = await this.api.overlay(
      this.state.datasetId!,
      sel.id,
      this.frameRasterParams(),
    );
    const h = this.state.setHighlight({
      selectionId: sel.id,
      streamIds: sel.stream_ids,
      logIndex,
      origin: sel.origin,
      overlay,
    });
    this.state.activeSelectionId = sel.id;
    return h;
  }

  /** Debounced; the ln display value is purely cosmetic, the selection set
   * itself always comes back from the service. */
  setThreshold(raw: number): Promise<Highlight | null> {
    return this.thresholdDebounce.schedule(async () => {
      try {
        const logIndex = this.api.log.length;
        const sel = await this.api.createSelection(this.state.datasetId!, {
          kind: "threshold",
          threshold: raw,
        });
        if (this.thresholdSelectionId !== null) {
          this.state.dropHighlight(this.thresholdSelectionId);
        }
        this.thresholdSelectionId = sel.id;
        const h = await this.installHighlight(sel, logIndex);
        this.events.mainViewChanged();
        return h;
      } catch (e) {
        return this.fail(e);
      }
    });
  }

  async pickAt(x: number, y: number, tolerance = 2): Promise<PopupRow[] | null> {
    try {
      const vp = this.state.frame.viewport;
      const hits = await this.api.pick(this.state.datasetId!, {
        x,
        y,
        tolerance,
        viewport: {
          width: vp.widthPx,
          height: vp.heightPx,
          t0: vp.t0,
          t1: vp.t1,
          v_lo: vp.vLo,
          v_hi: vp.vHi,
        },
      });
      const rows = hits.map((hit) => ({ hit, color: this.state.streamColor(hit.stream_id) }));
      this.events.popup(rows, { x, y });
      return rows;
    } catch (e) {
      return this.fail(e);
    }
  }

  private exactPattern(hit: PickHit): Record<string, string> {
    // one picked stream -> the pattern that matches exactly its key
    const schema = this.dataset!.key_schema;
    const b = String(hit.field_b);
    if (schema === "sip-dport") return { sip: hit.field_a, dport: b };
    if (schema === "dip-dport") return { dip: hit.field_a, dport: b };
    return { sip: hit.field_a, dip: b };
  }

  /** Popup actions "add / exclusive / flip": fold the picked streams into
   * one selection server-side, then combine with the active one. */
  async combinePicked(hits: PickHit[], mode: "add" | "exclusive" | "flip"): Promise<Highlight | null> {
    if (hits.length === 0) return null;
    try {
      const ds = this.state.datasetId!;
      let picked = await this.api.createSelection(ds, {
        kind: "pattern",
        pattern: this.exactPattern(hits[0]),
      });
      for (const hit of hits.slice(1)) {
        const next = await this.api.createSelection(ds, {
          kind: "pattern",
          pattern: this.exactPattern(hit),
        });
        picked = await this.api.createSelection(ds, {
          kind: "combine",
          combine: { base_id: picked.id, incoming_id: next.id, mode: "add" },
        });
      }
      let final = picked;
      let logIndex = this.api.log.length - 1;
      if (this.state.activeSelectionId !== null) {
        logIndex = this.api.log.length;
        final = await this.api.createSelection(ds, {
          kind: "combine",
          combine: {
            base_id: this.state.activeSelectionId,
            incoming_id: picked.id,
            mode,
          },
        });
      }
      const h = await this.installHighlight(final, logIndex);
      this.events.mainViewChanged();
      return h;
    } catch (e) {
      return this.fail(e);
    }
  }

  async selectAllWithSip(sip: string): Promise<Highlight | null> {
    return this.patternHighlight({ sip });
  }

  async selectAllWithDport(dport: string | number): Promise<Highlight | null> {
    return this.patternHighlight({ dport: String(dport) });
  }

  async patternHighlight(pattern: Record<string, string>): Promise<Highlight | null> {
    try {
      const logIndex = this.api.log.length;
      const sel = await this.api.createSelection(this.state.datasetId!, {
        kind: "pattern",
        pattern,
      });
      const h = await this.installHighlight(sel, logIndex);
      this.events.mainViewChanged();
      return h;
    } catch (e) {
      return this.fail(e);
    }
  }

  /** Rubber-band zoom. The rectangle is in pixels of the current view;
   * anything thinner than MIN_ZOOM_SIDE_PX is ignored as a slipped click. */
  async zoomTo(rect: PixelRect): Promise<ZoomFrame | null> {
    const w = Math.abs(rect.x1 - rect.x0);
    const hgt = Math.abs(rect.y1 - rect.y0);
    if (w < MIN_ZOOM_SIDE_PX || hgt < MIN_ZOOM_SIDE_PX) return null;
    const vp = this.state.frame.viewport;
    const tAt = (x: number) => vp.t0 + (x / vp.widthPx) * (vp.t1 - vp.t0);
    const vAt = (y: number) => vp.vHi - (y / vp.heightPx) * (vp.vHi - vp.vLo);
    return this.zoomToRanges(
      Math.min(tAt(rect.x0), tAt(rect.x1)),
      Math.max(tAt(rect.x0), tAt(rect.x1)),
      Math.min(vAt(rect.y0), vAt(rect.y1)),
      Math.max(vAt(rect.y0), vAt(rect.y1)),
    );
  }

  /** Slider-driven zoom: explicit data-space ranges. */
  async zoomToRanges(tLo: number, tHi: number, vLo: number, vHi: number): Promise<ZoomFrame | null> {
    try {
      const vp = this.state.frame.viewport;
      const logIndex = this.api.log.length;
      const sel = await this.api.createSelection(this.state.datasetId!, {
        kind: "zoom",
        zoom: {
          t_lo: tLo,
          t_hi: tHi,
          v_lo: vLo,
          v_hi: vHi,
          norm_used: vp.normUsed,
          viewport: {
            width: vp.widthPx,
            height: vp.heightPx,
            t0: vp.t0,
            t1: vp.t1,
            v_lo: vp.vLo,
            v_hi: vp.vHi,
          },
        },
      });
      const child = sel.child_viewport!;
      // the child view inherits the parent's normalization so shared pixels
      // keep their brightness
      const raster = await this.api.raster(this.state.datasetId!, {
        width: child.width,
        height: child.height,
        t0: child.t0,
        t1: child.t1,
        v_lo: child.v_lo,
        v_hi: child.v_hi,
        norm: child.norm ?? vp.normUsed,
      });
      const frame = this.toFrame(raster, child.width, child.height);
      this.state.pushFrame(frame);
      await this.installHighlight(sel, logIndex);
      this.events.mainViewChanged();
      return frame;
    } catch (e) {
      return this.fail(e);
    }
  }

  /** Pop the zoom stack; the parent raster comes from the cached bytes, so
   * the restore is pixel-identical with no request. */
  async backZoom(): Promise<ZoomFrame | null> {
    const frame = this.state.popFrame();
    if (frame === null) return null;
    try {
      for (const h of this.state.highlights.values()) {
        h.overlay = await this.api.overlay(this.state.datasetId!, h.selectionId, this.frameRasterParams());
      }
    } catch (e) {
      return this.fail(e);
    }
    this.events.mainViewChanged();
    return frame;
  }

  async computeMatrix(t0?: number, t1?: number, order?: string): Promise<CorrelationInfo | null> {
    try {
      const info = await this.api.correlation(this.state.datasetId!, { t0, t1, order });
      const ppm = await this.api.matrixRaster(info.id, 256, order);
      this.state.matrixId = info.id;
      this.state.brushRange = null;
      this.matrixInfo = info;
      this.events.matrixChanged(ppm, info);
      return info;
    } catch (e) {
      return this.fail(e);
    }
  }

  async brushMatrix(rowLo: number, rowHi: number): Promise<Highlight | null> {
    if (this.state.matrixId === null) {
      this.events.prompt("compute a correlation matrix first");
      return null;
    }
    try {
      const logIndex = this.api.log.length;
      const sel = await this.api.brush(this.state.matrixId, rowLo, rowHi);
      this.state.brushRange = [rowLo, rowHi];
      const h = await this.installHighlight(sel, logIndex);
      this.events.mainViewChanged();
      return h;
    } catch (e) {
      return this.fail(e);
    }
  }

  async addAnnotation(t: number, v: number, text: string): Promise<boolean> {
    try {
      const item = await this.api.annotate(this.state.datasetId!, t, v, text);
      this.state.annotations.push(item);
      this.events.mainViewChanged();
      return true;
    } catch (e) {
      this.fail(e);
      return false;
    }
  }

  /** Re-issue, for every displayed highlight, the exact logged request that
   * produced it, and compare the answer with what is on screen. The console
   * computes nothing itself, so every comparison must come back equal. */
  async replayDisplayedSets(): Promise<ReplayReport> {
    const report: ReplayReport = { checked: 0, mismatches: [] };
    for (const h of this.state.highlights.values()) {
      const entry = this.api.log[h.logIndex];
      const replayed = (await this.api.replay(entry)) as { stream_ids: number[] };
      report.checked++;
      const a = [...h.streamIds].sort((x, y) => x - y);
      const b = [...replayed.stream_ids].sort((x, y) => x - y);
      if (a.length !== b.length || a.some((v, i) => v !== b[i])) {
        report.mismatches.push({ selectionId: h.selectionId, displayed: a, replayed: b });
      }
    }
    return report;
  }
}
