// View state shared by the UI and its tests: the zoom stack, highlight
// bookkeeping, and deep-link round-tripping. None of the numbers in here
// are computed from flow data; they all arrive from service responses.

import type { AnnotationItem, OverlayItem } from "./api.js";

export interface ViewportState {
  widthPx: number;
  heightPx: number;
  t0: number;
  t1: number;
  vLo: number;
  vHi: number;
  /** normalization constant this view was rendered with (parent-inherited
   * for zoomed children) */
  normUsed: number;
  level: number;
}

export interface ZoomFrame {
  viewport: ViewportState;
  /** raw PGM bytes as fetched, kept so popping restores the parent
   * pixel-identically without another request */
  rasterBytes: Uint8Array;
}

export interface Highlight {
  selectionId: string;
  streamIds: number[];
  color: string;
  /** index into ApiClient.log of the request whose response this set is */
  logIndex: number;
  origin: string;
  overlay: OverlayItem[];
}

export const HIGHLIGHT_PALETTE = [
  "#ffd24d",
  "#4dc3ff",
  "#ff7a66",
  "#7dff8a",
  "#d98aff",
  "#ffb347",
  "#66fff2",
  "#ff66c4",
];

const NEST_EPS = 1e-9;

export class ViewState {
  datasetId: string | null = null;
  frames: ZoomFrame[] = [];
  highlights = new Map<string, Highlight>();
  activeSelectionId: string | null = null;
  matrixId: string | null = null;
  brushRange: [number, number] | null = null;
  annotations: AnnotationItem[] = [];

  private colorBySelection = new Map<string, string>();
  private nextColor = 0;

  get frame(): ZoomFrame {
    if (this.frames.length === 0) throw new Error("no view loaded");
    return this.frames[this.frames.length - 1];
  }

  get depth(): number {
    return this.frames.length;
  }

  setRoot(frame: ZoomFrame): void {
    this.frames = [frame];
  }

  pushFrame(frame: ZoomFrame): void {
    const parent = this.frame.viewport;
    const child = frame.viewport;
    const nested =
      child.t0 >= parent.t0 - NEST_EPS &&
      child.t1 <= parent.t1 + NEST_EPS &&
      child.vLo >= parent.vLo - NEST_EPS &&
      child.vHi <= parent.vHi + NEST_EPS;
    if (!nested) throw new Error("zoomed view must nest inside its parent");
    this.frames.push(frame);
  }

  popFrame(): ZoomFrame | null {
    if (this.frames.length <= 1) return null; // root stays
    this.frames.pop();
    return this.frame;
  }

  /** Stable highlight color: a selection id keeps its color for as long as
   * the state object lives, however often the view re-renders. */
  colorFor(selectionId: string): string {
    let c = this.colorBySelection.get(selectionId);
    if (c === undefined) {
      c = HIGHLIGHT_PALETTE[this.nextColor % HIGHLIGHT_PALETTE.length];
      this.nextColor++;
      this.colorBySelection.set(selectionId, c);
    }
    return c;
  }

  setHighlight(h: Omit<Highlight, "color">): Highlight {
    const full: Highlight = { ...h, color: this.colorFor(h.selectionId) };
    this.highlights.set(h.selectionId, full);
    return full;
  }

  dropHighlight(selectionId: string): void {
    this.highlights.delete(selectionId);
    if (this.activeSelectionId === selectionId) this.activeSelectionId = null;
  }

  /** Latest service-assigned line color for a stream, if it is currently
   * drawn in some highlight's overlay. */
  streamColor(streamId: number): string | null {
    for (const h of this.highlights.values()) {
      for (const item of h.overlay) {
        if (item.stream_id === streamId) {
          const [r, g, b] = item.color;
          return `rgb(${r},${g},${b})`;
        }
      }
    }
    return null;
  }
}

/** Everything needed to reconstruct a view, packed for the URL hash. */
export interface DeepLink {
  datasetId: string;
  viewport: Pick<ViewportState, "t0" | "t1" | "vLo" | "vHi" | "normUsed">;
  selectionIds: string[];
  matrixId: string | null;
  brushRange: [number, number] | null;
}

export function encodeLink(link: DeepLink): string {
  const q = new URLSearchParams();
  q.set("ds", link.datasetId);
  q.set("t0", String(link.viewport.t0));
  q.set("t1", String(link.viewport.t1));
  q.set("vlo", String(link.viewport.vLo));
  q.set("vhi", String(link.viewport.vHi));
  q.set("norm", String(link.viewport.normUsed));
  if (link.selectionIds.length > 0) q.set("sel", link.selectionIds.join(","));
  if (link.matrixId !== null) q.set("mx", link.matrixId);
  if (link.brushRange !== null) q.set("brush", `${link.brushRange[0]}-${link.brushRange[1]}`);
  return q.toString();
}

export function decodeLink(hash: string): DeepLink | null {
  const q = new URLSearchParams(hash.replace(/^#/, ""));
  const ds = q.get("ds");
  if (ds === null) return null;
  const num = (k: string): number => {
    const raw = q.get(k);
    const v = raw === null ? NaN : Number(raw);
    if (!Number.isFinite(v)) throw new Error(`deep link missing ${k}`);
    return v;
  };
  const brushRaw = q.get("brush");
  let brushRange: [number, number] | null = null;
  if (brushRaw !== null) {
    const m = brushRaw.match(/^(\d+)-(\d+)$/);
    if (!m) throw new Error("bad brush range in deep link");
    brushRange = [Number(m[1]), Number(m[2])];
  }
  return {
    datasetId: ds,
    viewport: {
      t0: num("t0"),
      t1: num("t1"),
      vLo: num("vlo"),
      vHi: num("vhi"),
      normUsed: num("norm"),
    },
    selectionIds: q.get("sel")?.split(",").filter((s) => s.length > 0) ?? [],
    matrixId: q.get("mx"),
    brushRange,
  };
}
