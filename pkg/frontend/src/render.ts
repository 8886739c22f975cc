// Canvas drawing. Inputs are already pixel-space: the density raster is a
// decoded PGM, overlay polylines and circles arrive from the service in the
// coordinates of the viewport they were requested for.

import type { AnnotationItem, OverlayItem } from "./api.js";
import type { ViewportState } from "./state.js";
import { parsePgm, parsePpm } from "./netpbm.js";

export function drawDensity(ctx: CanvasRenderingContext2D, pgmBytes: Uint8Array): void {
  const img = parsePgm(pgmBytes);
  ctx.canvas.width = img.width;
  ctx.canvas.height = img.height;
  const data = ctx.createImageData(img.width, img.height);
  for (let i = 0; i < img.pixels.length; i++) {
    const v = img.pixels[i];
    data.data[i * 4] = v;
    data.data[i * 4 + 1] = v;
    data.data[i * 4 + 2] = v;
    data.data[i * 4 + 3] = 255;
  }
  ctx.putImageData(data, 0, 0);
}

export function drawOverlay(ctx: CanvasRenderingContext2D, items: OverlayItem[]): void {
  for (const item of items) {
    const [r, g, b] = item.color;
    ctx.strokeStyle = `rgb(${r},${g},${b})`;
    ctx.fillStyle = ctx.strokeStyle;
    ctx.lineWidth = 1.5;
    for (const line of item.polylines) {
      ctx.beginPath();
      line.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x + 0.5, y + 0.5) : ctx.lineTo(x + 0.5, y + 0.5)));
      ctx.stroke();
    }
    for (const [x, y] of item.circles) {
      ctx.beginPath();
      ctx.arc(x + 0.5, y + 0.5, 3, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

export function drawAnnotations(
  ctx: CanvasRenderingContext2D,
  vp: ViewportState,
  items: AnnotationItem[],
): void {
  ctx.fillStyle = "#ff2222";
  for (const a of items) {
    if (a.t < vp.t0 || a.t > vp.t1 || a.v < vp.vLo || a.v > vp.vHi) continue;
    const x = Math.min(((a.t - vp.t0) / (vp.t1 - vp.t0)) * vp.widthPx, vp.widthPx - 1);
    const y = ((vp.vHi - a.v) / (vp.vHi - vp.vLo)) * vp.heightPx;
    ctx.beginPath();
    ctx.arc(x, y, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function drawMatrix(ctx: CanvasRenderingContext2D, ppmBytes: Uint8Array): void {
  const img = parsePpm(ppmBytes);
  ctx.canvas.width = img.width;
  ctx.canvas.height = img.height;
  const data = ctx.createImageData(img.width, img.height);
  for (let i = 0; i < img.width * img.height; i++) {
    data.data[i * 4] = img.pixels[i * 3];
    data.data[i * 4 + 1] = img.pixels[i * 3 + 1];
    data.data[i * 4 + 2] = img.pixels[i * 3 + 2];
    data.data[i * 4 + 3] = 255;
  }
  ctx.putImageData(data, 0, 0);
}

/** Shade the brushed row band on top of an already drawn matrix. */
export function drawBrushBand(
  ctx: CanvasRenderingContext2D,
  n: number,
  rowLo: number,
  rowHi: number,
): void {
  const size = ctx.canvas.height;
  const y0 = Math.floor((rowLo * size) / n);
  const y1 = Math.max(Math.floor(((rowHi + 1) * size) / n), y0 + 1);
  ctx.fillStyle = "rgba(255, 255, 255, 0.25)";
  ctx.fillRect(0, y0, ctx.canvas.width, y1 - y0);
}
