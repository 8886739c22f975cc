// DOM wiring for the console page. All analysis state lives in the
// Controller; this file only reads inputs, forwards gestures, and draws.

import { ApiClient, type CorrelationInfo, type PickHit } from "./api.js";
import { Controller, type PopupRow } from "./controller.js";
import { drawAnnotations, drawBrushBand, drawDensity, drawMatrix, drawOverlay } from "./render.js";
import { decodeLink, encodeLink } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const mainCanvas = $<HTMLCanvasElement>("main-view");
const matrixCanvas = $<HTMLCanvasElement>("matrix-view");
const banner = $<HTMLDivElement>("banner");
const popupEl = $<HTMLDivElement>("popup");
const thresholdSlider = $<HTMLInputElement>("threshold");
const thresholdLabel = $<HTMLSpanElement>("threshold-label");

const api = new ApiClient(
  (document.querySelector("#api-base") as HTMLInputElement | null)?.value ||
    `${location.protocol}//${location.hostname}:8000`,
);

let lastMatrix: { bytes: Uint8Array; info: CorrelationInfo } | null = null;

function redrawMain(): void {
  if (controller.state.frames.length === 0) return;
  const ctx = mainCanvas.getContext("2d")!;
  const frame = controller.state.frame;
  drawDensity(ctx, frame.rasterBytes);
  for (const h of controller.state.highlights.values()) {
    drawOverlay(ctx, h.overlay);
  }
  drawAnnotations(ctx, frame.viewport, controller.state.annotations);
  renderSelectionList();
  syncHash();
}

function redrawMatrix(): void {
  const ctx = matrixCanvas.getContext("2d")!;
  if (lastMatrix === null) {
    ctx.canvas.width = 256;
    ctx.canvas.height = 256;
    ctx.fillStyle = "#111";
    ctx.fillRect(0, 0, 256, 256);
    return;
  }
  drawMatrix(ctx, lastMatrix.bytes);
  const brush = controller.state.brushRange;
  if (brush !== null) drawBrushBand(ctx, lastMatrix.info.n, brush[0], brush[1]);
}

function renderSelectionList(): void {
  const list = $<HTMLUListElement>("selections");
  list.innerHTML = "";
  for (const h of controller.state.highlights.values()) {
    const li = document.createElement("li");
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.style.background = h.color;
    li.appendChild(chip);
    li.appendChild(
      document.createTextNode(
        ` ${h.origin} · ${h.streamIds.length} streams${h.selectionId === controller.state.activeSelectionId ? " (active)" : ""}`,
      ),
    );
    const drop = document.createElement("button");
    drop.textContent = "x";
    drop.onclick = () => {
      controller.state.dropHighlight(h.selectionId);
      redrawMain();
    };
    li.appendChild(drop);
    list.appendChild(li);
  }
}

function syncHash(): void {
  const st = controller.state;
  if (st.datasetId === null) return;
  const vp = st.frame.viewport;
  location.hash = encodeLink({
    datasetId: st.datasetId,
    viewport: { t0: vp.t0, t1: vp.t1, vLo: vp.vLo, vHi: vp.vHi, normUsed: vp.normUsed },
    selectionIds: [...st.highlights.keys()],
    matrixId: st.matrixId,
    brushRange: st.brushRange,
  });
}

function showPopup(rows: PopupRow[], at: { x: number; y: number }): void {
  popupEl.innerHTML = "";
  popupEl.style.display = "block";
  popupEl.style.left = `${mainCanvas.offsetLeft + at.x + 8}px`;
  popupEl.style.top = `${mainCanvas.offsetTop + at.y + 8}px`;
  if (rows.length === 0) {
    popupEl.textContent = "no streams within tolerance";
    return;
  }
  const table = document.createElement("table");
  for (const row of rows) {
    const tr = document.createElement("tr");
    const bar = document.createElement("td");
    const swatch = document.createElement("span");
    swatch.className = "chip";
    swatch.style.background = row.color ?? "#555";
    bar.appendChild(swatch);
    tr.appendChild(bar);
    const label = document.createElement("td");
    label.textContent = `${row.hit.key}  failures=${row.hit.value}  t=${row.hit.t}`;
    tr.appendChild(label);
    table.appendChild(tr);
  }
  popupEl.appendChild(table);

  const hits = rows.map((r) => r.hit);
  const actions: Array<[string, () => void]> = [
    ["add to selection", () => void controller.combinePicked(hits, "add")],
    ["exclusive", () => void controller.combinePicked(hits, "exclusive")],
    ["flip", () => void controller.combinePicked(hits, "flip")],
  ];
  const first: PickHit | undefined = hits[0];
  if (first !== undefined) {
    actions.push([
      `select all with SIP ${first.field_a}`,
      () => void controller.selectAllWithSip(first.field_a),
    ]);
    if (controller.dataset?.key_schema !== "sip-dip") {
      actions.push([
        `select all with Dport ${first.field_b}`,
        () => void controller.selectAllWithDport(first.field_b),
      ]);
    }
  }
  for (const [label, fn] of actions) {
    const b = document.createElement("button");
    b.textContent = label;
    b.onclick = () => {
      popupEl.style.display = "none";
      fn();
    };
    popupEl.appendChild(b);
  }
}

const controller = new Controller(api, {
  mainViewChanged: redrawMain,
  matrixChanged: (bytes, info) => {
    lastMatrix = bytes !== null && info !== null ? { bytes, info } : null;
    redrawMatrix();
  },
  popup: showPopup,
  error: (msg) => {
    banner.textContent = msg;
    banner.style.display = "block";
    setTimeout(() => (banner.style.display = "none"), 6000);
  },
  prompt: (msg) => {
    banner.textContent = msg;
    banner.style.display = "block";
    setTimeout(() => (banner.style.display = "none"), 4000);
  },
});

// dataset form
$<HTMLButtonElement>("load").onclick = async () => {
  const scenario = $<HTMLSelectElement>("scenario").value;
  const schema = $<HTMLSelectElement>("schema").value;
  const info = await controller.loadDataset({ scenario, key_schema: schema });
  if (info !== null) {
    thresholdSlider.max = String(Math.max(1000, 2 ** Math.ceil(Math.log2(1000))));
    $<HTMLSpanElement>("dataset-label").textContent =
      `${info.id}: ${info.stream_count} streams, ${info.n_buckets} buckets`;
  }
};

// threshold slider: show ln alongside the raw count, selection is debounced
thresholdSlider.oninput = () => {
  const raw = Number(thresholdSlider.value);
  const ln = raw >= 1 ? Math.log(raw).toFixed(2) : "-";
  thresholdLabel.textContent = `${raw} (ln ${ln})`;
  void controller.setThreshold(raw);
};

// click -> pick popup; drag -> zoom rectangle
let dragStart: { x: number; y: number } | null = null;
mainCanvas.onmousedown = (ev) => {
  dragStart = { x: ev.offsetX, y: ev.offsetY };
};
mainCanvas.onmouseup = (ev) => {
  const start = dragStart;
  dragStart = null;
  popupEl.style.display = "none";
  if (start === null) return;
  const dx = Math.abs(ev.offsetX - start.x);
  const dy = Math.abs(ev.offsetY - start.y);
  if (dx < 2 && dy < 2) {
    void controller.pickAt(ev.offsetX, ev.offsetY);
  } else {
    void controller.zoomTo({ x0: start.x, y0: start.y, x1: ev.offsetX, y1: ev.offsetY });
  }
};

$<HTMLButtonElement>("back").onclick = () => void controller.backZoom();

// correlation matrix over the current time window (or slider values)
$<HTMLButtonElement>("matrix").onclick = () => {
  const t0 = Number($<HTMLInputElement>("win-t0").value);
  const t1 = Number($<HTMLInputElement>("win-t1").value);
  const order = $<HTMLSelectElement>("order").value;
  void controller.computeMatrix(
    Number.isFinite(t0) && t0 >= 0 ? t0 : undefined,
    Number.isFinite(t1) && t1 > 0 ? t1 : undefined,
    order,
  );
};

// brush by dragging over the matrix, or via the two row inputs
let matrixDrag: number | null = null;
matrixCanvas.onmousedown = (ev) => (matrixDrag = ev.offsetY);
matrixCanvas.onmouseup = (ev) => {
  const startY = matrixDrag;
  matrixDrag = null;
  if (startY === null || lastMatrix === null) {
    if (lastMatrix === null) void controller.brushMatrix(0, 0);
    return;
  }
  const n = lastMatrix.info.n;
  const size = matrixCanvas.height;
  const rowOf = (y: number) => Math.max(0, Math.min(n - 1, Math.floor((y * n) / size)));
  const a = rowOf(startY);
  const b = rowOf(ev.offsetY);
  void controller.brushMatrix(Math.min(a, b), Math.max(a, b)).then(redrawMatrix);
};
$<HTMLButtonElement>("brush-rows").onclick = () => {
  const lo = Number($<HTMLInputElement>("row-lo").value);
  const hi = Number($<HTMLInputElement>("row-hi").value);
  void controller.brushMatrix(lo, hi).then(redrawMatrix);
};

// annotation form; dots render on the main view, text on hover
$<HTMLButtonElement>("annotate").onclick = () => {
  const t = Number($<HTMLInputElement>("ann-t").value);
  const v = Number($<HTMLInputElement>("ann-v").value);
  const text = $<HTMLInputElement>("ann-text").value;
  void controller.addAnnotation(t, v, text);
};
mainCanvas.onmousemove = (ev) => {
  if (controller.state.frames.length === 0) return;
  const vp = controller.state.frame.viewport;
  const near = controller.state.annotations.find((a) => {
    const x = ((a.t - vp.t0) / (vp.t1 - vp.t0)) * vp.widthPx;
    const y = ((vp.vHi - a.v) / (vp.vHi - vp.vLo)) * vp.heightPx;
    return Math.abs(x - ev.offsetX) <= 5 && Math.abs(y - ev.offsetY) <= 5;
  });
  mainCanvas.title = near ? near.text : "";
};

// deep link restore: dataset, viewport, matrix and brush come back; the
// volatile selection set is not re-created, only noted
const linked = (() => {
  try {
    return decodeLink(location.hash);
  } catch {
    return null;
  }
})();
if (linked !== null) {
  banner.textContent = `linked view: dataset ${linked.datasetId}, t ${linked.viewport.t0}..${linked.viewport.t1}`;
  banner.style.display = "block";
}
