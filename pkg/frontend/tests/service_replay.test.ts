// Acceptance: every stream set the console displays after slider moves and
// matrix brushing is byte-identical to the service's own answer, shown by
// replaying the logged requests. Runs against a real spawned service.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import { quietEvents, startService, type RunningService } from "./helpers.js";

let svc: RunningService;

beforeAll(async () => {
  svc = await startService();
}, 40_000);

afterAll(async () => {
  if (svc) await svc.stop();
});

describe("console linkage against the running service", () => {
  it("threshold and brush highlights replay identically", async () => {
    const started = performance.now();
    const api = new ApiClient(svc.base);
    const events = quietEvents();
    const console_ = new Controller(api, events, {
      canvasWidth: 512,
      canvasHeight: 256,
      debounceMs: 30,
    });

    const info = await console_.loadDataset({ scenario: "worm-scan", seed: 7 });
    expect(info).not.toBeNull();

    // rapid slider movement: only the final position reaches the service
    const logBefore = api.log.length;
    const [h40, h25] = await Promise.all([
      console_.setThreshold(40),
      console_.setThreshold(25),
    ]);
    expect(h40).toBe(h25);
    const thresholdPosts = api.log
      .slice(logBefore)
      .filter((e) => e.method === "POST" && (e.body as { kind?: string })?.kind === "threshold");
    expect(thresholdPosts.length).toBe(1);
    expect((thresholdPosts[0].body as { threshold: number }).threshold).toBe(25);
    expect(h25!.streamIds.length).toBeGreaterThan(0);

    // matrix over the outbreak window, then brush everything and a band
    const mx = await console_.computeMatrix(8400, 10800);
    expect(mx).not.toBeNull();
    const whole = await console_.brushMatrix(0, mx!.n - 1);
    expect(whole!.streamIds.length).toBe(mx!.n);
    const band = await console_.brushMatrix(10, 30);
    expect(band!.streamIds.length).toBe(21);
    expect(events.errors).toEqual([]);

    // the console's own audit: re-issue each displayed set's logged request
    const report = await console_.replayDisplayedSets();
    expect(report.checked).toBe(3);
    expect(report.mismatches).toEqual([]);

    // and once more through a client that shares no state with the console
    const fresh = new ApiClient(svc.base);
    for (const h of console_.state.highlights.values()) {
      const replayed = (await fresh.replay(api.log[h.logIndex])) as {
        stream_ids: number[];
      };
      const displayed = [...h.streamIds].sort((a, b) => a - b);
      const answered = [...replayed.stream_ids].sort((a, b) => a - b);
      expect(answered).toEqual(displayed);
    }

    const elapsed = (performance.now() - started) / 1000;
    expect(elapsed).toBeLessThan(10);
    console.log(`PASS console linkage replay (${elapsed.toFixed(2)}s < 10s)`);
  }, 20_000);
});
