// Spawns the real analysis service for tests that exercise the console
// against live endpoints.

import { spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import type { ConsoleEvents } from "../src/controller.js";

export interface RunningService {
  base: string;
  stop(): Promise<void>;
}

const REPO_ROOT = fileURLToPath(new URL("../..", import.meta.url));

export async function startService(): Promise<RunningService> {
  let lastError = "did not try";
  for (let attempt = 0; attempt < 3; attempt++) {
    const port = 8600 + Math.floor(Math.random() * 2000);
    const base = `http://127.0.0.1:${port}`;
    const child = spawn(
      "python3",
      ["-m", "flowscope.cli", "serve", "--port", String(port)],
      { cwd: REPO_ROOT, stdio: ["ignore", "ignore", "pipe"] },
    );
    let stderr = "";
    child.stderr.on("data", (d) => {
      stderr += String(d);
    });
    let exited = false;
    child.on("exit", () => {
      exited = true;
    });

    const deadline = Date.now() + 30_000;
    while (Date.now() < deadline && !exited) {
      try {
        const resp = await fetch(`${base}/health`);
        if (resp.ok) {
          return {
            base,
            stop: () =>
              new Promise<void>((resolve) => {
                if (exited) return resolve();
                const killTimer = setTimeout(() => child.kill("SIGKILL"), 3000);
                child.once("exit", () => {
                  clearTimeout(killTimer);
                  resolve();
                });
                child.kill("SIGTERM");
              }),
          };
        }
      } catch {
        // not listening yet
      }
      await new Promise((r) => setTimeout(r, 100));
    }
    lastError = exited ? `service exited early: ${stderr.trim()}` : "health check timed out";
    if (!exited) child.kill("SIGKILL");
  }
  throw new Error(`could not start service: ${lastError}`);
}

export function quietEvents(): ConsoleEvents & { errors: string[] } {
  return {
    errors: [],
    mainViewChanged() {},
    matrixChanged() {},
    popup() {},
    prompt() {},
    error(m: string) {
      this.errors.push(m);
    },
  };
}
