import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // service-backed tests boot a real server process
    hookTimeout: 40000,
    testTimeout: 20000,
  },
});
