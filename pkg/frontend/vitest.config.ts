import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    globalSetup: ["tests/e2e.setup.ts"],
    // the global setup generates and scores a small cohort before serving it
    hookTimeout: 180_000,
    testTimeout: 30_000,
  },
});
