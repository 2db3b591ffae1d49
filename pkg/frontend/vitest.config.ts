import { defineConfig } from "vitest/config";

// Episodes run a real solver subprocess, so give tests generous budgets.
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
