import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    testTimeout: 180_000, // CLI tests spawn node+echarts repeatedly
    include: ["tests/**/*.test.ts"],
  },
});
