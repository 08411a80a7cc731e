import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // the round-trip test builds an index and boots the query service
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
