import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // every test shells out to the CLI several times
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
