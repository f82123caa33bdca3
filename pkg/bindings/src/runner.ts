/** Subprocess plumbing around the CLI executable. */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Raised when the CLI exits non-zero; mirrors its exit-code contract. */
export class CliError extends Error {
  readonly exitCode: number;
  readonly stderr: string;

  constructor(exitCode: number, stderr: string, args: string[]) {
    super(`sik ${args[0]} failed with exit code ${exitCode}: ${stderr.trim()}`);
    this.name = "CliError";
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

export function cliExecutable(): string {
  return process.env.SIK_CLI ?? "sik";
}

/** Run one CLI subcommand; returns stdout (the JSON metadata line). */
export function runCli(args: string[]): string {
  try {
    return execFileSync(cliExecutable(), args, { encoding: "utf8" });
  } catch (error) {
    const err = error as { status?: number | null; stderr?: string | Buffer; message?: string };
    const stderr =
      typeof err.stderr === "string" ? err.stderr : err.stderr?.toString() ?? err.message ?? "";
    throw new CliError(err.status ?? -1, stderr, args);
  }
}

/** Run `body` with a private temp directory, removing it afterwards. */
export function withTempDir<T>(body: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "sik-"));
  try {
    return body(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
