/**
 * Node bindings for the sik anomaly-detection CLI.
 *
 * Every operation works on contiguous row-major float buffers plus explicit
 * shape metadata, and delegates to the CLI through its documented file
 * formats, so binding results are byte-identical to direct CLI use.  Buffers
 * are copied at the boundary; Float32Array inputs are upcast to float64.
 */

import { readFileSync, writeFileSync, copyFileSync } from "node:fs";
import { join } from "node:path";

import {
  ModelHeader,
  matrixToCsv,
  parseIntMatrixCsv,
  parseMatrixCsv,
  parseModelBody,
  parseModelHeader,
  parseScoresCsv,
  scoresToCsv,
} from "./formats.js";
import { CliError, runCli, withTempDir } from "./runner.js";

export { CliError } from "./runner.js";
export {
  formatFloat,
  matrixToCsv,
  parseMatrixCsv,
  parseScoresCsv,
  parseModelHeader,
  parseModelBody,
} from "./formats.js";
export type { ModelHeader, ParsedMatrix } from "./formats.js";

/** Fitted model: raw model-file bytes plus the decoded header. */
export interface BoundModel {
  readonly bytes: Buffer;
  readonly d: number;
  readonly psi: number;
  readonly t: number;
  readonly seed: number;
}

export type ScoreMethod = "sik" | "ik" | "idk";

export interface ScoreOptions {
  method?: ScoreMethod;
  /** Training buffer for the distributional (idk) method. */
  train?: Float64Array | Float32Array;
  trainRows?: number;
  /** When given, the score CSV produced by the CLI is copied here. */
  outputPath?: string;
}

function toFloat64(buffer: Float64Array | Float32Array, n: number, d: number): Float64Array {
  if (!Number.isInteger(n) || !Number.isInteger(d) || n < 1 || d < 1) {
    throw new Error(`invalid shape metadata: n=${n}, d=${d}`);
  }
  if (buffer.length !== n * d) {
    throw new Error(`buffer length ${buffer.length} does not match n*d = ${n * d}`);
  }
  // copies, and upcasts Float32Array entries to float64
  return Float64Array.from(buffer);
}

function modelFromBytes(bytes: Buffer): BoundModel {
  const header = parseModelHeader(bytes);
  return { bytes, d: header.d, psi: header.psi, t: header.t, seed: header.seed };
}

/** Fit a sphere ensemble on an n x d row-major buffer. */
export function boundFit(
  buffer: Float64Array | Float32Array,
  n: number,
  d: number,
  psi: number,
  t: number,
  seed: number,
): BoundModel {
  const values = toFloat64(buffer, n, d);
  return withTempDir((dir) => {
    const dataPath = join(dir, "data.csv");
    const modelPath = join(dir, "model.sikm");
    writeFileSync(dataPath, matrixToCsv(values, n, d));
    runCli([
      "fit",
      "--input", dataPath,
      "--psi", String(psi),
      "--t", String(t),
      "--seed", String(seed),
      "--model", modelPath,
    ]);
    return modelFromBytes(readFileSync(modelPath));
  });
}

/** Score an n x d buffer against a fitted model; higher = more anomalous. */
export function boundScore(
  model: BoundModel,
  buffer: Float64Array | Float32Array,
  n: number,
  d: number,
  options: ScoreOptions = {},
): Float64Array {
  const method = options.method ?? "sik";
  if (d !== model.d) {
    throw new Error(`buffer dimensionality ${d} does not match model d=${model.d}`);
  }
  const values = toFloat64(buffer, n, d);
  return withTempDir((dir) => {
    const dataPath = join(dir, "data.csv");
    const modelPath = join(dir, "model.sikm");
    const scorePath = join(dir, "scores.csv");
    writeFileSync(dataPath, matrixToCsv(values, n, d));
    writeFileSync(modelPath, model.bytes);
    const args = [
      "score",
      "--model", modelPath,
      "--input", dataPath,
      "--method", method,
      "--output", scorePath,
    ];
    if (method === "idk") {
      if (!options.train || !options.trainRows) {
        throw new Error("the idk method requires options.train and options.trainRows");
      }
      const train = toFloat64(options.train, options.trainRows, d);
      const trainPath = join(dir, "train.csv");
      writeFileSync(trainPath, matrixToCsv(train, options.trainRows, d));
      args.push("--train", trainPath);
    }
    runCli(args);
    if (options.outputPath) {
      copyFileSync(scorePath, options.outputPath);
    }
    return parseScoresCsv(readFileSync(scorePath, "utf8")).scores;
  });
}

function mapBatch(
  model: BoundModel,
  buffer: Float64Array | Float32Array,
  n: number,
  d: number,
  kind: "sik" | "ik",
): number[][] {
  if (d !== model.d) {
    throw new Error(`buffer dimensionality ${d} does not match model d=${model.d}`);
  }
  const values = toFloat64(buffer, n, d);
  return withTempDir((dir) => {
    const dataPath = join(dir, "data.csv");
    const modelPath = join(dir, "model.sikm");
    const outPath = join(dir, "features.csv");
    writeFileSync(dataPath, matrixToCsv(values, n, d));
    writeFileSync(modelPath, model.bytes);
    runCli([
      "map",
      "--model", modelPath,
      "--input", dataPath,
      "--kind", kind,
      "--output", outPath,
    ]);
    return parseIntMatrixCsv(readFileSync(outPath, "utf8"));
  });
}

/** Boundary features: one 0/1 value per partitioning per row. */
export function sikMapBatch(
  model: BoundModel,
  buffer: Float64Array | Float32Array,
  n: number,
  d: number,
): number[][] {
  return mapBatch(model, buffer, n, d, "sik");
}

/** Assignment features: sphere index per partitioning per row, -1 = outside. */
export function ikMapBatch(
  model: BoundModel,
  buffer: Float64Array | Float32Array,
  n: number,
  d: number,
): number[][] {
  return mapBatch(model, buffer, n, d, "ik");
}

/** AUROC of scores against 0/1 labels (1 = anomaly), average ranks on ties. */
export function auroc(scores: ArrayLike<number>, labels: ArrayLike<number>): number {
  return withTempDir((dir) => {
    const path = join(dir, "scores.csv");
    writeFileSync(path, scoresToCsv(scores, labels));
    const stdout = runCli(["eval", "--scores", path]);
    return JSON.parse(stdout).auroc as number;
  });
}

export function saveModel(model: BoundModel, path: string): void {
  writeFileSync(path, model.bytes);
}

export function loadModel(path: string): BoundModel {
  return modelFromBytes(readFileSync(path));
}

/** Decoded sphere data, mainly for verification: flat centers and radii. */
export function modelSpheres(model: BoundModel): { centers: Float64Array; radii: Float64Array } {
  const header: ModelHeader = {
    formatVersion: 1,
    d: model.d,
    psi: model.psi,
    t: model.t,
    seed: model.seed,
  };
  return parseModelBody(model.bytes, header);
}

export function isDomainError(error: unknown): boolean {
  return error instanceof CliError && error.exitCode === 4;
}
