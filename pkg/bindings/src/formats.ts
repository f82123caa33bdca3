/**
 * Parsing and serialization for the file formats the CLI speaks:
 * model files ("SIKM"), dataset/score CSVs, and feature CSVs.
 */

const MODEL_MAGIC = "SIKM";
const MODEL_HEADER_BYTES = 40;

export interface ModelHeader {
  formatVersion: number;
  d: number;
  psi: number;
  t: number;
  seed: number;
}

function u64ToNumber(value: bigint, field: string): number {
  if (value > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new Error(`model field ${field} (${value}) exceeds the safe integer range`);
  }
  return Number(value);
}

/** Decode the fixed little-endian model header and validate the byte length. */
export function parseModelHeader(bytes: Buffer): ModelHeader {
  if (bytes.length < MODEL_HEADER_BYTES) {
    throw new Error(`model truncated: ${bytes.length} bytes`);
  }
  if (bytes.toString("latin1", 0, 4) !== MODEL_MAGIC) {
    throw new Error("bad model magic");
  }
  const header: ModelHeader = {
    formatVersion: bytes.readUInt32LE(4),
    d: u64ToNumber(bytes.readBigUInt64LE(8), "d"),
    psi: u64ToNumber(bytes.readBigUInt64LE(16), "psi"),
    t: u64ToNumber(bytes.readBigUInt64LE(24), "t"),
    seed: u64ToNumber(bytes.readBigUInt64LE(32), "seed"),
  };
  const expected =
    MODEL_HEADER_BYTES + header.t * (header.psi * header.d + header.psi) * 8;
  if (bytes.length !== expected) {
    throw new Error(`model length ${bytes.length}, expected ${expected}`);
  }
  return header;
}

/** Centers (t*psi rows of d) and radii (t rows of psi) from a model file. */
export function parseModelBody(bytes: Buffer, header: ModelHeader): {
  centers: Float64Array;
  radii: Float64Array;
} {
  const { d, psi, t } = header;
  const centers = new Float64Array(t * psi * d);
  const radii = new Float64Array(t * psi);
  let offset = MODEL_HEADER_BYTES;
  for (let i = 0; i < t; i++) {
    for (let j = 0; j < psi * d; j++) {
      centers[i * psi * d + j] = bytes.readDoubleLE(offset);
      offset += 8;
    }
    for (let j = 0; j < psi; j++) {
      radii[i * psi + j] = bytes.readDoubleLE(offset);
      offset += 8;
    }
  }
  return { centers, radii };
}

/**
 * Exact decimal for a float64: JS shortest round-trip, with the negative-zero
 * sign preserved so re-parsing reproduces the identical bit pattern.
 */
export function formatFloat(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`cannot serialize non-finite value ${x}`);
  }
  return Object.is(x, -0) ? "-0" : String(x);
}

/** Row-major buffer to a headerless CSV the CLI parses as float64. */
export function matrixToCsv(values: Float64Array, n: number, d: number): string {
  const lines: string[] = new Array(n);
  for (let i = 0; i < n; i++) {
    const row: string[] = new Array(d);
    for (let j = 0; j < d; j++) {
      row[j] = formatFloat(values[i * d + j]);
    }
    lines[i] = row.join(",");
  }
  return lines.join("\n") + "\n";
}

export interface ParsedMatrix {
  values: Float64Array;
  n: number;
  d: number;
  labels: Uint8Array | null;
}

/** Dataset CSV (optional header; trailing "label" column when labeled). */
export function parseMatrixCsv(text: string): ParsedMatrix {
  const rows = text.split(/\r?\n/).filter((line) => line.length > 0).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new Error("empty CSV dataset");
  }
  let labeled = false;
  if (rows[0].some((cell) => Number.isNaN(Number(cell)))) {
    labeled = rows[0][rows[0].length - 1].trim() === "label";
    rows.shift();
  }
  if (rows.length === 0) {
    throw new Error("CSV dataset has a header but no rows");
  }
  const width = rows[0].length;
  const d = labeled ? width - 1 : width;
  const values = new Float64Array(rows.length * d);
  const labels = labeled ? new Uint8Array(rows.length) : null;
  rows.forEach((row, i) => {
    if (row.length !== width) {
      throw new Error(`CSV row ${i} has ${row.length} cells, expected ${width}`);
    }
    for (let j = 0; j < d; j++) {
      const v = Number(row[j]);
      if (Number.isNaN(v)) {
        throw new Error(`CSV row ${i} cell ${j} is not a number: ${row[j]}`);
      }
      values[i * d + j] = v;
    }
    if (labels) {
      labels[i] = Number(row[width - 1]) === 1 ? 1 : 0;
    }
  });
  return { values, n: rows.length, d, labels };
}

/** Score CSV: header index,score[,label]. */
export function parseScoresCsv(text: string): { scores: Float64Array; labels: Uint8Array | null } {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || !lines[0].startsWith("index,score")) {
    throw new Error("score CSV must start with an index,score header");
  }
  const labeled = lines[0].split(",").pop() === "label";
  const body = lines.slice(1);
  const scores = new Float64Array(body.length);
  const labels = labeled ? new Uint8Array(body.length) : null;
  body.forEach((line, i) => {
    const cells = line.split(",");
    scores[i] = Number(cells[1]);
    if (labels) {
      labels[i] = Number(cells[2]) === 1 ? 1 : 0;
    }
  });
  return { scores, labels };
}

export function scoresToCsv(scores: ArrayLike<number>, labels: ArrayLike<number>): string {
  if (scores.length !== labels.length) {
    throw new Error(`scores length ${scores.length} != labels length ${labels.length}`);
  }
  const lines = ["index,score,label"];
  for (let i = 0; i < scores.length; i++) {
    lines.push(`${i},${formatFloat(scores[i])},${labels[i] ? 1 : 0}`);
  }
  return lines.join("\n") + "\n";
}

/** Headerless integer-matrix CSV (feature exports). */
export function parseIntMatrixCsv(text: string): number[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(",").map((cell) => {
      const v = Number(cell);
      if (!Number.isInteger(v)) {
        throw new Error(`expected integer cell, got ${cell}`);
      }
      return v;
    }));
}
