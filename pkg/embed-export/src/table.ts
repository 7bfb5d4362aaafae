/**
 * The embedding-table file grammar shared with the consumer:
 *
 *   # optional comment lines
 *   dim=<d>
 *   <key>\t<d space-separated decimal floats>
 *
 * Keys may contain spaces but not tabs or newlines. Floats carry 8
 * significant digits (lossless for downstream use at 1e-6 tolerances).
 * Files are written atomically (temp + rename).
 */

import { randomBytes } from "node:crypto";
import { mkdirSync, renameSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

export function formatFloat(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite value ${x}`);
  return x.toPrecision(8);
}

export function writeTable(
  path: string,
  dim: number,
  rows: Iterable<[string, number[]]>,
  meta?: Record<string, string | number>,
): void {
  const lines: string[] = [];
  if (meta) {
    for (const [k, v] of Object.entries(meta)) lines.push(`# ${k}=${v}`);
  }
  lines.push(`dim=${dim}`);
  for (const [key, vec] of rows) {
    if (key.includes("\t") || key.includes("\n")) {
      throw new Error(`key contains tab/newline: ${JSON.stringify(key)}`);
    }
    if (vec.length !== dim) {
      throw new Error(`vector for ${JSON.stringify(key)} has length ${vec.length}, want ${dim}`);
    }
    lines.push(`${key}\t${vec.map(formatFloat).join(" ")}`);
  }
  mkdirSync(dirname(path) || ".", { recursive: true });
  const tmp = join(dirname(path) || ".", `.${randomBytes(6).toString("hex")}.tmp`);
  writeFileSync(tmp, lines.join("\n") + "\n", "utf-8");
  renameSync(tmp, path);
}

/** Parse a table file back (primarily for round-trip tests). */
export function parseTable(text: string): { dim: number; rows: Map<string, number[]> } {
  let dim: number | null = null;
  const rows = new Map<string, number[]>();
  for (const raw of text.split("\n")) {
    const line = raw.trimEnd();
    if (!line || line.startsWith("#")) continue;
    if (dim === null) {
      if (!line.startsWith("dim=")) throw new Error(`expected dim= header, got ${line}`);
      dim = Number(line.slice(4));
      continue;
    }
    const tab = line.indexOf("\t");
    if (tab < 0) throw new Error(`missing tab separator: ${line.slice(0, 40)}`);
    const key = line.slice(0, tab);
    const vec = line.slice(tab + 1).split(/\s+/).map(Number);
    if (vec.length !== dim || vec.some((x) => !Number.isFinite(x))) {
      throw new Error(`bad vector for key ${JSON.stringify(key)}`);
    }
    if (rows.has(key)) throw new Error(`duplicate key ${JSON.stringify(key)}`);
    rows.set(key, vec);
  }
  if (dim === null) throw new Error("no dim= header found");
  return { dim, rows };
}
