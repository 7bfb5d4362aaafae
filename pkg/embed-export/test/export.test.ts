import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { collectTexts, parseConcepts } from "../src/concepts.js";
import { DETERMINISTIC_MODEL, loadEncoder } from "../src/encoder.js";
import { exportEmbeddings } from "../src/export.js";
import { formatFloat, parseTable } from "../src/table.js";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "embed-export-"));
}

/** Ten concepts with shared ancestor labels, duplicate related texts, and one
 * empty description: the canonical fixture for the export contract. */
function writeFixture(dir: string): string {
  const lines = [
    { id: "C0", display_name: "Art", level: 0, description: "creative practice" },
    { id: "C1", display_name: "Business", level: 0 },
    { id: "C2", display_name: "Painting", level: 1, ancestors: [{ id: "C0" }],
      description: "pigment on surfaces", related_concepts: [{ display_name: "brushwork" }] },
    { id: "C3", display_name: "Design", level: 1, ancestors: [{ id: "C0" }],
      related_concepts: [{ display_name: "aesthetics" }] },
    { id: "C4", display_name: "Marketing", level: 1, ancestors: [{ id: "C1" }],
      description: "promotion of goods" },
    { id: "C5", display_name: "Finance", level: 1, ancestors: [{ id: "C1" }] },
    { id: "C6", display_name: "Branding", level: 2,
      ancestors: [{ id: "C4" }, { id: "C1" }],
      related_concepts: [{ display_name: "aesthetics" }] },  // duplicate text
    { id: "C7", display_name: "Advertising", level: 2,
      ancestors: [{ id: "C3" }, { id: "C4" }], description: "" },  // empty description
    { id: "C8", display_name: "Sculpture", level: 1, ancestors: [{ id: "C0" }] },
    { id: "C9", display_name: "Economics", level: 1, ancestors: [{ id: "C1" }],
      related_concepts: [{ display_name: "markets" }] },
  ];
  const path = join(dir, "concepts.jsonl");
  writeFileSync(path, lines.map((l) => JSON.stringify(l)).join("\n") + "\n");
  return path;
}

describe("text collection", () => {
  it("deduplicates texts and skips empty descriptions", () => {
    const dir = tempDir();
    const { records } = parseConcepts(writeFixture(dir));
    expect(records.size).toBe(10);
    const texts = collectTexts(records);
    expect(new Set(texts).size).toBe(texts.length);
    // 10 display names + 3 nonempty descriptions + 4 distinct related/ancestor
    // texts that are not already display names
    expect(texts).toContain("aesthetics");
    expect(texts.filter((t) => t === "aesthetics")).toHaveLength(1);
    expect(texts).not.toContain("");
  });

  it("counts malformed lines without aborting", () => {
    const dir = tempDir();
    const path = join(dir, "bad.jsonl");
    writeFileSync(path, '{"id":"A","display_name":"a","level":0}\nnot json\n');
    const parsed = parseConcepts(path);
    expect(parsed.records.size).toBe(1);
    expect(parsed.skipped).toBe(1);
  });
});

describe("deterministic encoder", () => {
  it("emits 768-dim vectors, stable across calls", async () => {
    const enc = await loadEncoder(DETERMINISTIC_MODEL);
    const [a1] = await enc.encode(["field of study"]);
    const [a2] = await enc.encode(["field of study"]);
    expect(a1).toHaveLength(768);
    expect(a1).toEqual(a2);
    const [b] = await enc.encode(["another field"]);
    expect(b).not.toEqual(a1);
    for (const x of a1) expect(Math.abs(x)).toBeLessThanOrEqual(1);
  });

  it("gives an actionable error for an unavailable model", async () => {
    await expect(loadEncoder("no-such/model-xyz")).rejects.toThrow(
      /unavailable|not installed/);
  });
});

describe("export job", () => {
  it("writes one 768-dim row per unique text of the 10-concept fixture", async () => {
    const dir = tempDir();
    const concepts = writeFixture(dir);
    const out = join(dir, "embeddings.tsv");
    const result = await exportEmbeddings({
      concepts, out, model: DETERMINISTIC_MODEL, log: () => {} });
    const { records } = parseConcepts(concepts);
    const expected = collectTexts(records);
    expect(result.rows).toBe(expected.length);

    const table = parseTable(readFileSync(out, "utf-8"));
    expect(table.dim).toBe(768);
    expect([...table.rows.keys()].sort()).toEqual([...expected].sort());
    for (const vec of table.rows.values()) expect(vec).toHaveLength(768);
  });

  it("round-trips losslessly at 1e-6 against the in-memory vectors", async () => {
    const dir = tempDir();
    const concepts = writeFixture(dir);
    const out = join(dir, "embeddings.tsv");
    await exportEmbeddings({ concepts, out, model: DETERMINISTIC_MODEL, log: () => {} });
    const enc = await loadEncoder(DETERMINISTIC_MODEL);
    const table = parseTable(readFileSync(out, "utf-8"));
    for (const [key, stored] of table.rows) {
      const [fresh] = await enc.encode([key]);
      for (let i = 0; i < 768; i++) {
        expect(Math.abs(stored[i] - fresh[i])).toBeLessThanOrEqual(1e-6);
      }
    }
  });

  it("reruns reproduce every component within 1e-6 (bitwise, in fact)", async () => {
    const dir = tempDir();
    const concepts = writeFixture(dir);
    const out1 = join(dir, "run1.tsv");
    const out2 = join(dir, "run2.tsv");
    await exportEmbeddings({ concepts, out: out1, model: DETERMINISTIC_MODEL, log: () => {} });
    await exportEmbeddings({ concepts, out: out2, model: DETERMINISTIC_MODEL, log: () => {} });
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });

  it("truncates overlong texts with a warning", async () => {
    const dir = tempDir();
    const path = join(dir, "long.jsonl");
    writeFileSync(path, JSON.stringify({
      id: "L", display_name: "Long field", level: 0,
      description: "x".repeat(500) }) + "\n");
    const warnings: string[] = [];
    const result = await exportEmbeddings({
      concepts: path, out: join(dir, "out.tsv"), model: DETERMINISTIC_MODEL,
      maxChars: 100, log: (m) => warnings.push(m) });
    expect(result.truncated).toBe(1);
    expect(warnings.some((w) => w.includes("truncating"))).toBe(true);
  });

  it("keys rows by the original (untruncated) text", async () => {
    const dir = tempDir();
    const longText = "y".repeat(300);
    const path = join(dir, "long2.jsonl");
    writeFileSync(path, JSON.stringify({
      id: "L", display_name: "Long2", level: 0, description: longText }) + "\n");
    const out = join(dir, "out.tsv");
    await exportEmbeddings({ concepts: path, out, model: DETERMINISTIC_MODEL,
                             maxChars: 100, log: () => {} });
    const table = parseTable(readFileSync(out, "utf-8"));
    expect(table.rows.has(longText)).toBe(true);
  });
});

describe("float formatting", () => {
  it("keeps 8 significant digits and survives reparsing", () => {
    for (const x of [0.123456789, -1.9999999e-7, 123456.789, -0.5, 1 / 3]) {
      const s = formatFloat(x);
      expect(Math.abs(Number(s) - x)).toBeLessThanOrEqual(Math.abs(x) * 1e-7 + 1e-12);
    }
    expect(() => formatFloat(Infinity)).toThrow();
  });
});

describe("consumer round-trip", () => {
  it("parses under the consumer's table reader when available", async () => {
    const dir = tempDir();
    const concepts = writeFixture(dir);
    const out = join(dir, "embeddings.tsv");
    await exportEmbeddings({ concepts, out, model: DETERMINISTIC_MODEL, log: () => {} });
    let pythonReport: string;
    try {
      pythonReport = execFileSync("python3", ["-c", `
import json, sys
from fosbench.features import load_embedding_table
t = load_embedding_table(${JSON.stringify(out)})
vals = {k: v.tolist() for k, v in t.vectors.items()}
print(json.dumps({"dim": t.dim, "n": len(t), "sample": vals[sorted(vals)[0]][:4]}))
`], { encoding: "utf-8" });
    } catch {
      console.warn("consumer package not importable here; grammar checked locally only");
      return;
    }
    const report = JSON.parse(pythonReport);
    expect(report.dim).toBe(768);
    const table = parseTable(readFileSync(out, "utf-8"));
    expect(report.n).toBe(table.rows.size);
    const firstKey = [...table.rows.keys()].sort()[0];
    const local = table.rows.get(firstKey)!.slice(0, 4);
    report.sample.forEach((x: number, i: number) => {
      expect(Math.abs(x - local[i])).toBeLessThanOrEqual(1e-6);
    });
  });
});
