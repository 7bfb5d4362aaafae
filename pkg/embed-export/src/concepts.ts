/**
 * Concept-catalog parsing: one JSON object per line, UTF-8.
 *
 * Minimal schema (mirrors the consumer's ingest contract):
 *   {"id": "C1", "display_name": "Art", "level": 0,
 *    "ancestors": [{"id": "C0"}] | ["C0"],
 *    "related_concepts": [{"display_name": "..."}] | ["..."],
 *    "description": "..."}
 */

import { readFileSync } from "node:fs";

export interface ConceptRecord {
  id: string;
  displayName: string;
  level: number;
  ancestorIds: string[];
  relatedTexts: string[];
  description: string | null;
}

export interface ParseResult {
  records: Map<string, ConceptRecord>;
  skipped: number;
  warnings: string[];
}

function asIdList(value: unknown): string[] {
  if (!Array.isArray(value)) return [];
  const out: string[] = [];
  for (const item of value) {
    if (typeof item === "string") out.push(item);
    else if (item && typeof item === "object" && typeof (item as any).id === "string")
      out.push((item as any).id);
    else throw new Error(`unusable id entry: ${JSON.stringify(item)}`);
  }
  return out;
}

function asTextList(value: unknown): string[] {
  if (!Array.isArray(value)) return [];
  const out: string[] = [];
  for (const item of value) {
    if (typeof item === "string") out.push(item);
    else if (item && typeof item === "object" &&
             typeof (item as any).display_name === "string")
      out.push((item as any).display_name);
    else throw new Error(`unusable text entry: ${JSON.stringify(item)}`);
  }
  return out;
}

export function parseConcepts(path: string): ParseResult {
  const records = new Map<string, ConceptRecord>();
  const warnings: string[] = [];
  let skipped = 0;
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    const text = line.trim();
    if (!text) return;
    try {
      const obj = JSON.parse(text);
      if (typeof obj.id !== "string" || typeof obj.display_name !== "string" ||
          !Number.isInteger(obj.level) || obj.level < 0) {
        throw new Error("missing or invalid id/display_name/level");
      }
      if (records.has(obj.id)) throw new Error(`duplicate concept id ${obj.id}`);
      records.set(obj.id, {
        id: obj.id,
        displayName: obj.display_name,
        level: obj.level,
        ancestorIds: asIdList(obj.ancestors),
        relatedTexts: asTextList(obj.related_concepts),
        description:
          typeof obj.description === "string" && obj.description.length > 0
            ? obj.description
            : null,
      });
    } catch (err) {
      skipped += 1;
      warnings.push(`line ${i + 1}: ${(err as Error).message}`);
    }
  });
  return { records, skipped, warnings };
}

/**
 * Every text the feature composer will look up, deduplicated in first-seen
 * order: display names, descriptions, ancestor labels (resolved inside the
 * catalog), related-concept texts. Empty descriptions contribute no text.
 */
export function collectTexts(records: Map<string, ConceptRecord>): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  const push = (t: string) => {
    if (!seen.has(t)) {
      seen.add(t);
      out.push(t);
    }
  };
  for (const rec of records.values()) {
    push(rec.displayName);
    if (rec.description) push(rec.description);
    for (const aid of rec.ancestorIds) {
      const anc = records.get(aid);
      if (anc) push(anc.displayName);
    }
    for (const rel of rec.relatedTexts) push(rel);
  }
  return out;
}
