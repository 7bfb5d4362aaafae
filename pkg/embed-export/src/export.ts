/**
 * Export job: parse concepts, collect unique texts, encode in batches,
 * emit one table row per text.
 */

import { collectTexts, parseConcepts } from "./concepts.js";
import { DEFAULT_MODEL, EXPECTED_DIM, loadEncoder } from "./encoder.js";
import { writeTable } from "./table.js";

export interface ExportJob {
  concepts: string;
  out: string;
  model?: string;
  batchSize?: number;
  /** Texts longer than this are truncated with a warning (encoder guard). */
  maxChars?: number;
  log?: (msg: string) => void;
}

export interface ExportResult {
  model: string;
  rows: number;
  truncated: number;
  skippedConceptLines: number;
}

export async function exportEmbeddings(job: ExportJob): Promise<ExportResult> {
  const log = job.log ?? ((msg: string) => console.error(msg));
  const model = job.model ?? DEFAULT_MODEL;
  const batchSize = job.batchSize ?? 32;
  const maxChars = job.maxChars ?? 8000;

  const parsed = parseConcepts(job.concepts);
  for (const w of parsed.warnings) log(`warning: concepts ${w}`);
  if (parsed.records.size === 0) {
    throw new Error(`no parseable concepts in ${job.concepts}`);
  }
  const texts = collectTexts(parsed.records);

  let truncated = 0;
  const inputs = texts.map((t) => {
    if (t.length > maxChars) {
      truncated += 1;
      log(`warning: truncating ${t.length}-char text to ${maxChars}: ` +
          `${JSON.stringify(t.slice(0, 40))}...`);
      return t.slice(0, maxChars);
    }
    return t;
  });

  const encoder = await loadEncoder(model);
  const vectors: number[][] = [];
  for (let i = 0; i < inputs.length; i += batchSize) {
    const batch = inputs.slice(i, i + batchSize);
    vectors.push(...(await encoder.encode(batch)));
  }

  // rows keyed by the ORIGINAL text: the consumer resolves exact strings
  const rows: [string, number[]][] = texts.map((t, i) => [t, vectors[i]]);
  writeTable(job.out, EXPECTED_DIM, rows, { model: encoder.model });
  return {
    model: encoder.model,
    rows: rows.length,
    truncated,
    skippedConceptLines: parsed.skipped,
  };
}
