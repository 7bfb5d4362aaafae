#!/usr/bin/env node
/**
 * export-embeddings --concepts concepts.jsonl --out embeddings.tsv
 *                   [--model <id>] [--batch-size 32] [--max-chars 8000]
 */

import { DEFAULT_MODEL, DETERMINISTIC_MODEL } from "./encoder.js";
import { exportEmbeddings } from "./export.js";

const USAGE = `usage: export-embeddings --concepts <concepts.jsonl> --out <table.tsv>
                         [--model <id>] [--batch-size <n>] [--max-chars <n>]

Writes one 768-dim embedding row per unique concept text (display names,
descriptions, ancestor labels, related-concept texts) in the table format
the consumer ingests. Default model: ${DEFAULT_MODEL}; use
--model ${DETERMINISTIC_MODEL} for a download-free deterministic dry run.`;

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument ${flag}`);
    }
    out.set(flag.slice(2), value);
  }
  return out;
}

async function main(): Promise<number> {
  const argv = process.argv.slice(2);
  if (argv.includes("--help") || argv.includes("-h")) {
    console.log(USAGE);
    return 0;
  }
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    console.error(USAGE);
    return 1;
  }
  const concepts = args.get("concepts");
  const out = args.get("out");
  if (!concepts || !out) {
    console.error("both --concepts and --out are required");
    console.error(USAGE);
    return 1;
  }
  try {
    const result = await exportEmbeddings({
      concepts,
      out,
      model: args.get("model"),
      batchSize: args.has("batch-size") ? Number(args.get("batch-size")) : undefined,
      maxChars: args.has("max-chars") ? Number(args.get("max-chars")) : undefined,
    });
    console.error(
      `wrote ${result.rows} rows (model ${result.model}, ` +
      `${result.truncated} truncated, ${result.skippedConceptLines} concept lines skipped)`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

main().then((code) => process.exit(code));
