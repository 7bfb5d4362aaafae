/**
 * Text encoders. Two backends:
 *
 *  - a feature-extraction pipeline (transformers.js) for real pretrained
 *    encoders; weights must be available locally or in the HF cache, and the
 *    model must emit 768-dim vectors;
 *  - "deterministic-768", a seeded-hash pseudo-encoder that needs no
 *    downloads and is bit-stable across runs and platforms. It exists for
 *    pipeline dry-runs and tests, not for semantic quality.
 */

export const EXPECTED_DIM = 768;
export const DEFAULT_MODEL = "allenai/specter";
export const DETERMINISTIC_MODEL = "deterministic-768";

export interface Encoder {
  readonly model: string;
  readonly dim: number;
  encode(texts: string[]): Promise<number[][]>;
}

// --- deterministic backend --------------------------------------------------

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = 0xffffffffffffffffn;

function fnv1a64(text: string): bigint {
  let h = FNV_OFFSET;
  const bytes = Buffer.from(text, "utf-8");
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

function splitmix64(state: bigint): [bigint, bigint] {
  let z = (state + 0x9e3779b97f4a7c15n) & MASK64;
  const next = z;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return [z, next];
}

class DeterministicEncoder implements Encoder {
  readonly model = DETERMINISTIC_MODEL;
  readonly dim = EXPECTED_DIM;

  async encode(texts: string[]): Promise<number[][]> {
    return texts.map((t) => {
      let state = fnv1a64(t);
      const vec = new Array<number>(this.dim);
      for (let i = 0; i < this.dim; i++) {
        const [value, next] = splitmix64(state);
        state = next;
        // top 53 bits -> [0, 1) exactly representable, then shift to [-1, 1)
        vec[i] = Number(value >> 11n) / 2 ** 53 * 2 - 1;
      }
      return vec;
    });
  }
}

// --- transformers.js backend --------------------------------------------------

class PipelineEncoder implements Encoder {
  readonly dim = EXPECTED_DIM;
  private extractor: any;

  constructor(readonly model: string, extractor: any) {
    this.extractor = extractor;
  }

  async encode(texts: string[]): Promise<number[][]> {
    const out = await this.extractor(texts, { pooling: "mean", normalize: false });
    const [batch, dim] = out.dims;
    if (dim !== EXPECTED_DIM) {
      throw new Error(
        `model ${this.model} emits ${dim}-dim vectors; this exporter requires ${EXPECTED_DIM}`);
    }
    const data: number[] = Array.from(out.data);
    const vectors: number[][] = [];
    for (let i = 0; i < batch; i++) {
      vectors.push(data.slice(i * dim, (i + 1) * dim));
    }
    return vectors;
  }
}

export async function loadEncoder(model: string): Promise<Encoder> {
  if (model === DETERMINISTIC_MODEL) {
    return new DeterministicEncoder();
  }
  let pipeline: any;
  try {
    ({ pipeline } = await import("@huggingface/transformers"));
  } catch (err) {
    throw new Error(
      `the transformers runtime is not installed (${(err as Error).message}); ` +
      `run npm install, or use --model ${DETERMINISTIC_MODEL}`);
  }
  try {
    const extractor = await pipeline("feature-extraction", model);
    return new PipelineEncoder(model, extractor);
  } catch (err) {
    throw new Error(
      `model ${model} is unavailable (${(err as Error).message}); ` +
      `pre-download its weights into the local HF cache, point --model at a ` +
      `cached encoder, or use --model ${DETERMINISTIC_MODEL} for a dry run`);
  }
}
