/**
 * Embedding backends.
 *
 * The default backend is a pinned, fully offline hashed n-gram encoder so
 * the pipeline runs without downloading model weights; any other model id
 * is treated as a transformers.js feature-extraction model and loaded
 * dynamically, which requires that package and the weights to be
 * available locally.
 */

export type Pooling = "cls" | "mean";

export interface Embedder {
  /** Pinned identifier recorded in the manifest. */
  readonly id: string;
  readonly dim: number;
  embedBatch(texts: string[], pooling: Pooling): Promise<Float32Array[]>;
}

export const DETERMINISTIC_MODEL_ID = "deterministic-hash-v1";

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;
const BUCKET_SEED = 0x9747b28c;
const SIGN_SEED = 0x85ebca6b;

function fnv1a32(text: string, from: number, to: number, seed: number): number {
  let h = (FNV_OFFSET ^ seed) >>> 0;
  for (let i = from; i < to; i++) {
    const code = text.codePointAt(i)!;
    // fold the code point as four bytes, little-endian
    for (let shift = 0; shift < 32; shift += 8) {
      h = Math.imul(h ^ ((code >>> shift) & 0xff), FNV_PRIME) >>> 0;
    }
    if (code > 0xffff) i++; // surrogate pair consumed
  }
  return h >>> 0;
}

function accumulateNgrams(text: string, acc: Float64Array): void {
  for (let n = 2; n <= 4; n++) {
    for (let i = 0; i + n <= text.length; i++) {
      const bucket = fnv1a32(text, i, i + n, BUCKET_SEED) % acc.length;
      const sign = (fnv1a32(text, i, i + n, SIGN_SEED) & 1) === 0 ? 1 : -1;
      acc[bucket] += sign;
    }
  }
}

function normalized(acc: Float64Array): Float32Array {
  let norm = 0;
  for (const v of acc) norm += v * v;
  norm = Math.sqrt(norm);
  const out = new Float32Array(acc.length);
  for (let i = 0; i < acc.length; i++) {
    out[i] = norm > 0 ? acc[i] / norm : 0;
  }
  return out;
}

/** Offline stand-in model: hashed character n-grams per token, pooled. */
export class DeterministicHashEmbedder implements Embedder {
  readonly id = DETERMINISTIC_MODEL_ID;

  constructor(readonly dim: number = 768) {
    if (dim < 1) throw new Error("dim must be >= 1");
  }

  private embedOne(text: string, pooling: Pooling): Float32Array {
    if (pooling === "cls") {
      // summary of the whole sequence, one vector
      const acc = new Float64Array(this.dim);
      accumulateNgrams(text, acc);
      return normalized(acc);
    }
    const tokens = text.split(/\s+/u).filter((t) => t.length > 0);
    const acc = new Float64Array(this.dim);
    if (tokens.length === 0) return normalized(acc);
    for (const token of tokens) {
      const tokenAcc = new Float64Array(this.dim);
      accumulateNgrams(token, tokenAcc);
      const tokenVec = normalized(tokenAcc);
      for (let i = 0; i < this.dim; i++) acc[i] += tokenVec[i] / tokens.length;
    }
    return normalized(acc);
  }

  async embedBatch(texts: string[], pooling: Pooling): Promise<Float32Array[]> {
    return texts.map((t) => this.embedOne(t, pooling));
  }
}

/** transformers.js feature-extraction backend, loaded on demand. */
export class TransformersEmbedder implements Embedder {
  private pipe: unknown = null;

  constructor(readonly id: string, readonly dim: number) {}

  private async load(): Promise<any> {
    if (this.pipe) return this.pipe;
    let mod: any;
    const pkg = "@huggingface/transformers";
    try {
      mod = await import(pkg);
    } catch (err) {
      throw new Error(
        `model-load failure: cannot import ${pkg} for model ${this.id}: ${(err as Error).message}`,
      );
    }
    try {
      this.pipe = await mod.pipeline("feature-extraction", this.id);
    } catch (err) {
      throw new Error(`model-load failure: ${this.id}: ${(err as Error).message}`);
    }
    return this.pipe;
  }

  async embedBatch(texts: string[], pooling: Pooling): Promise<Float32Array[]> {
    const pipe = await this.load();
    const out: Float32Array[] = [];
    for (const text of texts) {
      const res = await pipe(text, { pooling: pooling === "cls" ? "cls" : "mean", normalize: true });
      const data = Float32Array.from(res.data as Iterable<number>);
      if (data.length !== this.dim) {
        throw new Error(
          `dim mismatch: model ${this.id} produced ${data.length}, requested ${this.dim}`,
        );
      }
      out.push(data);
    }
    return out;
  }
}

export function makeEmbedder(modelId: string, dim: number): Embedder {
  if (modelId === DETERMINISTIC_MODEL_ID) {
    return new DeterministicHashEmbedder(dim);
  }
  return new TransformersEmbedder(modelId, dim);
}
