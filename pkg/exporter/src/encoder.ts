/**
 * Deterministic stand-in for a pre-trained code encoder.
 *
 * Token vectors are derived from a seeded hash of (model id, token), so
 * every output is a pure function of the model identifier, the pooling
 * rule and the input text. The Encoder interface is the seam where a real
 * transformer backend would plug in.
 */

import { fnv1a64, SplitMix64 } from "./hash.js";
import { tokenizeCode } from "./tokenize.js";

export type PoolingRule = "first-token" | "mean";

export interface Encoder {
  readonly modelId: string;
  readonly dim: number;
  tokenVector(token: string): Float32Array;
  encode(code: string, pooling: PoolingRule): Float32Array;
}

export class HashEncoder implements Encoder {
  readonly modelId: string;
  readonly dim: number;
  private cache = new Map<string, Float32Array>();

  constructor(modelId: string, dim: number) {
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`encoder width must be a positive integer, got ${dim}`);
    }
    this.modelId = modelId;
    this.dim = dim;
  }

  tokenVector(token: string): Float32Array {
    const hit = this.cache.get(token);
    if (hit !== undefined) return hit;
    const rng = new SplitMix64(fnv1a64(`${this.modelId}:${token}`));
    const vec = new Float32Array(this.dim);
    for (let i = 0; i < this.dim; i++) {
      vec[i] = Math.fround(rng.uniform() * 2 - 1);
    }
    this.cache.set(token, vec);
    return vec;
  }

  encode(code: string, pooling: PoolingRule): Float32Array {
    const tokens = tokenizeCode(code);
    const out = new Float32Array(this.dim);
    if (tokens.length === 0) return out;
    if (pooling === "first-token") {
      out.set(this.tokenVector(tokens[0]));
      return out;
    }
    const acc = new Float64Array(this.dim);
    for (const token of tokens) {
      const vec = this.tokenVector(token);
      for (let i = 0; i < this.dim; i++) acc[i] += vec[i];
    }
    for (let i = 0; i < this.dim; i++) {
      out[i] = Math.fround(acc[i] / tokens.length);
    }
    return out;
  }
}

const KNOWN_MODEL = /^hash(-v\d+)?$/;

/** Instantiate the encoder named by the manifest; unknown ids fail loudly. */
export function loadEncoder(modelId: string, dim: number): Encoder {
  if (!KNOWN_MODEL.test(modelId)) {
    throw new Error(
      `cannot load encoder model "${modelId}": only deterministic ` +
      `hash encoders (hash, hash-vN) are bundled`
    );
  }
  return new HashEncoder(modelId, dim);
}
