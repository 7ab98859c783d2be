/**
 * Deterministic 64-bit hashing and a splitmix-style generator.
 *
 * Everything here is pure BigInt arithmetic, so token vectors come out
 * bit-identical across platforms and runs — the exporter's determinism
 * contract rests on this file.
 */

const MASK = 0xffffffffffffffffn;

export function fnv1a64(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  const prime = 0x100000001b3n;
  const bytes = Buffer.from(text, "utf8");
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * prime) & MASK;
  }
  return h;
}

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK;
  }

  next(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
    return (z ^ (z >> 31n)) & MASK;
  }

  /** Uniform double in [0, 1) with 53 bits of randomness. */
  uniform(): number {
    return Number(this.next() >> 11n) / 2 ** 53;
  }
}
