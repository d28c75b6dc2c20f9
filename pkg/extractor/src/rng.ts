/**
 * Deterministic random numbers for reproducible extraction jobs.
 *
 * xorshift64* streams seeded through splitmix64, the same scheme the
 * evaluation toolkit uses for its bootstrap, so every derived stream is
 * pinned by (seed, stream index) alone. Per-utterance streams are split
 * from the job seed by a stable FNV-1a hash of the utterance id.
 */

const MASK64 = (1n << 64n) - 1n;
const SPLITMIX_GAMMA = 0x9e3779b97f4a7c15n;

export function splitmix64(x: bigint): bigint {
  let z = (x + SPLITMIX_GAMMA) & MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return z ^ (z >> 31n);
}

export function streamSeed(seed: bigint, stream: bigint): bigint {
  const state = splitmix64((seed + stream * SPLITMIX_GAMMA) & MASK64);
  return state === 0n ? SPLITMIX_GAMMA : state;
}

/** FNV-1a 64-bit hash of a UTF-8 string; splits per-utterance streams. */
export function fnv1a64(text: string): bigint {
  let hash = 0xcbf29ce484222325n;
  const bytes = Buffer.from(text, "utf-8");
  for (const byte of bytes) {
    hash ^= BigInt(byte);
    hash = (hash * 0x100000001b3n) & MASK64;
  }
  return hash;
}

export class Xorshift64Star {
  private state: bigint;

  constructor(state: bigint) {
    state &= MASK64;
    this.state = state === 0n ? SPLITMIX_GAMMA : state;
  }

  nextU64(): bigint {
    let x = this.state;
    x ^= x >> 12n;
    x = (x ^ (x << 25n)) & MASK64;
    x ^= x >> 27n;
    this.state = x;
    return (x * 0x2545f4914f6cdd1dn) & MASK64;
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  /** True with probability p. */
  bernoulli(p: number): boolean {
    return this.nextFloat() < p;
  }

  /** Standard normal via Box-Muller (one value per call, no caching). */
  nextGaussian(): number {
    let u = this.nextFloat();
    while (u === 0) u = this.nextFloat();
    const v = this.nextFloat();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}

export function utteranceRng(jobSeed: number, utteranceId: string): Xorshift64Star {
  const seed = BigInt(jobSeed) & MASK64;
  return new Xorshift64Star(streamSeed(seed, fnv1a64(utteranceId)));
}
