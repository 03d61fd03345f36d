/** Deterministic jitter in [-1, 1] from a patient row index, so beeswarm
 * layouts do not reshuffle between renders. Murmur-style avalanche. */
export function hashJitter(row: number, seed = 0): number {
  let h = (row + Math.imul(seed + 1, 0x9e3779b9)) >>> 0;
  h ^= h >>> 16;
  h = Math.imul(h, 0x85ebca6b);
  h ^= h >>> 13;
  h = Math.imul(h, 0xc2b2ae35);
  h ^= h >>> 16;
  return ((h >>> 0) / 0xffffffff) * 2 - 1;
}
