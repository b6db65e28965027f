/** Text windowing and pooling, mirroring the engine's arithmetic exactly. */
import { ExtractionError } from "./types.js";

export const WINDOW_CHARS = 1500;

export interface WindowSpan {
  start: number;
  end: number;
}

/**
 * Tile a text into contiguous non-overlapping windows of at most
 * WINDOW_CHARS characters; only the last window may be shorter.
 */
export function segmentText(text: string): WindowSpan[] {
  if (!text) {
    throw new ExtractionError("cannot segment empty text");
  }
  const spans: WindowSpan[] = [];
  for (let start = 0; start < text.length; start += WINDOW_CHARS) {
    spans.push({ start, end: Math.min(start + WINDOW_CHARS, text.length) });
  }
  return spans;
}

/** Componentwise arithmetic mean of equal-dimension vectors. */
export function meanPool(vectors: readonly Float64Array[]): Float64Array {
  if (vectors.length === 0) {
    throw new ExtractionError("meanPool requires at least one vector");
  }
  const first = vectors[0]!;
  const out = new Float64Array(first.length);
  for (const vec of vectors) {
    if (vec.length !== first.length) {
      throw new ExtractionError("meanPool: vectors have mismatched dimensions");
    }
    for (let i = 0; i < vec.length; i++) {
      out[i] = out[i]! + vec[i]!;
    }
  }
  for (let i = 0; i < out.length; i++) {
    out[i] = out[i]! / vectors.length;
  }
  return out;
}

export function cosine(u: Float64Array, v: Float64Array): number {
  if (u.length !== v.length) {
    throw new ExtractionError("cosine: dimension mismatch");
  }
  let dot = 0;
  let nu = 0;
  let nv = 0;
  for (let i = 0; i < u.length; i++) {
    dot += u[i]! * v[i]!;
    nu += u[i]! * u[i]!;
    nv += v[i]! * v[i]!;
  }
  if (nu === 0 || nv === 0) return 0;
  return dot / Math.sqrt(nu * nv);
}
