/** Deterministic feature encoders behind pluggable backend interfaces.
 *
 * The default backends derive every component from a hash of the model id
 * and the input content, so extraction is reproducible bit-for-bit without
 * model weights; swap in real network-backed implementations through the
 * same interfaces.
 */
import { DecodedImage } from "./png.js";
import { ExtractionError, FEATURE_DIMS, ModelInfo, VisionFeature } from "./types.js";
import { meanPool, segmentText } from "./windows.js";

export interface VisionBackend extends ModelInfo {
  encode(image: DecodedImage): Float64Array;
}

export interface TextBackend extends ModelInfo {
  tokenEmbedding(token: string): Float64Array;
}

const MASK64 = (1n << 64n) - 1n;

function fnv1a64(data: Uint8Array): bigint {
  let h = 0xcbf29ce484222325n;
  for (const byte of data) {
    h ^= BigInt(byte);
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}

function fnv1a64Text(text: string): bigint {
  return fnv1a64(new TextEncoder().encode(text));
}

/** Fill `dim` components in [-1, 1) from a splitmix64 stream. */
function hashVector(seed: bigint, dim: number): Float64Array {
  const out = new Float64Array(dim);
  let state = seed;
  for (let i = 0; i < dim; i++) {
    state = (state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    z = (z ^ (z >> 31n)) & MASK64;
    out[i] = (Number(z) / 2 ** 64) * 2 - 1;
  }
  return out;
}

/** Penultimate-layer stand-in: one vector per distinct image content. */
export class HashVisionBackend implements VisionBackend {
  readonly id: string;
  readonly version = "1.0.0";
  readonly dim: number;

  constructor(feature: VisionFeature) {
    this.id = `hash-${feature}-encoder`;
    this.dim = FEATURE_DIMS[feature];
  }

  encode(image: DecodedImage): Float64Array {
    const label = `${this.id}:${image.width}x${image.height}x${image.channels}:`;
    const prefix = new TextEncoder().encode(label);
    const payload = new Uint8Array(prefix.length + image.pixels.length);
    payload.set(prefix, 0);
    payload.set(image.pixels, prefix.length);
    return hashVector(fnv1a64(payload), this.dim);
  }
}

export class HashTextBackend implements TextBackend {
  readonly id = "hash-token-encoder";
  readonly version = "1.0.0";
  readonly dim = FEATURE_DIMS.text_embedding;

  private cache = new Map<string, Float64Array>();

  tokenEmbedding(token: string): Float64Array {
    let vec = this.cache.get(token);
    if (!vec) {
      vec = hashVector(fnv1a64Text(`${this.id}:${token}`), this.dim);
      this.cache.set(token, vec);
    }
    return vec;
  }
}

function windowTokens(slice: string): string[] {
  return slice.split(/\s+/).filter(Boolean);
}

/**
 * Per-window text vectors: each window's token embeddings mean-pooled.
 * A window containing no tokens contributes a zero vector.
 */
export function textWindowVectors(text: string, backend: TextBackend): Float64Array[] {
  if (!text) {
    throw new ExtractionError("cannot embed empty text");
  }
  return segmentText(text).map((span) => {
    const tokens = windowTokens(text.slice(span.start, span.end));
    if (tokens.length === 0) {
      return new Float64Array(FEATURE_DIMS.text_embedding);
    }
    return meanPool(tokens.map((t) => backend.tokenEmbedding(t)));
  });
}

/** Window the text, mean-pool tokens per window, then mean-pool windows. */
export function extractTextEmbedding(text: string, backend: TextBackend): Float64Array {
  return meanPool(textWindowVectors(text, backend));
}

export function extractObjectFeatures(image: DecodedImage, backend: VisionBackend): Float64Array {
  return checked(backend.encode(image), FEATURE_DIMS.objects, backend.id);
}

export function extractPlacesFeatures(image: DecodedImage, backend: VisionBackend): Float64Array {
  return checked(backend.encode(image), FEATURE_DIMS.places, backend.id);
}

export function extractGeoFeatures(image: DecodedImage, backend: VisionBackend): Float64Array {
  return checked(backend.encode(image), FEATURE_DIMS.geolocation, backend.id);
}

function checked(vec: Float64Array, dim: number, model: string): Float64Array {
  if (vec.length !== dim) {
    throw new ExtractionError(`${model} produced ${vec.length} dims, expected ${dim}`);
  }
  for (const x of vec) {
    if (!Number.isFinite(x)) {
      throw new ExtractionError(`${model} produced a non-finite component`);
    }
  }
  return vec;
}
