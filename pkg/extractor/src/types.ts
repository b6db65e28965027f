/** Shared record shapes for the extraction pipeline. */

export interface Article {
  id: string;
  title: string;
  body: string;
  image_ref: string;
  event: string;
  domain: string;
  language: string;
}

export interface NerSpan {
  start: number;
  end: number;
  surface: string;
}

export interface LinkerCandidate {
  start: number;
  end: number;
  entity_iri: string;
  pagerank: number;
}

export interface AnnotationRecord {
  article_id: string;
  ner: NerSpan[];
  candidates: LinkerCandidate[];
}

export const VISION_FEATURES = ["objects", "places", "geolocation"] as const;
export type VisionFeature = (typeof VISION_FEATURES)[number];

export const DENSE_FEATURES = [...VISION_FEATURES, "text_embedding"] as const;
export type DenseFeature = (typeof DENSE_FEATURES)[number];

/** Output dimensionality every backend must honor, per feature. */
export const FEATURE_DIMS: Record<DenseFeature, number> = {
  objects: 2048,
  places: 2048,
  geolocation: 2048,
  text_embedding: 768,
};

export interface ModelInfo {
  id: string;
  version: string;
}

export interface FlaggedArticle {
  article_id: string;
  reason: string;
}

export interface ExtractionManifest {
  models: Record<DenseFeature | "annotator", ModelInfo>;
  dims: Record<DenseFeature, number>;
  corpus_digest: string;
  started_at: string;
  finished_at: string;
  flagged: FlaggedArticle[];
}

export class ExtractionError extends Error {}
