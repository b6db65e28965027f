export {
  GazetteerLinker,
  LinkingError,
  SUPPORTED_LANGUAGES,
  annotateEntities,
  findNamedEntities,
  withRetries,
} from "./annotate.js";
export type { AnnotationLists, LinkResult, LinkerClient } from "./annotate.js";
export {
  canonicalRecord,
  canonicalText,
  corpusDigest,
  languagesOf,
  partition,
  readCorpus,
  serializeCorpus,
} from "./corpus.js";
export {
  HashTextBackend,
  HashVisionBackend,
  extractGeoFeatures,
  extractObjectFeatures,
  extractPlacesFeatures,
  extractTextEmbedding,
  textWindowVectors,
} from "./encoders.js";
export type { TextBackend, VisionBackend } from "./encoders.js";
export { ImageError, decodePng } from "./png.js";
export type { DecodedImage } from "./png.js";
export { extractCorpus, writeOutputs } from "./outputs.js";
export type { ArticleFeatures, ExtractOptions, ExtractionResult } from "./outputs.js";
export {
  DENSE_FEATURES,
  ExtractionError,
  FEATURE_DIMS,
  VISION_FEATURES,
} from "./types.js";
export type {
  AnnotationRecord,
  Article,
  DenseFeature,
  ExtractionManifest,
  FlaggedArticle,
  LinkerCandidate,
  ModelInfo,
  NerSpan,
  VisionFeature,
} from "./types.js";
export { WINDOW_CHARS, cosine, meanPool, segmentText } from "./windows.js";
export type { WindowSpan } from "./windows.js";
