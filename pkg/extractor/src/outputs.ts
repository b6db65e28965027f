/** Batch extraction driver and exchange-format file writing. */
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import * as path from "node:path";

import { AnnotationLists, GazetteerLinker, LinkerClient, annotateEntities } from "./annotate.js";
import { canonicalText, corpusDigest, languagesOf, partition } from "./corpus.js";
import {
  HashTextBackend,
  HashVisionBackend,
  TextBackend,
  VisionBackend,
  extractGeoFeatures,
  extractObjectFeatures,
  extractPlacesFeatures,
  extractTextEmbedding,
} from "./encoders.js";
import { decodePng } from "./png.js";
import {
  Article,
  DENSE_FEATURES,
  DenseFeature,
  ExtractionManifest,
  FEATURE_DIMS,
  FlaggedArticle,
} from "./types.js";

export interface ArticleFeatures {
  objects?: Float64Array;
  places?: Float64Array;
  geolocation?: Float64Array;
  text_embedding?: Float64Array;
}

export interface ExtractionResult {
  features: Map<string, ArticleFeatures>;
  annotations: Map<string, AnnotationLists>;
  flagged: FlaggedArticle[];
  manifest: ExtractionManifest;
}

export interface ExtractOptions {
  imagesDir: string;
  objects?: VisionBackend;
  places?: VisionBackend;
  geolocation?: VisionBackend;
  text?: TextBackend;
  linker?: LinkerClient;
  batchSize?: number;
  linkAttempts?: number;
}

/** Extract all features and annotations, flagging articles that fail. */
export async function extractCorpus(
  articles: Article[],
  options: ExtractOptions,
): Promise<ExtractionResult> {
  const objects = options.objects ?? new HashVisionBackend("objects");
  const places = options.places ?? new HashVisionBackend("places");
  const geolocation = options.geolocation ?? new HashVisionBackend("geolocation");
  const text = options.text ?? new HashTextBackend();
  const linker = options.linker ?? new GazetteerLinker({});
  const batchSize = options.batchSize ?? 8;
  if (batchSize < 1) {
    throw new RangeError(`batch size must be at least 1, got ${batchSize}`);
  }

  const startedAt = new Date().toISOString();
  const features = new Map<string, ArticleFeatures>();
  const annotations = new Map<string, AnnotationLists>();
  const flagged: FlaggedArticle[] = [];

  const processOne = async (article: Article) => {
    const mine: ArticleFeatures = {};

    try {
      const image = decodePng(readFileSync(path.join(options.imagesDir, article.image_ref)));
      mine.objects = extractObjectFeatures(image, objects);
      mine.places = extractPlacesFeatures(image, places);
      mine.geolocation = extractGeoFeatures(image, geolocation);
    } catch (exc) {
      flagged.push({ article_id: article.id, reason: `image: ${(exc as Error).message}` });
    }

    const body = canonicalText(article);
    mine.text_embedding = extractTextEmbedding(body, text);
    features.set(article.id, mine);

    try {
      annotations.set(
        article.id,
        await annotateEntities(body, article.language, linker, options.linkAttempts),
      );
    } catch (exc) {
      flagged.push({ article_id: article.id, reason: `linking: ${(exc as Error).message}` });
    }
  };

  for (let i = 0; i < articles.length; i += batchSize) {
    await Promise.all(articles.slice(i, i + batchSize).map(processOne));
  }

  flagged.sort((a, b) => (a.article_id < b.article_id ? -1 : a.article_id > b.article_id ? 1 : 0));
  const manifest: ExtractionManifest = {
    models: {
      objects: { id: objects.id, version: objects.version },
      places: { id: places.id, version: places.version },
      geolocation: { id: geolocation.id, version: geolocation.version },
      text_embedding: { id: text.id, version: text.version },
      annotator: { id: linker.id, version: linker.version },
    },
    dims: { ...FEATURE_DIMS },
    corpus_digest: corpusDigest(articles),
    started_at: startedAt,
    finished_at: new Date().toISOString(),
    flagged,
  };
  return { features, annotations, flagged, manifest };
}

/** JSON with recursively sorted object keys, for byte-stable files. */
function stringifySorted(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stringifySorted).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const body = Object.keys(value)
      .sort()
      .map((k) => `${JSON.stringify(k)}:${stringifySorted((value as Record<string, unknown>)[k])}`);
    return `{${body.join(",")}}`;
  }
  return JSON.stringify(value);
}

/**
 * Write feature files, the annotation file, and the extraction manifest.
 *
 * Layout matches what the retrieval engine loads: one
 * `features/<language>/<feature>.jsonl` per language and feature (header
 * record then one vector record per article in ascending id order) and a
 * single `annotations.jsonl`.  Articles missing a vector are skipped; the
 * engine's validator reports those gaps.
 */
export function writeOutputs(
  result: ExtractionResult,
  articles: Article[],
  outDir: string,
): string[] {
  const written: string[] = [];
  const byId = new Map(articles.map((a) => [a.id, a]));

  for (const language of languagesOf(articles)) {
    const ids = partition(articles, language);
    const dir = path.join(outDir, "features", language);
    mkdirSync(dir, { recursive: true });
    for (const feature of DENSE_FEATURES) {
      const rows = ids.filter((id) => result.features.get(id)?.[feature] !== undefined);
      const lines = [
        stringifySorted({
          count: rows.length,
          dim: FEATURE_DIMS[feature],
          feature,
          language,
        }),
      ];
      for (const id of rows) {
        const vector = result.features.get(id)![feature]!;
        lines.push(stringifySorted({ article_id: id, vector: Array.from(vector) }));
      }
      const file = path.join(dir, `${feature}.jsonl`);
      writeFileSync(file, lines.join("\n") + "\n", "utf-8");
      written.push(file);
    }
  }

  const annotationLines: string[] = [];
  for (const id of [...byId.keys()].sort()) {
    const lists = result.annotations.get(id);
    if (!lists) continue;
    annotationLines.push(
      stringifySorted({ article_id: id, ner: lists.ner, candidates: lists.candidates }),
    );
  }
  mkdirSync(outDir, { recursive: true });
  const annotationsFile = path.join(outDir, "annotations.jsonl");
  writeFileSync(annotationsFile, annotationLines.join("\n") + "\n", "utf-8");
  written.push(annotationsFile);

  const manifestFile = path.join(outDir, "extraction-manifest.json");
  writeFileSync(manifestFile, JSON.stringify(result.manifest, null, 2) + "\n", "utf-8");
  written.push(manifestFile);
  return written;
}

export type { DenseFeature };
