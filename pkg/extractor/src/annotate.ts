/** Rule-based named-entity spans plus a pluggable linking client. */
import { ExtractionError, LinkerCandidate, NerSpan } from "./types.js";

export class LinkingError extends ExtractionError {}

export interface LinkResult {
  entity_iri: string;
  pagerank: number;
}

export interface LinkerClient {
  readonly id: string;
  readonly version: string;
  link(surface: string, language: string): Promise<LinkResult | null>;
}

export const SUPPORTED_LANGUAGES = ["en", "de"] as const;

/** Maximal runs of capitalized words; offsets index the given text. */
export function findNamedEntities(text: string, language: string): NerSpan[] {
  requireLanguage(language);
  const spans: NerSpan[] = [];
  const pattern = /\p{Lu}[\p{L}\p{N}'-]*(?:[ ]\p{Lu}[\p{L}\p{N}'-]*)*/gu;
  for (const match of text.matchAll(pattern)) {
    const surface = match[0];
    const start = match.index;
    spans.push({ start, end: start + surface.length, surface });
  }
  return spans;
}

function requireLanguage(language: string): void {
  if (!SUPPORTED_LANGUAGES.includes(language as never)) {
    throw new ExtractionError(`unsupported language ${JSON.stringify(language)}`);
  }
}

/** Entity linker backed by a fixed surface-form table. */
export class GazetteerLinker implements LinkerClient {
  readonly id = "gazetteer-linker";
  readonly version = "1.0.0";

  constructor(private entries: Record<string, LinkResult>) {}

  async link(surface: string, _language: string): Promise<LinkResult | null> {
    return this.entries[surface] ?? null;
  }
}

export async function withRetries<T>(
  fn: () => Promise<T>,
  attempts = 3,
): Promise<T> {
  let lastError: unknown;
  for (let attempt = 0; attempt < attempts; attempt++) {
    try {
      return await fn();
    } catch (exc) {
      lastError = exc;
    }
  }
  throw new LinkingError(`linking failed after ${attempts} attempts: ${lastError}`);
}

export interface AnnotationLists {
  ner: NerSpan[];
  candidates: LinkerCandidate[];
}

/**
 * Detect entity spans and ask the linker about each; spans the linker does
 * not know stay in `ner` with no candidate.  The span/candidate merge is the
 * consuming engine's job.
 */
export async function annotateEntities(
  text: string,
  language: string,
  linker: LinkerClient,
  attempts = 3,
): Promise<AnnotationLists> {
  requireLanguage(language);
  const ner = findNamedEntities(text, language);
  const candidates: LinkerCandidate[] = [];
  for (const span of ner) {
    const hit = await withRetries(() => linker.link(span.surface, language), attempts);
    if (hit !== null) {
      candidates.push({
        start: span.start,
        end: span.end,
        entity_iri: hit.entity_iri,
        pagerank: hit.pagerank,
      });
    }
  }
  return { ner, candidates };
}
