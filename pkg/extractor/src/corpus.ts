/** Corpus file reading plus the canonical-text and digest conventions. */
import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";

import { Article, ExtractionError } from "./types.js";

const ARTICLE_FIELDS = [
  "id",
  "title",
  "body",
  "image_ref",
  "event",
  "domain",
  "language",
] as const;

export function readCorpus(path: string): Article[] {
  const raw = readFileSync(path, "utf-8");
  const articles: Article[] = [];
  const seen = new Set<string>();
  raw.split("\n").forEach((line, index) => {
    if (!line.trim()) return;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch (exc) {
      throw new ExtractionError(`${path}:${index + 1}: malformed JSON (${exc})`);
    }
    if (typeof record !== "object" || record === null || Array.isArray(record)) {
      throw new ExtractionError(`${path}:${index + 1}: expected an object`);
    }
    const keys = Object.keys(record).sort();
    const expected = [...ARTICLE_FIELDS].sort();
    if (keys.join(",") !== expected.join(",")) {
      throw new ExtractionError(`${path}:${index + 1}: bad fields [${keys.join(", ")}]`);
    }
    for (const field of ARTICLE_FIELDS) {
      if (typeof (record as Record<string, unknown>)[field] !== "string") {
        throw new ExtractionError(`${path}:${index + 1}: ${field} must be a string`);
      }
    }
    const article = record as unknown as Article;
    if (seen.has(article.id)) {
      throw new ExtractionError(`${path}: duplicate article id ${article.id}`);
    }
    seen.add(article.id);
    articles.push(article);
  });
  if (articles.length === 0) {
    throw new ExtractionError(`${path}: empty corpus`);
  }
  articles.sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
  return articles;
}

/** Title, newline, body; title alone when the body is empty. */
export function canonicalText(article: Article): string {
  return article.body ? `${article.title}\n${article.body}` : article.title;
}

/** One article as sorted-key compact JSON, the engine's canonical line form. */
export function canonicalRecord(article: Article): string {
  const sorted: Record<string, string> = {};
  for (const key of Object.keys(article).sort()) {
    sorted[key] = article[key as keyof Article];
  }
  return JSON.stringify(sorted);
}

export function serializeCorpus(articles: Article[]): string {
  return articles.map((a) => canonicalRecord(a) + "\n").join("");
}

/** SHA-256 over canonical article lines; matches the engine's corpus digest. */
export function corpusDigest(articles: Article[]): string {
  const hash = createHash("sha256");
  for (const article of articles) {
    hash.update(canonicalRecord(article), "utf-8");
    hash.update("\n");
  }
  return hash.digest("hex");
}

export function languagesOf(articles: Article[]): string[] {
  return [...new Set(articles.map((a) => a.language))].sort();
}

/** Article ids of one language, ascending: the engine's row order. */
export function partition(articles: Article[], language: string): string[] {
  return articles
    .filter((a) => a.language === language)
    .map((a) => a.id)
    .sort();
}
