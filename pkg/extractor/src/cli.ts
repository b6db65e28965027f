#!/usr/bin/env node
/** Command line front end: corpus + images in, exchange files out. */
import { existsSync, readFileSync } from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { GazetteerLinker, LinkResult } from "./annotate.js";
import { readCorpus } from "./corpus.js";
import { extractCorpus, writeOutputs } from "./outputs.js";
import { ExtractionError } from "./types.js";

function usage(): string {
  return [
    "usage: mmnews-extract --corpus corpus.jsonl --images-dir DIR --out DIR",
    "                      [--models-dir DIR] [--batch-size N] [--languages en,de]",
  ].join("\n");
}

function loadGazetteer(modelsDir: string | undefined): Record<string, LinkResult> {
  if (!modelsDir) return {};
  const table = path.join(modelsDir, "gazetteer.json");
  if (!existsSync(table)) return {};
  const raw = JSON.parse(readFileSync(table, "utf-8"));
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ExtractionError(`${table}: expected an object of surface -> link entries`);
  }
  return raw as Record<string, LinkResult>;
}

export async function main(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      corpus: { type: "string" },
      "images-dir": { type: "string" },
      out: { type: "string" },
      "models-dir": { type: "string" },
      "batch-size": { type: "string", default: "8" },
      languages: { type: "string" },
      help: { type: "boolean", default: false },
    },
  });
  if (values.help) {
    console.log(usage());
    return 0;
  }
  for (const required of ["corpus", "images-dir", "out"] as const) {
    if (!values[required]) {
      console.error(`error: --${required} is required\n${usage()}`);
      return 1;
    }
  }

  const batchSize = Number(values["batch-size"]);
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    console.error(`error: --batch-size must be a positive integer, got ${values["batch-size"]}`);
    return 1;
  }

  let articles = readCorpus(values.corpus!);
  if (values.languages) {
    const keep = new Set(values.languages.split(",").map((s) => s.trim()));
    articles = articles.filter((a) => keep.has(a.language));
    if (articles.length === 0) {
      console.error(`error: no articles left after filtering to languages ${values.languages}`);
      return 1;
    }
  }

  const result = await extractCorpus(articles, {
    imagesDir: values["images-dir"]!,
    linker: new GazetteerLinker(loadGazetteer(values["models-dir"])),
    batchSize,
  });
  const written = writeOutputs(result, articles, values.out!);

  for (const flag of result.flagged) {
    console.error(`flagged ${flag.article_id}: ${flag.reason}`);
  }
  console.log(
    `extracted ${articles.length} articles ` +
      `(${result.flagged.length} flagged) -> ${written.length} files in ${values.out}`,
  );
  return 0;
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : "";
if (entry && import.meta.url.endsWith(path.basename(entry))) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (exc) => {
      console.error(`error: ${exc instanceof Error ? exc.message : exc}`);
      process.exit(1);
    },
  );
}
