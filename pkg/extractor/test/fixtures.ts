/** Shared fixture builders: tiny PNGs and a six-article corpus. */
import { mkdirSync, writeFileSync } from "node:fs";
import * as path from "node:path";
import * as zlib from "node:zlib";

import { LinkResult } from "../src/annotate.js";
import { serializeCorpus } from "../src/corpus.js";
import { Article } from "../src/types.js";

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "latin1");
  const body = Buffer.concat([Buffer.from(type, "latin1"), Buffer.from(data)]);
  const tail = Buffer.alloc(4);
  tail.writeUInt32BE(zlib.crc32(body) >>> 0, 0);
  return Buffer.concat([head, Buffer.from(data), tail]);
}

export type PixelFn = (x: number, y: number) => [number, number, number];

/** Encode an 8-bit RGB PNG with the given per-pixel color function. */
export function makePng(width: number, height: number, pixel: PixelFn): Buffer {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8;
  ihdr[9] = 2;
  const stride = width * 3;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    raw[y * (stride + 1)] = 0;
    for (let x = 0; x < width; x++) {
      const [r, g, b] = pixel(x, y);
      const at = y * (stride + 1) + 1 + x * 3;
      raw[at] = r;
      raw[at + 1] = g;
      raw[at + 2] = b;
    }
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", zlib.deflateSync(raw)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

const FIXTURE_TEMPLATES: Array<Pick<Article, "title" | "body" | "event" | "domain">> = [
  {
    title: "Maria Vogel Opens Coalition Talks",
    body: "Chancellor candidate Maria Vogel met delegates in Berlin to discuss a coalition.",
    event: "autumn-coalition",
    domain: "politics",
  },
  {
    title: "Coalition Talks Stall Over Budget",
    body: "Negotiators for Maria Vogel paused discussions after a dispute over spending.",
    event: "autumn-coalition",
    domain: "politics",
  },
  {
    title: "Parliament Schedules Coalition Vote",
    body: "A confirmation vote on the coalition led by Maria Vogel is set for Friday in Berlin.",
    event: "autumn-coalition",
    domain: "politics",
  },
  {
    title: "River Delta Flooding Displaces Hundreds",
    body: "Rising water in the Elbe delta forced evacuations across three districts.",
    event: "delta-flood",
    domain: "environment",
  },
  {
    title: "Flood Barriers Hold In Delta Towns",
    body: "Engineers reported the Elbe barriers held overnight as the crest passed.",
    event: "delta-flood",
    domain: "environment",
  },
  {
    title: "Cleanup Begins After Delta Flood",
    body: "Volunteers cleared debris along the Elbe after flood waters receded.",
    event: "delta-flood",
    domain: "environment",
  },
];

export function fixtureArticles(): Article[] {
  return FIXTURE_TEMPLATES.map((tpl, i) => ({
    id: `en-${i.toString().padStart(4, "0")}`,
    title: tpl.title,
    body: tpl.body,
    image_ref: `img-${i}.png`,
    event: tpl.event,
    domain: tpl.domain,
    language: "en",
  }));
}

export function fixtureGazetteer(): Record<string, LinkResult> {
  return {
    "Maria Vogel": { entity_iri: "http://example.org/entity/maria-vogel", pagerank: 0.81 },
    Berlin: { entity_iri: "http://example.org/entity/berlin", pagerank: 0.93 },
    Elbe: { entity_iri: "http://example.org/entity/elbe", pagerank: 0.55 },
  };
}

export interface FixtureTree {
  corpusPath: string;
  imagesDir: string;
  outDir: string;
  articles: Article[];
}

/** Write corpus.jsonl and one distinct PNG per article under `root`. */
export function writeFixtureTree(root: string): FixtureTree {
  const articles = fixtureArticles();
  const imagesDir = path.join(root, "images");
  mkdirSync(imagesDir, { recursive: true });
  articles.forEach((article, i) => {
    const png = makePng(8, 8, (x, y) => [
      (i * 40 + 17) % 256,
      (x * 31 + y * 7 + i) % 256,
      (200 - i * 23 + x) % 256,
    ]);
    writeFileSync(path.join(imagesDir, article.image_ref), png);
  });
  const corpusPath = path.join(root, "corpus.jsonl");
  writeFileSync(corpusPath, serializeCorpus(articles), "utf-8");
  return { corpusPath, imagesDir, outDir: path.join(root, "out"), articles };
}
