"""Entity span merging, disambiguation, vocabularies, and binary presence vectors.

Named-entity spans and linker candidates arrive precomputed in annotation
files; this module only merges them.  A span yields a linked entity when the
recognizer and the linker agree on the exact character offsets, and among
several candidates at one span the highest-pagerank one wins.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np


class AnnotationError(ValueError):
    """Annotation record or span violates its contract."""


@dataclass(frozen=True)
class NerSpan:
    start: int
    end: int
    surface: str

    def __post_init__(self):
        _check_offsets(self.start, self.end, "ner")

    def validate_against(self, text: str) -> None:
        if not (0 <= self.start < self.end <= len(text)):
            raise AnnotationError(f"span ({self.start}, {self.end}) out of bounds for text of length {len(text)}")
        if text[self.start:self.end] != self.surface:
            raise AnnotationError(
                f"span ({self.start}, {self.end}): surface {self.surface!r} "
                f"!= text slice {text[self.start:self.end]!r}"
            )


@dataclass(frozen=True)
class LinkerCandidate:
    start: int
    end: int
    entity_iri: str
    pagerank: float

    def __post_init__(self):
        _check_offsets(self.start, self.end, "candidate")


@dataclass(frozen=True)
class LinkedEntity:
    start: int
    end: int
    entity_iri: str


@dataclass(frozen=True)
class EntityVocabulary:
    """Ordered universe of distinct entity IRIs for one language."""

    language: str
    entries: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {iri: k for k, iri in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, iri: str) -> int:
        try:
            return self._index[iri]
        except KeyError:
            raise AnnotationError(
                f"entity {iri!r} not in the {self.language} vocabulary (stale vocabulary?)"
            ) from None


def _check_offsets(start: int, end: int, kind: str) -> None:
    if start < 0 or start >= end:
        raise AnnotationError(f"invalid {kind} span ({start}, {end}): start must satisfy 0 <= start < end")


def merge_annotations(
    ner: Iterable[NerSpan], candidates: Iterable[LinkerCandidate]
) -> list[LinkedEntity]:
    """Resolve linked entities where recognizer and linker agree on a span.

    A span counts as agreed only on exact (start, end) equality.  At each
    agreed span the candidate with the highest pagerank wins; pagerank ties
    go to the lexicographically smallest IRI.  Output is sorted by offset.
    """
    best: dict[tuple[int, int], LinkerCandidate] = {}
    for cand in candidates:
        key = (cand.start, cand.end)
        cur = best.get(key)
        if (
            cur is None
            or cand.pagerank > cur.pagerank
            or (cand.pagerank == cur.pagerank and cand.entity_iri < cur.entity_iri)
        ):
            best[key] = cand
    spans = {(span.start, span.end) for span in ner}
    merged = [
        LinkedEntity(start, end, best[(start, end)].entity_iri)
        for (start, end) in spans
        if (start, end) in best
    ]
    merged.sort(key=lambda e: (e.start, e.end))
    return merged


def build_vocabulary(iris: Iterable[str], language: str) -> EntityVocabulary:
    """Sorted, de-duplicated entity universe for one language partition."""
    return EntityVocabulary(language=language, entries=tuple(sorted(set(iris))))


def entity_vector(entities: Iterable[LinkedEntity | str], vocab: EntityVocabulary) -> np.ndarray:
    """Binary presence vector over the vocabulary; mention multiplicity is ignored."""
    bits = np.zeros(len(vocab), dtype=np.float64)
    for ent in entities:
        iri = ent.entity_iri if isinstance(ent, LinkedEntity) else ent
        bits[vocab.index_of(iri)] = 1.0
    return bits


@dataclass(frozen=True)
class ArticleAnnotations:
    article_id: str
    ner: tuple[NerSpan, ...]
    candidates: tuple[LinkerCandidate, ...]

    def linked(self) -> list[LinkedEntity]:
        return merge_annotations(self.ner, self.candidates)


def load_annotations(path) -> dict[str, ArticleAnnotations]:
    """Read per-article annotation records from a line-delimited file."""
    path = Path(path)
    out: dict[str, ArticleAnnotations] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                article_id = record["article_id"]
                ner = tuple(
                    NerSpan(int(s["start"]), int(s["end"]), s["surface"]) for s in record["ner"]
                )
                cands = tuple(
                    LinkerCandidate(int(c["start"]), int(c["end"]), c["entity_iri"], float(c["pagerank"]))
                    for c in record["candidates"]
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise AnnotationError(f"{path}:{lineno}: malformed annotation record: {exc}") from None
            if article_id in out:
                raise AnnotationError(f"{path}:{lineno}: duplicate annotations for {article_id!r}")
            out[article_id] = ArticleAnnotations(article_id, ner, cands)
    return out


def write_annotations(records: Iterable[ArticleAnnotations], path) -> None:
    """Write annotation records in the exchange format; inverse of load_annotations."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "article_id": rec.article_id,
                "ner": [{"start": s.start, "end": s.end, "surface": s.surface} for s in rec.ner],
                "candidates": [
                    {"start": c.start, "end": c.end, "entity_iri": c.entity_iri, "pagerank": c.pagerank}
                    for c in rec.candidates
                ],
            }
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
            fh.write("\n")
