"""Dense feature storage, sliding-window segmentation, and mean pooling.

Feature files are line-delimited: the first line is a manifest record
(feature tag, language, dim, count), followed by one ``{"article_id", "vector"}``
record per article.  Floats are serialized with round-trip-exact decimal
formatting, so a store/load cycle is bit-exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus

WINDOW_CHARS = 1500

OBJECTS = "objects"
PLACES = "places"
GEOLOCATION = "geolocation"
TEXT_EMBEDDING = "text_embedding"
ENTITY = "entity"

DENSE_TAGS = (OBJECTS, PLACES, GEOLOCATION, TEXT_EMBEDDING)
ALL_TAGS = DENSE_TAGS + (ENTITY,)

# Fixed dimensionality per dense feature; the entity dim is the vocabulary size.
EXPECTED_DIMS = {OBJECTS: 2048, PLACES: 2048, GEOLOCATION: 2048, TEXT_EMBEDDING: 768}


class FeatureError(ValueError):
    """Feature file or matrix violates its contract."""


@dataclass(frozen=True)
class WindowSpan:
    start: int
    end: int


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-per-article feature stack for one language partition.

    ``row_ids`` equals the corpus language partition (lexicographic by id),
    so row k of every feature matrix describes the same article.
    """

    feature: str
    language: str
    row_ids: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        if self.feature not in ALL_TAGS:
            raise FeatureError(f"unknown feature tag {self.feature!r}")
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2:
            raise FeatureError(f"{self.feature}: rows must be a 2-d matrix")
        if rows.shape[0] != len(self.row_ids):
            raise FeatureError(
                f"{self.feature}: {rows.shape[0]} rows for {len(self.row_ids)} article ids"
            )
        if rows.shape[1] < 1:
            raise FeatureError(f"{self.feature}: zero-dimensional vectors")
        expected = EXPECTED_DIMS.get(self.feature)
        if expected is not None and rows.shape[1] != expected:
            raise FeatureError(
                f"{self.feature}: dimension {rows.shape[1]} != expected {expected}"
            )
        if not np.all(np.isfinite(rows)):
            raise FeatureError(f"{self.feature}: non-finite component")

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])


def segment_text(text: str) -> list[WindowSpan]:
    """Tile a text into contiguous windows of at most WINDOW_CHARS characters.

    Windows are non-overlapping and cover the whole text; only the last
    window may be shorter than WINDOW_CHARS.
    """
    if not text:
        raise FeatureError("cannot segment empty text")
    return [
        WindowSpan(start, min(start + WINDOW_CHARS, len(text)))
        for start in range(0, len(text), WINDOW_CHARS)
    ]


def mean_pool(vectors: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Componentwise arithmetic mean of equal-dimension vectors."""
    try:
        stack = np.asarray(vectors, dtype=np.float64)
    except ValueError:
        raise FeatureError("mean_pool: vectors have mismatched dimensions") from None
    if stack.ndim != 2 or stack.shape[0] == 0:
        raise FeatureError("mean_pool requires a non-empty sequence of equal-dim vectors")
    if not np.all(np.isfinite(stack)):
        raise FeatureError("mean_pool: non-finite component")
    return stack.sum(axis=0) / stack.shape[0]


def article_text_vector(window_vectors: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Pool per-window text vectors into one article-level vector (unweighted mean)."""
    return mean_pool(window_vectors)


def load_feature_matrix(path, feature: str, corpus: Corpus) -> FeatureMatrix:
    """Load a feature file and align its rows to the corpus language partition.

    Rejects manifest/vector dimension mismatches, article ids unknown to the
    corpus, missing articles, and non-finite components.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise FeatureError(f"{path}: missing manifest record")
        try:
            header = json.loads(header_line)
            tag, language = header["feature"], header["language"]
            dim, count = int(header["dim"]), int(header["count"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FeatureError(f"{path}:1: malformed manifest record: {exc}") from None
        if tag != feature:
            raise FeatureError(f"{path}: manifest feature {tag!r} != requested {feature!r}")
        expected = EXPECTED_DIMS.get(feature)
        if expected is not None and dim != expected:
            raise FeatureError(f"{path}: manifest dim {dim} != expected {expected} for {feature}")
        ids = corpus.partition(language)
        id_set = set(ids)
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                article_id = record["article_id"]
                vec = np.asarray(record["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FeatureError(f"{path}:{lineno}: malformed vector record: {exc}") from None
            if article_id not in id_set:
                raise FeatureError(f"{path}:{lineno}: unknown article id {article_id!r}")
            if article_id in vectors:
                raise FeatureError(f"{path}:{lineno}: duplicate vector for {article_id!r}")
            if vec.ndim != 1 or vec.size != dim:
                raise FeatureError(
                    f"{path}:{lineno}: vector for {article_id!r} has dim {vec.size}, expected {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise FeatureError(f"{path}:{lineno}: non-finite component for {article_id!r}")
            vectors[article_id] = vec
    missing = [i for i in ids if i not in vectors]
    if missing:
        raise FeatureError(f"{path}: no vector for article {missing[0]!r} ({len(missing)} missing)")
    if count != len(vectors):
        raise FeatureError(f"{path}: manifest count {count} != {len(vectors)} records")
    rows = np.vstack([vectors[i] for i in ids])
    return FeatureMatrix(feature=feature, language=language, row_ids=ids, rows=rows)


def store_feature_matrix(matrix: FeatureMatrix, path) -> None:
    """Write a feature file; inverse of load_feature_matrix (bit-exact round trip)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "feature": matrix.feature,
            "language": matrix.language,
            "dim": matrix.dim,
            "count": len(matrix.row_ids),
        }
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")))
        fh.write("\n")
        for article_id, row in zip(matrix.row_ids, matrix.rows):
            record = {"article_id": article_id, "vector": [float(x) for x in row]}
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def feature_file_path(features_dir, language: str, feature: str) -> Path:
    return Path(features_dir) / language / f"{feature}.jsonl"


def write_dir_manifest(features_dir, language: str, entries: dict[str, dict]) -> None:
    """Write the per-directory manifest.json summarizing the language's feature files."""
    directory = Path(features_dir) / language
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"language": language, "features": entries}
    with (directory / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_dir_manifest(features_dir, language: str) -> dict:
    path = Path(features_dir) / language / "manifest.json"
    if not path.is_file():
        raise FeatureError(f"missing feature manifest {path}")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)
