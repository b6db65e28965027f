"""Shared builders for synthetic corpora, feature files, and annotation files."""
import json
from pathlib import Path

import numpy as np
import pytest

from mmnews import (
    Article,
    Corpus,
    DENSE_TAGS,
    DOMAINS,
    ENTITY,
    EXPECTED_DIMS,
    FeatureMatrix,
)


def make_article(
    index,
    event,
    domain,
    language,
    title=None,
    body=None,
    image_ref=None,
    article_id=None,
):
    aid = article_id or f"{language}-{index:04d}"
    return Article(
        id=aid,
        title=title if title is not None else f"Topic {event} update {index}",
        body=body if body is not None else f"Report number {index} covering {event}.",
        image_ref=image_ref or f"images/{aid}.png",
        event=event,
        domain=domain,
        language=language,
    )


def build_corpus(n_events, per_language, languages=("en", "de")):
    """n_events events cycling through all domains, per_language articles each."""
    articles = []
    index = 0
    for e in range(n_events):
        event = f"event-{e:02d}"
        domain = DOMAINS[e % len(DOMAINS)]
        for language in languages:
            for _ in range(per_language):
                articles.append(make_article(index, event, domain, language))
                index += 1
    return Corpus.from_articles(articles)


def event_indices(corpus):
    """Stable event -> row position mapping used by the one-hot builders."""
    return {event: k for k, event in enumerate(corpus.events())}


def one_hot_feature_matrices(corpus, language):
    """All five features as per-event one-hot matrices for one partition."""
    ids = corpus.partition(language)
    index = event_indices(corpus)
    matrices = {}
    for feature in DENSE_TAGS:
        rows = np.zeros((len(ids), EXPECTED_DIMS[feature]))
        for r, article_id in enumerate(ids):
            rows[r, index[corpus.article(article_id).event]] = 1.0
        matrices[feature] = FeatureMatrix(
            feature=feature, language=language, row_ids=ids, rows=rows
        )
    rows = np.zeros((len(ids), len(index)))
    for r, article_id in enumerate(ids):
        rows[r, index[corpus.article(article_id).event]] = 1.0
    matrices[ENTITY] = FeatureMatrix(
        feature=ENTITY, language=language, row_ids=ids, rows=rows
    )
    return matrices


def random_feature_matrices(corpus, language, rng, entity_iris_per_article=4, n_iris=40):
    """Dense Gaussian features plus a fixed-cardinality binary entity matrix.

    Every article carries exactly ``entity_iris_per_article`` entity flags, so
    equal overlap counts produce bit-identical cosine values.
    """
    ids = corpus.partition(language)
    matrices = {}
    for feature in DENSE_TAGS:
        rows = rng.standard_normal((len(ids), EXPECTED_DIMS[feature]))
        matrices[feature] = FeatureMatrix(
            feature=feature, language=language, row_ids=ids, rows=rows
        )
    rows = np.zeros((len(ids), n_iris))
    for r in range(len(ids)):
        chosen = rng.choice(n_iris, size=entity_iris_per_article, replace=False)
        rows[r, chosen] = 1.0
    matrices[ENTITY] = FeatureMatrix(
        feature=ENTITY, language=language, row_ids=ids, rows=rows
    )
    return matrices


def write_corpus_file(corpus, path):
    lines = [
        json.dumps(
            {
                "id": a.id,
                "title": a.title,
                "body": a.body,
                "image_ref": a.image_ref,
                "event": a.event,
                "domain": a.domain,
                "language": a.language,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        for a in corpus.articles
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_feature_file(path, feature, language, dim, vectors):
    """vectors: mapping article_id -> list of floats, written in id order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(
            {"feature": feature, "language": language, "dim": dim, "count": len(vectors)}
        )
    ]
    for article_id in sorted(vectors):
        lines.append(
            json.dumps({"article_id": article_id, "vector": list(vectors[article_id])})
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_annotations_file(path, records):
    """records: list of dicts with article_id / ner / candidates keys."""
    lines = [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def event_iri(event):
    return f"http://example.org/entity/{event}"


def simple_annotation_record(article):
    """One span over the leading word 'Topic', linked to the event's IRI."""
    return {
        "article_id": article.id,
        "ner": [{"start": 0, "end": 5, "surface": "Topic"}],
        "candidates": [
            {"start": 0, "end": 5, "entity_iri": event_iri(article.event), "pagerank": 0.5}
        ],
    }


def experiment_tree(tmp_path, corpus, rng=None, round_decimals=None):
    """Write a complete on-disk experiment: corpus, features, annotations, config.

    Dense vectors are Gaussian unless ``rng`` is None, in which case per-event
    one-hot vectors are used.  Returns a dict of the key paths.
    """
    root = Path(tmp_path)
    corpus_path = root / "corpus.jsonl"
    write_corpus_file(corpus, corpus_path)

    features_dir = root / "features"
    index = event_indices(corpus)
    for language in corpus.languages:
        ids = corpus.partition(language)
        for feature in DENSE_TAGS:
            dim = EXPECTED_DIMS[feature]
            vectors = {}
            for article_id in ids:
                if rng is None:
                    vec = np.zeros(dim)
                    vec[index[corpus.article(article_id).event]] = 1.0
                else:
                    vec = rng.standard_normal(dim)
                    if round_decimals is not None:
                        vec = np.round(vec, round_decimals)
                vectors[article_id] = [float(x) for x in vec]
            write_feature_file(
                features_dir / language / f"{feature}.jsonl", feature, language, dim, vectors
            )

    annotations_path = root / "annotations.jsonl"
    write_annotations_file(
        annotations_path, [simple_annotation_record(a) for a in corpus.articles]
    )

    output_dir = root / "output"
    config_path = root / "experiment.json"
    config_path.write_text(
        json.dumps(
            {
                "corpus_path": "corpus.jsonl",
                "features_dir": "features",
                "annotations_path": "annotations.jsonl",
                "output_dir": "output",
                "seed": 7,
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return {
        "root": root,
        "corpus": corpus_path,
        "features_dir": features_dir,
        "annotations": annotations_path,
        "output": output_dir,
        "config": config_path,
    }


@pytest.fixture
def tiny_corpus():
    """Two languages, three events over two domains, eight articles."""
    articles = [
        make_article(0, "flood-2021", "environment", "en"),
        make_article(1, "flood-2021", "environment", "en"),
        make_article(2, "election-x", "politics", "en"),
        make_article(3, "election-x", "politics", "en"),
        make_article(4, "flood-2021", "environment", "de"),
        make_article(5, "flood-2021", "environment", "de"),
        make_article(6, "election-x", "politics", "de"),
        make_article(7, "solo-event", "politics", "de"),
    ]
    return Corpus.from_articles(articles)
