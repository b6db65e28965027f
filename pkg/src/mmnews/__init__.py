"""Multimodal news retrieval engine and ablation-evaluation harness."""

from .corpus import (
    Article,
    Corpus,
    CorpusError,
    DOMAINS,
    LANGUAGES,
    load_corpus,
    serialize_corpus,
    text_of,
)
from .entities import (
    AnnotationError,
    ArticleAnnotations,
    EntityVocabulary,
    LinkedEntity,
    LinkerCandidate,
    NerSpan,
    build_vocabulary,
    entity_vector,
    load_annotations,
    merge_annotations,
    write_annotations,
)
from .evaluation import (
    APResult,
    CONFIG_CODES,
    CONFIG_FEATURES,
    CONFIG_LABELS,
    DomainScore,
    EvaluationError,
    EvaluationReport,
    EventScore,
    QueryScore,
    RankedEntry,
    RankedList,
    average_precision,
    canonical_config,
    evaluate,
    load_report,
    rank_for_query,
    recall_steps,
    render_report,
    resolve_configs,
    run_identifier,
    save_figures,
    to_percent,
    write_report,
)
from .features import (
    ALL_TAGS,
    DENSE_TAGS,
    ENTITY,
    EXPECTED_DIMS,
    FeatureError,
    FeatureMatrix,
    GEOLOCATION,
    OBJECTS,
    PLACES,
    TEXT_EMBEDDING,
    WINDOW_CHARS,
    WindowSpan,
    article_text_vector,
    load_feature_matrix,
    mean_pool,
    segment_text,
    store_feature_matrix,
)
from .similarity import (
    FUSION_MEAN_OF_FIVE,
    FUSION_MEAN_OF_GROUPS,
    FUSION_MODES,
    PERTURBATION_SCALE,
    SimilarityError,
    SimilarityMatrix,
    cosine,
    fuse,
    perturb_zero_rows,
    similarity_matrix,
)
from .cli import ExperimentConfig, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ALL_TAGS",
    "APResult",
    "AnnotationError",
    "Article",
    "ArticleAnnotations",
    "CONFIG_CODES",
    "CONFIG_FEATURES",
    "CONFIG_LABELS",
    "Corpus",
    "CorpusError",
    "DENSE_TAGS",
    "DOMAINS",
    "DomainScore",
    "ENTITY",
    "EXPECTED_DIMS",
    "EntityVocabulary",
    "EvaluationError",
    "EvaluationReport",
    "EventScore",
    "ExperimentConfig",
    "FUSION_MEAN_OF_FIVE",
    "FUSION_MEAN_OF_GROUPS",
    "FUSION_MODES",
    "FeatureError",
    "FeatureMatrix",
    "GEOLOCATION",
    "LANGUAGES",
    "LinkedEntity",
    "LinkerCandidate",
    "NerSpan",
    "OBJECTS",
    "PERTURBATION_SCALE",
    "PLACES",
    "QueryScore",
    "RankedEntry",
    "RankedList",
    "SimilarityError",
    "SimilarityMatrix",
    "TEXT_EMBEDDING",
    "WINDOW_CHARS",
    "WindowSpan",
    "article_text_vector",
    "average_precision",
    "build_vocabulary",
    "canonical_config",
    "cosine",
    "entity_vector",
    "evaluate",
    "fuse",
    "load_annotations",
    "load_corpus",
    "load_feature_matrix",
    "load_report",
    "mean_pool",
    "merge_annotations",
    "perturb_zero_rows",
    "rank_for_query",
    "recall_steps",
    "render_report",
    "resolve_configs",
    "run_experiment",
    "run_identifier",
    "save_figures",
    "segment_text",
    "serialize_corpus",
    "similarity_matrix",
    "store_feature_matrix",
    "text_of",
    "to_percent",
    "write_annotations",
    "write_report",
]
