"""Command-line interface: validate inputs, run experiments, query, re-render.

An experiment is described by a JSON config file whose keys mirror
ExperimentConfig; every value can be overridden by a command-line flag (the
flag wins).  Paths inside the config file are resolved relative to the file,
paths given on the command line relative to the working directory.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, CorpusError, load_corpus, text_of
from .entities import (
    AnnotationError,
    ArticleAnnotations,
    build_vocabulary,
    entity_vector,
    load_annotations,
)
from .evaluation import (
    CONFIG_CODES,
    CONFIG_FEATURES,
    EvaluationReport,
    canonical_config,
    evaluate,
    load_report,
    rank_for_query,
    render_report,
    resolve_configs,
    save_figures,
    write_report,
)
from .features import (
    DENSE_TAGS,
    ENTITY,
    EXPECTED_DIMS,
    FeatureError,
    FeatureMatrix,
    GEOLOCATION,
    OBJECTS,
    PLACES,
    TEXT_EMBEDDING,
    feature_file_path,
    load_feature_matrix,
)
from .similarity import (
    FUSION_MEAN_OF_FIVE,
    FUSION_MEAN_OF_GROUPS,
    FUSION_MODES,
    SimilarityMatrix,
    fuse,
    perturb_zero_rows,
    similarity_matrix,
)

_MAX_SEED = 2**64


class ConfigError(ValueError):
    """Experiment configuration is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: Path
    features_dir: Path
    annotations_path: Path
    output_dir: Path
    seed: int = 0
    configurations: tuple[str, ...] = CONFIG_CODES
    fusion_mode: str = FUSION_MEAN_OF_FIVE
    perturbation: bool = True


_CONFIG_FILE_FIELDS = (
    "corpus_path",
    "features_dir",
    "annotations_path",
    "output_dir",
    "seed",
    "configurations",
    "fusion_mode",
    "perturbation",
)


def load_config_file(path) -> dict:
    """Parse a JSON experiment config; relative paths anchor at the file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_FILE_FIELDS))
    if unknown:
        raise ConfigError(f"{path}: unknown fields: {', '.join(unknown)}")
    base = path.parent
    for key in ("corpus_path", "features_dir", "annotations_path", "output_dir"):
        if key in raw:
            if not isinstance(raw[key], str):
                raise ConfigError(f"{path}: {key} must be a string")
            raw[key] = base / raw[key]
    return raw


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < _MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def resolve_experiment(args, *, need_output: bool = True) -> ExperimentConfig:
    """Merge config file and flags into an ExperimentConfig; flags win."""
    from_file = load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, default=None):
        if flag_value is not None:
            return flag_value
        return from_file.get(key, default)

    def require_path(flag_value, key, flag_name):
        value = pick(flag_value, key)
        if value is None:
            raise ConfigError(f"{key} is required ({flag_name} or config file)")
        return Path(value)

    features = getattr(args, "features", None)
    if features is not None:
        requested = [f for f in features.split(",") if f.strip()]
    else:
        requested = from_file.get("configurations")
    configurations = resolve_configs(requested)

    perturbation = getattr(args, "perturbation", None)
    if perturbation is not None:
        perturbation = perturbation == "on"
    else:
        perturbation = from_file.get("perturbation", True)
        if not isinstance(perturbation, bool):
            raise ConfigError(f"perturbation must be true or false, got {perturbation!r}")

    fusion_mode = pick(getattr(args, "fusion_mode", None), "fusion_mode", FUSION_MEAN_OF_FIVE)
    if fusion_mode not in FUSION_MODES:
        raise ConfigError(
            f"unknown fusion mode {fusion_mode!r}; expected one of {', '.join(FUSION_MODES)}"
        )

    output = pick(getattr(args, "output", None), "output_dir")
    if output is None:
        if need_output:
            raise ConfigError("output_dir is required (--output or config file)")
        output = Path("output")

    return ExperimentConfig(
        corpus_path=require_path(args.corpus, "corpus_path", "--corpus"),
        features_dir=require_path(args.features_dir, "features_dir", "--features-dir"),
        annotations_path=require_path(args.annotations, "annotations_path", "--annotations"),
        output_dir=Path(output),
        seed=_check_seed(pick(getattr(args, "seed", None), "seed", 0)),
        configurations=configurations,
        fusion_mode=fusion_mode,
        perturbation=perturbation,
    )


def entity_feature_matrix(
    corpus: Corpus, annotations: dict[str, ArticleAnnotations], language: str
) -> FeatureMatrix:
    """Binary entity-presence matrix for one language partition."""
    ids = corpus.partition(language)
    missing = [i for i in ids if i not in annotations]
    if missing:
        raise AnnotationError(f"article {missing[0]!r} has no annotation record")
    linked = {i: annotations[i].linked() for i in ids}
    vocab = build_vocabulary(
        (ent.entity_iri for ents in linked.values() for ent in ents), language
    )
    if len(vocab) == 0:
        raise AnnotationError(
            f"no linked entities in the {language!r} partition; "
            "entity configurations are unavailable"
        )
    rows = [entity_vector(linked[i], vocab) for i in ids]
    return FeatureMatrix(feature=ENTITY, language=language, row_ids=ids, rows=np.stack(rows))


def _needed_features(configurations) -> frozenset[str]:
    return frozenset().union(*(CONFIG_FEATURES[c] for c in configurations))


def load_all_features(
    config: ExperimentConfig, corpus: Corpus, languages, needed
) -> dict[str, dict[str, FeatureMatrix]]:
    annotations = load_annotations(config.annotations_path) if ENTITY in needed else {}
    out: dict[str, dict[str, FeatureMatrix]] = {}
    for language in languages:
        per: dict[str, FeatureMatrix] = {}
        for feature in DENSE_TAGS:
            if feature in needed:
                path = feature_file_path(config.features_dir, language, feature)
                per[feature] = load_feature_matrix(path, feature, corpus)
        if ENTITY in needed:
            per[ENTITY] = entity_feature_matrix(corpus, annotations, language)
        out[language] = per
    return out


def compute_similarities(
    config: ExperimentConfig, feature_matrices: dict[str, dict[str, FeatureMatrix]]
) -> dict[str, dict[str, SimilarityMatrix]]:
    """Per-language raw similarity matrices, entity scores perturbed if enabled."""
    out: dict[str, dict[str, SimilarityMatrix]] = {}
    for language, per in feature_matrices.items():
        sims = {feature: similarity_matrix(m) for feature, m in per.items()}
        if config.perturbation and ENTITY in sims:
            sims[ENTITY] = perturb_zero_rows(sims[ENTITY], config.seed)
        out[language] = sims
    return out


def assemble_configuration(
    sims: dict[str, SimilarityMatrix], code: str, fusion_mode: str
) -> SimilarityMatrix:
    """Similarity matrix for one configuration over one language partition."""
    features = CONFIG_FEATURES[code]
    if len(features) == 1:
        (feature,) = features
        return sims[feature]
    if code == "TV" and fusion_mode == FUSION_MEAN_OF_GROUPS:
        text = fuse([sims[TEXT_EMBEDDING], sims[ENTITY]])
        visual = fuse([sims[OBJECTS], sims[PLACES], sims[GEOLOCATION]])
        return fuse([text, visual])
    return fuse([sims[f] for f in sorted(features)])


def run_experiment(config: ExperimentConfig):
    """Execute the full pipeline; returns (report, timings, config matrices)."""
    timings: dict[str, float] = {}
    t = time.perf_counter()
    corpus = load_corpus(config.corpus_path)
    timings["load_corpus"] = time.perf_counter() - t

    needed = _needed_features(config.configurations)
    t = time.perf_counter()
    feature_matrices = load_all_features(config, corpus, corpus.languages, needed)
    timings["load_features"] = time.perf_counter() - t

    t = time.perf_counter()
    sims = compute_similarities(config, feature_matrices)
    matrices = {
        code: {
            language: assemble_configuration(sims[language], code, config.fusion_mode)
            for language in corpus.languages
        }
        for code in config.configurations
    }
    timings["similarity"] = time.perf_counter() - t

    t = time.perf_counter()
    report = evaluate(
        corpus,
        matrices,
        seed=config.seed,
        fusion_mode=config.fusion_mode,
        perturbation=config.perturbation,
    )
    timings["evaluate"] = time.perf_counter() - t
    return report, timings, matrices


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _dump_similarities(matrices, out_dir: Path) -> list[Path]:
    """Write each configuration's score matrix in the feature-file layout."""
    written = []
    for code, per_language in matrices.items():
        for language, m in per_language.items():
            directory = out_dir / language
            directory.mkdir(parents=True, exist_ok=True)
            path = directory / f"{code}.jsonl"
            lines = [
                json.dumps(
                    {
                        "feature": f"similarity:{code}",
                        "language": language,
                        "dim": len(m.ids),
                        "count": len(m.ids),
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
            ]
            for i, article_id in enumerate(m.ids):
                lines.append(
                    json.dumps(
                        {"article_id": article_id, "vector": [float(x) for x in m.scores[i]]},
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                )
            _write_text_atomic(path, "\n".join(lines) + "\n")
            written.append(path)
    return written


def cmd_run(args) -> int:
    config = resolve_experiment(args)
    report, timings, matrices = run_experiment(config)

    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    t = time.perf_counter()
    write_report(report, out / "report.jsonl")
    header = f"run: {report.run_id}\n\n"
    _write_text_atomic(out / "event_table.txt", header + render_report(report, "event-table"))
    _write_text_atomic(out / "domain_table.txt", header + render_report(report, "domain-table"))
    outputs = ["report.jsonl", "event_table.txt", "domain_table.txt"]
    for path in save_figures(report, out / "figures"):
        outputs.append(str(path.relative_to(out)))
    if args.dump_matrices:
        for path in _dump_similarities(matrices, out / "similarity"):
            outputs.append(str(path.relative_to(out)))
    timings["render"] = time.perf_counter() - t

    manifest = {
        "run_id": report.run_id,
        "seed": report.seed,
        "corpus_digest": report.corpus_digest,
        "fusion_mode": report.fusion_mode,
        "perturbation": report.perturbation,
        "configurations": list(report.configurations),
        "languages": list(report.languages),
        "n_queries_scored": len(report.queries),
        "n_queries_unscorable": sum(len(v) for v in report.unscorable.values()),
        "outputs": sorted(outputs),
        "timings_seconds": {k: round(v, 6) for k, v in timings.items()},
    }
    _write_text_atomic(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    for language in report.languages:
        summary = report.language_map(language)
        cells = "  ".join(f"{code}={summary[code]:.4f}" for code in report.configurations)
        print(f"[{language}] mAP over events: {cells}")
    print(f"run {report.run_id}: report written to {out}")
    return 0


def cmd_query(args) -> int:
    config = resolve_experiment(args, need_output=False)
    code = canonical_config(args.configuration)
    corpus = load_corpus(config.corpus_path)
    article = corpus.article(args.article_id)
    language = article.language

    needed = _needed_features([code])
    feature_matrices = load_all_features(config, corpus, [language], needed)
    sims = compute_similarities(config, feature_matrices)
    matrix = assemble_configuration(sims[language], code, config.fusion_mode)

    if args.top_k < 1:
        raise ConfigError(f"--top-k must be at least 1, got {args.top_k}")
    ranked = rank_for_query(matrix, article.id, corpus)
    print(
        f"query {article.id} [{language}] event={article.event} "
        f"domain={article.domain} configuration={code}"
    )
    if ranked.unscorable:
        print("note: no other article covers this event; query is unscorable")
    top = ranked.entries[: args.top_k]
    width = max((len(e.article_id) for e in top), default=10)
    for rank, entry in enumerate(top, start=1):
        mark = "*" if entry.relevant else " "
        event = corpus.article(entry.article_id).event
        print(f"{rank:4d}  {entry.score:.6f}  {mark}  {entry.article_id:<{width}}  {event}")
    return 0


def cmd_report(args) -> int:
    report = load_report(args.report)
    if args.figures:
        for path in save_figures(report, Path(args.report).parent / "figures"):
            print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(render_report(report, args.style, pooled=args.pooled))
    return 0


def _relative_to_parent(path: Path, root: Path) -> str:
    try:
        return str(path.relative_to(root.parent))
    except ValueError:
        return str(path)


def cmd_validate(args) -> int:
    config = resolve_experiment(args, need_output=False)
    checks: list[tuple[str, bool, str]] = []

    corpus = None
    try:
        corpus = load_corpus(config.corpus_path)
        detail = f"{len(corpus.articles)} articles, languages: {', '.join(corpus.languages)}"
        checks.append(("corpus schema", True, detail))
    except (CorpusError, OSError) as exc:
        checks.append(("corpus schema", False, str(exc)))

    if corpus is None:
        checks.append(("event domains", False, "skipped: corpus not loadable"))
    else:
        mapping: dict[str, str] = {}
        clash = None
        for art in corpus.articles:
            known = mapping.setdefault(art.event, art.domain)
            if known != art.domain:
                clash = f"event {art.event!r} spans domains {known!r} and {art.domain!r}"
                break
        if clash:
            checks.append(("event domains", False, clash))
        else:
            domains = sorted(set(mapping.values()))
            checks.append(
                ("event domains", True, f"{len(mapping)} events in domains: {', '.join(domains)}")
            )

    annotations = None
    if corpus is None:
        checks.append(("annotation coverage", False, "skipped: corpus not loadable"))
    else:
        try:
            annotations = load_annotations(config.annotations_path)
            missing = [a.id for a in corpus.articles if a.id not in annotations]
            extra = sorted(set(annotations) - {a.id for a in corpus.articles})
            if missing:
                checks.append(
                    ("annotation coverage", False, f"article {missing[0]!r} has no annotations")
                )
            elif extra:
                checks.append(
                    ("annotation coverage", False, f"annotations for unknown article {extra[0]!r}")
                )
            else:
                n_spans = sum(len(a.ner) for a in annotations.values())
                checks.append(
                    ("annotation coverage", True, f"{len(annotations)} records, {n_spans} spans")
                )
        except (AnnotationError, OSError) as exc:
            checks.append(("annotation coverage", False, str(exc)))

    if corpus is None or annotations is None:
        checks.append(("annotation offsets", False, "skipped: annotations not loadable"))
    else:
        problem = None
        n_checked = 0
        for art in corpus.articles:
            record = annotations.get(art.id)
            if record is None:
                continue
            text = text_of(art)
            try:
                for span in record.ner:
                    span.validate_against(text)
                    n_checked += 1
                for cand in record.candidates:
                    if cand.end > len(text):
                        raise AnnotationError(
                            f"candidate span {cand.start}:{cand.end} exceeds "
                            f"text of article {art.id!r}"
                        )
                    n_checked += 1
            except AnnotationError as exc:
                problem = f"article {art.id!r}: {exc}"
                break
        if problem:
            checks.append(("annotation offsets", False, problem))
        else:
            checks.append(("annotation offsets", True, f"{n_checked} spans within bounds"))

    present: list[tuple[str, str, Path]] = []
    if corpus is None:
        checks.append(("feature files present", False, "skipped: corpus not loadable"))
    else:
        missing_files = []
        for language in corpus.languages:
            for feature in DENSE_TAGS:
                path = feature_file_path(config.features_dir, language, feature)
                if path.is_file():
                    present.append((language, feature, path))
                else:
                    missing_files.append(_relative_to_parent(path, config.features_dir))
        if missing_files:
            checks.append(("feature files present", False, f"missing {missing_files[0]}"))
        else:
            checks.append(("feature files present", True, f"{len(present)} files"))

    if not present:
        checks.append(("feature dimensions", False, "skipped: no feature files"))
        checks.append(("feature coverage", False, "skipped: no feature files"))
        _print_checks(checks)
        return 1

    dim_problem = None
    for language, feature, path in present:
        try:
            with path.open(encoding="utf-8") as fh:
                header = json.loads(fh.readline())
            dim = int(header["dim"])
            expected = EXPECTED_DIMS[feature]
            if dim != expected:
                dim_problem = f"{_relative_to_parent(path, config.features_dir)}: dim {dim} != {expected}"
                break
        except (OSError, ValueError, KeyError, TypeError) as exc:
            dim_problem = f"{_relative_to_parent(path, config.features_dir)}: unreadable manifest ({exc})"
            break
    if dim_problem:
        checks.append(("feature dimensions", False, dim_problem))
    else:
        dims = ", ".join(f"{f}={EXPECTED_DIMS[f]}" for f in DENSE_TAGS)
        checks.append(("feature dimensions", True, dims))

    coverage_problem = None
    for language, feature, path in present:
        try:
            load_feature_matrix(path, feature, corpus)
        except FeatureError as exc:
            coverage_problem = str(exc)
            break
    if coverage_problem:
        checks.append(("feature coverage", False, coverage_problem))
    else:
        checks.append(
            ("feature coverage", True, f"every article has all {len(DENSE_TAGS)} dense features")
        )

    return _print_checks(checks)


def _print_checks(checks) -> int:
    passed = 0
    for name, ok, detail in checks:
        status = "ok  " if ok else "FAIL"
        print(f"{status}  {name}: {detail}")
        passed += ok
    print(f"{passed}/{len(checks)} checks passed")
    return 0 if passed == len(checks) else 1


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON experiment config file")
    parser.add_argument("--corpus", help="corpus.jsonl path (overrides config)")
    parser.add_argument("--features-dir", dest="features_dir", help="feature-file root")
    parser.add_argument("--annotations", help="annotations.jsonl path")
    parser.add_argument("--fusion-mode", dest="fusion_mode", choices=FUSION_MODES)
    parser.add_argument("--seed", type=int, help="unsigned 64-bit run seed")
    parser.add_argument(
        "--perturbation", choices=("on", "off"), help="tie-breaking of all-zero entity scores"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmnews",
        description="Multimodal news retrieval engine and ablation-evaluation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check corpus, annotations, and feature files")
    _add_input_flags(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="run the retrieval evaluation and write reports")
    _add_input_flags(p_run)
    p_run.add_argument("--features", help="comma-separated configuration list (default: all)")
    p_run.add_argument("--output", help="output directory")
    p_run.add_argument(
        "--dump-matrices", action="store_true", help="also write per-configuration score matrices"
    )
    p_run.set_defaults(func=cmd_run)

    p_query = sub.add_parser("query", help="rank a partition against one query article")
    _add_input_flags(p_query)
    p_query.add_argument("article_id")
    p_query.add_argument(
        "--configuration", "-C", default="TV", help="configuration code (default: TV)"
    )
    p_query.add_argument("--top-k", dest="top_k", type=int, default=10)
    p_query.set_defaults(func=cmd_query)

    p_report = sub.add_parser("report", help="re-render a machine report")
    p_report.add_argument("report", help="path to report.jsonl")
    p_report.add_argument(
        "--style",
        choices=("event-table", "domain-table", "machine"),
        default="event-table",
    )
    p_report.add_argument(
        "--pooled", action="store_true", help="domain table from query-pooled means"
    )
    p_report.add_argument(
        "--figures", action="store_true", help="also render figures next to the report"
    )
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
