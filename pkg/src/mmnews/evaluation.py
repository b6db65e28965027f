"""Leave-one-out ranking, Average Precision, and score aggregation.

Every article in a language partition serves once as a query; the remaining
articles of that partition are ranked by similarity.  An article is relevant
iff it covers the query's event.  AP is the non-interpolated form: the mean,
over relevant ranks k, of precision at k.  Event scores average their member
queries, domain scores average their member events, and the whole grid is
repeated for each retrieval configuration.
"""
from __future__ import annotations

import hashlib
import json
import math
import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import DOMAINS, Corpus
from .features import ENTITY, GEOLOCATION, OBJECTS, PLACES, TEXT_EMBEDDING
from .similarity import FUSION_MEAN_OF_FIVE, SimilarityMatrix

REPORT_FORMAT = "mmnews-report"
REPORT_VERSION = 1

# Canonical configuration order; also the column order of rendered tables.
CONFIG_CODES = ("B", "E", "Tbar", "O", "P", "L", "Vbar", "TV")

CONFIG_FEATURES: dict[str, frozenset[str]] = {
    "B": frozenset({TEXT_EMBEDDING}),
    "E": frozenset({ENTITY}),
    "Tbar": frozenset({TEXT_EMBEDDING, ENTITY}),
    "O": frozenset({OBJECTS}),
    "P": frozenset({PLACES}),
    "L": frozenset({GEOLOCATION}),
    "Vbar": frozenset({OBJECTS, PLACES, GEOLOCATION}),
    "TV": frozenset({TEXT_EMBEDDING, ENTITY, OBJECTS, PLACES, GEOLOCATION}),
}

TEXT_CONFIGS = ("B", "E", "Tbar")
VISUAL_CONFIGS = ("O", "P", "L", "Vbar")

# Event-table column labels; the all-features column is titled "Mean".
CONFIG_LABELS: dict[str, str] = {
    "B": "B",
    "E": "E",
    "Tbar": "T̄",
    "O": "O",
    "P": "P",
    "L": "L",
    "Vbar": "V̄",
    "TV": "Mean",
}

# The modality-comparison table spells the combined column out instead.
_DOMAIN_TABLE_LABELS = {**CONFIG_LABELS, "TV": "T+V"}
_DOMAIN_TABLE_CODES = ("Tbar", "Vbar", "TV")

_ALIASES: dict[str, str] = {
    "b": "B",
    "e": "E",
    "t": "Tbar",
    "tbar": "Tbar",
    "t̄": "Tbar",
    "o": "O",
    "p": "P",
    "l": "L",
    "v": "Vbar",
    "vbar": "Vbar",
    "v̄": "Vbar",
    "tv": "TV",
    "t+v": "TV",
    "mean": "TV",
    "all": "TV",
}

REPORT_STYLES = ("event-table", "domain-table", "machine")


class EvaluationError(ValueError):
    """Evaluation input or report file is inconsistent."""


def canonical_config(name: str) -> str:
    """Resolve a user-facing configuration spelling to its canonical code."""
    code = _ALIASES.get(str(name).strip().lower())
    if code is None:
        raise EvaluationError(
            f"unknown configuration {name!r}; expected one of {', '.join(CONFIG_CODES)}"
        )
    return code


def resolve_configs(names: Iterable[str] | None) -> tuple[str, ...]:
    """Canonicalize configuration names, deduplicated, in report order."""
    if not names:
        return CONFIG_CODES
    requested = {canonical_config(n) for n in names}
    return tuple(c for c in CONFIG_CODES if c in requested)


@dataclass(frozen=True)
class RankedEntry:
    article_id: str
    score: float
    relevant: bool


@dataclass(frozen=True)
class RankedList:
    """One query's ranking over the rest of its language partition.

    Entries are sorted by score descending, ties broken by article id
    ascending; the query itself never appears.
    """

    query_id: str
    language: str
    entries: tuple[RankedEntry, ...]

    @property
    def n_relevant(self) -> int:
        return sum(1 for e in self.entries if e.relevant)

    @property
    def unscorable(self) -> bool:
        return self.n_relevant == 0

    def order(self) -> tuple[str, ...]:
        return tuple(e.article_id for e in self.entries)


@dataclass(frozen=True)
class APResult:
    query_id: str
    ap: float
    n_relevant: int


def rank_for_query(m: SimilarityMatrix, query_id: str, corpus: Corpus) -> RankedList:
    """Rank every other article of the query's partition by similarity."""
    qi = m.index_of(query_id)
    query_event = corpus.article(query_id).event
    scored = [
        (article_id, float(m.scores[qi, i]))
        for i, article_id in enumerate(m.ids)
        if i != qi
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    entries = tuple(
        RankedEntry(article_id, score, corpus.article(article_id).event == query_event)
        for article_id, score in scored
    )
    return RankedList(query_id=query_id, language=m.language, entries=entries)


def average_precision(r: RankedList) -> APResult:
    """Mean of precision-at-k over the relevant ranks k."""
    n_relevant = r.n_relevant
    if n_relevant == 0:
        raise EvaluationError(f"query {r.query_id!r} has no relevant articles (unscorable)")
    hits = 0
    total = 0.0
    for rank, entry in enumerate(r.entries, start=1):
        if entry.relevant:
            hits += 1
            total += hits / rank
    return APResult(query_id=r.query_id, ap=total / n_relevant, n_relevant=n_relevant)


def recall_steps(r: RankedList) -> list[Fraction]:
    """Per-rank recall increments as exact rationals; they sum to 1."""
    n_relevant = r.n_relevant
    if n_relevant == 0:
        raise EvaluationError(f"query {r.query_id!r} has no relevant articles (unscorable)")
    return [Fraction(1 if e.relevant else 0, n_relevant) for e in r.entries]


def _ap_from_relevance(rel: np.ndarray) -> float:
    """AP of a relevance vector already in rank order."""
    n_relevant = int(rel.sum())
    ranks = np.arange(1, rel.size + 1, dtype=np.float64)
    cum = np.cumsum(rel, dtype=np.float64)
    return float((cum[rel] / ranks[rel]).sum() / n_relevant)


@dataclass(frozen=True)
class QueryScore:
    query_id: str
    language: str
    event: str
    domain: str
    n_relevant: int
    ap: dict[str, float]


@dataclass(frozen=True)
class EventScore:
    event: str
    domain: str
    language: str
    n_queries: int
    n_unscorable: int
    ap: dict[str, float]


@dataclass(frozen=True)
class DomainScore:
    domain: str
    language: str
    n_events: int
    ap: dict[str, float]
    ap_pooled: dict[str, float]


@dataclass(frozen=True)
class EvaluationReport:
    """Full grid of query, event, and domain scores for one run."""

    run_id: str
    seed: int
    corpus_digest: str
    fusion_mode: str
    perturbation: bool
    configurations: tuple[str, ...]
    languages: tuple[str, ...]
    queries: tuple[QueryScore, ...]
    events: tuple[EventScore, ...]
    domains: tuple[DomainScore, ...]
    unscorable: dict[str, tuple[str, ...]]

    def language_map(self, language: str) -> dict[str, float]:
        """Mean AP over the language's scored events, per configuration."""
        rows = [e for e in self.events if e.language == language]
        if not rows:
            raise EvaluationError(f"no scored events for language {language!r}")
        return {
            code: float(np.mean([e.ap[code] for e in rows]))
            for code in self.configurations
        }


def run_identifier(
    seed: int,
    corpus_digest: str,
    configurations: Sequence[str],
    fusion_mode: str,
    perturbation: bool,
) -> str:
    """Content hash identifying a run; independent of wall-clock and paths."""
    payload = json.dumps(
        {
            "configurations": list(configurations),
            "corpus_digest": corpus_digest,
            "fusion_mode": fusion_mode,
            "perturbation": perturbation,
            "seed": seed,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def evaluate(
    corpus: Corpus,
    matrices: Mapping[str, Mapping[str, SimilarityMatrix]],
    *,
    seed: int,
    fusion_mode: str = FUSION_MEAN_OF_FIVE,
    perturbation: bool = True,
) -> EvaluationReport:
    """Score every configuration over every language partition.

    ``matrices`` maps configuration code -> language -> similarity matrix;
    each matrix's id order must equal the corpus partition exactly.
    """
    configurations = tuple(c for c in CONFIG_CODES if c in matrices)
    if len(configurations) != len(matrices):
        unknown = sorted(set(matrices) - set(CONFIG_CODES))
        raise EvaluationError(f"unknown configuration codes: {unknown}")
    if not configurations:
        raise EvaluationError("no configurations to evaluate")
    languages = corpus.languages

    queries: list[QueryScore] = []
    events: list[EventScore] = []
    domains: list[DomainScore] = []
    unscorable: dict[str, tuple[str, ...]] = {}

    for language in languages:
        ids = corpus.partition(language)
        n = len(ids)
        for code in configurations:
            per_language = matrices[code]
            if language not in per_language:
                raise EvaluationError(f"configuration {code!r} missing a matrix for {language!r}")
            if per_language[language].ids != ids:
                raise EvaluationError(
                    f"configuration {code!r} [{language}]: matrix ids do not match the partition"
                )

        articles = [corpus.article(i) for i in ids]
        event_arr = np.array([a.event for a in articles])
        index = np.arange(n)

        lang_unscorable: list[str] = []
        per_query: dict[str, QueryScore] = {}
        for qi, article in enumerate(articles):
            others = index[index != qi]
            rel_row = event_arr[others] == article.event
            n_relevant = int(rel_row.sum())
            if n_relevant == 0:
                lang_unscorable.append(article.id)
                continue
            ap: dict[str, float] = {}
            for code in configurations:
                row = matrices[code][language].scores[qi, others]
                # ids ascend within a partition, so the positional index is
                # a valid ascending-id tie key.
                order = np.lexsort((others, -row))
                ap[code] = _ap_from_relevance(rel_row[order])
            per_query[article.id] = QueryScore(
                query_id=article.id,
                language=language,
                event=article.event,
                domain=article.domain,
                n_relevant=n_relevant,
                ap=ap,
            )
        unscorable[language] = tuple(lang_unscorable)
        queries.extend(per_query[i] for i in ids if i in per_query)

        by_event: dict[str, list[QueryScore]] = {}
        event_unscorable: dict[str, int] = {}
        for article in articles:
            score = per_query.get(article.id)
            if score is None:
                event_unscorable[article.event] = event_unscorable.get(article.event, 0) + 1
            else:
                by_event.setdefault(article.event, []).append(score)

        lang_events: list[EventScore] = []
        for domain in DOMAINS:
            names = sorted(
                e for e in by_event if corpus.event_domains[e] == domain
            )
            for event in names:
                members = by_event[event]
                lang_events.append(
                    EventScore(
                        event=event,
                        domain=domain,
                        language=language,
                        n_queries=len(members),
                        n_unscorable=event_unscorable.get(event, 0),
                        ap={
                            code: float(np.mean([q.ap[code] for q in members]))
                            for code in configurations
                        },
                    )
                )
        events.extend(lang_events)

        for domain in DOMAINS:
            rows = [e for e in lang_events if e.domain == domain]
            if not rows:
                continue
            pooled = [
                q for e in rows for q in by_event[e.event]
            ]
            domains.append(
                DomainScore(
                    domain=domain,
                    language=language,
                    n_events=len(rows),
                    ap={
                        code: float(np.mean([e.ap[code] for e in rows]))
                        for code in configurations
                    },
                    ap_pooled={
                        code: float(np.mean([q.ap[code] for q in pooled]))
                        for code in configurations
                    },
                )
            )

    digest = corpus.digest()
    return EvaluationReport(
        run_id=run_identifier(seed, digest, configurations, fusion_mode, perturbation),
        seed=seed,
        corpus_digest=digest,
        fusion_mode=fusion_mode,
        perturbation=perturbation,
        configurations=configurations,
        languages=languages,
        queries=tuple(queries),
        events=tuple(events),
        domains=tuple(domains),
        unscorable=unscorable,
    )


def to_percent(value: float) -> int:
    """Scale to percent and round half away from zero."""
    scaled = value * 100.0
    if scaled >= 0.0:
        return int(math.floor(scaled + 0.5))
    return -int(math.floor(-scaled + 0.5))


def _display_width(s: str) -> int:
    return sum(0 if unicodedata.combining(ch) else 1 for ch in s)


def _pad(s: str, width: int, align: str) -> str:
    gap = width - _display_width(s)
    if gap <= 0:
        return s
    return s + " " * gap if align == "<" else " " * gap + s


def _format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    """Align a text table; first two columns left, the rest right."""
    widths = [
        max([_display_width(headers[c])] + [_display_width(r[c]) for r in rows])
        for c in range(len(headers))
    ]
    aligns = ["<" if c < 2 else ">" for c in range(len(headers))]
    lines = ["  ".join(_pad(h, w, a) for h, w, a in zip(headers, widths, aligns))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(_pad(v, w, a) for v, w, a in zip(row, widths, aligns)))
    return lines


def _mark_maxima(cells: Sequence[int]) -> list[str]:
    """Render percent cells, starring every occurrence of the row maximum."""
    top = max(cells)
    return [f"{v}*" if v == top else str(v) for v in cells]


def _event_table(report: EvaluationReport, language: str) -> list[str]:
    headers = ["domain", "event"] + [CONFIG_LABELS[c] for c in report.configurations]
    rows: list[list[str]] = []
    previous_domain = None
    for event in (e for e in report.events if e.language == language):
        cells = [to_percent(event.ap[c]) for c in report.configurations]
        domain_cell = event.domain if event.domain != previous_domain else ""
        rows.append([domain_cell, event.event] + _mark_maxima(cells))
        previous_domain = event.domain
    summary = report.language_map(language)
    rows.append(
        ["", "mean over events"]
        + [str(to_percent(summary[c])) for c in report.configurations]
    )
    lines = [f"Event-level average precision (x100) [{language}]"]
    lines.extend(_format_table(headers, rows))
    return lines


def _domain_table(report: EvaluationReport, pooled: bool) -> list[str]:
    codes = [c for c in _DOMAIN_TABLE_CODES if c in report.configurations]
    if not codes:
        codes = list(report.configurations)
    headers = ["language", "domain"] + [_DOMAIN_TABLE_LABELS[c] for c in codes]
    rows = []
    for domain in report.domains:
        values = domain.ap_pooled if pooled else domain.ap
        cells = [to_percent(values[c]) for c in codes]
        rows.append([domain.language, domain.domain] + _mark_maxima(cells))
    title = "Domain-level average precision (x100)"
    if pooled:
        title += " [query-pooled]"
    return [title] + _format_table(headers, rows)


def _query_record(q: QueryScore) -> dict:
    return {
        "type": "query",
        "query_id": q.query_id,
        "language": q.language,
        "event": q.event,
        "domain": q.domain,
        "n_relevant": q.n_relevant,
        "ap": q.ap,
    }


def _records(report: EvaluationReport) -> list[dict]:
    records: list[dict] = [
        {
            "type": "meta",
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "run_id": report.run_id,
            "seed": report.seed,
            "corpus_digest": report.corpus_digest,
            "fusion_mode": report.fusion_mode,
            "perturbation": report.perturbation,
            "configurations": list(report.configurations),
            "languages": list(report.languages),
        }
    ]
    for language in report.languages:
        scored = [q for q in report.queries if q.language == language]
        records.append(
            {
                "type": "summary",
                "language": language,
                "n_queries": len(scored) + len(report.unscorable[language]),
                "n_scored": len(scored),
                "n_unscorable": len(report.unscorable[language]),
                "unscorable_ids": list(report.unscorable[language]),
                "n_events": sum(1 for e in report.events if e.language == language),
                "map": report.language_map(language),
            }
        )
    for event in report.events:
        records.append(
            {
                "type": "event",
                "event": event.event,
                "domain": event.domain,
                "language": event.language,
                "n_queries": event.n_queries,
                "n_unscorable": event.n_unscorable,
                "ap": event.ap,
            }
        )
    for domain in report.domains:
        records.append(
            {
                "type": "domain",
                "domain": domain.domain,
                "language": domain.language,
                "n_events": domain.n_events,
                "ap": domain.ap,
                "ap_pooled": domain.ap_pooled,
            }
        )
    records.extend(_query_record(q) for q in report.queries)
    return records


def render_report(report: EvaluationReport, style: str, *, pooled: bool = False) -> str:
    """Render to one of the three styles; machine style is line-delimited JSON."""
    if style == "machine":
        return "\n".join(
            json.dumps(r, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
            for r in _records(report)
        ) + "\n"
    if style == "event-table":
        sections = [_event_table(report, language) for language in report.languages]
        return "\n\n".join("\n".join(s) for s in sections) + "\n"
    if style == "domain-table":
        return "\n".join(_domain_table(report, pooled)) + "\n"
    raise EvaluationError(f"unknown report style {style!r}; expected one of {REPORT_STYLES}")


def write_report(report: EvaluationReport, path) -> None:
    """Write the machine-style report atomically."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(render_report(report, "machine"), encoding="utf-8")
    tmp.replace(path)


def load_report(path) -> EvaluationReport:
    """Rebuild an EvaluationReport from a machine-style report file."""
    path = Path(path)
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise EvaluationError(f"{path}:{lineno}: malformed JSON: {exc}") from None
    if not records or records[0].get("type") != "meta":
        raise EvaluationError(f"{path}: first record must be the meta record")
    meta = records[0]
    if meta.get("format") != REPORT_FORMAT:
        raise EvaluationError(f"{path}: not a {REPORT_FORMAT} file")
    if meta.get("version") != REPORT_VERSION:
        raise EvaluationError(f"{path}: unsupported report version {meta.get('version')!r}")

    queries = []
    events = []
    domains = []
    unscorable: dict[str, tuple[str, ...]] = {}
    try:
        for rec in records[1:]:
            kind = rec["type"]
            if kind == "summary":
                unscorable[rec["language"]] = tuple(rec["unscorable_ids"])
            elif kind == "event":
                events.append(
                    EventScore(
                        event=rec["event"],
                        domain=rec["domain"],
                        language=rec["language"],
                        n_queries=rec["n_queries"],
                        n_unscorable=rec["n_unscorable"],
                        ap=rec["ap"],
                    )
                )
            elif kind == "domain":
                domains.append(
                    DomainScore(
                        domain=rec["domain"],
                        language=rec["language"],
                        n_events=rec["n_events"],
                        ap=rec["ap"],
                        ap_pooled=rec["ap_pooled"],
                    )
                )
            elif kind == "query":
                queries.append(
                    QueryScore(
                        query_id=rec["query_id"],
                        language=rec["language"],
                        event=rec["event"],
                        domain=rec["domain"],
                        n_relevant=rec["n_relevant"],
                        ap=rec["ap"],
                    )
                )
            else:
                raise EvaluationError(f"{path}: unknown record type {kind!r}")
        report = EvaluationReport(
            run_id=meta["run_id"],
            seed=meta["seed"],
            corpus_digest=meta["corpus_digest"],
            fusion_mode=meta["fusion_mode"],
            perturbation=meta["perturbation"],
            configurations=tuple(meta["configurations"]),
            languages=tuple(meta["languages"]),
            queries=tuple(queries),
            events=tuple(events),
            domains=tuple(domains),
            unscorable=unscorable,
        )
    except KeyError as exc:
        raise EvaluationError(f"{path}: record missing field {exc}") from None
    return report


def save_figures(report: EvaluationReport, out_dir) -> tuple[Path, ...]:
    """Render per-language heatmap and domain bar-chart PNGs next to the report."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [CONFIG_LABELS[c] for c in report.configurations]
    paths: list[Path] = []

    for language in report.languages:
        rows = [e for e in report.events if e.language == language]
        if not rows:
            continue
        grid = np.array([[e.ap[c] for c in report.configurations] for e in rows])
        height = max(3.0, 0.28 * len(rows) + 1.6)
        fig, ax = plt.subplots(figsize=(0.9 * len(labels) + 4.0, height))
        image = ax.imshow(grid, cmap="viridis", vmin=0.0, vmax=1.0, aspect="auto")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels([f"{e.event} ({e.domain})" for e in rows], fontsize=7)
        ax.set_title(f"Event-level average precision [{language}]")
        fig.colorbar(image, ax=ax, label="AP")
        fig.tight_layout()
        path = out_dir / f"event_ap_{language}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)

        domain_rows = [d for d in report.domains if d.language == language]
        x = np.arange(len(domain_rows))
        width = 0.8 / len(report.configurations)
        fig, ax = plt.subplots(figsize=(1.6 * len(domain_rows) + 3.0, 4.0))
        for j, code in enumerate(report.configurations):
            offsets = x - 0.4 + width * (j + 0.5)
            ax.bar(offsets, [d.ap[code] for d in domain_rows], width, label=CONFIG_LABELS[code])
        ax.set_xticks(x)
        ax.set_xticklabels([d.domain for d in domain_rows])
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("mean AP over events")
        ax.set_title(f"Domain-level average precision [{language}]")
        ax.legend(ncols=min(4, len(report.configurations)), fontsize=8)
        fig.tight_layout()
        path = out_dir / f"domain_ap_{language}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)

    return tuple(paths)
