"""News corpus loading, validation, and per-language partitioning."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

DOMAINS = ("politics", "environment", "finance", "health", "sport")
LANGUAGES = ("en", "de")

_ARTICLE_FIELDS = ("id", "title", "body", "image_ref", "event", "domain", "language")


class CorpusError(ValueError):
    """Corpus file or record violates the schema."""


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    body: str
    image_ref: str
    event: str
    domain: str
    language: str

    def validate(self) -> None:
        if not self.id:
            raise CorpusError("article id must be non-empty")
        if not self.event:
            raise CorpusError(f"article {self.id!r}: event must be non-empty")
        if self.domain not in DOMAINS:
            raise CorpusError(f"article {self.id!r}: unknown domain {self.domain!r}")
        if self.language not in LANGUAGES:
            raise CorpusError(f"article {self.id!r}: unknown language {self.language!r}")
        if not self.title and not self.body:
            raise CorpusError(f"article {self.id!r}: title and body are both empty")


@dataclass(frozen=True)
class Corpus:
    """Immutable article collection with deterministic per-language id order.

    Articles are stored sorted lexicographically by id, and each language
    partition lists its article ids in that same order.  All downstream
    matrices inherit their row order from these partitions.
    """

    articles: tuple[Article, ...]
    partitions: dict[str, tuple[str, ...]]
    event_domains: dict[str, str]

    @classmethod
    def from_articles(cls, articles) -> "Corpus":
        articles = sorted(articles, key=lambda a: a.id)
        if not articles:
            raise CorpusError("empty corpus")
        seen: set[str] = set()
        partitions: dict[str, list[str]] = {}
        event_domains: dict[str, str] = {}
        for art in articles:
            art.validate()
            if art.id in seen:
                raise CorpusError(f"duplicate article id {art.id!r}")
            seen.add(art.id)
            partitions.setdefault(art.language, []).append(art.id)
            known = event_domains.setdefault(art.event, art.domain)
            if known != art.domain:
                raise CorpusError(
                    f"event {art.event!r} spans domains {known!r} and {art.domain!r}"
                )
        return cls(
            articles=tuple(articles),
            partitions={lang: tuple(ids) for lang, ids in partitions.items()},
            event_domains=event_domains,
        )

    def __post_init__(self):
        object.__setattr__(
            self, "_by_id", {a.id: a for a in self.articles}
        )

    def article(self, article_id: str) -> Article:
        try:
            return self._by_id[article_id]
        except KeyError:
            raise CorpusError(f"unknown article id {article_id!r}") from None

    def partition(self, language: str) -> tuple[str, ...]:
        if language not in self.partitions:
            raise CorpusError(f"no articles in language {language!r}")
        return self.partitions[language]

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self.partitions))

    def events(self, language: str | None = None) -> tuple[str, ...]:
        if language is None:
            return tuple(sorted(self.event_domains))
        return tuple(sorted({self.article(i).event for i in self.partition(language)}))

    def digest(self) -> str:
        """SHA-256 over the canonical serialization, for run manifests."""
        h = hashlib.sha256()
        for art in self.articles:
            h.update(_canonical_record(art).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def _canonical_record(article: Article) -> str:
    return json.dumps(asdict(article), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def text_of(article: Article) -> str:
    """Canonical text of an article: title, newline, body (title alone if body is empty)."""
    if not article.body:
        return article.title
    return article.title + "\n" + article.body


def load_corpus(path) -> Corpus:
    """Load a corpus from a UTF-8 line-delimited record file.

    Each line is one JSON object with exactly the Article fields.  Malformed
    records are reported with their line number; duplicate ids and unknown
    domain/language values are rejected.
    """
    path = Path(path)
    articles: list[Article] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: record is not an object")
            missing = [f for f in _ARTICLE_FIELDS if f not in record]
            extra = [k for k in record if k not in _ARTICLE_FIELDS]
            if missing or extra:
                raise CorpusError(
                    f"{path}:{lineno}: bad fields (missing={missing}, extra={extra})"
                )
            if not all(isinstance(record[f], str) for f in _ARTICLE_FIELDS):
                raise CorpusError(f"{path}:{lineno}: all article fields must be strings")
            art = Article(**record)
            try:
                art.validate()
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
            articles.append(art)
    if not articles:
        raise CorpusError(f"{path}: empty corpus")
    try:
        return Corpus.from_articles(articles)
    except CorpusError as exc:
        raise CorpusError(f"{path}: {exc}") from None


def serialize_corpus(corpus: Corpus, path) -> None:
    """Write a corpus in the exchange format; inverse of load_corpus."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for art in corpus.articles:
            fh.write(_canonical_record(art))
            fh.write("\n")
