"""Documents, collection statistics and the immutable inverted index."""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from tfnorm.lm import TopicMeasure, information_quantity_of_counts
from tfnorm.text import Analyzer

logger = logging.getLogger(__name__)

INDEX_FORMAT = "tfnorm-index/1"


class CorpusError(ValueError):
    """Raised for invalid corpus input (duplicates, empty documents, bad records)."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    tf: Mapping[str, int]
    length: int
    vocab_size: int
    info_quantity: float

    @classmethod
    def from_counts(cls, doc_id: str, counts: Mapping[str, int]) -> "Document":
        """Build a document from term counts; zero counts are dropped."""
        if not doc_id:
            raise CorpusError("document id must be non-empty")
        tf = {t: int(c) for t, c in sorted(counts.items()) if c > 0}
        if any(c < 0 for c in counts.values()):
            raise CorpusError(f"document {doc_id!r} has a negative term count")
        if not tf:
            raise CorpusError(f"document {doc_id!r} has no indexable terms")
        return cls(
            doc_id=doc_id,
            tf=MappingProxyType(tf),
            length=sum(tf.values()),
            vocab_size=len(tf),
            info_quantity=information_quantity_of_counts(tf),
        )


@dataclass(frozen=True)
class CollectionStats:
    ctf: Mapping[str, int]
    total_length: int
    doc_count: int
    mean_tau_vocab: float
    mean_tau_info: float

    def mean_tau(self, kind: TopicMeasure | str) -> float:
        kind = TopicMeasure.parse(kind)
        value = self.mean_tau_vocab if kind is TopicMeasure.VOCAB else self.mean_tau_info
        if not value > 0:
            raise ValueError(f"collection statistics carry no mean for topic measure {kind.value!r}")
        return value

    @classmethod
    def from_documents(cls, docs: Iterable[Document]) -> "CollectionStats":
        docs = list(docs)
        if not docs:
            raise CorpusError("cannot compute collection statistics of an empty corpus")
        ctf: Counter[str] = Counter()
        for doc in docs:
            ctf.update(doc.tf)
        n = len(docs)
        # doc-id order keeps the float sums reproducible
        ordered = sorted(docs, key=lambda d: d.doc_id)
        return cls(
            ctf=MappingProxyType(dict(sorted(ctf.items()))),
            total_length=sum(d.length for d in docs),
            doc_count=n,
            mean_tau_vocab=sum(d.vocab_size for d in ordered) / n,
            mean_tau_info=sum(d.info_quantity for d in ordered) / n,
        )


@dataclass(frozen=True)
class InvertedIndex:
    postings: Mapping[str, tuple[tuple[str, int], ...]]
    doc_table: Mapping[str, Document]
    stats: CollectionStats
    analyzer: Analyzer = field(default_factory=Analyzer)
    version: str = INDEX_FORMAT

    @property
    def vocabulary_size(self) -> int:
        return len(self.postings)

    def candidates(self, terms: Iterable[str]) -> list[str]:
        """Sorted ids of documents containing at least one of ``terms``."""
        ids = set()
        for term in terms:
            ids.update(doc_id for doc_id, _ in self.postings.get(term, ()))
        return sorted(ids)

    def check_consistency(self) -> None:
        for term, plist in self.postings.items():
            total = 0
            for doc_id, tf in plist:
                if self.doc_table[doc_id].tf.get(term) != tf:
                    raise AssertionError(f"postings/doc table mismatch for ({term!r}, {doc_id!r})")
                total += tf
            if self.stats.ctf.get(term) != total:
                raise AssertionError(f"collection frequency mismatch for {term!r}")
        if self.stats.total_length != sum(d.length for d in self.doc_table.values()):
            raise AssertionError("total length does not match document lengths")

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "analyzer": self.analyzer.to_dict(),
            "documents": [
                {"id": d.doc_id, "tf": dict(d.tf)} for d in (self.doc_table[i] for i in sorted(self.doc_table))
            ],
            "stats": {
                "doc_count": self.stats.doc_count,
                "total_length": self.stats.total_length,
                "mean_tau_vocab": self.stats.mean_tau_vocab,
                "mean_tau_info": self.stats.mean_tau_info,
            },
        }

    def save(self, path: str | Path) -> None:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if data.get("version") != INDEX_FORMAT:
            raise CorpusError(f"{path}: unsupported index format {data.get('version')!r}")
        docs = [Document.from_counts(rec["id"], rec["tf"]) for rec in data["documents"]]
        index = index_from_documents(docs, Analyzer.from_dict(data["analyzer"]))
        stored = data["stats"]
        if (stored["doc_count"], stored["total_length"]) != (index.stats.doc_count, index.stats.total_length):
            raise CorpusError(f"{path}: stored statistics disagree with documents")
        return index


def build_document(doc_id: str, text: str, analyzer: Analyzer | None = None) -> Document:
    analyzer = analyzer or Analyzer()
    tokens = analyzer.analyze(text)
    if not tokens:
        raise CorpusError(f"document {doc_id!r} has no indexable terms after analysis")
    return Document.from_counts(doc_id, Counter(tokens))


def index_from_documents(docs: Iterable[Document], analyzer: Analyzer | None = None) -> InvertedIndex:
    """Finalize an index over already-built documents."""
    table: dict[str, Document] = {}
    for doc in docs:
        if doc.doc_id in table:
            raise CorpusError(f"duplicate document id {doc.doc_id!r}")
        table[doc.doc_id] = doc
    if not table:
        raise CorpusError("empty corpus")
    postings: dict[str, list[tuple[str, int]]] = {}
    for doc_id in sorted(table):
        for term, tf in table[doc_id].tf.items():
            postings.setdefault(term, []).append((doc_id, tf))
    index = InvertedIndex(
        postings=MappingProxyType({t: tuple(p) for t, p in sorted(postings.items())}),
        doc_table=MappingProxyType(dict(sorted(table.items()))),
        stats=CollectionStats.from_documents(table.values()),
        analyzer=analyzer or Analyzer(),
    )
    index.check_consistency()
    return index


def build_index(records: Iterable[tuple[str, str]], analyzer: Analyzer | None = None) -> InvertedIndex:
    """Analyze ``(doc_id, text)`` records and build a finalized index."""
    analyzer = analyzer or Analyzer()
    seen: set[str] = set()
    docs = []
    for doc_id, text in records:
        if doc_id in seen:
            raise CorpusError(f"duplicate document id {doc_id!r}")
        seen.add(doc_id)
        docs.append(build_document(doc_id, text, analyzer))
    return index_from_documents(docs, analyzer)


# -- corpus readers -----------------------------------------------------------

_DOC_RE = re.compile(r"<DOC>(.*?)</DOC>", re.S | re.I)
_DOCNO_RE = re.compile(r"<DOCNO>\s*(.*?)\s*</DOCNO>", re.S | re.I)
_TAG_RE = re.compile(r"<[^>]+>")


def read_jsonl(path: str | Path) -> Iterator[tuple[str, str]]:
    """One JSON object per line with ``id`` and ``text`` fields."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                yield str(rec["id"]), str(rec["text"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad record ({exc})") from None


def read_trec(path: str | Path) -> Iterator[tuple[str, str]]:
    """TREC tagged text: ``<DOC><DOCNO>id</DOCNO> ... </DOC>``; other tags are stripped."""
    content = Path(path).read_text(encoding="utf-8", errors="replace")
    for match in _DOC_RE.finditer(content):
        body = match.group(1)
        docno = _DOCNO_RE.search(body)
        if not docno:
            line = content.count("\n", 0, match.start()) + 1
            raise CorpusError(f"{path}:{line}: <DOC> without <DOCNO>")
        text = _TAG_RE.sub(" ", _DOCNO_RE.sub(" ", body))
        yield docno.group(1), text


def read_corpus(path: str | Path, fmt: str = "auto") -> Iterator[tuple[str, str]]:
    if fmt == "auto":
        with open(path, encoding="utf-8", errors="replace") as fh:
            head = fh.read(512).lstrip()
        fmt = "trec" if head[:1] == "<" else "jsonl"
    if fmt == "jsonl":
        return read_jsonl(path)
    if fmt == "trec":
        return read_trec(path)
    raise ValueError(f"unknown corpus format {fmt!r}")
