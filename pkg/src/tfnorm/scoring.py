"""Query-likelihood scorers: JM, Dir and their verbosity/topicality-aware variants.

Every score is a sum over query terms of a log ratio against the collection
model, so documents matching no query term score 0.  Query terms that never
occur in the collection are skipped.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from tfnorm.corpus import CollectionStats, Document, InvertedIndex
from tfnorm.lm import (
    TopicMeasure,
    collection_prob,
    mle_doc_prob,
    normalized_topic_measure,
    term_specificity,
    topic_measure,
)

logger = logging.getLogger(__name__)


class Method(str, enum.Enum):
    JM = "jm"
    DIR = "dir"
    JMV = "jmv"
    JMV2 = "jmv2"
    DIRV = "dirv"

    @property
    def uses_lambda(self) -> bool:
        return self in (Method.JM, Method.JMV, Method.JMV2)


@dataclass(frozen=True)
class SmoothingConfig:
    method: Method = Method.DIR
    lam: float = 0.5
    mu: float = 1000.0
    lambda_s: float = 0.25
    topic_measure: TopicMeasure = TopicMeasure.INFO
    # weight each term by its query frequency; False gives set semantics
    use_qtf: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "topic_measure", TopicMeasure.parse(self.topic_measure))
        if self.method.uses_lambda and not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.method is Method.JMV2 and not 0.0 < self.lambda_s < 1.0:
            raise ValueError(f"lambda_s must lie in (0, 1), got {self.lambda_s}")
        if not self.method.uses_lambda and not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def param(self) -> float:
        """The swept smoothing parameter of this method."""
        return self.lam if self.method.uses_lambda else self.mu

    def with_param(self, value: float) -> "SmoothingConfig":
        from dataclasses import replace

        return replace(self, lam=value) if self.method.uses_lambda else replace(self, mu=value)


@dataclass(frozen=True)
class Query:
    qid: str
    terms: Mapping[str, int]
    qtype: str = "SK"

    @classmethod
    def from_tokens(cls, qid: str, tokens: Iterable[str], qtype: str = "SK") -> "Query":
        return cls(qid=qid, terms=dict(sorted(Counter(tokens).items())), qtype=qtype)


@dataclass(frozen=True)
class RankedEntry:
    doc_id: str
    score: float
    rank: int


@dataclass
class RankedList:
    qid: str
    entries: list[RankedEntry] = field(default_factory=list)

    @property
    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def __len__(self):
        return len(self.entries)


class QueryError(ValueError):
    """Raised when a query has no term that can be scored."""


def _terms(query: Query | Mapping[str, int]) -> Mapping[str, int]:
    return query.terms if isinstance(query, Query) else query


def _jm_family(query, doc: Document, stats: CollectionStats, lam: float, boost, use_qtf: bool) -> float:
    """Shared JM-style sum; ``boost(term)`` rescales the document model per term."""
    odds = (1.0 - lam) / lam
    total = 0.0
    for term, qtf in _terms(query).items():
        ctf = stats.ctf.get(term, 0)
        tf = doc.tf.get(term, 0)
        if ctf == 0 or tf == 0:
            continue
        ratio = boost(term) * (tf * stats.total_length) / (doc.length * ctf)
        total += (qtf if use_qtf else 1) * math.log1p(odds * ratio)
    return total


def _dir_family(query, doc: Document, stats: CollectionStats, doc_lambda: float, use_qtf: bool) -> float:
    total = 0.0
    for term, qtf in _terms(query).items():
        p_coll = collection_prob(stats, term)
        if p_coll == 0.0:
            continue
        p_doc = mle_doc_prob(doc, term)
        total += (qtf if use_qtf else 1) * math.log((1.0 - doc_lambda) * p_doc / p_coll + doc_lambda)
    return total


def score_jm(query, doc: Document, stats: CollectionStats, lam: float, use_qtf: bool = True) -> float:
    return _jm_family(query, doc, stats, lam, lambda _t: 1.0, use_qtf)


def score_dir(query, doc: Document, stats: CollectionStats, mu: float, use_qtf: bool = True) -> float:
    return _dir_family(query, doc, stats, mu / (doc.length + mu), use_qtf)


def score_jmv(
    query, doc: Document, stats: CollectionStats, lam: float,
    kind: TopicMeasure | str = TopicMeasure.INFO, use_qtf: bool = True,
) -> float:
    """JM over a pseudo document whose model is scaled by the normalized topic measure."""
    norm = normalized_topic_measure(doc, stats, kind)
    return _jm_family(query, doc, stats, lam, lambda _t: norm, use_qtf)


def score_jmv2(
    query, doc: Document, stats: CollectionStats, lam: float, lambda_s: float = 0.25,
    kind: TopicMeasure | str = TopicMeasure.INFO, use_qtf: bool = True,
    specificity: Callable[[str], float] | None = None,
) -> float:
    """Like JMV, but the topic normalization is raised to the term's specificity.

    ``specificity`` overrides the per-term exponent (default: term_specificity
    with ``lambda_s``).
    """
    norm = normalized_topic_measure(doc, stats, kind)
    if specificity is None:
        def specificity(term):
            return term_specificity(doc, stats, term, lambda_s)
    return _jm_family(query, doc, stats, lam, lambda t: norm ** specificity(t), use_qtf)


def score_dirv(
    query, doc: Document, stats: CollectionStats, mu: float,
    kind: TopicMeasure | str = TopicMeasure.INFO, use_qtf: bool = True,
) -> float:
    """Dirichlet smoothing of a pseudo document whose length is the topic measure."""
    tau = topic_measure(doc, kind)
    return _dir_family(query, doc, stats, mu / (tau + mu), use_qtf)


def score(config: SmoothingConfig, query, doc: Document, stats: CollectionStats) -> float:
    m, q = config.method, config.use_qtf
    if m is Method.JM:
        return score_jm(query, doc, stats, config.lam, q)
    if m is Method.DIR:
        return score_dir(query, doc, stats, config.mu, q)
    if m is Method.JMV:
        return score_jmv(query, doc, stats, config.lam, config.topic_measure, q)
    if m is Method.JMV2:
        return score_jmv2(query, doc, stats, config.lam, config.lambda_s, config.topic_measure, q)
    return score_dirv(query, doc, stats, config.mu, config.topic_measure, q)


def smoothed_doc_prob(config: SmoothingConfig, doc: Document, stats: CollectionStats, term: str) -> float:
    """P(term | smoothed document model) for JM, Dir and DirV."""
    p_doc, p_coll = mle_doc_prob(doc, term), collection_prob(stats, term)
    if config.method is Method.JM:
        lam = config.lam
    elif config.method is Method.DIR:
        lam = config.mu / (doc.length + config.mu)
    elif config.method is Method.DIRV:
        lam = config.mu / (topic_measure(doc, config.topic_measure) + config.mu)
    else:
        raise ValueError(f"{config.method.value} has no full smoothed document model")
    return (1.0 - lam) * p_doc + lam * p_coll


def rank(index: InvertedIndex, query: Query, config: SmoothingConfig, k: int = 1000) -> RankedList:
    """Top ``k`` documents containing at least one query term.

    Ties are broken by ascending document id.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    known = {t: c for t, c in query.terms.items() if index.stats.ctf.get(t, 0) > 0}
    missing = sorted(set(query.terms) - set(known))
    if missing:
        logger.warning("query %s: skipping terms absent from the collection: %s", query.qid, " ".join(missing))
    if not known:
        raise QueryError(f"query {query.qid!r} has no indexed terms (raw terms: {sorted(query.terms)})")
    scored = [
        (score(config, known, index.doc_table[doc_id], index.stats), doc_id)
        for doc_id in index.candidates(known)
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return RankedList(
        qid=query.qid,
        entries=[RankedEntry(doc_id, s, i) for i, (s, doc_id) in enumerate(scored[:k], 1)],
    )
