"""Empirical checks of the verbosity (VNC) and topicality (TNC) normalization constraints.

A constraint instance fixes the collection statistics, a document and a
query; the document is transformed (K-verbose or N-topical) and scored again
under the *same* statistics.  The residual is the absolute score change.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Sequence

from tfnorm.corpus import CollectionStats, Document, build_index, index_from_documents
from tfnorm.lm import TopicMeasure
from tfnorm.scoring import Method, SmoothingConfig, score
from tfnorm.text import Analyzer

VNC = "VNC"
TNC = "TNC"

SATISFIED = "satisfied"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

TOLERANCE = 1e-9
VIOLATION_THRESHOLD = 1e-6

# (method, constraint) -> expected verdict; pairs not listed are reported only
EXPECTED_VERDICTS = {
    (Method.JM, VNC): SATISFIED,
    (Method.JM, TNC): VIOLATED,
    (Method.DIR, VNC): VIOLATED,
    (Method.DIR, TNC): VIOLATED,
    (Method.JMV, VNC): SATISFIED,
    (Method.JMV, TNC): SATISFIED,
    (Method.JMV2, VNC): SATISFIED,
    (Method.DIRV, VNC): SATISFIED,
    (Method.DIRV, TNC): VIOLATED,
}

SAMPLE_TEXTS = {
    "D1": "Language modeling approach",
    "D2": "Language modeling approach Language modeling approach",
    "D3": "Information retrieval model Language modeling approach",
}
SAMPLE_QUERY = "language modeling approach"


def make_k_verbose(doc: Document, k: int) -> Document:
    """Every term frequency multiplied by ``k``."""
    if k < 1:
        raise ValueError("K must be a positive integer")
    return Document.from_counts(doc.doc_id, {t: c * k for t, c in doc.tf.items()})


def make_n_topical(doc: Document, n: int, filler_terms: Sequence[str]) -> Document:
    """Append ``n - 1`` fresh topics shaped like ``doc``.

    Only exact for documents with uniform term frequencies: every filler term
    gets the shared count, so length, vocabulary and information quantity all
    grow by exactly ``n``.
    """
    if n < 1:
        raise ValueError("N must be a positive integer")
    counts = set(doc.tf.values())
    if len(counts) != 1:
        raise ValueError(f"document {doc.doc_id!r} does not have uniform term frequencies")
    need = (n - 1) * doc.vocab_size
    fillers = list(filler_terms)
    if len(fillers) != need or len(set(fillers)) != need:
        raise ValueError(f"need exactly {need} distinct filler terms, got {len(fillers)}")
    if set(fillers) & set(doc.tf):
        raise ValueError("filler terms must not occur in the document")
    (c,) = counts
    tf = dict(doc.tf)
    tf.update((f, c) for f in fillers)
    return Document.from_counts(doc.doc_id, tf)


@dataclass(frozen=True)
class ConstraintInstance:
    stats: CollectionStats
    doc: Document
    query: dict
    param: int  # K for VNC, N for TNC
    source: str
    fillers: tuple[str, ...] = ()

    def transformed(self, constraint: str) -> Document:
        if constraint == VNC:
            return make_k_verbose(self.doc, self.param)
        return make_n_topical(self.doc, self.param, self.fillers)


@dataclass
class ConstraintReport:
    scorer: str
    constraint: str
    instances: int
    max_residual: float
    verdict: str
    witness: dict | None = None
    expected: str | None = None

    @property
    def matches_expectation(self) -> bool:
        return self.expected is None or self.expected == self.verdict


def verdict_for(residual: float, tolerance: float = TOLERANCE) -> str:
    if residual <= tolerance:
        return SATISFIED
    if residual > VIOLATION_THRESHOLD:
        return VIOLATED
    return INCONCLUSIVE


def check_constraint(
    config: SmoothingConfig,
    constraint: str,
    instances: Iterable[ConstraintInstance],
    tolerance: float = TOLERANCE,
) -> ConstraintReport:
    worst = 0.0
    witness = None
    count = 0
    for inst in instances:
        count += 1
        before = score(config, inst.query, inst.doc, inst.stats)
        after = score(config, inst.query, inst.transformed(constraint), inst.stats)
        residual = abs(before - after)
        if witness is None or residual > worst:
            worst = residual
            witness = {
                "source": inst.source,
                "doc_id": inst.doc.doc_id,
                "doc_tf": dict(inst.doc.tf),
                "query": dict(inst.query),
                "param": inst.param,
                "score_original": before,
                "score_transformed": after,
            }
    verdict = verdict_for(worst, tolerance)
    return ConstraintReport(
        scorer=config.method.value,
        constraint=constraint,
        instances=count,
        max_residual=worst,
        verdict=verdict,
        witness=witness if verdict != SATISFIED else None,
        expected=EXPECTED_VERDICTS.get((config.method, constraint)),
    )


# -- instance generation ------------------------------------------------------


def _random_corpus(rng: random.Random, uniform_share: float) -> list[Document]:
    vocab = [f"t{i:03d}" for i in range(rng.randint(20, 200))]
    weights = [1.0 / (r + 1) for r in range(len(vocab))]
    docs = []
    for i in range(rng.randint(5, 50)):
        if rng.random() < uniform_share:
            terms = rng.sample(vocab, rng.randint(1, min(12, len(vocab))))
            c = rng.randint(1, 4)
            counts = {t: c for t in terms}
        else:
            counts = {}
            for t in rng.choices(vocab, weights, k=rng.randint(3, 80)):
                counts[t] = counts.get(t, 0) + 1
        docs.append(Document.from_counts(f"d{i:02d}", counts))
    return docs


def _random_query(rng: random.Random, doc: Document, vocab: list[str]) -> dict:
    terms = rng.sample(sorted(doc.tf), rng.randint(1, min(3, doc.vocab_size)))
    terms += rng.sample(vocab, rng.randint(0, 2))
    query: dict = {}
    for t in terms:
        query[t] = query.get(t, 0) + rng.choice((1, 1, 1, 2))
    return query


def _sample_instances(constraint: str) -> list[ConstraintInstance]:
    analyzer = Analyzer(stemming=False)
    index = build_index(SAMPLE_TEXTS.items(), analyzer)
    d1 = index.doc_table["D1"]
    query = {t: 1 for t in analyzer.analyze(SAMPLE_QUERY)}
    if constraint == VNC:
        return [ConstraintInstance(index.stats, d1, query, 2, "sample")]
    return [ConstraintInstance(index.stats, d1, query, 2, "sample", ("information", "retrieval", "model"))]


def generate_instances(constraint: str, count: int = 1000, seed: int = 0) -> Iterator[ConstraintInstance]:
    """Seeded instances over small synthetic corpora plus the three sample documents.

    TNC instances use uniform-frequency documents only, since only those admit
    an exact N-topical counterpart.
    """
    yield from _sample_instances(constraint)
    rng = random.Random(f"{constraint}:{seed}")
    produced = 1
    corpus_no = 0
    while produced < count:
        docs = _random_corpus(rng, uniform_share=0.2 if constraint == VNC else 0.6)
        stats = index_from_documents(docs).stats
        vocab = sorted(stats.ctf)
        pool = docs if constraint == VNC else [d for d in docs if len(set(d.tf.values())) == 1]
        for doc in rng.sample(pool, min(len(pool), 25)):
            if produced >= count:
                break
            query = _random_query(rng, doc, vocab)
            source = f"seed={seed} corpus={corpus_no}"
            if constraint == VNC:
                yield ConstraintInstance(stats, doc, query, rng.randint(2, 5), source)
            else:
                n = rng.randint(2, 4)
                fillers = tuple(f"fill{j}" for j in range((n - 1) * doc.vocab_size))
                yield ConstraintInstance(stats, doc, query, n, source, fillers)
            produced += 1
        corpus_no += 1


DEFAULT_CONFIGS = (
    SmoothingConfig(Method.JM, lam=0.5),
    SmoothingConfig(Method.DIR, mu=100.0),
    SmoothingConfig(Method.JMV, lam=0.5, topic_measure=TopicMeasure.INFO),
    SmoothingConfig(Method.JMV2, lam=0.5, lambda_s=0.25, topic_measure=TopicMeasure.INFO),
    SmoothingConfig(Method.DIRV, mu=100.0, topic_measure=TopicMeasure.INFO),
)


def run_suite(
    configs: Sequence[SmoothingConfig] = DEFAULT_CONFIGS, count: int = 1000, seed: int = 0,
) -> list[ConstraintReport]:
    """One report per scorer and constraint."""
    suites = {c: list(generate_instances(c, count, seed)) for c in (VNC, TNC)}
    return [check_constraint(cfg, c, suites[c]) for cfg in configs for c in (VNC, TNC)]


def format_reports(reports: Iterable[ConstraintReport]) -> str:
    lines = [f"{'scorer':<6} {'constraint':<10} {'instances':>9} {'max_residual':>13} {'verdict':<12} expected"]
    for r in reports:
        expected = r.expected or "(report only)"
        mark = "" if r.matches_expectation else "  MISMATCH"
        lines.append(
            f"{r.scorer:<6} {r.constraint:<10} {r.instances:>9} {r.max_residual:>13.3e} {r.verdict:<12} {expected}{mark}"
        )
    return "\n".join(lines)


def reports_to_json(reports: Iterable[ConstraintReport]) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2, sort_keys=True)
