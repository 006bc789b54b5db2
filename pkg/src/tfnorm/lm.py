"""Document and collection language models, topic measures and term specificity.

All logarithms are natural.
"""

from __future__ import annotations

import enum
import math
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from tfnorm.corpus import CollectionStats, Document


class TopicMeasure(str, enum.Enum):
    """Which quantity stands in for the number of topics of a document."""

    VOCAB = "vocab"  # number of distinct terms
    INFO = "info"  # exp(entropy) of the MLE document model

    @classmethod
    def parse(cls, value: "TopicMeasure | str") -> "TopicMeasure":
        if isinstance(value, cls):
            return value
        aliases = {
            "vocab": cls.VOCAB, "vocabulary": cls.VOCAB, "vocabularysize": cls.VOCAB,
            "info": cls.INFO, "information": cls.INFO, "informationquantity": cls.INFO,
        }
        try:
            return aliases[str(value).lower().replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown topic measure {value!r}") from None


def entropy_of_counts(counts: Mapping[str, int]) -> float:
    """Shannon entropy (nats) of the distribution ``count / total``.

    Each probability is formed as a single integer division so that scaling
    every count by the same integer yields bit-identical probabilities.
    """
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("entropy of an empty distribution is undefined")
    terms = []
    for c in counts.values():
        if c > 0:
            p = c / total
            terms.append(-p * math.log(p))
    return math.fsum(terms)


def information_quantity_of_counts(counts: Mapping[str, int]) -> float:
    positive = [c for c in counts.values() if c > 0]
    if not positive:
        raise ValueError("information quantity needs at least one term occurrence")
    n = len(positive)
    # uniform counts: exp(ln n) is n exactly
    if min(positive) == max(positive):
        return float(n)
    value = math.exp(entropy_of_counts(counts))
    return min(max(value, 1.0), float(n))


def mle_doc_prob(doc: "Document", term: str) -> float:
    tf = doc.tf.get(term, 0)
    return tf / doc.length if tf else 0.0


def collection_prob(stats: "CollectionStats", term: str) -> float:
    ctf = stats.ctf.get(term, 0)
    return ctf / stats.total_length if ctf else 0.0


def vocab_size(doc: "Document") -> int:
    return sum(1 for c in doc.tf.values() if c > 0)


def information_quantity(doc: "Document") -> float:
    """exp of the entropy of the unsmoothed document model; between 1 and the vocabulary size."""
    return information_quantity_of_counts(doc.tf)


def topic_measure(doc: "Document", kind: TopicMeasure | str) -> float:
    kind = TopicMeasure.parse(kind)
    if kind is TopicMeasure.VOCAB:
        return float(doc.vocab_size)
    return doc.info_quantity


def normalized_topic_measure(doc: "Document", stats: "CollectionStats", kind: TopicMeasure | str) -> float:
    """Topic measure of ``doc`` divided by its collection-wide mean."""
    return topic_measure(doc, kind) / stats.mean_tau(kind)


def informative_verbosity(doc: "Document", kind: TopicMeasure | str) -> float:
    """Average term frequency per unit of topic: length over topic measure."""
    return doc.length / topic_measure(doc, kind)


def term_specificity(doc: "Document", stats: "CollectionStats", term: str, lambda_s: float = 0.25) -> float:
    """Probability that ``term`` was generated by the document rather than the collection.

    Defined as 0 when the term is absent from both models.
    """
    if not 0.0 < lambda_s < 1.0:
        raise ValueError(f"lambda_s must lie in (0, 1), got {lambda_s}")
    return specificity_from_probs(mle_doc_prob(doc, term), collection_prob(stats, term), lambda_s)


def specificity_from_probs(p_doc: float, p_coll: float, lambda_s: float) -> float:
    num = lambda_s * p_doc
    den = num + (1.0 - lambda_s) * p_coll
    return num / den if den > 0 else 0.0
