"""Seeded synthetic test collections with verbose and multi-topical documents.

Construction (all randomness from ``random.Random(seed)``):

* Pseudo-words are drawn from consonant/vowel syllables and kept only if
  their Porter stem is unique and they are not stopwords, so analysis maps
  each word to its own index term.
* Every topic owns ``topic_words`` words with Zipf weights; a shared
  background vocabulary carries Zipf weights too.
* A *section* about topic t has 30-60 tokens; each token comes from t with
  probability ``topic_share``, otherwise from the background.
* Document kinds, cycled through the topics:

  - ``focused``: one section on t; relevant to t.
  - ``verbose``: one section on t repeated 2-4 times verbatim; relevant to t.
  - ``multi``: 3-6 sections on t and other topics; relevant to every topic
    it covers.
  - ``distractor``: a short background passage with one or two incidental
    mentions of t's head words; not relevant.
  - ``verbose_distractor``: a distractor repeated 2-4 times; not relevant.

* The generic request words of the narrative are also background words.
* Topic t's title is its 2 head words (SK); the description adds 3 more
  topic words plus background filler (SV); the narrative adds generic
  request words (LV).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from tfnorm.evaluation import write_qrels
from tfnorm.text import default_stoplist, stem

_ONSETS = "b d f g k l m n p r t v z".split() + ["br", "gr", "kl", "pl", "tr", "st"]
_VOWELS = ["a", "o", "u", "i"]
_CODAS = ["k", "m", "n", "p", "t", "d", "g", "r", "l"]

KINDS = ("focused", "verbose", "multi", "distractor", "verbose_distractor")
KIND_WEIGHTS = (0.3, 0.1, 0.2, 0.2, 0.2)
REQUEST_WORDS = "find documents relevant describing discussing report information mention".split()


@dataclass
class SyntheticCollection:
    docs: list[tuple[str, str]]
    topics: list[dict]
    qrels: dict[str, dict[str, int]]
    kinds: dict[str, str]

    def write(self, directory: str | Path) -> dict[str, Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"corpus": out / "corpus.jsonl", "topics": out / "topics.txt", "qrels": out / "qrels.txt"}
        with open(paths["corpus"], "w", encoding="utf-8") as fh:
            for doc_id, text in self.docs:
                fh.write(json.dumps({"id": doc_id, "text": text}, sort_keys=True) + "\n")
        with open(paths["topics"], "w", encoding="utf-8") as fh:
            for t in self.topics:
                fh.write(
                    f"<top>\n<num> Number: {t['num']}\n<title> {t['title']}\n\n"
                    f"<desc> Description:\n{t['desc']}\n\n<narr> Narrative:\n{t['narr']}\n</top>\n\n"
                )
        write_qrels(self.qrels, paths["qrels"])
        return paths


def _make_words(rng: random.Random, count: int, taken: set[str]) -> list[str]:
    stop = default_stoplist()
    words = []
    while len(words) < count:
        syllables = rng.randint(2, 3)
        word = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables)) + rng.choice(_CODAS)
        key = stem(word)
        if word in stop or key in taken:
            continue
        taken.add(key)
        words.append(word)
    return words


def _zipf(n: int) -> list[float]:
    return [1.0 / (r + 1) for r in range(n)]


def generate_collection(
    num_docs: int = 1000,
    num_topics: int = 30,
    seed: int = 0,
    topic_words: int = 12,
    background_words: int = 500,
    topic_share: float = 0.3,
) -> SyntheticCollection:
    rng = random.Random(seed)
    taken: set[str] = set()
    background = _make_words(rng, background_words - len(REQUEST_WORDS), taken)
    # request words double as mid-frequency background noise
    background[10:10] = REQUEST_WORDS
    bg_weights = _zipf(background_words)
    topic_vocab = [_make_words(rng, topic_words, taken) for _ in range(num_topics)]
    tw = _zipf(topic_words)

    def section(t: int) -> list[str]:
        out = []
        for _ in range(rng.randint(30, 60)):
            if rng.random() < topic_share:
                out.append(rng.choices(topic_vocab[t], tw)[0])
            else:
                out.append(rng.choices(background, bg_weights)[0])
        return out

    def distractor(t: int) -> list[str]:
        words = rng.choices(background, bg_weights, k=rng.randint(8, 20))
        for _ in range(rng.randint(1, 2)):
            words.insert(rng.randrange(len(words) + 1), rng.choice(topic_vocab[t][:2]))
        return words

    docs, kinds = [], {}
    qrels: dict[str, dict[str, int]] = {str(t + 1): {} for t in range(num_topics)}
    for i in range(num_docs):
        doc_id = f"doc{i:05d}"
        t = i % num_topics
        kind = rng.choices(KINDS, KIND_WEIGHTS)[0]
        relevant_to: list[int] = []
        if kind == "focused":
            tokens, relevant_to = section(t), [t]
        elif kind == "verbose":
            tokens, relevant_to = section(t) * rng.randint(2, 4), [t]
        elif kind == "multi":
            pool = [x for x in range(num_topics) if x != t]
            others = rng.sample(pool, min(rng.randint(2, 5), len(pool)))
            covered = [t] + others
            rng.shuffle(covered)
            tokens = [w for x in covered for w in section(x)]
            relevant_to = covered
        elif kind == "distractor":
            tokens = distractor(t)
        else:
            tokens = distractor(t) * rng.randint(2, 4)
        docs.append((doc_id, " ".join(tokens)))
        kinds[doc_id] = kind
        for x in range(num_topics):
            qrels[str(x + 1)][doc_id] = 1 if x in relevant_to else 0

    # judge only documents that mention the topic's vocabulary, like pooled qrels
    for x in range(num_topics):
        vocab = set(topic_vocab[x])
        judged = qrels[str(x + 1)]
        for doc_id, text in docs:
            if judged[doc_id] == 0 and not vocab.intersection(text.split()):
                del judged[doc_id]

    topics = []
    for x in range(num_topics):
        words = topic_vocab[x]
        desc = words[:5] + rng.choices(background, bg_weights, k=4)
        rng.shuffle(desc)
        narr = rng.sample(REQUEST_WORDS, 4) + words[5:8] + rng.choices(background, bg_weights, k=6)
        topics.append({
            "num": str(x + 1),
            "title": " ".join(words[:2]),
            "desc": " ".join(desc),
            "narr": " ".join(narr),
        })
    return SyntheticCollection(docs=docs, topics=topics, qrels=qrels, kinds=kinds)
