"""Text normalization: tokenizing, stopword filtering and Porter stemming."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from nltk.stem.porter import PorterStemmer

_NONALNUM_TOKEN = re.compile(r"[^\W_]+")
_PORTER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)

SPLIT_MODES = ("nonalnum", "space")


def tokenize(text: str, split: str = "nonalnum") -> list[str]:
    """Lowercase ``text`` and split it into tokens.

    ``split="nonalnum"`` breaks on any character that is not a letter or
    digit; ``split="space"`` breaks on whitespace only.
    """
    text = text.lower()
    if split == "nonalnum":
        return _NONALNUM_TOKEN.findall(text)
    if split == "space":
        return text.split()
    raise ValueError(f"unknown split mode {split!r}; expected one of {SPLIT_MODES}")


def remove_stopwords(tokens: Iterable[str], stoplist: frozenset[str] | set[str]) -> list[str]:
    return [t for t in tokens if t not in stoplist]


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Classic (1980) Porter stem of a lowercase ASCII-alphabetic token.

    Anything else (digits, mixed or non-ASCII tokens) is returned unchanged.
    """
    if not (token.isascii() and token.isalpha()):
        return token
    return _PORTER.stem(token, to_lowercase=False)


def read_stoplist(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and ``#`` comments are ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stoplist() -> frozenset[str]:
    ref = resources.files("tfnorm") / "data" / "stopwords.txt"
    with resources.as_file(ref) as path:
        return read_stoplist(path)


@dataclass(frozen=True)
class Analyzer:
    """The full text pipeline shared by documents and queries."""

    stoplist: frozenset[str] = field(default_factory=default_stoplist)
    stemming: bool = True
    split: str = "nonalnum"

    def __post_init__(self):
        if self.split not in SPLIT_MODES:
            raise ValueError(f"unknown split mode {self.split!r}")

    def analyze(self, text: str) -> list[str]:
        tokens = remove_stopwords(tokenize(text, self.split), self.stoplist)
        if self.stemming:
            tokens = [stem(t) for t in tokens]
        return tokens

    def to_dict(self) -> dict:
        return {"stoplist": sorted(self.stoplist), "stemming": self.stemming, "split": self.split}

    @classmethod
    def from_dict(cls, data: dict) -> "Analyzer":
        return cls(stoplist=frozenset(data["stoplist"]), stemming=data["stemming"], split=data["split"])
