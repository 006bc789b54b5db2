"""TREC-style evaluation: topics, qrels and run files, MAP / P@k, significance and sweeps."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from tfnorm.corpus import InvertedIndex
from tfnorm.scoring import Query, QueryError, RankedEntry, RankedList, SmoothingConfig, rank
from tfnorm.text import Analyzer

logger = logging.getLogger(__name__)

QTYPES = ("SK", "SV", "LV")
EXACT_WILCOXON_MAX_N = 12


class FormatError(ValueError):
    """Raised for malformed topics, qrels or run files; the message names the line."""


# -- topics -------------------------------------------------------------------

_FIELD_RE = re.compile(r"<(num|title|desc|narr)>", re.I)
_FIELD_PREFIX = {
    "num": re.compile(r"^\s*number:\s*", re.I),
    "desc": re.compile(r"^\s*description:\s*", re.I),
    "narr": re.compile(r"^\s*narrative:\s*", re.I),
}


def _parse_topic_fields(body: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    parts = _FIELD_RE.split(body)
    for name, value in zip(parts[1::2], parts[2::2]):
        name = name.lower()
        value = re.sub(r"</\w+>", " ", value)
        if name in _FIELD_PREFIX:
            value = _FIELD_PREFIX[name].sub("", value)
        fields[name] = " ".join(value.split())
    return fields


def parse_topics(source: str | Path, analyzer: Analyzer | None = None) -> list[Query]:
    """Read TREC topics and return SK, SV and LV queries for each.

    SK uses the title, SV the description, LV title + description +
    narrative.  Variants with no indexable terms are dropped with a warning.
    """
    analyzer = analyzer or Analyzer()
    path = Path(source)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise FormatError(f"{path}: empty topics file")
    queries: list[Query] = []
    open_line = None
    for lineno, line in enumerate(text.splitlines(keepends=True), 1):
        lower = line.lower()
        if "<top>" in lower:
            if open_line is not None:
                raise FormatError(f"{path}:{lineno}: <top> inside unterminated topic opened at line {open_line}")
            open_line, body = lineno, []
            continue
        if "</top>" in lower:
            if open_line is None:
                raise FormatError(f"{path}:{lineno}: </top> without matching <top>")
            queries.extend(_topic_queries("".join(body), analyzer, path, open_line))
            open_line = None
            continue
        if open_line is not None:
            body.append(line)
        elif line.strip():
            raise FormatError(f"{path}:{lineno}: text outside <top> ... </top>")
    if open_line is not None:
        raise FormatError(f"{path}:{open_line}: <top> is never closed")
    if not queries:
        raise FormatError(f"{path}: no topics found")
    return queries


def _topic_queries(body: str, analyzer: Analyzer, path: Path, lineno: int) -> list[Query]:
    fields = _parse_topic_fields(body)
    qid = fields.get("num", "").split()
    if not qid:
        raise FormatError(f"{path}:{lineno}: topic without <num>")
    qid = qid[0]
    title = analyzer.analyze(fields.get("title", ""))
    desc = analyzer.analyze(fields.get("desc", ""))
    narr = analyzer.analyze(fields.get("narr", ""))
    out = []
    for qtype, tokens in (("SK", title), ("SV", desc), ("LV", title + desc + narr)):
        if tokens:
            out.append(Query.from_tokens(qid, tokens, qtype))
        else:
            logger.warning("topic %s: %s variant has no indexable terms", qid, qtype)
    return out


def select_queries(queries: Iterable[Query], qtype: str) -> list[Query]:
    qtype = qtype.upper()
    return [q for q in queries if q.qtype == qtype]


# -- qrels and runs -----------------------------------------------------------


def parse_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    """``qid iter doc_id grade`` per line; grade > 0 means relevant."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            cols = line.split()
            if not cols:
                continue
            if len(cols) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
            qid, _, doc_id, grade = cols
            try:
                grade = int(grade)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: relevance grade {grade!r} is not an integer") from None
            judged = qrels.setdefault(qid, {})
            if doc_id in judged:
                raise FormatError(f"{path}:{lineno}: duplicate judgment for ({qid}, {doc_id})")
            judged[doc_id] = grade
    return qrels


def write_qrels(qrels: Mapping[str, Mapping[str, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(qrels):
            for doc_id in sorted(qrels[qid]):
                fh.write(f"{qid} 0 {doc_id} {qrels[qid][doc_id]}\n")


def format_run_line(qid: str, entry: RankedEntry, tag: str) -> str:
    return f"{qid} Q0 {entry.doc_id} {entry.rank} {entry.score!r} {tag}"


def write_trec_run(run: Mapping[str, RankedList], path: str | Path, tag: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(run):
            for entry in run[qid].entries:
                fh.write(format_run_line(qid, entry, tag) + "\n")


def parse_trec_run(path: str | Path) -> dict[str, RankedList]:
    run: dict[str, RankedList] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            cols = line.split()
            if not cols:
                continue
            if len(cols) != 6:
                raise FormatError(f"{path}:{lineno}: expected 6 columns, got {len(cols)}")
            qid, _, doc_id, rank_, score_, _tag = cols
            try:
                entry = RankedEntry(doc_id, float(score_), int(rank_))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad rank or score") from None
            run.setdefault(qid, RankedList(qid)).entries.append(entry)
    for ranked in run.values():
        ranked.entries.sort(key=lambda e: e.rank)
    return run


# -- metrics ------------------------------------------------------------------


def _relevant(qrels: Mapping[str, Mapping[str, int]], qid: str) -> set[str]:
    return {d for d, g in qrels.get(qid, {}).items() if g > 0}


def average_precision(ranked: RankedList | Sequence[str], qrels, qid: str) -> float:
    relevant = _relevant(qrels, qid)
    if not relevant:
        raise ValueError(f"query {qid!r} has no relevant documents")
    doc_ids = ranked.doc_ids if isinstance(ranked, RankedList) else list(ranked)
    hits = 0
    total = 0.0
    for i, doc_id in enumerate(doc_ids, 1):
        if doc_id in relevant:
            hits += 1
            total += hits / i
    return total / len(relevant)


def precision_at_k(ranked: RankedList | Sequence[str], qrels, qid: str, k: int) -> float:
    relevant = _relevant(qrels, qid)
    doc_ids = ranked.doc_ids if isinstance(ranked, RankedList) else list(ranked)
    return sum(1 for d in doc_ids[:k] if d in relevant) / k


@dataclass
class EvalReport:
    per_query: dict[str, dict[str, float]] = field(default_factory=dict)
    map: float = 0.0
    p5: float = 0.0
    p10: float = 0.0
    skipped_no_relevant: list[str] = field(default_factory=list)
    missing_from_qrels: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def num_queries(self) -> int:
        return len(self.per_query)

    def metric(self, name: str) -> list[float]:
        return [self.per_query[q][name] for q in sorted(self.per_query)]

    def summary(self) -> str:
        lines = [
            f"queries\t{self.num_queries}",
            f"map\t{self.map:.4f}",
            f"P_5\t{self.p5:.4f}",
            f"P_10\t{self.p10:.4f}",
        ]
        if self.skipped_no_relevant:
            lines.append(f"skipped_no_relevant\t{len(self.skipped_no_relevant)}")
        if self.missing_from_qrels:
            lines.append(f"missing_from_qrels\t{len(self.missing_from_qrels)}")
        lines.extend(f"error\t{e}" for e in self.errors)
        return "\n".join(lines)


def evaluate_run(run: Mapping[str, RankedList], qrels: Mapping[str, Mapping[str, int]]) -> EvalReport:
    report = EvalReport()
    for qid in sorted(run):
        if qid not in qrels:
            report.missing_from_qrels.append(qid)
            continue
        if not _relevant(qrels, qid):
            report.skipped_no_relevant.append(qid)
            continue
        ranked = run[qid]
        report.per_query[qid] = {
            "ap": average_precision(ranked, qrels, qid),
            "p5": precision_at_k(ranked, qrels, qid, 5),
            "p10": precision_at_k(ranked, qrels, qid, 10),
        }
    if report.missing_from_qrels:
        logger.warning("%d run queries absent from qrels", len(report.missing_from_qrels))
    if report.skipped_no_relevant:
        logger.warning("%d queries without relevant documents excluded", len(report.skipped_no_relevant))
    if not report.per_query:
        report.errors.append("no run query has relevance judgments")
        return report
    n = report.num_queries
    report.map = math.fsum(report.metric("ap")) / n
    report.p5 = math.fsum(report.metric("p5")) / n
    report.p10 = math.fsum(report.metric("p10")) / n
    return report


# -- significance -------------------------------------------------------------


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences (b - a)
    p_value: float
    n: int
    method: str
    sig95: bool
    sig99: bool


def _exact_upper_tail(ranks: Sequence[float], observed: float) -> float:
    """P(W+ >= observed) under random signs, by enumerating all 2^n assignments."""
    n = len(ranks)
    # twice the ranks are integers even with averaged ties
    doubled = [int(round(2 * r)) for r in ranks]
    target = int(round(2 * observed))
    counts = np.zeros(sum(doubled) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: len(counts) - r]
        counts = counts + shifted
    return float(counts[target:].sum()) / 2.0 ** n


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """One-sided paired signed-rank test that ``b`` exceeds ``a``.

    Zero differences are dropped and tied magnitudes share average ranks.
    Up to 12 non-zero pairs use the exact null distribution; beyond that the
    normal approximation with continuity and tie corrections.
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    if len(a) == 0:
        raise ValueError("need at least one pair")
    diffs = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    diffs = diffs[diffs != 0]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, "none", False, False)
    ranks = rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    if n <= EXACT_WILCOXON_MAX_N:
        p = _exact_upper_tail(list(ranks), w_plus)
        method = "exact"
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((tie_counts ** 3 - tie_counts)).sum()) / 48.0
        z = (w_plus - mean - 0.5) / math.sqrt(var)
        p = 1.0 - NormalDist().cdf(z)
        method = "normal"
    p = min(1.0, p)
    return WilcoxonResult(w_plus, p, n, method, p < 0.05, p < 0.01)


# -- parameter sweeps ---------------------------------------------------------

DEFAULT_LAMBDAS = (0.01,) + tuple(round(0.05 * i, 2) for i in range(2, 20)) + (0.99,)
DEFAULT_MUS = tuple(float(round(v)) for v in np.geomspace(100, 30000, 22))


@dataclass(frozen=True)
class SweepGrid:
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    mus: tuple[float, ...] = DEFAULT_MUS

    def __post_init__(self):
        for name, values in (("lambdas", self.lambdas), ("mus", self.mus)):
            if not values:
                raise ValueError(f"sweep grid {name} is empty")
            if list(values) != sorted(values):
                raise ValueError(f"sweep grid {name} must be sorted ascending")
        if not all(0.0 < v < 1.0 for v in self.lambdas):
            raise ValueError("lambda values must lie in (0, 1)")
        if not all(v > 0 for v in self.mus):
            raise ValueError("mu values must be positive")

    def values_for(self, config: SmoothingConfig) -> tuple[float, ...]:
        return self.lambdas if config.method.uses_lambda else self.mus


@dataclass(frozen=True)
class SweepRow:
    param: float
    map: float
    p5: float
    p10: float


def run_queries(index: InvertedIndex, queries: Iterable[Query], config: SmoothingConfig, k: int = 1000) -> dict[str, RankedList]:
    run = {}
    for q in queries:
        try:
            run[q.qid] = rank(index, q, config, k)
        except QueryError as exc:
            logger.warning("%s", exc)
    return run


def sweep(
    index: InvertedIndex, queries: Sequence[Query], qrels, config: SmoothingConfig,
    grid: SweepGrid | None = None, k: int = 1000, workers: int = 1,
) -> tuple[list[SweepRow], SweepRow]:
    """Evaluate ``config`` at each grid value of its smoothing parameter.

    The best row maximizes MAP; ties go to the smaller parameter.
    """
    grid = grid or SweepGrid()

    def one(value: float) -> SweepRow:
        report = evaluate_run(run_queries(index, queries, config.with_param(value), k), qrels)
        return SweepRow(value, report.map, report.p5, report.p10)

    values = grid.values_for(config)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, values))
    else:
        rows = [one(v) for v in values]
    best = min(rows, key=lambda r: (-r.map, r.param))
    return rows, best


def format_sweep(rows: Iterable[SweepRow], best: SweepRow, param_name: str) -> str:
    lines = [f"{param_name}\tmap\tP_5\tP_10"]
    lines += [f"{r.param:g}\t{r.map:.6f}\t{r.p5:.6f}\t{r.p10:.6f}" for r in rows]
    lines.append(f"best\t{best.map:.6f}\t{best.p5:.6f}\t{best.p10:.6f}\t{param_name}={best.param:g}")
    return "\n".join(lines)
