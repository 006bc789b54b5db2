"""Command-line interface: ``tfnorm {index,search,batch,evaluate,sweep,axioms,generate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from tfnorm import constraints
from tfnorm.corpus import CorpusError, InvertedIndex, build_index, read_corpus
from tfnorm.evaluation import (
    FormatError,
    SweepGrid,
    evaluate_run,
    format_run_line,
    format_sweep,
    parse_qrels,
    parse_topics,
    parse_trec_run,
    run_queries,
    select_queries,
    sweep,
    wilcoxon_signed_rank,
    write_trec_run,
)
from tfnorm.lm import TopicMeasure
from tfnorm.scoring import Method, Query, QueryError, SmoothingConfig, rank
from tfnorm.synthetic import generate_collection
from tfnorm.text import Analyzer, default_stoplist, read_stoplist

logger = logging.getLogger("tfnorm")

# config keys that map straight onto command-line options
_CONFIG_KEYS = {
    "method", "lambda", "mu", "lambda_s", "tau", "qtype", "k", "seed", "stoplist",
    "index", "topics", "qrels", "output", "lambda_grid", "mu_grid", "tag", "workers",
}


class UsageError(Exception):
    pass


def read_config(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    config = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: expected one of {sorted(_CONFIG_KEYS)} as 'key = value'")
            config[key] = value.strip()
    return config


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill options left at their defaults from ``--config``; explicit flags win."""
    if not getattr(args, "config", None):
        return
    for key, value in read_config(args.config).items():
        dest = "lam" if key == "lambda" else key
        if not hasattr(args, dest):
            continue
        if getattr(args, dest) == parser.get_default(dest):
            action = next((a for a in parser._actions if a.dest == dest), None)
            if action is not None and action.type is not None:
                value = action.type(value)
            setattr(args, dest, value)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _smoothing(args) -> SmoothingConfig:
    return SmoothingConfig(
        method=Method(args.method),
        lam=args.lam,
        mu=args.mu,
        lambda_s=args.lambda_s,
        topic_measure=TopicMeasure.parse(args.tau),
        use_qtf=not args.set_semantics,
    )


def _grid(args) -> SweepGrid:
    kwargs = {}
    if args.lambda_grid:
        kwargs["lambdas"] = _floats(args.lambda_grid)
    if args.mu_grid:
        kwargs["mus"] = _floats(args.mu_grid)
    return SweepGrid(**kwargs)


def _require(path, what: str) -> Path:
    if not path:
        raise UsageError(f"missing {what} path")
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def _topic_queries(args, index: InvertedIndex) -> list[Query]:
    queries = select_queries(parse_topics(_require(args.topics, "topics"), index.analyzer), args.qtype)
    if not queries:
        raise UsageError(f"no {args.qtype.upper()} queries in {args.topics}")
    return queries


def cmd_index(args) -> int:
    corpus = _require(args.corpus, "corpus")
    stoplist = read_stoplist(_require(args.stoplist, "stoplist")) if args.stoplist else default_stoplist()
    analyzer = Analyzer(stoplist=stoplist, stemming=not args.no_stem, split=args.split)
    index = build_index(read_corpus(corpus, args.format), analyzer)
    index.save(args.index_path)
    s = index.stats
    print(f"documents\t{s.doc_count}")
    print(f"terms\t{index.vocabulary_size}")
    print(f"total_length\t{s.total_length}")
    print(f"mean_tau_vocab\t{s.mean_tau_vocab:.6f}")
    print(f"mean_tau_info\t{s.mean_tau_info:.6f}")
    return 0


def cmd_search(args) -> int:
    index = InvertedIndex.load(_require(args.index, "index"))
    query = Query.from_tokens("q1", index.analyzer.analyze(" ".join(args.query)))
    ranked = rank(index, query, _smoothing(args), args.k)
    for entry in ranked.entries:
        print(format_run_line(query.qid, entry, args.tag or args.method))
    return 0


def cmd_batch(args) -> int:
    index = InvertedIndex.load(_require(args.index, "index"))
    run = run_queries(index, _topic_queries(args, index), _smoothing(args), args.k)
    if not args.output:
        raise UsageError("batch needs --output")
    write_trec_run(run, args.output, args.tag or args.method)
    print(f"queries\t{len(run)}")
    return 0


def cmd_evaluate(args) -> int:
    qrels = parse_qrels(_require(args.qrels, "qrels"))
    report = evaluate_run(parse_trec_run(_require(args.run, "run")), qrels)
    record = {
        "run": Path(args.run).name,
        "queries": report.num_queries,
        "map": report.map,
        "P_5": report.p5,
        "P_10": report.p10,
        "per_query": report.per_query,
        "skipped_no_relevant": report.skipped_no_relevant,
        "missing_from_qrels": report.missing_from_qrels,
        "errors": report.errors,
    }
    print(report.summary())
    if args.baseline:
        base = evaluate_run(parse_trec_run(_require(args.baseline, "baseline run")), qrels)
        shared = sorted(set(base.per_query) & set(report.per_query))
        record["significance"] = {}
        for metric in ("ap", "p5", "p10"):
            a = [base.per_query[q][metric] for q in shared]
            b = [report.per_query[q][metric] for q in shared]
            if not shared:
                continue
            result = wilcoxon_signed_rank(a, b)
            record["significance"][metric] = asdict(result)
            print(f"wilcoxon_{metric}\tW+={result.statistic:g}\tp={result.p_value:.6g}\t"
                  f"sig95={result.sig95}\tsig99={result.sig99}")
    if args.output:
        Path(args.output).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 1 if report.errors else 0


def cmd_sweep(args) -> int:
    index = InvertedIndex.load(_require(args.index, "index"))
    qrels = parse_qrels(_require(args.qrels, "qrels"))
    config = _smoothing(args)
    rows, best = sweep(index, _topic_queries(args, index), qrels, config, _grid(args), args.k, args.workers)
    table = format_sweep(rows, best, "lambda" if config.method.uses_lambda else "mu")
    print(table)
    if args.output:
        Path(args.output).write_text(table + "\n", encoding="utf-8")
    return 0


def cmd_axioms(args) -> int:
    measure = TopicMeasure.parse(args.tau)
    configs = [
        SmoothingConfig(Method.JM, lam=args.lam),
        SmoothingConfig(Method.DIR, mu=args.mu),
        SmoothingConfig(Method.JMV, lam=args.lam, topic_measure=measure),
        SmoothingConfig(Method.JMV2, lam=args.lam, lambda_s=args.lambda_s, topic_measure=measure),
        SmoothingConfig(Method.DIRV, mu=args.mu, topic_measure=measure),
    ]
    reports = constraints.run_suite(configs, count=args.instances, seed=args.seed)
    print(constraints.format_reports(reports))
    if args.output:
        Path(args.output).write_text(constraints.reports_to_json(reports) + "\n", encoding="utf-8")
    return 0 if all(r.matches_expectation for r in reports) else 1


def cmd_generate(args) -> int:
    collection = generate_collection(num_docs=args.docs, num_topics=args.topics_count, seed=args.seed)
    paths = collection.write(args.directory)
    for name, path in paths.items():
        print(f"{name}\t{path}")
    return 0


def _add_scoring(p: argparse.ArgumentParser, method: str = "dir") -> None:
    p.add_argument("--method", choices=[m.value for m in Method], default=method)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=1000.0)
    p.add_argument("--lambda-s", dest="lambda_s", type=float, default=0.25)
    p.add_argument("--tau", choices=["vocab", "info"], default="info", help="topic measure")
    p.add_argument("--set-semantics", action="store_true", help="ignore query term multiplicity")
    p.add_argument("--k", type=int, default=1000, help="retrieval depth")
    p.add_argument("--tag", default=None, help="run tag (default: method name)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfnorm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an index from a corpus file")
    p.add_argument("corpus")
    p.add_argument("index_path")
    p.add_argument("--format", choices=["auto", "jsonl", "trec"], default="auto")
    p.add_argument("--stoplist")
    p.add_argument("--no-stem", action="store_true")
    p.add_argument("--split", choices=["nonalnum", "space"], default="nonalnum")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="rank documents for one ad-hoc query")
    p.add_argument("--index", required=True)
    p.add_argument("query", nargs="+")
    _add_scoring(p)
    p.set_defaults(func=cmd_search)

    for name, func, help_ in (
        ("batch", cmd_batch, "run all topics and write a TREC run file"),
        ("sweep", cmd_sweep, "evaluate a smoothing parameter grid"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config")
        p.add_argument("--index")
        p.add_argument("--topics")
        p.add_argument("--qtype", choices=["sk", "sv", "lv", "SK", "SV", "LV"], default="sk")
        p.add_argument("--output")
        _add_scoring(p)
        if name == "sweep":
            p.add_argument("--qrels")
            p.add_argument("--lambda-grid", dest="lambda_grid")
            p.add_argument("--mu-grid", dest="mu_grid")
            p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func, _parser=p)

    p = sub.add_parser("evaluate", help="MAP, P@5, P@10 of a run; optional significance vs a baseline")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--baseline", help="baseline run for the one-sided Wilcoxon test")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("axioms", help="check the verbosity/topicality constraints empirically")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--lambda-s", dest="lambda_s", type=float, default=0.25)
    p.add_argument("--tau", choices=["vocab", "info"], default="info")
    p.add_argument("--output")
    p.set_defaults(func=cmd_axioms, _parser=p)

    p = sub.add_parser("generate", help="write the seeded synthetic test collection")
    p.add_argument("directory")
    p.add_argument("--docs", type=int, default=1000)
    p.add_argument("--topics", dest="topics_count", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if getattr(args, "_parser", None) is not None:
            _apply_config(args, args._parser)
        return args.func(args)
    except (UsageError, CorpusError, FormatError, QueryError, ValueError, OSError) as exc:
        print(f"tfnorm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
