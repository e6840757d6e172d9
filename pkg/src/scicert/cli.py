"""Command-line pipeline: ingest, extract, sample, train, score, eval,
agreement, match, analyze.

Every output embeds a manifest (tool version, config hash, lexicon hashes,
seed); reruns with identical flags and seed are byte-identical. A config file
of key=value lines mirrors every flag; explicit flags win.

Exit codes: 0 ok, 2 usage, 3 data error, 4 external-scorer error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, corpus as corpus_mod
from .analysis import (
    RankDeficiencyError,
    aspect_sentence_association,
    hedge_certainty_curve,
    run_rq,
    write_association_csv,
    write_hedge_curve_csv,
    write_margins_csv,
    write_regression_csv,
    write_svg_bars,
    RQInputs,
)
from .corpus import (
    DataError,
    aggregate_annotations,
    ingest_corpus,
    preprocess_news,
    read_annotations,
    read_findings,
    write_corpus,
    write_findings,
    write_jsonl,
)
from .evalkit import (
    AgreementError,
    SplitSpec,
    StratumError,
    ZeroVarianceError,
    alpha_from_annotations,
    evaluate_aspects,
    evaluate_sentence,
    stratified_hedge_sample,
)
from .extraction import extract_abstract_findings, extract_news_findings
from .lexicon import (
    LexiconError,
    Lexicon,
    count_hedges,
    load_hedges,
    load_report_verbs,
    load_stopwords,
)
from .manifest import build_manifest
from .matching import match_findings
from .scoring import (
    BowModel,
    DegenerateFitError,
    HedgeLinearModel,
    ScorerTransportError,
    fit_bow,
    fit_hedge_model,
    read_scores,
    score_external,
    write_scores,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SCORER = 4

_DATA_ERRORS = (DataError, LexiconError, StratumError, AgreementError,
                ZeroVarianceError, RankDeficiencyError, DegenerateFitError,
                OSError, json.JSONDecodeError, KeyError)


class JsonArgumentParser(argparse.ArgumentParser):
    """argparse that emits a machine-readable error object on stderr."""

    def error(self, message):
        _emit_error("usage", message)
        raise SystemExit(EXIT_USAGE)


def _emit_error(kind: str, message: str, **extra) -> None:
    payload = {"error": {"type": kind, "message": str(message), **extra}}
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True, default=str),
          file=sys.stderr)


def parse_config_file(path) -> dict:
    """key=value config lines; '#' comments; bare/quoted strings, ints,
    floats, booleans."""
    values = {}
    for raw in Path(path).read_text("utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"bad config line (expected key=value): {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if value.startswith(('"', "'")) and value.endswith(value[0]) and len(value) > 1:
            parsed = value[1:-1]
        elif value.lower() in ("true", "false"):
            parsed = value.lower() == "true"
        else:
            try:
                parsed = int(value)
            except ValueError:
                try:
                    parsed = float(value)
                except ValueError:
                    parsed = value
        values[key] = parsed
    return values


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file; flags override")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hedge-lexicon", dest="hedge_lexicon")
    parser.add_argument("--verb-lexicon", dest="verb_lexicon")
    parser.add_argument("--stopwords", dest="stopwords")


# flags that must be present after merging the config file (they stay
# optional at parse time so the config can supply them)
_REQUIRED = {
    "ingest": ("news", "papers", "out"),
    "extract": ("corpus", "out"),
    "sample": ("findings", "n"),
    "train": ("findings", "annotations", "model", "split", "out"),
    "score": ("findings", "out"),
    "eval": ("scores", "annotations", "split", "out"),
    "agreement": ("annotations",),
    "match": ("corpus", "findings", "out"),
    "analyze": ("rq", "out"),
}


def build_parser() -> JsonArgumentParser:
    parser = JsonArgumentParser(prog="scicert", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = {}

    def add_parser(name, **kw):
        p = sub.add_parser(name, **kw)
        parser.subcommands[name] = p
        return p

    p = add_parser("ingest", help="ingest + preprocess a corpus")
    p.add_argument("--news")
    p.add_argument("--papers")
    p.add_argument("--out")
    p.add_argument("--length-cutoff", type=int, default=corpus_mod.DEFAULT_LENGTH_CUTOFF)
    _add_common(p)

    p = add_parser("extract", help="extract findings from a corpus store")
    p.add_argument("--corpus")
    p.add_argument("--out")
    _add_common(p)

    p = add_parser("sample", help="stratified sampling for annotation")
    p.add_argument("--findings")
    p.add_argument("--n", type=int)
    p.add_argument("--strategy", default="hedge-stratified",
                   choices=["hedge-stratified"])
    p.add_argument("--proportions", default="0.5,0.35,0.15")
    p.add_argument("--out")
    _add_common(p)

    p = add_parser("train", help="fit a scorer on annotated findings")
    p.add_argument("--findings")
    p.add_argument("--annotations")
    p.add_argument("--model", choices=["bow", "hedge"])
    p.add_argument("--split")
    p.add_argument("--out")
    p.add_argument("--ridge-penalty", type=float, default=1.0)
    p.add_argument("--vocab-capacity", type=int, default=40000)
    _add_common(p)

    p = add_parser("score", help="score findings with a model or endpoint")
    p.add_argument("--findings")
    p.add_argument("--model")
    p.add_argument("--external", help="subprocess command for stdio scoring")
    p.add_argument("--address", help="host:port of a TCP scorer")
    p.add_argument("--out")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--max-in-flight", type=int, default=32)
    _add_common(p)

    p = add_parser("eval", help="Table-1/Fig-4 style evaluation report")
    p.add_argument("--scores")
    p.add_argument("--annotations")
    p.add_argument("--split")
    p.add_argument("--out")
    _add_common(p)

    p = add_parser("agreement", help="Krippendorff alpha per task")
    p.add_argument("--annotations")
    p.add_argument("--out")
    _add_common(p)

    p = add_parser("match", help="match news findings to abstract findings")
    p.add_argument("--corpus")
    p.add_argument("--findings")
    p.add_argument("--out")
    p.add_argument("--min-overlap", type=int, default=3)
    p.add_argument("--min-jaccard", type=float, default=0.3)
    _add_common(p)

    p = add_parser("analyze", help="run one analysis spec")
    p.add_argument("--rq",
                   choices=["rq1", "rq2", "rq3", "rq4", "rq5", "fig2", "fig3"])
    p.add_argument("--corpus")
    p.add_argument("--findings")
    p.add_argument("--scores")
    p.add_argument("--pairs")
    p.add_argument("--annotations")
    p.add_argument("--out")
    p.add_argument("--robust", action="store_true")
    p.add_argument("--svg", action="store_true", help="also emit minimal SVG charts")
    _add_common(p)

    return parser


def _resolve_config(args) -> dict:
    resolved = {k: v for k, v in vars(args).items()
                if k not in ("command", "config") and v is not None}
    return resolved


class Context:
    def __init__(self, args):
        self.args = args
        self.hedges = load_hedges(args.hedge_lexicon)
        self.verbs = load_report_verbs(args.verb_lexicon)
        self.stopwords = load_stopwords(args.stopwords)
        lexicon_hashes = {
            "hedges": self.hedges.sha256,
            "report_verbs": self.verbs.sha256,
            "stopwords": self.stopwords.sha256,
        }
        self.manifest = build_manifest(args.command, _resolve_config(args),
                                       lexicon_hashes, seed=args.seed)

    def read_corpus_store(self, directory):
        directory = Path(directory)
        result = ingest_corpus(directory / "news.jsonl", directory / "papers.jsonl")
        if result.issues:
            raise DataError(
                f"corpus store {directory} has {len(result.issues)} bad lines; "
                f"first: {result.issues[0]}")
        return result.corpus


def cmd_ingest(ctx: Context) -> int:
    args = ctx.args
    result = ingest_corpus(args.news, args.papers)
    processed, report = preprocess_news(result.corpus, args.length_cutoff)
    out = Path(args.out)
    write_corpus(processed, out, manifest=ctx.manifest)
    report_payload = {
        "issues": [vars(i) for i in result.issues],
        "preprocess": vars(report),
        "papers": len(processed.papers),
        "articles": len(processed.articles),
    }
    (out / "ingest_report.json").write_text(
        json.dumps({"_manifest": ctx.manifest, **report_payload},
                   indent=2, sort_keys=True) + "\n", "utf-8")
    print(json.dumps(report_payload["preprocess"], sort_keys=True))
    return EXIT_OK


def cmd_extract(ctx: Context) -> int:
    args = ctx.args
    corpus = ctx.read_corpus_store(args.corpus)
    findings = []
    for paper in corpus.papers:
        findings.extend(extract_abstract_findings(paper))
    for article in corpus.articles:
        findings.extend(extract_news_findings(article, ctx.verbs))
    write_findings(args.out, findings, manifest=ctx.manifest)
    print(json.dumps({"findings": len(findings)}))
    return EXIT_OK


def cmd_sample(ctx: Context) -> int:
    args = ctx.args
    findings = read_findings(args.findings)
    proportions = tuple(float(p) for p in str(args.proportions).split(","))
    sample = stratified_hedge_sample(findings, args.n, proportions=proportions,
                                     seed=args.seed, hedge_lexicon=ctx.hedges)
    if args.out:
        write_findings(args.out, sample.findings, manifest=ctx.manifest)
    print(json.dumps({"strata": list(sample.stratum_counts)}))
    return EXIT_OK


def _load_gold(annotations_path):
    records = read_annotations(annotations_path)
    gold, report = aggregate_annotations(records)
    sentence = {fid: g.sentence_certainty for fid, g in gold.items()
                if g.sentence_certainty is not None}
    aspects = {fid: g.aspect_map for fid, g in gold.items() if g.aspects}
    return records, gold, sentence, aspects, report


def cmd_train(ctx: Context) -> int:
    args = ctx.args
    findings = read_findings(args.findings)
    _, _, sentence_gold, aspect_gold, _ = _load_gold(args.annotations)
    split = SplitSpec.load(args.split)
    train_ids = set(split.train)
    train_findings = [f for f in findings if f.finding_id in train_ids]
    if args.model == "bow":
        model = fit_bow(train_findings, sentence_gold, aspect_gold,
                        ridge_penalty=args.ridge_penalty,
                        vocab_capacity=args.vocab_capacity)
        model.save(args.out)
    else:
        pairs = [(count_hedges(f.text, ctx.hedges), sentence_gold[f.finding_id])
                 for f in train_findings if f.finding_id in sentence_gold]
        model = fit_hedge_model(pairs, hedge_lexicon=ctx.hedges)
        Path(args.out).write_text(json.dumps({
            "_manifest": ctx.manifest,
            "model": "hedge-linear",
            "slope": model.slope,
            "intercept": model.intercept,
        }, indent=2, sort_keys=True) + "\n", "utf-8")
    print(json.dumps({"model": args.model, "train_findings": len(train_findings)}))
    return EXIT_OK


def load_model(path, hedges: Lexicon):
    path = Path(path)
    head = path.open("rb").read(2)
    if head == b"PK":
        return BowModel.load(path)
    payload = json.loads(path.read_text("utf-8"))
    if payload.get("model") != "hedge-linear":
        raise DataError(f"{path} is not a recognized model file")
    return HedgeLinearModel(slope=float(payload["slope"]),
                            intercept=float(payload["intercept"]),
                            hedge_lexicon=hedges)


def cmd_score(ctx: Context) -> int:
    args = ctx.args
    findings = read_findings(args.findings)
    if args.model:
        model = load_model(args.model, ctx.hedges)
        scores = [model.score(f) for f in findings]
    elif args.external:
        scores = score_external(findings, command=args.external.split(),
                                timeout=args.timeout,
                                max_in_flight=args.max_in_flight)
    else:
        scores = score_external(findings, address=args.address,
                                timeout=args.timeout,
                                max_in_flight=args.max_in_flight)
    write_scores(args.out, scores, manifest=ctx.manifest)
    print(json.dumps({"scored": len(scores)}))
    return EXIT_OK


class _ScoreLookupModel:
    """Adapter: replays stored scores through the evaluation interface."""

    def __init__(self, scores):
        self.by_id = {s.finding_id: s for s in scores}

    def score(self, finding):
        return self.by_id[finding.finding_id]


class _IdStub:
    """Minimal finding stand-in for replaying stored scores through eval."""

    __slots__ = ("finding_id",)

    def __init__(self, finding_id):
        self.finding_id = finding_id


def cmd_eval(ctx: Context) -> int:
    args = ctx.args
    scores = read_scores(args.scores)
    _, _, sentence_gold, aspect_gold, _ = _load_gold(args.annotations)
    split = SplitSpec.load(args.split)
    model = _ScoreLookupModel(scores)
    findings = [_IdStub(fid) for fid in model.by_id]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sent = evaluate_sentence(model, split, findings, sentence_gold)
    summary = {"r_full_test": sent.r_full_test,
               "r_random_set": sent.r_random_set}
    rows = [["sentence_r", "full_test", f"{sent.r_full_test:.10g}", sent.n_full_test],
            ["sentence_r", "random_set", f"{sent.r_random_set:.10g}", sent.n_random_set]]

    aspects = evaluate_aspects(model, split, findings, aspect_gold)
    for aspect, cls, f1 in aspects.cells:
        rows.append([f"f1_{aspect}", cls, f"{f1:.10g}", ""])
    rows.append(["f1_mean", "", f"{aspects.mean_f1:.10g}", ""])
    summary["aspect_mean_f1"] = aspects.mean_f1

    from .analysis import _write_csv
    _write_csv(out / "eval_report.csv", ["metric", "slice", "value", "n"], rows,
               ctx.manifest)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_agreement(ctx: Context) -> int:
    args = ctx.args
    records = read_annotations(args.annotations)
    report = {"sentence": alpha_from_annotations(records, "sentence")}
    for aspect in corpus_mod.ASPECTS:
        try:
            report[aspect] = alpha_from_annotations(records, aspect)
        except AgreementError:
            report[aspect] = None
    if args.out:
        from .analysis import _write_csv
        _write_csv(args.out, ["task", "alpha"],
                   [[k, "" if v is None else f"{v:.10g}"] for k, v in report.items()],
                   ctx.manifest)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_match(ctx: Context) -> int:
    args = ctx.args
    corpus = ctx.read_corpus_store(args.corpus)
    findings = read_findings(args.findings)
    abstract_by_doi: dict[str, list] = {}
    news_by_article: dict[str, list] = {}
    for f in findings:
        if f.source == "abstract":
            abstract_by_doi.setdefault(f.origin_doi, []).append(f)
        else:
            news_by_article.setdefault(f.origin_article_id, []).append(f)
    pairs = []
    for article_id in sorted(news_by_article):
        news_findings = news_by_article[article_id]
        doi = news_findings[0].origin_doi
        abstract_findings = abstract_by_doi.get(doi, [])
        if not abstract_findings:
            continue
        pairs.extend(match_findings(news_findings, abstract_findings,
                                    min_overlap=args.min_overlap,
                                    min_jaccard=args.min_jaccard,
                                    stopwords=ctx.stopwords))
    write_jsonl(args.out, (p.to_dict() for p in pairs), manifest=ctx.manifest)
    print(json.dumps({"pairs": len(pairs)}))
    return EXIT_OK


def read_pairs(path):
    from .matching import MatchedPair

    out = []
    for line_no, obj, err in corpus_mod._iter_jsonl(Path(path)):
        if err:
            raise DataError(f"{path}:{line_no}: {err}")
        out.append(MatchedPair(
            news_finding_id=obj["news_finding_id"],
            abstract_finding_id=obj["abstract_finding_id"],
            overlap=int(obj["overlap"]),
            jaccard=float(obj["jaccard"]),
        ))
    return out


def cmd_analyze(ctx: Context) -> int:
    args = ctx.args
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.rq in ("fig2", "fig3"):
        if not args.annotations or not args.findings:
            raise DataError(f"{args.rq} needs --annotations and --findings")
        findings = read_findings(args.findings)
        _, _, sentence_gold, aspect_gold, _ = _load_gold(args.annotations)
        if args.rq == "fig2":
            curve = hedge_certainty_curve(findings, sentence_gold, ctx.hedges)
            write_hedge_curve_csv(curve, out / "fig2.csv", ctx.manifest)
            if args.svg:
                write_svg_bars(out / "fig2.svg", "mean certainty by hedge count",
                               [p.hedge_count for p in curve.points],
                               [p.mean_certainty for p in curve.points],
                               ctx.manifest)
            print(json.dumps({"pearson_r": curve.pearson_r, "n": curve.n}))
        else:
            assoc = aspect_sentence_association(sentence_gold, aspect_gold)
            write_association_csv(assoc, out / "fig3.csv", ctx.manifest)
            if args.svg:
                write_svg_bars(out / "fig3.svg", "relative certainty by aspect",
                               [f"{c.aspect[:4]}:{c.label[:3]}" for c in assoc.cells],
                               [c.relative for c in assoc.cells], ctx.manifest)
            print(json.dumps({"cells": len(assoc.cells), "n": assoc.n}))
        return EXIT_OK

    if not (args.corpus and args.findings and args.scores):
        raise DataError(f"{args.rq} needs --corpus, --findings and --scores")
    corpus = ctx.read_corpus_store(args.corpus)
    findings = read_findings(args.findings)
    scores = read_scores(args.scores)
    pairs = tuple(read_pairs(args.pairs)) if args.pairs else ()
    if args.rq in ("rq1", "rq2", "rq3") and not pairs:
        raise DataError(f"{args.rq} needs --pairs")
    inputs = RQInputs(
        findings_by_id={f.finding_id: f for f in findings},
        scores_by_id={s.finding_id: s for s in scores},
        papers_by_doi=corpus.paper_by_doi,
        articles_by_id=corpus.article_by_id,
        pairs=pairs,
    )
    report = run_rq(args.rq, inputs, robust=args.robust)
    for result in report.results:
        stem = result.name.replace(":", "_")
        write_regression_csv(result, out / f"{stem}.csv", ctx.manifest)
    for name, margin_rows in report.margins:
        stem = name.replace(":", "_")
        write_margins_csv(margin_rows, out / f"{stem}_margins.csv", ctx.manifest)
        if args.svg:
            write_svg_bars(out / f"{stem}_margins.svg", name,
                           [m.level or m.variable for m in margin_rows],
                           [m.margin for m in margin_rows], ctx.manifest)
    print(json.dumps({
        "results": [r.name for r in report.results],
        "dropped_missing_metadata": report.dropped_missing_metadata,
    }))
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "sample": cmd_sample,
    "train": cmd_train,
    "score": cmd_score,
    "eval": cmd_eval,
    "agreement": cmd_agreement,
    "match": cmd_match,
    "analyze": cmd_analyze,
}


def _parse_with_config(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = parse_config_file(args.config)
        unknown = [k for k in config if k not in vars(args)]
        if unknown:
            _emit_error("usage", f"unknown config keys: {unknown}")
            raise SystemExit(EXIT_USAGE)
        # config values become the subcommand's defaults; flags given on the
        # command line win because the reparse sees them in argv
        parser.subcommands[args.command].set_defaults(**config)
        args = parser.parse_args(argv)
    missing = [name for name in _REQUIRED[args.command]
               if getattr(args, name, None) is None]
    if missing:
        _emit_error("usage",
                    f"{args.command}: missing required options: "
                    + ", ".join(f"--{m.replace('_', '-')}" for m in missing))
        raise SystemExit(EXIT_USAGE)
    if args.command == "score":
        chosen = [opt for opt in ("model", "external", "address")
                  if getattr(args, opt, None)]
        if len(chosen) != 1:
            _emit_error("usage",
                        "score: provide exactly one of --model/--external/--address")
            raise SystemExit(EXIT_USAGE)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = _parse_with_config(parser, argv)
    try:
        ctx = Context(args)
        return _COMMANDS[args.command](ctx)
    except ScorerTransportError as exc:
        _emit_error("external-scorer", exc)
        return EXIT_SCORER
    except _DATA_ERRORS as exc:
        _emit_error("data", exc)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
