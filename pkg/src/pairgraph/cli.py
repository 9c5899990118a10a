"""Command-line entry point: build, stats, verbalize, corpus, eval."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .metrics import EvalError, evaluate
from .pipeline import (BuildOptions, DatasetFormatError, build_dataset, compute_stats, drop_histogram,
                       dumps_line, read_dataset, read_samples, write_dataset)
from .pretrain import build_pairs, read_allow_list, read_paragraphs, write_pairs
from .store import LoadError, load_store, read_vocab
from .verbalize import choose_target, format_context_input, format_question_only, verbalize_record

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

logger = logging.getLogger("pairgraph")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairgraph", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build the paired question/graph dataset")
    p.add_argument("--triples", required=True)
    p.add_argument("--labels")
    p.add_argument("--samples", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--drops", help="drop report path (default: OUTPUT.drops.json)")
    p.add_argument("--vocab", help="KGE vocabulary, one id per line")
    p.add_argument("--strict-vocab", action="store_true", help="also require relations in --vocab")
    p.add_argument("--bindings", choices=("all", "first"), default="all")
    p.add_argument("--strict-ids", action="store_true")
    p.add_argument("--drop-filtered", action="store_true")
    p.add_argument("--max-graph-size", type=positive_int)
    p.add_argument("--jobs", type=positive_int, default=1)

    p = sub.add_parser("stats", help="corpus statistics with distribution figures")
    p.add_argument("--dataset", required=True)
    p.add_argument("--output", help="write the statistics as JSON here")
    p.add_argument("--figures", help="directory for PNG distribution plots")

    p = sub.add_parser("verbalize", help="text inputs for fine-tuning")
    p.add_argument("--dataset", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=("context", "question"), default="context")
    p.add_argument("--target-policy", choices=("first", "joined"), default="first")

    p = sub.add_parser("corpus", help="paragraph/graph pairs for distant pretraining")
    p.add_argument("--triples", required=True)
    p.add_argument("--labels")
    p.add_argument("--paragraphs", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--drops", help="drop count report path (default: OUTPUT.drops.json)")
    p.add_argument("--min-mentions", type=positive_int, default=4)
    p.add_argument("--allow-list", help="doc ids to keep, one per line")
    p.add_argument("--strict-ids", action="store_true")

    p = sub.add_parser("eval", help="score predictions against a gold dataset")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--output", help="write the machine-readable report here")
    return parser


def _check_inputs(*paths):
    for path in paths:
        if path is not None and not os.path.isfile(path):
            raise FileNotFoundError(f"no such file: {path}")


def _check_distinct(output, drops):
    if os.path.abspath(output) == os.path.abspath(drops):
        raise UsageError("--drops must differ from --output")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def cmd_build(args):
    drops_path = args.drops or args.output + ".drops.json"
    _check_distinct(args.output, drops_path)
    _check_inputs(args.triples, args.labels, args.samples, args.vocab)
    store = load_store(args.triples, args.labels, strict_ids=args.strict_ids)
    samples = read_samples(args.samples)
    options = BuildOptions(
        vocab=read_vocab(args.vocab) if args.vocab else None,
        bindings=args.bindings,
        max_graph_size=args.max_graph_size,
        drop_filtered=args.drop_filtered,
        strict_relations=args.strict_vocab,
    )
    logger.info("loaded %d triples, %d samples", len(store), len(samples))
    records, drops = build_dataset(samples, store, options, jobs=args.jobs)
    write_dataset(records, args.output)
    histogram = drop_histogram(drops)
    _write_json(drops_path, {
        "input_samples": len(samples),
        "records": len(records),
        "drops": histogram,
        "dropped": [{"id": d.id, "reason": d.reason.value, "detail": d.detail} for d in drops],
    })
    print(f"{len(records)} records, {len(drops)} dropped of {len(samples)} samples", file=sys.stderr)
    for reason, count in histogram.items():
        print(f"  {reason:<18} {count}", file=sys.stderr)


def cmd_stats(args):
    _check_inputs(args.dataset)
    records = read_dataset(args.dataset)
    stats = compute_stats(records)
    summary = stats.summary()
    for key, value in summary.items():
        print(f"{key}\t{value:.6g}" if isinstance(value, float) else f"{key}\t{value}")
    if args.output:
        _write_json(args.output, dict(summary,
                                      answers_per_question={str(k): v for k, v in stats.answers_per_question.items()},
                                      triples_per_graph={str(k): v for k, v in stats.triples_per_graph.items()}))
    if args.figures:
        from .plots import plot_distributions

        for path in plot_distributions(stats, args.figures):
            logger.info("wrote %s", path)


def cmd_verbalize(args):
    _check_inputs(args.dataset)
    records = read_dataset(args.dataset)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            if args.mode == "context":
                text = format_context_input(r.question, verbalize_record(r.graph))
            else:
                text = format_question_only(r.question)
            fh.write(dumps_line({"id": r.id, "input": text,
                                 "target": choose_target(r.answers, args.target_policy)}) + "\n")
    print(f"{len(records)} inputs written", file=sys.stderr)


def cmd_corpus(args):
    drops_path = args.drops or args.output + ".drops.json"
    _check_distinct(args.output, drops_path)
    _check_inputs(args.triples, args.labels, args.paragraphs, args.allow_list)
    store = load_store(args.triples, args.labels, strict_ids=args.strict_ids)
    paragraphs = read_paragraphs(args.paragraphs)
    allowed = read_allow_list(args.allow_list) if args.allow_list else None
    pairs, drops = build_pairs(paragraphs, store, args.min_mentions, allowed)
    write_pairs(pairs, args.output)
    _write_json(drops_path, {"input_paragraphs": len(paragraphs), "pairs": len(pairs),
                             "drops": dict(sorted(drops.items()))})
    print(f"{len(pairs)} pairs from {len(paragraphs)} paragraphs; drops: "
          + ", ".join(f"{k}={v}" for k, v in sorted(drops.items())), file=sys.stderr)


def cmd_eval(args):
    _check_inputs(args.predictions, args.gold)
    report = evaluate(args.predictions, args.gold)
    print(report)
    line = dumps_line(report.as_line())
    print(line)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(line + "\n")


COMMANDS = {
    "build": cmd_build,
    "stats": cmd_stats,
    "verbalize": cmd_verbalize,
    "corpus": cmd_corpus,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pairgraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        name = getattr(exc, "filename", None)
        print(f"pairgraph: error: {exc if name is None else f'cannot read {name}'}", file=sys.stderr)
        return EXIT_DATA
    except (LoadError, DatasetFormatError, EvalError, ValueError, OSError) as exc:
        print(f"pairgraph: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
