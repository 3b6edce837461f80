"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data error. Results go to stdout
(or ``--out``), progress and diagnostics to stderr.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import query, stats
from .errors import WikindexError
from .lemmatizer import EXTERNAL, lemmatize
from .pipeline import index_dump
from .store import open_index
from .wikitext import ParserConfig, convert

log = logging.getLogger("wikindex")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}", self)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive_int_list(text):
    values = _int_list(text)
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"values must be positive: {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wikindex", description="Index MediaWiki dumps and query the index.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("index", help="build an index from a dump")
    p.add_argument("--dump", required=True, type=Path)
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--lang", required=True, help="language code; en/simple enable English suffix stripping")
    p.add_argument("--max-pages-per-lexeme", type=_positive_int, default=1000)
    p.add_argument("--keep-interwiki", action="store_true")
    p.add_argument("--namespaces", type=_int_list, default=[0])
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: CPU count)")
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--spill-rows", type=_positive_int, default=200_000,
                   help="postings buffered in memory before spilling a sorted run")

    p = sub.add_parser("query-terms", help="TF-IDF weighted terms of a page")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--page", required=True)
    p.add_argument("--top", type=_positive_int, default=20)
    p.add_argument("--normalize-tf", action="store_true")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")

    p = sub.add_parser("query-pages", help="pages containing all lemmas, ranked by summed TF")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--lemmas", required=True)
    p.add_argument("--top", type=_positive_int, default=100)
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")

    p = sub.add_parser("stats", help="corpus summary counts")
    p.add_argument("--index", required=True, type=Path)

    p = sub.add_parser("compare", help="ratio table of two indexes")
    p.add_argument("--a", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path)
    p.add_argument("--format", choices=("text", "tsv"), default="text")

    p = sub.add_parser("zipf", help="rank-frequency data with power-law fits as CSV")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--k", type=_positive_int, default=10000)
    p.add_argument("--fit", type=_positive_int_list, default=[100, 10000])
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--doc-freq", action="store_true", help="add experimental doc_freq column")

    p = sub.add_parser("top-words", help="most frequent lemmas")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--n", type=_positive_int, default=1000)

    p = sub.add_parser("export", help="dump the index tables as TSV")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("parse", help="convert a wikitext file to plain text")
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--keep-interwiki", action="store_true")
    return parser


def _cmd_index(args, out):
    index = index_dump(args.dump, args.index, args.lang,
                       max_pages_per_lexeme=args.max_pages_per_lexeme,
                       keep_interwiki=args.keep_interwiki, namespaces=args.namespaces,
                       threads=args.threads, overwrite=args.overwrite,
                       spill_rows=args.spill_rows)
    summary = stats.corpus_summary(index)
    print(f"indexed {summary.articles} pages, {summary.lexemes} lexemes into {args.index}",
          file=sys.stderr)


def _cmd_query_terms(args, out):
    index = open_index(args.index)
    terms = query.doc_term_weights(index, args.page, args.top, args.normalize_tf)
    render = query.weighted_terms_tsv if args.format == "tsv" else query.weighted_terms_jsonl
    out.write(render(terms))


def _cmd_query_pages(args, out):
    index = open_index(args.index)
    spec = index.lemmatizer_spec
    words = [w.strip() for w in args.lemmas.split(",") if w.strip()]
    if not words:
        raise UsageError("--lemmas needs at least one lemma")
    if spec.kind != EXTERNAL:
        words = [lemmatize(w, spec) for w in words]
    pages = query.pages_for_lemmas(index, words, args.top)
    render = query.ranked_pages_tsv if args.format == "tsv" else query.ranked_pages_jsonl
    out.write(render(pages))


def _cmd_stats(args, out):
    summary = stats.corpus_summary(open_index(args.index))
    for name, value in vars(summary).items():
        out.write(f"{name}\t{value}\n")


def _cmd_compare(args, out):
    rows = stats.compare_snapshots(stats.corpus_summary(open_index(args.a)),
                                   stats.corpus_summary(open_index(args.b)))
    out.write(stats.comparison_text(rows) if args.format == "text" else stats.comparison_tsv(rows))


def _cmd_zipf(args, out):
    fits = stats.emit_plot_data(open_index(args.index), args.k, args.fit, args.out,
                                with_doc_freq=args.doc_freq)
    out.write("fit_range\tranks_used\tslope\tintercept\tresidual\n")
    for n, fit in fits.items():
        out.write(f"{n}\t{fit.k}\t{fit.slope:.7f}\t{fit.intercept:.6f}\t{fit.residual:.6g}\n")


def _cmd_top_words(args, out):
    for lemma, freq in stats.top_words(open_index(args.index), args.n):
        out.write(f"{lemma}\t{freq}\n")


def _cmd_export(args, out):
    for path in open_index(args.index).export_tsv(args.out):
        print(f"wrote {path}", file=sys.stderr)


def _cmd_parse(args, out):
    text = args.input.read_text(encoding="utf-8")
    out.write(convert(text, ParserConfig(remove_not_expand_iwiki=not args.keep_interwiki)) + "\n")


COMMANDS = {
    "index": _cmd_index,
    "query-terms": _cmd_query_terms,
    "query-pages": _cmd_query_pages,
    "stats": _cmd_stats,
    "compare": _cmd_compare,
    "zipf": _cmd_zipf,
    "top-words": _cmd_top_words,
    "export": _cmd_export,
    "parse": _cmd_parse,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(asctime)s %(name)s: %(message)s", stream=sys.stderr)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        (exc.parser or parser).print_help(sys.stderr)
        return EXIT_USAGE
    except (WikindexError, OSError) as exc:
        print(f"wikindex: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
