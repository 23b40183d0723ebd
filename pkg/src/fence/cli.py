"""Command-line driver.

    fence parse --grammar <file> (--input <file> | --text <string>)
                [--count] [--enumerate N] [--format json|dot]
                [--dump-la] [--dump-ela] [--dump-ig]

Exit status: 0 when at least one interpretation survives, 1 when the input is
rejected (a diagnostic goes to stderr), 2 for usage or grammar errors. The
dump flags emit the intermediate documents, in pipeline order, before the
final output; all structured output is deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .chart import igraph_document
from .elagraph import ela_document
from .enforce import (
    egraph_document,
    egraph_to_dot,
    enumerate_trees,
    tree_counts,
    tree_to_jsonable,
)
from .errors import FenceError
from .grammar import GrammarError, parse_grammar_text
from .lexgraph import serialize_la_graph
from .pipeline import explain_rejection, parse_text

__all__ = ["SessionConfig", "run_pipeline", "main"]


@dataclass
class SessionConfig:
    grammar_path: str
    input_path: str | None = None
    text: str | None = None
    count_only: bool = False
    enumerate_limit: int | None = None
    fmt: str = "json"
    dumps: tuple[str, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if (self.input_path is None) == (self.text is None):
            raise ValueError("exactly one of --input and --text is required")
        if self.enumerate_limit is not None and self.enumerate_limit < 1:
            raise ValueError("--enumerate requires a limit >= 1")
        if self.fmt not in ("json", "dot"):
            raise ValueError("--format must be json or dot")


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2))


def run_pipeline(config: SessionConfig) -> int:
    """Execute the pipeline described by ``config``; returns the exit status."""
    try:
        config.validate()
        grammar = parse_grammar_text(Path(config.grammar_path).read_text(encoding="utf-8"))
        if config.input_path is not None:
            text = Path(config.input_path).read_text(encoding="utf-8")
        else:
            text = config.text or ""
    except (OSError, ValueError, GrammarError) as exc:
        print(f"fence: error: {exc}", file=sys.stderr)
        return 2

    try:
        outcome = parse_text(grammar, text)
    except FenceError as exc:
        print(f"fence: error: {exc}", file=sys.stderr)
        return 2

    if "la" in config.dumps and outcome.la is not None:
        _emit(serialize_la_graph(outcome.la, grammar))
    if "ela" in config.dumps and outcome.ela is not None:
        _emit(ela_document(outcome.ela, grammar))
    if "ig" in config.dumps and outcome.igraph is not None:
        _emit(igraph_document(outcome.igraph, grammar))

    if not outcome.accepted:
        if config.count_only:
            print(0)
        print(explain_rejection(outcome), file=sys.stderr)
        return 1

    egraph = outcome.egraph
    if config.count_only:
        print(tree_counts(egraph).total)
    elif config.enumerate_limit is not None:
        trees = enumerate_trees(egraph, grammar, config.enumerate_limit)
        _emit([tree_to_jsonable(t) for t in trees])
    elif config.fmt == "dot":
        print(egraph_to_dot(egraph, grammar), end="")
    else:
        _emit(egraph_document(egraph, grammar))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fence",
        description="Chart parser for ambiguous context-free grammars over token lattices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", help="parse one input against a grammar")
    p.add_argument("--grammar", required=True, help="grammar file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="file containing the input text")
    src.add_argument("--text", help="input text given inline")
    p.add_argument("--count", action="store_true", help="print only the number of parse trees")
    p.add_argument("--enumerate", type=int, metavar="N", help="print up to N parse trees")
    p.add_argument("--format", choices=("json", "dot"), default="json", help="final output format")
    p.add_argument("--dump-la", action="store_true", help="dump the lexical analysis graph")
    p.add_argument("--dump-ela", action="store_true", help="dump the extended graph (with cores)")
    p.add_argument("--dump-ig", action="store_true", help="dump the implicit parse graph")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    dumps = tuple(
        name for name, on in (("la", args.dump_la), ("ela", args.dump_ela), ("ig", args.dump_ig)) if on
    )
    config = SessionConfig(
        grammar_path=args.grammar,
        input_path=args.input,
        text=args.text,
        count_only=args.count,
        enumerate_limit=args.enumerate,
        fmt=args.format,
        dumps=dumps,
    )
    return run_pipeline(config)


if __name__ == "__main__":
    sys.exit(main())
