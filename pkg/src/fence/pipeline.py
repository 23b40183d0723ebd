"""End-to-end parse sessions: tokenize, extend, chart, expand.

A session runs the phases in order over one input and keeps every
intermediate result for inspection. Rejections are outcomes, not exceptions:
a failed tokenization or an empty set of accepted roots leaves diagnostics on
the outcome instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chart import IGraph, run_chart
from .elagraph import ELAGraph, build_ela_graph
from .enforce import EGraph, epsilon_forest, expand_forest
from .grammar import Grammar
from .lexgraph import LAGraph, TokenizationError, tokenize

__all__ = ["ParseOutcome", "parse_text", "explain_rejection"]


@dataclass
class ParseOutcome:
    grammar: Grammar
    text: str
    la: LAGraph | None = None
    ela: ELAGraph | None = None
    igraph: IGraph | None = None
    egraph: EGraph | None = None
    failure: str | None = None  # None, "lexical", or "parse"
    furthest: int | None = None

    @property
    def accepted(self) -> bool:
        return self.failure is None


def parse_text(
    grammar: Grammar,
    text: str,
    *,
    enforce_constraints: bool = True,
    agenda_order: str = "lifo",
) -> ParseOutcome:
    """Run the full pipeline over ``text``.

    An input with no tokens at all is accepted exactly when the start symbol
    can derive the empty string; the forest is then the canonical zero-width
    derivation, produced without running the chart.
    """
    outcome = ParseOutcome(grammar, text)
    try:
        outcome.la = tokenize(grammar, text)
    except TokenizationError as exc:
        outcome.failure = "lexical"
        outcome.furthest = exc.furthest
        return outcome
    if not outcome.la.nodes:
        if grammar.start.id in grammar.epsilon_ids:
            outcome.egraph = epsilon_forest(grammar, outcome.la.content_start, text)
        else:
            outcome.failure = "parse"
            outcome.furthest = outcome.la.content_start
        return outcome
    outcome.ela = build_ela_graph(outcome.la)
    outcome.igraph = run_chart(grammar, outcome.ela, agenda_order)
    outcome.egraph = expand_forest(grammar, outcome.igraph, enforce_constraints)
    if not outcome.egraph.roots:
        outcome.failure = "parse"
        outcome.furthest = max(t.end for t in outcome.la.nodes)
    return outcome


def explain_rejection(outcome: ParseOutcome, limit: int = 5) -> str:
    """Human-readable diagnostic for a rejected input."""
    if outcome.accepted:
        return "input accepted"
    if outcome.failure == "lexical":
        return f"lexical error: cannot tokenize the input beyond offset {outcome.furthest}"
    lines = [f"no parse: input tokenizes up to offset {outcome.furthest}"]
    grammar = outcome.grammar
    if outcome.igraph is not None:
        nodes = sorted(
            outcome.igraph.nodes,
            key=lambda n: (n.end - n.start, not n.is_token),
            reverse=True,
        )
        nonterminals = [n for n in nodes if not n.is_token]
        shown = (nonterminals or nodes)[:limit]
        what = "longest nonterminal spans" if nonterminals else "longest token spans"
        lines.append(f"{what}:")
        for n in shown:
            name = grammar.symbol_by_id[n.symbol_id].name
            lines.append(f"  {name} [{n.start},{n.end})")
    return "\n".join(lines)
