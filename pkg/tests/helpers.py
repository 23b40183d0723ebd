"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

from fence import (
    build_ela_graph,
    enumerate_trees,
    expand_forest,
    parse_grammar_text,
    run_chart,
    tokenize,
)

# The lexically ambiguous running example: digits around points read either as
# Real tokens or as Integer Point Integer, disambiguated by the productions.
AMBIG_NUMBERS = """
%token Integer /(-|\\+)?[0-9]+/
%token Real /(-|\\+)?[0-9]+\\.[0-9]+/
%token Point /\\./
%token Slash /\\//
%token Ampersand /\\&/
%start E
E ::= A B ;
A ::= Ampersand Real Ampersand ;
B ::= Slash Integer Point Integer Slash ;
"""

AMBIG_INPUT = "&5.2& /25.20/"

ARITH = """
%token plus /\\+/
%token int /[0-9]+/
%start E
[add] E ::= E plus E ;
[lit] E ::= int ;
"""

ARITH_LEFT = ARITH.replace("[add] E", "%assoc left [add] E")

DANGLING_ELSE = """
%token if /if/
%token else /else/
%token expr /expr[0-9]*/
%token sent /sent[0-9]*/
%start S
[ifshort] S ::= if E S ;
[iflong] S ::= if E S else S ;
S ::= sent ;
E ::= expr ;
%prefer compose iflong over ifshort ;
"""

OUTPUT_CALL = """
%token output /output/
%token name /[a-z][a-z0-9]*/
%token lp /\\(/
%token rp /\\)/
%token semi /;/
%start Statement
[stmt_out] Statement ::= OutputStatement ;
[stmt_call] Statement ::= FunctionCall ;
OutputStatement ::= output lp name rp semi ;
FunctionCall ::= name lp name rp semi ;
%prefer select stmt_out over stmt_call ;
"""


def chain(k: int) -> str:
    """An operand chain with k operands: 1+1+...+1."""
    return "+".join(["1"] * k)


def catalan(m: int) -> int:
    import math

    return math.comb(2 * m, m) // (m + 1)


def pipeline(grammar, text, enforce=True, agenda_order="lifo"):
    """Tokenize, extend, chart, expand; returns (la, ig, eg)."""
    la = tokenize(grammar, text)
    ela = build_ela_graph(la)
    ig = run_chart(grammar, ela, agenda_order)
    eg = expand_forest(grammar, ig, enforce_constraints=enforce)
    return la, ig, eg


def pipeline_trees(grammar, text, enforce=True):
    """Canonical tree set produced by the full pipeline."""
    _la, _ig, eg = pipeline(grammar, text, enforce)
    return frozenset(enumerate_trees(eg, grammar, 10**6)) if eg.roots else frozenset()


def grammar(text, **kw):
    return parse_grammar_text(text, **kw)
