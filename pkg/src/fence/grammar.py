"""Grammar model: symbols, productions, constraints, and the grammar file format.

A grammar couples a token layer (named regex definitions plus an inter-token
skip pattern) with context-free productions over those tokens, a start symbol,
and optional disambiguation constraints: associativity, selection precedence,
composition precedence, and custom predicate evaluators. Empty right-hand
sides are allowed; the set of nonterminals that can derive the empty string is
computed as a least fixed point so that chained-nullable symbols are skippable
exactly like directly-empty ones.

Grammars are immutable once constructed and safe to share across concurrent
parse sessions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .errors import FenceError

TERMINAL = "terminal"
NONTERMINAL = "nonterminal"

ASSOC_LEFT = "left"
ASSOC_RIGHT = "right"
ASSOC_NONE = "none"
_ASSOC_DIRECTIONS = (ASSOC_LEFT, ASSOC_RIGHT, ASSOC_NONE)

DEFAULT_SKIP = r"[ \t\r\n]+"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_REGEX_BODY = r"((?:[^/\\]|\\.)*)"
_TOKEN_LINE = re.compile(r"\s*%token\s+([A-Za-z_]\w*)\s+/" + _REGEX_BODY + r"/\s*(?:#.*)?$")
_SKIP_LINE = re.compile(r"\s*%skip\s+/" + _REGEX_BODY + r"/\s*(?:#.*)?$")


class GrammarError(FenceError):
    """Malformed grammar text or an inconsistent set of declarations."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


@dataclass(frozen=True)
class Symbol:
    id: int
    name: str
    kind: str

    @property
    def is_terminal(self) -> bool:
        return self.kind == TERMINAL

    def __repr__(self):
        return f"Symbol({self.id}, {self.name!r}, {self.kind})"


@dataclass(frozen=True)
class Production:
    id: int
    lhs: Symbol
    rhs: tuple[Symbol, ...]
    label: str | None = None

    @property
    def is_epsilon(self) -> bool:
        return not self.rhs

    def ref(self) -> str:
        """Stable human-readable reference, used in diagnostics."""
        return self.label if self.label is not None else f"#{self.id}:{self.lhs.name}"

    def __str__(self):
        rhs = " ".join(s.name for s in self.rhs)
        return f"{self.lhs.name} ::= {rhs}".rstrip()


@dataclass(frozen=True)
class TokenDef:
    symbol: Symbol
    pattern: str
    regex: re.Pattern


@dataclass(frozen=True)
class NodeView:
    """Read-only view of a candidate parse node, passed to custom evaluators."""

    symbol: str
    start: int
    end: int
    production: int | None
    label: str | None
    children: tuple["NodeView", ...]
    lexeme: str | None
    text: str


@dataclass(frozen=True)
class ConstraintSet:
    """Constraint declarations attached to productions.

    ``selection`` and ``composition`` hold the declared pairs; their transitive
    closures live on the owning grammar. A ``selection`` pair (q, p) means q is
    preferred over p when both derive the same parse node. A ``composition``
    pair (p, q) means p may not take a direct child derived by q.
    """

    associativity: Mapping[int, str] = field(default_factory=dict)
    selection: tuple[tuple[int, int], ...] = ()
    composition: tuple[tuple[int, int], ...] = ()
    custom: Mapping[int, Callable[[NodeView], bool]] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not (self.associativity or self.selection or self.composition or self.custom)


@dataclass(frozen=True)
class ConstraintIssue:
    kind: str
    message: str
    productions: tuple[int, ...] = ()


@dataclass(frozen=True)
class ConstraintReport:
    errors: tuple[ConstraintIssue, ...]
    warnings: tuple[ConstraintIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def compute_epsilon_symbols(productions: Iterable[Production]) -> frozenset[Symbol]:
    """Nonterminals that can derive the empty string (least fixed point).

    A symbol qualifies if some production for it has every right-hand-side
    symbol already in the result; an empty right-hand side qualifies vacuously.
    """
    prods = tuple(productions)
    nullable: dict[int, Symbol] = {}
    changed = True
    while changed:
        changed = False
        for p in prods:
            if p.lhs.id not in nullable and all(s.id in nullable for s in p.rhs):
                nullable[p.lhs.id] = p.lhs
                changed = True
    return frozenset(nullable.values())


def _closure(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    closed = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in tuple(closed):
            for c, d in tuple(closed):
                if b == c and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
    return frozenset(closed)


class Grammar:
    """An immutable language definition.

    Use :func:`parse_grammar_text` (or :func:`make_grammar` from code) to build
    one; the constructor expects fully resolved symbols and productions.
    """

    def __init__(
        self,
        token_defs: Sequence[TokenDef],
        productions: Sequence[Production],
        start: Symbol,
        constraints: ConstraintSet | None = None,
        skip_pattern: str = DEFAULT_SKIP,
    ):
        self.token_defs = tuple(token_defs)
        self.productions = tuple(productions)
        self.start = start
        self.constraints = constraints if constraints is not None else ConstraintSet()
        self.skip_pattern = skip_pattern
        self.skip_re = re.compile(skip_pattern) if skip_pattern else None

        self.symbols: dict[str, Symbol] = {}
        for td in self.token_defs:
            self._intern(td.symbol)
        for p in self.productions:
            self._intern(p.lhs)
            for s in p.rhs:
                self._intern(s)
        self._intern(start)

        ids = [s.id for s in self.symbols.values()]
        if len(set(ids)) != len(ids):
            raise GrammarError("symbol ids are not unique")
        self.symbol_by_id: dict[int, Symbol] = {s.id: s for s in self.symbols.values()}
        terminal_names = {s.name for s in self.symbols.values() if s.is_terminal}
        nonterminal_names = {s.name for s in self.symbols.values() if not s.is_terminal}
        if terminal_names & nonterminal_names:
            raise GrammarError(
                "terminal and nonterminal namespaces overlap: "
                + ", ".join(sorted(terminal_names & nonterminal_names))
            )
        if start.is_terminal:
            raise GrammarError(f"start symbol {start.name!r} is a token, not a nonterminal")
        for p in self.productions:
            if p.lhs.is_terminal:
                raise GrammarError(f"production {p.ref()} has a token on its left-hand side")

        by_lhs: dict[int, list[Production]] = {}
        for p in self.productions:
            by_lhs.setdefault(p.lhs.id, []).append(p)
        self.productions_by_lhs: dict[int, tuple[Production, ...]] = {
            k: tuple(v) for k, v in by_lhs.items()
        }
        self.by_label: dict[str, Production] = {
            p.label: p for p in self.productions if p.label is not None
        }

        self.epsilon_symbols = compute_epsilon_symbols(self.productions)
        self.epsilon_ids = frozenset(s.id for s in self.epsilon_symbols)

        report = validate_constraints(self)
        if not report.ok:
            raise GrammarError("; ".join(i.message for i in report.errors))
        self.constraint_warnings = report.warnings

        self.selection_closed = _closure(self.constraints.selection)
        self.composition_closed = _closure(self.constraints.composition)
        preferred: dict[int, list[int]] = {}
        for q, p in sorted(self.selection_closed):
            preferred.setdefault(p, []).append(q)
        self.preferred_over: dict[int, tuple[int, ...]] = {
            p: tuple(qs) for p, qs in preferred.items()
        }
        blocks: dict[int, set[int]] = {}
        for p, q in self.composition_closed:
            blocks.setdefault(p, set()).add(q)
        self.composition_blocks: dict[int, frozenset[int]] = {
            p: frozenset(qs) for p, qs in blocks.items()
        }

        rank: dict[int, int] = {}

        def _rank(pid: int) -> int:
            if pid in rank:
                return rank[pid]
            above = self.preferred_over.get(pid, ())
            rank[pid] = 0 if not above else 1 + max(_rank(q) for q in above)
            return rank[pid]

        self.selection_order_by_lhs: dict[int, tuple[int, ...]] = {
            lhs: tuple(sorted((p.id for p in prods), key=lambda i: (_rank(i), i)))
            for lhs, prods in self.productions_by_lhs.items()
        }
        self.has_selection = bool(self.constraints.selection)

    def _intern(self, sym: Symbol) -> None:
        seen = self.symbols.get(sym.name)
        if seen is None:
            self.symbols[sym.name] = sym
        elif seen != sym:
            raise GrammarError(f"conflicting definitions for symbol {sym.name!r}")

    # -- lookups -----------------------------------------------------------

    def symbol(self, name: str) -> Symbol:
        try:
            return self.symbols[name]
        except KeyError:
            raise GrammarError(f"unknown symbol {name!r}") from None

    def production_by_ref(self, ref: str) -> Production:
        """Resolve a production by label, falling back to a unique lhs name."""
        if ref in self.by_label:
            return self.by_label[ref]
        sym = self.symbols.get(ref)
        if sym is not None and not sym.is_terminal:
            candidates = self.productions_by_lhs.get(sym.id, ())
            if len(candidates) == 1:
                return candidates[0]
            if len(candidates) > 1:
                raise GrammarError(f"production reference {ref!r} is ambiguous; add a [label]")
        raise GrammarError(f"unknown production reference {ref!r}")

    @cached_property
    def rhs_ids(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(s.id for s in p.rhs) for p in self.productions)

    @cached_property
    def epsilon_derivations(self) -> dict[int, tuple]:
        """Canonical minimal empty derivation per nullable symbol.

        Maps symbol id to a nested ``(production_id, (child, ...))`` skeleton,
        choosing the derivation with the fewest nodes and breaking ties by the
        lowest production id. Used to materialize zero-width placeholder
        children for skipped nullable positions.
        """
        inf = float("inf")
        cost: dict[int, float] = {}
        choice: dict[int, Production] = {}
        changed = True
        while changed:
            changed = False
            for p in self.productions:
                if all(s.id in cost for s in p.rhs):
                    c = 1 + sum(cost[s.id] for s in p.rhs)
                    old = cost.get(p.lhs.id, inf)
                    if c < old or (c == old and p.id < choice[p.lhs.id].id):
                        cost[p.lhs.id] = c
                        choice[p.lhs.id] = p
                        changed = True

        def build(sym_id: int) -> tuple:
            p = choice[sym_id]
            return (p.id, tuple(build(s.id) for s in p.rhs))

        return {sym_id: build(sym_id) for sym_id in cost}

    # -- comparison and serialization --------------------------------------

    def signature(self) -> tuple:
        """Canonical structural fingerprint, for round-trip comparisons."""
        return (
            tuple((td.symbol.id, td.symbol.name, td.pattern) for td in self.token_defs),
            tuple(
                (p.id, p.lhs.id, tuple(s.id for s in p.rhs), p.label) for p in self.productions
            ),
            self.start.id,
            self.skip_pattern,
            tuple(sorted(self.constraints.associativity.items())),
            tuple(sorted(self.constraints.selection)),
            tuple(sorted(self.constraints.composition)),
            tuple(sorted(s.id for s in self.epsilon_symbols)),
        )


def validate_constraints(grammar: Grammar) -> ConstraintReport:
    """Check every constraint declaration; report all violations, not just the first.

    Errors: references to nonexistent productions, self-precedence, cyclic
    precedence declarations, bad associativity directions. Warnings flag
    declarations that can never influence a parse.
    """
    errors: list[ConstraintIssue] = []
    warnings: list[ConstraintIssue] = []
    cs = grammar.constraints
    valid = {p.id for p in grammar.productions}

    def ref(pid: int) -> str:
        return grammar.productions[pid].ref() if pid in valid else f"#{pid}"

    for pid, direction in sorted(cs.associativity.items()):
        if pid not in valid:
            errors.append(
                ConstraintIssue("unknown-production", f"associativity on unknown production #{pid}", (pid,))
            )
            continue
        if direction not in _ASSOC_DIRECTIONS:
            errors.append(
                ConstraintIssue(
                    "bad-direction",
                    f"associativity on {ref(pid)} has direction {direction!r}",
                    (pid,),
                )
            )
            continue
        p = grammar.productions[pid]
        ends = []
        if direction in (ASSOC_LEFT, ASSOC_NONE):
            ends.append(p.rhs[-1] if p.rhs else None)
        if direction in (ASSOC_RIGHT, ASSOC_NONE):
            ends.append(p.rhs[0] if p.rhs else None)
        if len(p.rhs) < 2 or not any(s is not None and s.id == p.lhs.id for s in ends):
            warnings.append(
                ConstraintIssue(
                    "ineffective-associativity",
                    f"{direction} associativity on {ref(pid)} can never apply",
                    (pid,),
                )
            )

    for kind, pairs in (("selection", cs.selection), ("composition", cs.composition)):
        edges: dict[int, set[int]] = {}
        for a, b in pairs:
            missing = [x for x in (a, b) if x not in valid]
            if missing:
                errors.append(
                    ConstraintIssue(
                        "unknown-production",
                        f"{kind} precedence refers to unknown production(s) "
                        + ", ".join(f"#{m}" for m in missing),
                        tuple(missing),
                    )
                )
                continue
            if a == b:
                errors.append(
                    ConstraintIssue(
                        "self-reference", f"{kind} precedence declares {ref(a)} over itself", (a,)
                    )
                )
                continue
            edges.setdefault(a, set()).add(b)
        closed = _closure((a, b) for a, bs in edges.items() for b in bs)
        cyclic = sorted({a for a, b in closed if a == b})
        if cyclic:
            errors.append(
                ConstraintIssue(
                    "cycle",
                    f"cyclic {kind} precedence involving " + ", ".join(ref(p) for p in cyclic),
                    tuple(cyclic),
                )
            )
        if kind == "selection":
            for a, b in sorted(set(pairs)):
                if a in valid and b in valid and a != b:
                    pa, pb = grammar.productions[a], grammar.productions[b]
                    if pa.lhs.id != pb.lhs.id:
                        warnings.append(
                            ConstraintIssue(
                                "cross-symbol-selection",
                                f"selection precedence {ref(a)} over {ref(b)} never applies: "
                                f"the productions derive different symbols",
                                (a, b),
                            )
                        )

    for pid in sorted(cs.custom):
        if pid not in valid:
            errors.append(
                ConstraintIssue("unknown-production", f"evaluator on unknown production #{pid}", (pid,))
            )

    return ConstraintReport(tuple(errors), tuple(warnings))


# ---------------------------------------------------------------------------
# Grammar text format
#
#   %token NAME /regex/          token definition
#   %skip /regex/                inter-token skip pattern (default: whitespace)
#   %start NAME                  start symbol
#   [label] Lhs ::= sym sym ;    production (empty rhs allowed)
#   %assoc left|right|none <production> ;
#   %prefer select P1 over P2 ;  selection precedence (P = label or unique lhs)
#   %prefer compose P1 over P2 ; composition precedence
#   # comment
# ---------------------------------------------------------------------------


@dataclass
class _RuleDecl:
    line: int
    label: str | None
    lhs: str
    rhs: tuple[str, ...]
    assoc: str | None = None


@dataclass
class _Decls:
    tokens: list[tuple[int, str, str]] = field(default_factory=list)
    skip: tuple[int, str] | None = None
    start: tuple[int, str] | None = None
    rules: list[_RuleDecl] = field(default_factory=list)
    prefers: list[tuple[int, str, str, str]] = field(default_factory=list)


def _scan(source: str) -> _Decls:
    decls = _Decls()
    pending = ""
    pending_line: int | None = None

    def close_statement(text: str, line: int) -> None:
        text = text.strip()
        if text:
            _parse_statement(text, line, decls)

    for lineno, raw in enumerate(source.splitlines(), 1):
        head = raw.lstrip()
        if head.startswith("%token"):
            m = _TOKEN_LINE.match(raw)
            if not m:
                raise GrammarError("malformed %token line", lineno, len(raw) - len(head) + 1)
            decls.tokens.append((lineno, m.group(1), m.group(2)))
            continue
        if head.startswith("%skip"):
            m = _SKIP_LINE.match(raw)
            if not m:
                raise GrammarError("malformed %skip line", lineno, len(raw) - len(head) + 1)
            if decls.skip is not None:
                raise GrammarError("duplicate %skip declaration", lineno)
            decls.skip = (lineno, m.group(1))
            continue
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.lstrip().startswith("%start"):
            words = line.split()
            if len(words) != 2 or not _NAME_RE.match(words[1]):
                raise GrammarError("malformed %start line", lineno)
            if decls.start is not None:
                raise GrammarError("duplicate %start declaration", lineno)
            decls.start = (lineno, words[1])
            continue
        if not pending.strip():
            pending_line = lineno
        pending += " " + line
        while ";" in pending:
            stmt, _, pending = pending.partition(";")
            close_statement(stmt, pending_line or lineno)
            pending_line = lineno
    if pending.strip():
        raise GrammarError("declaration not terminated by ';'", pending_line)
    return decls


def _parse_statement(text: str, line: int, decls: _Decls) -> None:
    words = text.split()
    if words[0] == "%prefer":
        if len(words) != 5 or words[1] not in ("select", "compose") or words[3] != "over":
            raise GrammarError("malformed %prefer declaration", line)
        decls.prefers.append((line, words[1], words[2], words[4]))
        return
    assoc = None
    if words[0] == "%assoc":
        if len(words) < 3 or words[1] not in _ASSOC_DIRECTIONS:
            raise GrammarError("malformed %assoc declaration", line)
        assoc = words[1]
        text = text.split(None, 2)[2]
    if text.startswith("%"):
        raise GrammarError(f"unknown directive {text.split()[0]!r}", line)
    head, sep, tail = text.partition("::=")
    if not sep:
        raise GrammarError("expected '::=' in production", line)
    head = head.strip()
    label = None
    if head.startswith("["):
        close = head.find("]")
        if close < 0:
            raise GrammarError("unterminated production label", line)
        label = head[1:close].strip()
        if not _NAME_RE.match(label):
            raise GrammarError(f"bad production label {label!r}", line)
        head = head[close + 1 :].strip()
    if not _NAME_RE.match(head):
        raise GrammarError(f"bad production left-hand side {head!r}", line)
    rhs = tuple(tail.split())
    for name in rhs:
        if not _NAME_RE.match(name):
            raise GrammarError(f"bad symbol name {name!r} in production", line)
    decls.rules.append(_RuleDecl(line, label, head, rhs, assoc))


def _assemble(decls: _Decls, evaluators: Mapping[str, Callable] | None) -> Grammar:
    seen_tokens: dict[str, int] = {}
    for line, name, _pattern in decls.tokens:
        if name in seen_tokens:
            raise GrammarError(f"duplicate token name {name!r}", line)
        seen_tokens[name] = line

    nonterminal_names: list[str] = []
    for rule in decls.rules:
        if rule.lhs in seen_tokens:
            raise GrammarError(f"{rule.lhs!r} is declared both as a token and a nonterminal", rule.line)
        if rule.lhs not in nonterminal_names:
            nonterminal_names.append(rule.lhs)

    symbols: dict[str, Symbol] = {}
    next_id = 0
    for _line, name, _pattern in decls.tokens:
        symbols[name] = Symbol(next_id, name, TERMINAL)
        next_id += 1
    for name in nonterminal_names:
        symbols[name] = Symbol(next_id, name, NONTERMINAL)
        next_id += 1

    token_defs = []
    for line, name, pattern in decls.tokens:
        try:
            regex = re.compile(pattern)
        except re.error as exc:
            raise GrammarError(f"bad regex for token {name}: {exc}", line) from None
        token_defs.append(TokenDef(symbols[name], pattern, regex))

    labels: dict[str, int] = {}
    productions: list[Production] = []
    assoc: dict[int, str] = {}
    for pid, rule in enumerate(decls.rules):
        rhs_syms = []
        for name in rule.rhs:
            sym = symbols.get(name)
            if sym is None:
                raise GrammarError(f"unknown symbol {name!r}", rule.line)
            rhs_syms.append(sym)
        if rule.label is not None:
            if rule.label in labels:
                raise GrammarError(f"duplicate production label {rule.label!r}", rule.line)
            labels[rule.label] = pid
        productions.append(Production(pid, symbols[rule.lhs], tuple(rhs_syms), rule.label))
        if rule.assoc is not None:
            assoc[pid] = rule.assoc

    if decls.start is None:
        raise GrammarError("start symbol missing: add a %start declaration")
    start_line, start_name = decls.start
    start = symbols.get(start_name)
    if start is None or start.is_terminal or start.id not in {p.lhs.id for p in productions}:
        raise GrammarError(f"start symbol {start_name!r} has no productions", start_line)

    def resolve(ref: str, line: int) -> int:
        if ref in labels:
            return labels[ref]
        candidates = [p.id for p in productions if p.lhs.name == ref]
        if len(candidates) == 1:
            return candidates[0]
        if len(candidates) > 1:
            raise GrammarError(f"production reference {ref!r} is ambiguous; add a [label]", line)
        raise GrammarError(f"unknown production reference {ref!r}", line)

    selection: list[tuple[int, int]] = []
    composition: list[tuple[int, int]] = []
    for line, kind, first, second in decls.prefers:
        pair = (resolve(first, line), resolve(second, line))
        (selection if kind == "select" else composition).append(pair)

    custom: dict[int, Callable] = {}
    for ref, fn in (evaluators or {}).items():
        custom[resolve(ref, 0)] = fn

    skip = decls.skip[1] if decls.skip is not None else DEFAULT_SKIP
    if decls.skip is not None:
        try:
            re.compile(skip)
        except re.error as exc:
            raise GrammarError(f"bad %skip regex: {exc}", decls.skip[0]) from None

    constraints = ConstraintSet(
        associativity=assoc,
        selection=tuple(selection),
        composition=tuple(composition),
        custom=custom,
    )
    return Grammar(token_defs, productions, start, constraints, skip)


def parse_grammar_text(source: str, evaluators: Mapping[str, Callable] | None = None) -> Grammar:
    """Parse grammar text into a validated :class:`Grammar`.

    ``evaluators`` optionally maps production references (label, or unique lhs
    name) to custom constraint predicates; the text format itself has no
    syntax for attaching code.
    """
    return _assemble(_scan(source), evaluators)


def make_grammar(
    tokens: Sequence[tuple[str, str]],
    rules: Sequence[tuple],
    start: str,
    *,
    skip: str = DEFAULT_SKIP,
    assoc: Sequence[tuple[str, str]] = (),
    select: Sequence[tuple[str, str]] = (),
    compose: Sequence[tuple[str, str]] = (),
    evaluators: Mapping[str, Callable] | None = None,
) -> Grammar:
    """Programmatic grammar construction mirroring the text format.

    ``rules`` entries are ``(lhs, rhs_names)`` or ``(lhs, rhs_names, label)``.
    ``assoc`` pairs a production reference with a direction; ``select`` and
    ``compose`` pair production references (preferred first).
    """
    decls = _Decls()
    for name, pattern in tokens:
        decls.tokens.append((0, name, pattern))
    decls.skip = (0, skip)
    decls.start = (0, start)
    rule_decls: dict[str, _RuleDecl] = {}
    for entry in rules:
        lhs, rhs = entry[0], tuple(entry[1])
        label = entry[2] if len(entry) > 2 else None
        decl = _RuleDecl(0, label, lhs, rhs)
        decls.rules.append(decl)
        if label:
            rule_decls[label] = decl
    for ref, direction in assoc:
        if ref in rule_decls:
            rule_decls[ref].assoc = direction
        else:
            matching = [r for r in decls.rules if r.lhs == ref]
            if len(matching) != 1:
                raise GrammarError(f"associativity reference {ref!r} is not unique")
            matching[0].assoc = direction
    for a, b in select:
        decls.prefers.append((0, "select", a, b))
    for a, b in compose:
        decls.prefers.append((0, "compose", a, b))
    return _assemble(decls, evaluators)


def grammar_to_text(grammar: Grammar) -> str:
    """Serialize a grammar back to the text format (lossless round-trip)."""
    lines = []
    for td in grammar.token_defs:
        lines.append(f"%token {td.symbol.name} /{td.pattern}/")
    lines.append(f"%skip /{grammar.skip_pattern}/")
    lines.append(f"%start {grammar.start.name}")
    for p in grammar.productions:
        prefix = ""
        direction = grammar.constraints.associativity.get(p.id)
        if direction is not None:
            prefix = f"%assoc {direction} "
        label = f"[{p.label}] " if p.label is not None else ""
        rhs = " ".join(s.name for s in p.rhs)
        body = f"{p.lhs.name} ::= {rhs}".rstrip()
        lines.append(f"{prefix}{label}{body} ;")

    def ref(pid: int) -> str:
        p = grammar.productions[pid]
        return p.label if p.label is not None else p.lhs.name

    for a, b in grammar.constraints.selection:
        lines.append(f"%prefer select {ref(a)} over {ref(b)} ;")
    for a, b in grammar.constraints.composition:
        lines.append(f"%prefer compose {ref(a)} over {ref(b)} ;")
    return "\n".join(lines) + "\n"
