"""Expansion of the implicit parse graph into an explicit shared forest.

Each accepted implicit node is expanded into every explicit derivation that
satisfies the grammar's constraints. An explicit node fixes a production and
an ordered child list; identical subderivations are shared structurally, and
ambiguity shows up as several explicit roots (or several explicit nodes over
one implicit node deeper in the forest).

Expansion is memoized. A history of implicit nodes on the active recursion
path cuts cyclic derivations, so no (start, end, symbol) repeats on any
root-to-leaf path of an output tree. A cut makes the result context
dependent, and a naive memo would leak trees across contexts, so entries are
keyed by the node plus the active ancestors sharing its exact span: ancestor
spans always contain the node's span, hence only equal-span ancestors can
ever recur inside its derivations, and that tiny set is the entire relevant
context. Ordinary nested ambiguity still shares one entry per node.

Skipped nullable positions are filled with zero-width placeholder children
carrying the symbol's canonical minimal empty derivation, so output trees
always have one child per right-hand-side position. Placeholder internals are
canonical and not subject to constraints, but a placeholder is an ordinary
child for the checks on its parent.

Associativity, composition precedence, and custom evaluators reject a
candidate node the moment it is assembled; the earlier a candidate dies, the
fewer nodes are built above it. Selection precedence needs the sibling
candidates of the same implicit node, so it runs as a per-node post-pass:
candidates are grouped by production and a production's candidates are
dropped when any preferred production kept at least one survivor, resolved in
topological order of the (acyclic, transitively closed) preference relation.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass

from .chart import IGraph
from .errors import EvaluatorError
from .grammar import ASSOC_LEFT, ASSOC_NONE, ASSOC_RIGHT, Grammar, NodeView, Production

__all__ = [
    "ExplicitNode",
    "EGraph",
    "TreeCount",
    "expand_forest",
    "epsilon_forest",
    "tree_counts",
    "enumerate_trees",
    "canonical_tree",
    "tree_to_jsonable",
    "egraph_document",
    "egraph_to_dot",
]

COUNT_CAP = 10**18


@dataclass(frozen=True)
class ExplicitNode:
    """One derivation step: a production applied to ordered children.

    Token leaves carry a lexeme instead of a production. Zero-width
    placeholder nodes (start == end) stand for skipped nullable symbols.
    """

    id: int
    symbol_id: int
    start: int
    end: int
    production_id: int | None
    children: tuple[int, ...] | None
    lexeme: str | None


@dataclass
class EGraph:
    """The explicit parse forest: deduplicated nodes plus accepted roots."""

    input: str
    nodes: list[ExplicitNode]
    roots: tuple[int, ...]
    constructions: int


class _Expander:
    def __init__(self, grammar: Grammar, ig: IGraph, enforce: bool):
        self.grammar = grammar
        self.ig = ig
        self.input = ig.input
        self.enforce = enforce
        self.records: list[ExplicitNode] = []
        self.ids: dict[tuple, int] = {}
        self.memo: dict[tuple[int, frozenset], tuple[int, ...]] = {}
        self.active: set[int] = set()
        self.active_by_span: dict[tuple[int, int], set[int]] = {}
        self.constructions = 0
        self._markers: dict[tuple[int, int], int] = {}
        self._views: dict[int, NodeView] = {}

    # -- node store ----------------------------------------------------------

    def _leaf(self, node) -> int:
        key = (node.symbol_id, node.start, node.end)
        got = self.ids.get(key)
        if got is None:
            got = len(self.records)
            self.ids[key] = got
            self.records.append(
                ExplicitNode(
                    got, node.symbol_id, node.start, node.end, None, None,
                    self.input[node.start : node.end],
                )
            )
        return got

    def _intern(self, symbol_id: int, start: int, end: int, pid: int, children: tuple[int, ...]) -> int:
        key = (symbol_id, start, end, pid, children)
        got = self.ids.get(key)
        if got is None:
            got = len(self.records)
            self.ids[key] = got
            self.records.append(ExplicitNode(got, symbol_id, start, end, pid, children, None))
        return got

    def _marker(self, symbol_id: int, offset: int) -> int:
        key = (symbol_id, offset)
        got = self._markers.get(key)
        if got is None:
            got = self._build_marker(self.grammar.epsilon_derivations[symbol_id], symbol_id, offset)
            self._markers[key] = got
        return got

    def _build_marker(self, skeleton: tuple, symbol_id: int, offset: int) -> int:
        pid, child_skeletons = skeleton
        p = self.grammar.productions[pid]
        children = tuple(
            self._build_marker(sk, sym.id, offset)
            for sk, sym in zip(child_skeletons, p.rhs)
        )
        return self._intern(symbol_id, offset, offset, pid, children)

    # -- expansion -----------------------------------------------------------

    def expand(self, node_id: int) -> tuple[int, ...]:
        if node_id in self.active:
            return ()  # cyclic re-entry contributes nothing on this path
        node = self.ig.nodes[node_id]
        span = (node.start, node.end)
        context = frozenset(self.active_by_span.get(span, ()))
        key = (node_id, context)
        memo = self.memo.get(key)
        if memo is not None:
            return memo
        self.active.add(node_id)
        self.active_by_span.setdefault(span, set()).add(node_id)
        out = self._derive(node_id)
        self.active.discard(node_id)
        self.active_by_span[span].discard(node_id)
        self.memo[key] = out
        return out

    def _derive(self, node_id: int) -> tuple[int, ...]:
        node = self.ig.nodes[node_id]
        if node.is_token:
            return (self._leaf(node),)
        prods = self.grammar.productions_by_lhs.get(node.symbol_id, ())
        candidates: dict[int, list[int]] = {p.id: self._apply(p, node) for p in prods}
        if self.enforce and self.grammar.has_selection:
            for pid in self.grammar.selection_order_by_lhs[node.symbol_id]:
                if candidates.get(pid) and any(
                    candidates.get(q) for q in self.grammar.preferred_over.get(pid, ())
                ):
                    candidates[pid] = []
        return tuple(eid for p in prods for eid in candidates[p.id])

    def _apply(self, p: Production, node) -> list[int]:
        """Every constraint-satisfying application of ``p`` that derives ``node``."""
        rhs = p.rhs
        size = len(rhs)
        eps = self.grammar.epsilon_ids
        by_start_sym = self.ig.by_start_sym
        next_position = self.ig.next_position
        nodes = self.ig.nodes
        target_end = node.end
        out: list[int] = []
        seen: set[tuple[int, ...]] = set()

        def step(pos: int, cursor: int, offset: int, children: tuple[int, ...]) -> None:
            if pos == size:
                if cursor == target_end and children not in seen:
                    seen.add(children)
                    self._emit(p, node, children, out)
                return
            sym = rhs[pos]
            if sym.id in eps:
                step(pos + 1, cursor, offset, children + (self._marker(sym.id, cursor),))
            for child_id in by_start_sym.get((offset, sym.id), ()):
                child = nodes[child_id]
                if child.end > target_end:
                    break
                for sub in self.expand(child_id):
                    step(pos + 1, child.end, next_position[child.end], children + (sub,))

        step(0, node.start, node.start, ())
        return out

    def _emit(self, p: Production, node, children: tuple[int, ...], out: list[int]) -> None:
        self.constructions += 1
        if self.enforce and not self._passes_local(p, node, children):
            return
        out.append(self._intern(node.symbol_id, node.start, node.end, p.id, children))

    # -- per-candidate constraint checks --------------------------------------

    def _passes_local(self, p: Production, node, children: tuple[int, ...]) -> bool:
        constraints = self.grammar.constraints
        direction = constraints.associativity.get(p.id)
        if direction is not None and children:
            if direction in (ASSOC_LEFT, ASSOC_NONE):
                if self.records[children[-1]].production_id == p.id:
                    return False
            if direction in (ASSOC_RIGHT, ASSOC_NONE):
                if self.records[children[0]].production_id == p.id:
                    return False
        blocked = self.grammar.composition_blocks.get(p.id)
        if blocked:
            for child in children:
                if self.records[child].production_id in blocked:
                    return False
        evaluator = constraints.custom.get(p.id)
        if evaluator is not None:
            view = NodeView(
                symbol=p.lhs.name,
                start=node.start,
                end=node.end,
                production=p.id,
                label=p.label,
                children=tuple(self._view(c) for c in children),
                lexeme=None,
                text=self.input[node.start : node.end],
            )
            try:
                verdict = evaluator(view)
            except Exception as exc:
                raise EvaluatorError(p.id, p.label, exc) from exc
            if not verdict:
                return False
        return True

    def _view(self, eid: int) -> NodeView:
        got = self._views.get(eid)
        if got is None:
            rec = self.records[eid]
            production = None
            label = None
            if rec.production_id is not None:
                prod = self.grammar.productions[rec.production_id]
                production, label = prod.id, prod.label
            got = NodeView(
                symbol=self.grammar.symbol_by_id[rec.symbol_id].name,
                start=rec.start,
                end=rec.end,
                production=production,
                label=label,
                children=tuple(self._view(c) for c in rec.children or ()),
                lexeme=rec.lexeme,
                text=self.input[rec.start : rec.end],
            )
            self._views[eid] = got
        return got


def _collect(records: list[ExplicitNode], roots: tuple[int, ...]) -> tuple[list[ExplicitNode], tuple[int, ...]]:
    """Keep the nodes reachable from the roots, renumbered in preorder."""
    remap: dict[int, int] = {}
    order: list[int] = []
    stack = list(reversed(roots))
    while stack:
        eid = stack.pop()
        if eid in remap:
            continue
        remap[eid] = len(order)
        order.append(eid)
        children = records[eid].children
        if children:
            stack.extend(reversed(children))
    kept = []
    for new_id, old in enumerate(order):
        rec = records[old]
        children = (
            tuple(remap[c] for c in rec.children) if rec.children is not None else None
        )
        kept.append(
            ExplicitNode(
                new_id, rec.symbol_id, rec.start, rec.end, rec.production_id, children, rec.lexeme
            )
        )
    return kept, tuple(remap[r] for r in roots)


def _run_deep(fn, frames: int):
    """Run ``fn`` with room for ``frames`` recursion frames.

    Expansion recursion is proportional to the nesting depth of the input;
    deep inputs need more than the default interpreter limit allows on the
    main thread, so the work moves to a worker thread with a stack sized for
    it. The recursion limit is process global while the worker runs.
    """
    if frames < sys.getrecursionlimit() - 100:
        return fn()
    outcome: list = []
    failure: list[BaseException] = []

    def runner():
        before = sys.getrecursionlimit()
        sys.setrecursionlimit(frames + 100)
        try:
            outcome.append(fn())
        except BaseException as exc:  # re-raised in the caller
            failure.append(exc)
        finally:
            sys.setrecursionlimit(before)

    previous_stack = threading.stack_size()
    threading.stack_size(min(512 * 2**20, max(32 * 2**20, frames * 2048)))
    try:
        worker = threading.Thread(target=runner, name="fence-expand")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(previous_stack)
    if failure:
        raise failure[0]
    return outcome[0]


def expand_forest(grammar: Grammar, ig: IGraph, enforce_constraints: bool = True) -> EGraph:
    """Expand the accepted implicit roots into the explicit forest.

    With ``enforce_constraints`` off, every derivation survives; the result is
    the raw ambiguity of the grammar over the input.
    """
    expander = _Expander(grammar, ig, enforce_constraints)

    def run() -> list[int]:
        roots: list[int] = []
        for node_id in sorted(ig.starting):
            for eid in expander.expand(node_id):
                if eid not in roots:
                    roots.append(eid)
        return roots

    tokens = sum(1 for n in ig.nodes if n.is_token)
    max_rhs = max((len(p.rhs) for p in grammar.productions), default=0)
    frames = 512 + (16 + 2 * max_rhs) * (tokens + len(grammar.symbols))
    roots = _run_deep(run, frames)
    nodes, new_roots = _collect(expander.records, tuple(roots))
    return EGraph(ig.input, nodes, new_roots, expander.constructions)


def epsilon_forest(grammar: Grammar, offset: int, input_text: str = "") -> EGraph:
    """Forest for an empty token stream: the start symbol's canonical empty tree.

    Only meaningful when the start symbol can derive the empty string; the
    parse machinery proper cannot represent zero-width roots, so this case is
    produced directly.
    """
    records: list[ExplicitNode] = []

    def build(skeleton: tuple, symbol_id: int) -> int:
        pid, child_skeletons = skeleton
        p = grammar.productions[pid]
        children = tuple(build(sk, sym.id) for sk, sym in zip(child_skeletons, p.rhs))
        eid = len(records)
        records.append(ExplicitNode(eid, symbol_id, offset, offset, pid, children, None))
        return eid

    root = build(grammar.epsilon_derivations[grammar.start.id], grammar.start.id)
    nodes, roots = _collect(records, (root,))
    return EGraph(input_text, nodes, roots, len(records))


# -- forest queries -----------------------------------------------------------


@dataclass(frozen=True)
class TreeCount:
    total: int
    per_root: dict[int, int]
    saturated: bool


def tree_counts(eg: EGraph, cap: int = COUNT_CAP) -> TreeCount:
    """Trees reachable from each root, by dynamic programming over the shared forest.

    Counts are capped at ``cap``; hitting the cap sets the saturated flag
    instead of silently overflowing.
    """
    counts: dict[int, int] = {}
    saturated = False
    for root in eg.roots:
        stack = [(root, False)]
        while stack:
            eid, ready = stack.pop()
            if eid in counts:
                continue
            children = eg.nodes[eid].children
            if not children:
                counts[eid] = 1
            elif ready:
                total = 1
                for child in children:
                    total *= counts[child]
                    if total > cap:
                        total = cap
                        break
                counts[eid] = total
            else:
                stack.append((eid, True))
                stack.extend((c, False) for c in children if c not in counts)

    per_root: dict[int, int] = {}
    total = 0
    for root in eg.roots:
        per_root[root] = counts[root]
        total += per_root[root]
        if per_root[root] >= cap or total > cap:
            saturated = True
            total = min(total, cap)
    return TreeCount(total, per_root, saturated)


def canonical_tree(eg: EGraph, grammar: Grammar, eid: int) -> tuple:
    """Canonical nested-tuple form of one tree, comparable across implementations.

    Leaves are ("t", symbol, start, end, lexeme); interior nodes are
    ("n", symbol, start, end, production id, (children...)).
    """
    built: dict[int, tuple] = {}
    stack = [(eid, False)]
    while stack:
        nid, ready = stack.pop()
        if nid in built:
            continue
        rec = eg.nodes[nid]
        name = grammar.symbol_by_id[rec.symbol_id].name
        if rec.children is None:
            built[nid] = ("t", name, rec.start, rec.end, rec.lexeme)
        elif ready:
            children = tuple(built[c] for c in rec.children)
            built[nid] = ("n", name, rec.start, rec.end, rec.production_id, children)
        else:
            stack.append((nid, True))
            stack.extend((c, False) for c in rec.children if c not in built)
    return built[eid]


def enumerate_trees(eg: EGraph, grammar: Grammar, limit: int) -> list[tuple]:
    """Trees of the forest in canonical order, up to ``limit``."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    trees = sorted(canonical_tree(eg, grammar, r) for r in eg.roots)
    return trees[:limit]


def tree_to_jsonable(tree: tuple) -> dict:
    """Canonical tuple tree rendered as plain dicts for structured output."""
    built: dict[int, dict] = {}
    stack: list[tuple[tuple, bool]] = [(tree, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in built:
            continue
        if node[0] == "t":
            _tag, symbol, start, end, lexeme = node
            built[id(node)] = {"symbol": symbol, "start": start, "end": end, "lexeme": lexeme}
        elif ready:
            _tag, symbol, start, end, production, children = node
            built[id(node)] = {
                "symbol": symbol,
                "start": start,
                "end": end,
                "production": production,
                "children": [built[id(c)] for c in children],
            }
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node[5] if id(c) not in built)
    return built[id(tree)]


def egraph_document(eg: EGraph, grammar: Grammar) -> dict:
    """Structured document for the forest, including per-root tree counts."""
    counts = tree_counts(eg)
    nodes = []
    for rec in eg.nodes:
        entry: dict = {
            "id": rec.id,
            "symbol": grammar.symbol_by_id[rec.symbol_id].name,
            "start": rec.start,
            "end": rec.end,
        }
        if rec.children is None:
            entry["lexeme"] = rec.lexeme
        else:
            entry["production"] = rec.production_id
            entry["children"] = list(rec.children)
        nodes.append(entry)
    doc = {
        "nodes": nodes,
        "roots": list(eg.roots),
        "treeCounts": {str(r): counts.per_root[r] for r in eg.roots},
    }
    if counts.saturated:
        doc["treeCountsSaturated"] = True
    return doc


def egraph_to_dot(eg: EGraph, grammar: Grammar) -> str:
    """Graphviz rendering: squares for nonterminal nodes, ovals for tokens."""
    lines = ["digraph forest {"]
    roots = set(eg.roots)
    for rec in eg.nodes:
        name = grammar.symbol_by_id[rec.symbol_id].name
        if rec.children is None:
            label = f"{name}\\n{rec.lexeme}"
            shape = "ellipse"
            style = ""
        else:
            span = f"[{rec.start},{rec.end})"
            label = f"{name} {span}"
            shape = "box"
            style = ", style=dashed" if rec.start == rec.end else ""
        peripheries = ", peripheries=2" if rec.id in roots else ""
        lines.append(f'  n{rec.id} [label="{label}", shape={shape}{style}{peripheries}];')
    for rec in eg.nodes:
        for i, child in enumerate(rec.children or ()):
            lines.append(f'  n{rec.id} -> n{child} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
