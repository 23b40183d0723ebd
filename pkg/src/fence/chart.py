"""Agenda-driven bottom-up chart parsing over the extended lattice.

The parser seeds every core with a dot-0 handle for every non-empty
production, then drains an agenda of (handle, node) pairs where the node
matches the symbol after the handle's dot. Matching the last pending symbol
reduces: a node (handle start, matched node end, lhs) is created or merged,
wired to the cores at its boundaries, and every handle already waiting for
that symbol in its start core is re-awakened. Otherwise the advanced handle
is added to the core following the matched node.

Nullable symbols never materialize as nodes. When a handle is stored, any
run of nullable symbols after its dot also stores the skipped variants in the
same core, and a skip run that reaches the end of the production completes
it immediately, using the last actually-matched node for the end offset.

Termination holds for cyclic production sets and nullable chains because
nodes merge on their (start, end, symbol) identity and a generated-entries
set suppresses duplicate agenda pushes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .elagraph import Core, ELAGraph, ImplicitNode
from .grammar import Grammar

__all__ = ["IGraph", "ChartParser", "run_chart", "igraph_stats", "igraph_document"]


@dataclass
class IGraph:
    """The implicit parse graph: every derived (start, end, symbol) node.

    ``starting`` holds the accepted roots: start-symbol nodes whose only
    preceding core is the starting core and whose only following core is the
    last one. ``by_start_sym`` indexes node ids by (start offset, symbol id)
    with each bucket sorted by end offset, for the expansion phase.
    """

    input: str
    nodes: list[ImplicitNode]
    starting: tuple[int, ...]
    agenda_pops: int
    handle_count: int
    content_start: int
    next_position: dict[int, int] = field(repr=False)
    by_start_sym: dict[tuple[int, int], tuple[int, ...]] = field(repr=False)


class ChartParser:
    """One chart run over one extended graph.

    The graph is mutated in place (cores gain handles, the node store grows),
    so construct a fresh extended graph per run. ``agenda_order`` selects the
    pop discipline; the resulting graph is the same either way, only the
    traversal order differs.
    """

    def __init__(self, grammar: Grammar, ela: ELAGraph, agenda_order: str = "lifo"):
        if agenda_order not in ("lifo", "fifo"):
            raise ValueError("agenda_order must be 'lifo' or 'fifo'")
        self.grammar = grammar
        self.ela = ela
        self.agenda: deque = deque()
        self.generated: set[tuple] = set()
        self.pops = 0
        self._lifo = agenda_order == "lifo"
        self._rhs = grammar.rhs_ids
        self._eps = grammar.epsilon_ids
        self._seeded = False

    # -- core operations ----------------------------------------------------

    def add_handle(
        self,
        production_id: int,
        matched: int,
        first_id: int | None,
        core: Core,
        last_node_id: int | None = None,
    ) -> None:
        """Store the handle (and its nullable-skip variants) in ``core``.

        Pushes an agenda entry for every node following the core that matches
        the symbol after the dot. When skipping nullable symbols reaches the
        end of the production and at least one real node was matched, the
        production is complete and reduces immediately.
        """
        nodes = self.ela.nodes
        rhs = self._rhs[production_id]
        size = len(rhs)
        start_index = nodes[first_id].start if first_id is not None else core.position
        dot = matched
        while True:
            if dot == size:
                if first_id is not None and last_node_id is not None:
                    self._reduce(production_id, first_id, last_node_id)
                return
            sym = rhs[dot]
            handle = (production_id, dot, first_id, start_index)
            if handle not in core.handles:
                core.handles.add(handle)
                core.waiting.setdefault(sym, []).append(handle)
                for node_id in tuple(core.following_by_sym.get(sym, ())):
                    entry = (production_id, dot, first_id, start_index, node_id)
                    if entry not in self.generated:
                        self.generated.add(entry)
                        self.agenda.append(entry)
            if sym not in self._eps:
                return
            dot += 1

    def _reduce(self, production_id: int, first_id: int, last_id: int) -> None:
        ela = self.ela
        nodes = ela.nodes
        production = self.grammar.productions[production_id]
        start = nodes[first_id].start
        end = nodes[last_id].end
        key = (start, end, production.lhs.id)
        if key in ela.node_ids:
            return
        node_id = len(nodes)
        ela.node_ids[key] = node_id
        nodes.append(ImplicitNode(node_id, start, end, production.lhs.id, False))
        pre = ela.cores[ela.core_at[start]]
        pre.following.append(node_id)
        pre.following_by_sym.setdefault(production.lhs.id, []).append(node_id)
        ela.cores[ela.next_core[end]].preceding.append(node_id)
        # Re-awaken handles already waiting for this symbol. Handles stored
        # later find the node through the scan in add_handle.
        for handle in tuple(pre.waiting.get(production.lhs.id, ())):
            entry = handle + (node_id,)
            if entry not in self.generated:
                self.generated.add(entry)
                self.agenda.append(entry)

    # -- driver --------------------------------------------------------------

    def initialize(self) -> None:
        """Seed a dot-0 handle for every non-empty production into every core."""
        for p in self.grammar.productions:
            if p.rhs:
                for core in self.ela.cores:
                    self.add_handle(p.id, 0, None, core)
        self._seeded = True

    def run(self) -> IGraph:
        if not self._seeded:
            self.initialize()
        ela = self.ela
        nodes = ela.nodes
        pop = self.agenda.pop if self._lifo else self.agenda.popleft
        while self.agenda:
            production_id, dot, first_id, _start_index, node_id = pop()
            self.pops += 1
            node = nodes[node_id]
            first = first_id if first_id is not None else node_id
            nxt = dot + 1
            if nxt == len(self._rhs[production_id]):
                self._reduce(production_id, first, node_id)
            else:
                core = ela.cores[ela.next_core[node.end]]
                self.add_handle(production_id, nxt, first, core, node_id)
        return self._igraph()

    def _igraph(self) -> IGraph:
        ela = self.ela
        start_sym = self.grammar.start.id
        s0 = ela.cores[ela.starting_core].position
        starting = tuple(
            n.id
            for n in ela.nodes
            if n.symbol_id == start_sym
            and n.start == s0
            and ela.next_core[n.end] == ela.last_core
        )
        by_start_sym: dict[tuple[int, int], list[int]] = {}
        for n in ela.nodes:
            by_start_sym.setdefault((n.start, n.symbol_id), []).append(n.id)
        for bucket in by_start_sym.values():
            bucket.sort(key=lambda i: (ela.nodes[i].end, i))
        next_position = {n.end: ela.cores[ela.next_core[n.end]].position for n in ela.nodes}
        return IGraph(
            input=ela.input,
            nodes=ela.nodes,
            starting=starting,
            agenda_pops=self.pops,
            handle_count=sum(len(c.handles) for c in ela.cores),
            content_start=ela.content_start,
            next_position=next_position,
            by_start_sym={k: tuple(v) for k, v in by_start_sym.items()},
        )


def run_chart(grammar: Grammar, ela: ELAGraph, agenda_order: str = "lifo") -> IGraph:
    """Parse the extended graph bottom-up; an empty ``starting`` means rejection."""
    return ChartParser(grammar, ela, agenda_order).run()


def igraph_stats(ig: IGraph) -> dict:
    """Deterministic chart statistics (node, edge, and work counts)."""
    return {
        "nodes": len(ig.nodes),
        "edges": 2 * len(ig.nodes),
        "starting": len(ig.starting),
        "agendaPops": ig.agenda_pops,
        "handles": ig.handle_count,
    }


def igraph_document(ig: IGraph, grammar: Grammar) -> dict:
    """Structured dump of the implicit graph."""
    entries = sorted(
        (n.start, n.end, grammar.symbol_by_id[n.symbol_id].name) for n in ig.nodes
    )
    starting = sorted(
        (ig.nodes[i].start, ig.nodes[i].end, grammar.symbol_by_id[ig.nodes[i].symbol_id].name)
        for i in ig.starting
    )
    return {
        "nodes": [{"start": s, "end": e, "symbol": sym} for s, e, sym in entries],
        "starting": [{"start": s, "end": e, "symbol": sym} for s, e, sym in starting],
        "stats": {"agendaPops": ig.agenda_pops, "handles": ig.handle_count},
    }
