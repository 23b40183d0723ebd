"""Extended lexical analysis graph: the token lattice completed with cores.

A core is a container of handles (partially applied productions) placed
between tokens. One core sits at each distinct token start offset, shared by
every token starting there, so partial parse progress recorded before one
tokenization alternative is automatically visible to the others. A starting
core precedes the tokens with no predecessor and a last core follows the
tokens that reach the end of the input.

The chart phase mutates an extended graph in place: it fills cores with
handles and grows the node store with nonterminal nodes, so build a fresh
graph per parse session.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grammar import Grammar
from .lexgraph import LAGraph

__all__ = ["Core", "ImplicitNode", "ELAGraph", "build_ela_graph", "ela_document"]


class Core:
    """A handle store between tokens.

    ``waiting`` indexes handles by the symbol after their dot, including
    handles whose dot reached that symbol by skipping nullable positions, so
    a single lookup answers which handles a freshly derived node can advance.
    """

    __slots__ = ("id", "position", "handles", "waiting", "preceding", "following", "following_by_sym")

    def __init__(self, core_id: int, position: int):
        self.id = core_id
        self.position = position
        self.handles: set[tuple] = set()
        self.waiting: dict[int, list[tuple]] = {}
        self.preceding: list[int] = []
        self.following: list[int] = []
        self.following_by_sym: dict[int, list[int]] = {}

    def waiting_for(self, symbol_id: int) -> tuple[tuple, ...]:
        return tuple(self.waiting.get(symbol_id, ()))

    def __repr__(self):
        return f"Core({self.id}@{self.position}, handles={len(self.handles)})"


class ImplicitNode:
    """A parse node identified by (start, end, symbol); contents stay implicit.

    Re-derivations of the same triple merge into one node, which is what keeps
    cyclic production sets finite. Token nodes are the re-housed lattice
    tokens; every other node is created by a reduction.
    """

    __slots__ = ("id", "start", "end", "symbol_id", "is_token")

    def __init__(self, node_id: int, start: int, end: int, symbol_id: int, is_token: bool):
        self.id = node_id
        self.start = start
        self.end = end
        self.symbol_id = symbol_id
        self.is_token = is_token

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.start, self.end, self.symbol_id)

    def __repr__(self):
        kind = "tok" if self.is_token else "nt"
        return f"ImplicitNode({self.start},{self.end},s{self.symbol_id},{kind})"


@dataclass
class ELAGraph:
    input: str
    cores: list[Core]
    nodes: list[ImplicitNode]
    node_ids: dict[tuple[int, int, int], int]
    core_at: dict[int, int] = field(repr=False)
    next_core: dict[int, int] = field(repr=False)
    starting_core: int = 0
    last_core: int = 0
    content_start: int = 0

    def preceding_cores(self, node: ImplicitNode) -> tuple[int, ...]:
        return (self.core_at[node.start],)

    def following_cores(self, node: ImplicitNode) -> tuple[int, ...]:
        return (self.next_core[node.end],)


def build_ela_graph(la: LAGraph) -> ELAGraph:
    """Complete a pruned lattice with cores and re-house tokens as parse nodes."""
    if not la.nodes:
        raise ValueError("cannot extend an empty lexical analysis graph")
    end = len(la.input)
    positions = sorted({t.start for t in la.nodes})
    cores = [Core(i, pos) for i, pos in enumerate(positions)]
    core_at = {c.position: c.id for c in cores}
    last = Core(len(cores), end)
    cores.append(last)

    next_core: dict[int, int] = {}
    for token_end, nxt in la.next_position.items():
        next_core[token_end] = last.id if nxt == end else core_at[nxt]

    nodes: list[ImplicitNode] = []
    node_ids: dict[tuple[int, int, int], int] = {}
    for t in la.nodes:
        node = ImplicitNode(t.id, t.start, t.end, t.symbol_id, True)
        nodes.append(node)
        node_ids[node.key] = node.id
        pre = cores[core_at[t.start]]
        pre.following.append(t.id)
        pre.following_by_sym.setdefault(t.symbol_id, []).append(t.id)
        cores[next_core[t.end]].preceding.append(t.id)

    return ELAGraph(
        input=la.input,
        cores=cores,
        nodes=nodes,
        node_ids=node_ids,
        core_at=core_at,
        next_core=next_core,
        starting_core=core_at[la.content_start],
        last_core=last.id,
        content_start=la.content_start,
    )


def ela_document(ela: ELAGraph, grammar: Grammar) -> dict:
    """Structured dump of an extended graph (debugging aid)."""
    return {
        "cores": [
            {
                "id": c.id,
                "position": c.position,
                "handleCount": len(c.handles),
                "preceding": sorted(c.preceding),
                "following": sorted(c.following),
            }
            for c in ela.cores
        ],
        "nodes": [
            {
                "id": n.id,
                "symbol": grammar.symbol_by_id[n.symbol_id].name,
                "start": n.start,
                "end": n.end,
                "preceding": list(ela.preceding_cores(n)),
                "following": list(ela.following_cores(n)),
            }
            for n in ela.nodes
        ],
    }
