"""Auxiliary constraint digraphs on species and gene vertices.

Node ids: species vertex ``x`` is node ``x``; gene vertex ``u`` is node
``n_species + u``. Speciation and leaf gene vertices are merged into their
species images and never appear as nodes.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import InputError
from .scenario import Event, GeneTree, SpeciesTree
from .trees import Edge, TreeElement, Vertex

RULES = ("A1", "A2", "A3", "A4", "A5")
_BIT = {rule: 1 << i for i, rule in enumerate(RULES)}
VARIANTS = {"A1": ("A1", "A2", "A5"), "A2": ("A1", "A2", "A3", "A4")}


def _tag_names(mask: int) -> tuple[str, ...]:
    return tuple(rule for rule in RULES if mask & _BIT[rule])


class AuxGraph:
    """Edge set with per-edge provenance (which rules produced the edge)."""

    def __init__(self, variant: str, n_species: int, n_genes: int, gene_nodes: Iterable[int]):
        self.variant = variant
        self.n_species = n_species
        self.n_genes = n_genes
        self.nodes: tuple[int, ...] = tuple(range(n_species)) + tuple(
            n_species + u for u in gene_nodes
        )
        self._edges: dict[tuple[int, int], int] = {}

    def _add(self, a: int, b: int, rule: str) -> None:
        key = (a, b)
        self._edges[key] = self._edges.get(key, 0) | _BIT[rule]

    def edges(self) -> list[tuple[int, int]]:
        return list(self._edges)

    def tags(self, a: int, b: int) -> tuple[str, ...]:
        return _tag_names(self._edges[(a, b)])

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self._edges

    def __len__(self) -> int:
        return len(self._edges)

    def species_node(self, x: int) -> int:
        return x

    def gene_node(self, u: int) -> int:
        return self.n_species + u

    def describe(self, node: int) -> tuple[str, int]:
        if node < self.n_species:
            return ("species", node)
        return ("gene", node - self.n_species)

    def label(self, node: int, g: GeneTree, s: SpeciesTree) -> str:
        kind, v = self.describe(node)
        return s.name(v) if kind == "species" else g.tree.name(v)

    def to_dot(self, g: GeneTree, s: SpeciesTree) -> str:
        lines = [f'digraph "{self.variant}" {{']
        for node in self.nodes:
            kind, _ = self.describe(node)
            shape = "ellipse" if kind == "species" else "box"
            lines.append(f'  n{node} [label="{self.label(node, g, s)}", shape={shape}];')
        for (a, b), mask in sorted(self._edges.items()):
            lines.append(f'  n{a} -> n{b} [label="{",".join(_tag_names(mask))}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def merged_node(g: GeneTree, mu: Sequence[TreeElement], n_species: int, u: int) -> int:
    if g.events[u].on_edge:
        return n_species + u
    m = mu[u]
    if not isinstance(m, Vertex):
        raise InputError(f"gene vertex {g.tree.name(u)} ({g.events[u].value}) must map to a vertex")
    return m.v


def build_aux_graph(
    g: GeneTree,
    s: SpeciesTree,
    mu: Sequence[TreeElement],
    variant: str,
    ell: Optional[Sequence[int]] = None,
) -> AuxGraph:
    """Constraint digraph ``A1`` (rules A1, A2, A5) or ``A2`` (rules A1-A4)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "A2" and ell is None:
        from .reconciliation import compute_lca_sigma

        ell = compute_lca_sigma(g, s)
    n_s = len(s.tree)
    events = g.events
    on_edge = [e.on_edge for e in events]
    graph = AuxGraph(variant, n_s, len(g), (u for u in range(len(g)) if on_edge[u]))
    add = graph._add
    node = [merged_node(g, mu, n_s, u) for u in range(len(g))]

    for p, v in g.tree.edges():
        add(node[p], node[v], "A1")
    for x, y in s.tree.edges():
        add(x, y, "A2")

    if variant == "A2":
        lca2 = s.tree.index.lca2
        for u in range(len(g)):
            if on_edge[u]:
                add(n_s + u, ell[u], "A3")
        for u, v in g.transfer_edges():
            add(lca2(ell[u], ell[v]), n_s + u, "A4")
    else:
        for u in range(len(g)):
            if on_edge[u]:
                m = mu[u]
                if not isinstance(m, Edge):
                    raise InputError(f"gene vertex {g.tree.name(u)} must map to an edge")
                add(m.parent, n_s + u, "A5")
                add(n_s + u, m.child, "A5")
    return graph


@dataclass(frozen=True)
class CycleWitness:
    """A directed cycle ``nodes[0] -> ... -> nodes[-1] == nodes[0]``."""

    nodes: tuple[int, ...]
    tags: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.nodes) - 1

    def labels(self, graph: AuxGraph, g: GeneTree, s: SpeciesTree) -> list[str]:
        return [graph.label(x, g, s) for x in self.nodes]

    def to_json(self, graph: AuxGraph, g: GeneTree, s: SpeciesTree) -> dict:
        steps = []
        for i in range(len(self)):
            a, b = self.nodes[i], self.nodes[i + 1]
            steps.append({
                "from": _node_json(graph, a, g, s),
                "to": _node_json(graph, b, g, s),
                "rules": list(self.tags[i]),
            })
        return {"length": len(self), "cycle": self.labels(graph, g, s), "edges": steps}


def _node_json(graph: AuxGraph, node: int, g: GeneTree, s: SpeciesTree) -> dict:
    kind, v = graph.describe(node)
    return {"kind": kind, "id": "_root" if kind == "species" and v == s.planted_root else v,
            "name": graph.label(node, g, s)}


def topological_order(graph: AuxGraph, first: Sequence[int] = ()) -> Union[list[int], CycleWitness]:
    """Kahn's algorithm, lowest node id first; nodes in ``first`` win ties.

    On a cycle, walks backwards through the residual graph from its lowest
    node, always to the lowest residual predecessor, until a node repeats.
    """
    loops = sorted(a for a, b in graph._edges if a == b)
    if loops:
        x = loops[0]
        return CycleWitness((x, x), (graph.tags(x, x),))

    priority = {node: i - len(first) for i, node in enumerate(first)}
    size = graph.n_species + graph.n_genes
    succ: list[list[int]] = [[] for _ in range(size)]
    indeg = [0] * size
    for a, b in graph._edges:
        succ[a].append(b)
        indeg[b] += 1

    heap = [priority.get(x, x) for x in graph.nodes if indeg[x] == 0]
    heapq.heapify(heap)
    inverse = {p: x for x, p in priority.items()}
    order: list[int] = []
    push, pop = heapq.heappush, heapq.heappop
    while heap:
        key = pop(heap)
        x = inverse.get(key, key) if key < 0 else key
        order.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                push(heap, priority.get(y, y))
    if len(order) == len(graph.nodes):
        return order

    residual = {x for x in graph.nodes if indeg[x] > 0}
    pred: dict[int, list[int]] = {x: [] for x in residual}
    for a, b in graph._edges:
        if a in residual and b in residual:
            pred[b].append(a)
    walk = [min(residual)]
    seen = {walk[0]: 0}
    while True:
        nxt = min(pred[walk[-1]])
        if nxt in seen:
            cycle = walk[seen[nxt]:] + [nxt]
            break
        seen[nxt] = len(walk)
        walk.append(nxt)
    cycle.reverse()
    body = cycle[:-1]
    k = body.index(min(body))
    body = body[k:] + body[:k]
    nodes = tuple(body + [body[0]])
    tags = tuple(graph.tags(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1))
    return CycleWitness(nodes, tags)
