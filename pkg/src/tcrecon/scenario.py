"""Event-labeled gene trees, planted species trees and observability checks."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import InputError, PreconditionError
from .trees import RootedTree


class Event(enum.Enum):
    SPECIATION = "speciation"
    DUPLICATION = "duplication"
    TRANSFER = "transfer"
    LEAF = "leaf"

    def __init__(self, value):
        # duplications and transfers are placed on species-tree edges; a plain
        # attribute because hot loops read it once per gene vertex
        self.on_edge = value in ("duplication", "transfer")

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    Event.SPECIATION: "•",
    Event.DUPLICATION: "□",
    Event.TRANSFER: "△",
    Event.LEAF: "⊙",
}


@dataclass(frozen=True, eq=False)
class Violation:
    """One failed condition, located at the vertices it concerns."""

    condition: str
    vertices: tuple = ()
    message: str = ""

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "vertices": list(self.vertices),
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"[{self.condition}] {self.message}"


class GeneTree:
    """A gene tree with event labels, transfer-edge flags and a species map.

    ``transfer[v]`` flags the edge entering ``v``; ``sigma`` maps each leaf
    to the name of the species containing it.
    """

    def __init__(
        self,
        tree: RootedTree,
        events: Sequence[Event],
        transfer: Sequence[bool],
        sigma: Mapping[int, str],
    ):
        n = len(tree)
        if len(events) != n or len(transfer) != n:
            raise InputError("events and transfer flags must cover every vertex")
        for v in range(n):
            leaf = tree.is_leaf(v)
            if leaf != (events[v] is Event.LEAF):
                kind = "leaf" if leaf else "internal vertex"
                raise InputError(f"{kind} {tree.name(v)} carries event {events[v].value!r}")
            if transfer[v]:
                p = tree.parent[v]
                if p is None:
                    raise InputError("the root cannot have an incoming transfer edge")
                if events[p] is not Event.TRANSFER:
                    raise InputError(
                        f"transfer edge ({tree.name(p)},{tree.name(v)}) leaves a "
                        f"non-transfer vertex"
                    )
        leaves = set(tree.leaves)
        if set(sigma) != leaves:
            missing = sorted(leaves - set(sigma))
            extra = sorted(set(sigma) - leaves)
            raise InputError(f"sigma must cover exactly the leaves (missing {missing}, extra {extra})")
        self.tree = tree
        self.events = tuple(events)
        self.transfer = tuple(bool(x) for x in transfer)
        self.sigma = dict(sigma)

    def __len__(self) -> int:
        return len(self.tree)

    def transfer_edges(self) -> list[tuple[int, int]]:
        parent = self.tree.parent
        return [(parent[v], v) for v in range(len(self)) if self.transfer[v]]

    def is_binary(self) -> bool:
        return all(len(c) in (0, 2) for c in self.tree.children)


@dataclass(frozen=True)
class SpeciesTree:
    """A species tree planted on an extra root above the last common ancestor."""

    tree: RootedTree
    planted_root: int
    core_root: int
    by_name: Mapping[str, int] = field(repr=False)

    def vertex(self, name: str) -> int:
        try:
            return self.by_name[name]
        except KeyError:
            raise InputError(f"unknown species {name!r}") from None

    def name(self, x: int) -> str:
        if x == self.planted_root:
            return "_root"
        return self.tree.name(x)

    def is_binary(self) -> bool:
        """Binary apart from the unary planted root."""
        kids = self.tree.children
        return all(len(kids[x]) in (0, 2) for x in range(len(self.tree)) if x != self.planted_root)


def augment_species_tree(raw: RootedTree) -> SpeciesTree:
    """Add a new root ``ρ_S`` (id ``len(raw)``) above the root of ``raw``.

    Existing vertex ids and names are kept.
    """
    if len(raw) == 0:
        raise PreconditionError("empty species tree")
    if not raw.is_phylogenetic():
        bad = next(v for v in range(len(raw)) if v != raw.root and len(raw.children[v]) == 1)
        raise PreconditionError(f"species tree is not phylogenetic at vertex {raw.name(bad)}")
    for leaf in raw.leaves:
        if leaf not in raw.labels:
            raise InputError(f"species leaf {leaf} has no name")
    n = len(raw)
    parents = list(raw.parent)
    parents[raw.root] = n
    parents.append(None)
    tree = RootedTree(parents, raw.labels)
    by_name = {name: v for v, name in raw.labels.items()}
    return SpeciesTree(tree, planted_root=n, core_root=raw.root, by_name=by_name)


@dataclass(frozen=True)
class TransferForest:
    """Components of the gene tree after deleting all transfer edges."""

    component_id: tuple[int, ...]
    component_roots: tuple[int, ...]


def remove_transfer_edges(g: GeneTree) -> TransferForest:
    comp = [0] * len(g)
    roots = []
    for v in g.tree.preorder():
        p = g.tree.parent[v]
        if p is None or g.transfer[v]:
            comp[v] = len(roots)
            roots.append(v)
        else:
            comp[v] = comp[p]
    return TransferForest(tuple(comp), tuple(roots))


def sigma_hat(g: GeneTree, f: Optional[TransferForest], v: int) -> frozenset[str]:
    """Species of the leaves below ``v`` reachable without a transfer edge."""
    out = set()
    stack = [v]
    children = g.tree.children
    while stack:
        x = stack.pop()
        if not children[x]:
            out.add(g.sigma[x])
        for c in children[x]:
            if not g.transfer[c]:
                stack.append(c)
    return frozenset(out)


def leaf_species(g: GeneTree, s: SpeciesTree) -> dict[int, int]:
    """Species-tree vertex of every gene leaf; unknown names are input errors."""
    out = {}
    for leaf, name in g.sigma.items():
        x = s.by_name.get(name)
        if x is None:
            raise InputError(f"gene leaf {g.tree.name(leaf)} maps to unknown species {name!r}")
        out[leaf] = x
    return out


def postorder(tree: RootedTree) -> list[int]:
    order = tree.preorder()
    order.reverse()
    return order


def check_observability(g: GeneTree, s: SpeciesTree) -> list[Violation]:
    """Report violations of O1, O2, Σ1 and Σ2.

    Species sets are handled as bitmasks over the species leaves; each mask is
    dropped once its parent has consumed it.
    """
    leaf_of = leaf_species(g, s)
    bit = {x: 1 << i for i, x in enumerate(s.tree.leaves)}
    tree = g.tree
    children = tree.children
    events = g.events
    transfer = g.transfer
    name = tree.name
    report: list[Violation] = []

    for v in range(len(g)):
        kids = children[v]
        if kids and len(kids) < 2:
            where = "root" if v == tree.root else "internal vertex"
            report.append(Violation("O1", (v,), f"{where} {name(v)} has a single child"))
        if events[v] is Event.TRANSFER:
            n_transfer = sum(1 for c in kids if transfer[c])
            if n_transfer == 0 or n_transfer == len(kids):
                kind = "no" if n_transfer == 0 else "only"
                report.append(
                    Violation("O2", (v,), f"transfer vertex {name(v)} has {kind} transfer out-edges")
                )

    mask: dict[int, int] = {}
    for v in postorder(tree):
        kids = children[v]
        if not kids:
            mask[v] = bit[leaf_of[v]]
            continue
        own = 0
        for c in kids:
            if not transfer[c]:
                own |= mask[c]
        if events[v] is Event.SPECIATION:
            ms = [mask[c] for c in kids]
            if not any(ms[i] & ms[j] == 0 for i in range(len(ms)) for j in range(i + 1, len(ms))):
                report.append(
                    Violation(
                        "Sigma1",
                        (v,),
                        f"speciation {name(v)} has no two children with disjoint species sets",
                    )
                )
        for c in kids:
            if transfer[c] and own & mask[c]:
                report.append(
                    Violation(
                        "Sigma2",
                        (v, c),
                        f"transfer edge ({name(v)},{name(c)}) joins overlapping species sets",
                    )
                )
        for c in kids:
            del mask[c]
        mask[v] = own
    report.sort(key=lambda x: (x.condition, x.vertices))
    return report
