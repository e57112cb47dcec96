"""Reconciliation maps from event-labeled gene trees into planted species trees."""
from __future__ import annotations

from typing import Iterator, Optional, Sequence

from .errors import InputError, PreconditionError, UnsupportedShapeError
from .scenario import Event, GeneTree, SpeciesTree, Violation, leaf_species, postorder
from .trees import Edge, TreeElement, Vertex


class ReconciliationMap(Sequence):
    """``mu[u]`` is the species-tree vertex or edge that gene vertex ``u`` maps to."""

    __slots__ = ("assignment",)

    def __init__(self, assignment: Sequence[TreeElement]):
        self.assignment = tuple(assignment)

    def __getitem__(self, u):
        return self.assignment[u]

    def __len__(self) -> int:
        return len(self.assignment)

    def __iter__(self) -> Iterator[TreeElement]:
        return iter(self.assignment)

    def __eq__(self, other) -> bool:
        if isinstance(other, ReconciliationMap):
            return self.assignment == other.assignment
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.assignment)

    def __repr__(self) -> str:
        return f"ReconciliationMap({list(self.assignment)!r})"


# ``ell[u]`` is lca_S of the species below ``u`` in its transfer-free component.
LcaSigmaMap = tuple
DtlMap = tuple


def compute_lca_sigma(g: GeneTree, s: SpeciesTree) -> LcaSigmaMap:
    """lca_S(σ̂(u)) for every gene vertex in one bottom-up pass.

    Leaves take their species; an inner vertex folds ``lca2`` over the values
    of its children that are not reached by a transfer edge.
    """
    leaf_of = leaf_species(g, s)
    lca2 = s.tree.index.lca2
    children = g.tree.children
    transfer = g.transfer
    events = g.events
    leaf = Event.LEAF
    ell: list = [None] * len(g)
    for u in postorder(g.tree):
        if events[u] is leaf:
            ell[u] = leaf_of[u]
            continue
        acc = None
        for v in children[u]:
            if not transfer[v]:
                acc = ell[v] if acc is None else lca2(acc, ell[v])
        if acc is None:
            raise InputError(
                f"vertex {g.tree.name(u)} has only transfer out-edges; "
                "lca of its species set is undefined"
            )
        ell[u] = acc
    return tuple(ell)


def build_initial_map(g: GeneTree, s: SpeciesTree, ell: LcaSigmaMap) -> ReconciliationMap:
    """The lowest placement: vertices for •/⊙, the edge above ``ell[u]`` otherwise."""
    parent = s.tree.parent
    out = []
    for u, event in enumerate(g.events):
        x = ell[u]
        if event.on_edge:
            out.append(Edge(parent[x], x))
        else:
            out.append(Vertex(x))
    return ReconciliationMap(out)


def _check_total(s: SpeciesTree, g: GeneTree, mu: Sequence[TreeElement]) -> None:
    if len(mu) != len(g):
        raise InputError(f"reconciliation covers {len(mu)} of {len(g)} gene vertices")
    n = len(s.tree)
    parent = s.tree.parent
    for u, x in enumerate(mu):
        kind = type(x)
        if kind is Vertex:
            ok = 0 <= x.v < n
        elif kind is Edge:
            ok = 0 <= x.child < n and parent[x.child] == x.parent
        else:
            ok = False
        if not ok:
            try:
                s.tree.index.check_element(x)
            except PreconditionError as exc:
                raise InputError(f"gene vertex {g.tree.name(u)}: {exc}") from None


def validate_reconciliation(
    g: GeneTree,
    s: SpeciesTree,
    mu: Sequence[TreeElement],
    ell: Optional[LcaSigmaMap] = None,
) -> list[Violation]:
    """Check M1, M2(i-iii), M3(i-ii) and the lower bound ``mu(u) ⪰ ell(u)``.

    M3 is checked on the edges of each transfer-free component: the pairwise
    condition follows by transitivity, and strictness propagates because any
    ancestor pair involving a •/⊙ vertex contains an edge incident to it.
    """
    _check_total(s, g, mu)
    mu = tuple(mu)
    if ell is None:
        ell = compute_lca_sigma(g, s)
    leaf_of = leaf_species(g, s)
    index = s.tree.index
    tin, tout = index.tin, index.tout
    gname = g.tree.name
    sname = s.name
    events = g.events
    bottom = [m.bottom for m in mu]
    on_edge = [isinstance(m, Edge) for m in mu]
    report: list[Violation] = []

    def show(x: TreeElement) -> str:
        if isinstance(x, Edge):
            return f"({sname(x.parent)},{sname(x.child)})"
        return sname(x.v)

    def leq(a: int, b: int) -> bool:
        """mu(a) ⪯ mu(b) in the extended order, on bottoms and kinds."""
        ba, bb = bottom[a], bottom[b]
        if not (tin[bb] <= tin[ba] and tout[ba] <= tout[bb]):
            return False
        return not (ba == bb and on_edge[a] and not on_edge[b])

    for u, event in enumerate(events):
        m = mu[u]
        if event is Event.LEAF:
            if on_edge[u] or bottom[u] != leaf_of[u]:
                report.append(Violation(
                    "M1", (u,), f"leaf {gname(u)} maps to {show(m)}, not its species {sname(leaf_of[u])}"
                ))
        elif event is Event.SPECIATION:
            if on_edge[u] or bottom[u] != ell[u]:
                report.append(Violation(
                    "M2i", (u,), f"speciation {gname(u)} maps to {show(m)}, not lca {sname(ell[u])}"
                ))
        elif not on_edge[u]:
            report.append(Violation(
                "M2ii", (u,), f"{event.value} {gname(u)} maps to vertex {show(m)}, not an edge"
            ))
        x, b = ell[u], bottom[u]
        if not (tin[b] <= tin[x] and tout[x] <= tout[b]):
            report.append(Violation(
                "LB", (u,), f"{gname(u)} maps to {show(m)}, below its lower bound {sname(ell[u])}"
            ))

    parent = g.tree.parent
    transfer = g.transfer
    for v in range(len(g)):
        p = parent[v]
        if p is None:
            continue
        if transfer[v]:
            if leq(p, v) or leq(v, p):
                report.append(Violation(
                    "M2iii", (p, v),
                    f"transfer edge ({gname(p)},{gname(v)}) has comparable images "
                    f"{show(mu[p])} and {show(mu[v])}",
                ))
            continue
        if events[p].on_edge and events[v].on_edge:
            if not leq(v, p):
                report.append(Violation(
                    "M3i", (v, p),
                    f"{show(mu[v])} = mu({gname(v)}) is not below {show(mu[p])} = mu({gname(p)})",
                ))
        elif (bottom[v] == bottom[p] and on_edge[v] == on_edge[p]) or not leq(v, p):
            report.append(Violation(
                "M3ii", (v, p),
                f"{show(mu[v])} = mu({gname(v)}) is not strictly below {show(mu[p])} = mu({gname(p)})",
            ))
    return report


def _require_binary(g: GeneTree, s: SpeciesTree) -> None:
    if not g.is_binary():
        raise UnsupportedShapeError("gene tree is not binary")
    if not s.is_binary():
        raise UnsupportedShapeError("species tree is not binary")


def to_dtl(g: GeneTree, s: SpeciesTree, mu: Sequence[TreeElement]) -> DtlMap:
    """Vertex images stay, edge images ``(x, y)`` become their child end ``y``."""
    _require_binary(g, s)
    return tuple(x.bottom for x in mu)


def from_dtl(g: GeneTree, s: SpeciesTree, gamma: Sequence[int]) -> ReconciliationMap:
    """Place •/⊙ on ``gamma(u)`` and □/△ on the edge directly above ``gamma(u)``."""
    _require_binary(g, s)
    if len(gamma) != len(g):
        raise InputError(f"DTL map covers {len(gamma)} of {len(g)} gene vertices")
    parent = s.tree.parent
    out = []
    for u, event in enumerate(g.events):
        y = gamma[u]
        if event.on_edge:
            if parent[y] is None:
                raise InputError(f"gene vertex {g.tree.name(u)}: no edge above the planted root")
            out.append(Edge(parent[y], y))
        else:
            out.append(Vertex(y))
    return ReconciliationMap(out)


def validate_dtl(g: GeneTree, s: SpeciesTree, gamma: Sequence[int]) -> list[Violation]:
    """Check the vertex-only DTL axioms I, IIa, IIb, III, IVa, IVb, IVc."""
    _require_binary(g, s)
    if len(gamma) != len(g):
        raise InputError(f"DTL map covers {len(gamma)} of {len(g)} gene vertices")
    n_s = len(s.tree)
    for u, y in enumerate(gamma):
        if not isinstance(y, int) or not 0 <= y < n_s:
            raise InputError(f"gene vertex {g.tree.name(u)}: {y!r} is not a species vertex")
    leaf_of = leaf_species(g, s)
    index = s.tree.index
    anc = index.is_ancestor
    gname = g.tree.name
    sname = s.name
    report: list[Violation] = []

    def comparable(a: int, b: int) -> bool:
        return anc(a, b) or anc(b, a)

    for u, event in enumerate(g.events):
        kids = g.tree.children[u]
        if not kids:
            if gamma[u] != leaf_of[u]:
                report.append(Violation("I", (u,), f"leaf {gname(u)} maps to {sname(gamma[u])}"))
            continue
        gu = gamma[u]
        v, w = kids
        gv, gw = gamma[v], gamma[w]
        for c, gc in ((v, gv), (w, gw)):
            if gc != gu and anc(gc, gu):
                report.append(Violation(
                    "IIa", (u, c), f"gamma({gname(u)}) is a proper descendant of gamma({gname(c)})"
                ))
        if not (anc(gu, gv) or anc(gu, gw)):
            report.append(Violation(
                "IIb", (u,), f"neither child image of {gname(u)} lies below {sname(gu)}"
            ))
        for c, gc in ((v, gv), (w, gw)):
            if g.transfer[c] == comparable(gu, gc):
                what = "transfer edge with comparable" if g.transfer[c] else "vertical edge with incomparable"
                report.append(Violation("III", (u, c), f"({gname(u)},{gname(c)}) is a {what} images"))
        if (event is Event.TRANSFER) != (g.transfer[v] or g.transfer[w]):
            report.append(Violation(
                "IVa", (u,), f"{gname(u)}: transfer label disagrees with its transfer edges"
            ))
        if event is Event.SPECIATION:
            if gu != index.lca2(gv, gw) or comparable(gv, gw):
                report.append(Violation(
                    "IVb", (u,),
                    f"speciation {gname(u)}: images {sname(gv)}, {sname(gw)} must be incomparable "
                    f"with lca {sname(gu)}",
                ))
        elif event is Event.DUPLICATION:
            if not anc(gu, index.lca2(gv, gw)):
                report.append(Violation(
                    "IVc", (u,), f"duplication {gname(u)} lies below lca of its children's images"
                ))
    return report

