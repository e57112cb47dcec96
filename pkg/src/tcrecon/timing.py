"""Time maps, time-consistency checks and the construction pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .auxgraph import AuxGraph, CycleWitness, build_aux_graph, topological_order
from .errors import InputError, InternalInvariantError, PreconditionError
from .reconciliation import (
    ReconciliationMap,
    build_initial_map,
    compute_lca_sigma,
    validate_reconciliation,
)
from .scenario import Event, GeneTree, SpeciesTree, Violation
from .trees import Edge, RootedTree, TreeElement, Vertex


@dataclass(frozen=True)
class TimeAssignment:
    """Exact time stamps for gene vertices (``gene``) and species vertices (``species``)."""

    gene: tuple
    species: tuple


def check_time_map(tree: RootedTree, tau: Sequence) -> list[Violation]:
    """Parent-child pairs where time fails to increase strictly away from the root."""
    if len(tau) != len(tree):
        raise InputError(f"time map covers {len(tau)} of {len(tree)} vertices")
    report = []
    for p, v in tree.edges():
        if not tau[v] > tau[p]:
            report.append(Violation(
                "TimeMap", (p, v), f"tau({tree.name(v)}) = {tau[v]} is not after tau({tree.name(p)}) = {tau[p]}"
            ))
    return report


def check_C(g: GeneTree, s: SpeciesTree, mu: Sequence[TreeElement], tau: TimeAssignment) -> list[Violation]:
    """C1: •/⊙ share the time of their image; C2: □/△ fall strictly inside their edge."""
    tt, ts = tau.gene, tau.species
    report = []
    for u, event in enumerate(g.events):
        m = mu[u]
        if event.on_edge:
            if not isinstance(m, Edge):
                raise InputError(f"{event.value} {g.tree.name(u)} must map to an edge")
            if not ts[m.parent] < tt[u] < ts[m.child]:
                name = g.tree.name(u)
                report.append(Violation(
                    "C2", (u,),
                    f"tau({name}) = {tt[u]} is not strictly between "
                    f"{ts[m.parent]} and {ts[m.child]} on ({s.name(m.parent)},{s.name(m.child)})",
                ))
        else:
            if not isinstance(m, Vertex):
                raise InputError(f"{event.value} {g.tree.name(u)} must map to a vertex")
            if tt[u] != ts[m.v]:
                report.append(Violation(
                    "C1", (u,), f"tau({g.tree.name(u)}) = {tt[u]} differs from tau({s.name(m.v)}) = {ts[m.v]}"
                ))
    return report


def _subtree_min(tree: RootedTree, values: Sequence) -> list:
    out = list(values)
    order = tree.preorder()
    parent = tree.parent
    for v in reversed(order):
        p = parent[v]
        if p is not None and out[v] < out[p]:
            out[p] = out[v]
    return out


def _path_max(tree: RootedTree, values: Sequence) -> list:
    """Maximum over ``v`` and all its ancestors."""
    out = list(values)
    parent = tree.parent
    for v in tree.preorder():
        p = parent[v]
        if p is not None and out[p] > out[v]:
            out[v] = out[p]
    return out


def check_D(
    g: GeneTree,
    s: SpeciesTree,
    mu: Sequence[TreeElement],
    tau: TimeAssignment,
    ell: Optional[Sequence[int]] = None,
) -> list[Violation]:
    """Conditions D1-D3; at most one violation per gene vertex or transfer edge."""
    if ell is None:
        ell = compute_lca_sigma(g, s)
    tt, ts = tau.gene, tau.species
    report = []
    for u, m in enumerate(mu):
        if isinstance(m, Vertex) and tt[u] != ts[m.v]:
            report.append(Violation(
                "D1", (u, m.v), f"tau({g.tree.name(u)}) = {tt[u]} differs from tau({s.name(m.v)}) = {ts[m.v]}"
            ))
    below = _subtree_min(s.tree, ts)
    for u, event in enumerate(g.events):
        if event.on_edge and not below[ell[u]] > tt[u]:
            report.append(Violation(
                "D2", (u, ell[u]),
                f"some species at or below {s.name(ell[u])} is not later than {g.tree.name(u)}",
            ))
    above = _path_max(s.tree, ts)
    lca2 = s.tree.index.lca2
    for u, v in g.transfer_edges():
        z = lca2(ell[u], ell[v])
        if not tt[u] > above[z]:
            report.append(Violation(
                "D3", (u, v, z),
                f"transfer ({g.tree.name(u)},{g.tree.name(v)}) is not later than {s.name(z)} "
                "and all its ancestors",
            ))
    return report


def check_T(
    g: GeneTree,
    s: SpeciesTree,
    mu: Sequence[TreeElement],
    tau_gene: Sequence,
    ell: Optional[Sequence[int]] = None,
) -> list[Violation]:
    """Conditions T1a, T1b, T2, T3, stated on gene-tree times only."""
    if ell is None:
        ell = compute_lca_sigma(g, s)
    n_s = len(s.tree)
    stree = s.tree
    inf = math.inf
    report = []

    cmin: list = [inf] * n_s
    cmax: list = [-inf] * n_s
    arg_min = [None] * n_s
    arg_max = [None] * n_s
    for u, event in enumerate(g.events):
        if event.on_edge:
            continue
        m = mu[u]
        if not isinstance(m, Vertex):
            raise InputError(f"{event.value} {g.tree.name(u)} must map to a vertex")
        t = tau_gene[u]
        if t < cmin[m.v]:
            cmin[m.v], arg_min[m.v] = t, u
        if t > cmax[m.v]:
            cmax[m.v], arg_max[m.v] = t, u

    for x in range(n_s):
        if arg_min[x] is not None and cmin[x] != cmax[x]:
            report.append(Violation(
                "T1a", (arg_min[x], arg_max[x]), f"vertices mapped to {s.name(x)} have different times"
            ))

    # max class time over proper ancestors, with its witness
    anc_max = [-inf] * n_s
    anc_arg = [None] * n_s
    parent = stree.parent
    for x in stree.preorder():
        p = parent[x]
        if p is None:
            continue
        anc_max[x], anc_arg[x] = anc_max[p], anc_arg[p]
        if cmax[p] > anc_max[x]:
            anc_max[x], anc_arg[x] = cmax[p], arg_max[p]
    for x in range(n_s):
        if arg_min[x] is not None and not cmin[x] > anc_max[x]:
            report.append(Violation(
                "T1b", (arg_min[x], anc_arg[x]),
                f"vertex mapped to {s.name(x)} is not later than one mapped to an ancestor",
            ))

    sub = _subtree_min(stree, cmin)
    for v, event in enumerate(g.events):
        if event.on_edge and not sub[ell[v]] > tau_gene[v]:
            report.append(Violation(
                "T2", (v,), f"a speciation/leaf at or below {s.name(ell[v])} is not later than {g.tree.name(v)}"
            ))

    lmax: list = [-inf] * n_s
    for w in range(len(g)):
        if tau_gene[w] > lmax[ell[w]]:
            lmax[ell[w]] = tau_gene[w]
    up = _path_max(stree, lmax)
    lca2 = stree.index.lca2
    for u, v in g.transfer_edges():
        z = lca2(ell[u], ell[v])
        if not tau_gene[u] > up[z]:
            report.append(Violation(
                "T3", (u, v), f"transfer ({g.tree.name(u)},{g.tree.name(v)}) is not later than "
                f"every vertex whose lca lies at or above {s.name(z)}",
            ))
    return report


def extend_time_map(
    g: GeneTree,
    s: SpeciesTree,
    mu: Sequence[TreeElement],
    tau_gene: Sequence,
    ell: Optional[Sequence[int]] = None,
) -> tuple:
    """Build species times from gene times that satisfy T1-T3.

    Species vertices with a •/⊙ preimage copy its time, the planted root sits
    one unit before the earliest gene vertex, and every other vertex (root to
    leaves) takes the midpoint of its admissible open interval.
    """
    if ell is None:
        ell = compute_lca_sigma(g, s)
    bad = check_T(g, s, mu, tau_gene, ell)
    if bad:
        raise PreconditionError(f"gene times violate {bad[0].condition}: {bad[0].message}")
    stree = s.tree
    n_s = len(stree)
    inf = math.inf
    tau_gene = [Fraction(t) for t in tau_gene]
    species: list = [None] * n_s
    species[s.planted_root] = min(tau_gene) - 1
    for u, event in enumerate(g.events):
        if not event.on_edge:
            species[mu[u].v] = tau_gene[u]

    anchored = [t if t is not None else inf for t in species]
    anchored_below = _subtree_min(stree, anchored)
    lo_class: list = [-inf] * n_s
    up_class: list = [inf] * n_s
    for u, event in enumerate(g.events):
        if event.on_edge and tau_gene[u] > lo_class[ell[u]]:
            lo_class[ell[u]] = tau_gene[u]
    lca2 = stree.index.lca2
    for u, v in g.transfer_edges():
        z = lca2(ell[u], ell[v])
        if tau_gene[u] < up_class[z]:
            up_class[z] = tau_gene[u]
    lo_path = _path_max(stree, lo_class)
    up_sub = _subtree_min(stree, up_class)

    parent = stree.parent
    children = stree.children
    for x in stree.preorder():
        if species[x] is not None:
            continue
        lower = max(species[parent[x]], lo_path[x])
        upper = min([up_sub[x]] + [anchored_below[c] for c in children[x]])
        if not lower < upper:
            raise PreconditionError(f"no admissible time for species vertex {s.name(x)}")
        species[x] = lower + 1 if upper == inf else (lower + upper) / 2
    return tuple(species)


@dataclass
class Verdict:
    """Outcome of an acyclicity test, with witness time stamps or a cycle."""

    consistent: bool
    graph: AuxGraph
    witness: Optional[CycleWitness] = None
    times: Optional[TimeAssignment] = None


def _times_from_ranks(g, s, mu, rank, n_s: int) -> TimeAssignment:
    """Affine-normalise ranks so that the gene root is 0 and the planted root -1."""
    gene_rank = [rank[m.v] if not e.on_edge else rank[n_s + u] for u, (e, m) in enumerate(zip(g.events, mu))]
    r0 = rank[s.planted_root]
    span = gene_rank[g.tree.root] - r0
    if span <= 0:
        raise InternalInvariantError("planted root is not before the gene-tree root")
    gene = tuple(Fraction(r - r0 - span, span) for r in gene_rank)
    species = tuple(Fraction(rank[x] - r0 - span, span) for x in range(n_s))
    return TimeAssignment(gene, species)


def _require_valid(g, s, mu, ell) -> None:
    bad = validate_reconciliation(g, s, mu, ell)
    if bad:
        raise InputError(f"not a valid reconciliation map: {bad[0]}")


def is_time_consistent(
    g: GeneTree, s: SpeciesTree, mu: Sequence[TreeElement], ell: Optional[Sequence[int]] = None
) -> Verdict:
    """Decide whether this particular map admits time maps satisfying C1 and C2."""
    if ell is None:
        ell = compute_lca_sigma(g, s)
    _require_valid(g, s, mu, ell)
    graph = build_aux_graph(g, s, mu, "A1")
    order = topological_order(graph, first=(s.planted_root,))
    if isinstance(order, CycleWitness):
        return Verdict(False, graph, witness=order)
    rank = {x: i for i, x in enumerate(order)}
    times = _times_from_ranks(g, s, mu, rank, len(s.tree))
    bad = check_time_map(g.tree, times.gene) + check_time_map(s.tree, times.species) + check_C(g, s, mu, times)
    if bad:
        raise InternalInvariantError(f"witness times fail {bad[0]}")
    return Verdict(True, graph, times=times)


def exists_time_consistent(
    g: GeneTree, s: SpeciesTree, mu_any: Sequence[TreeElement], ell: Optional[Sequence[int]] = None
) -> Verdict:
    """Decide whether some time-consistent map exists, given any valid map.

    On success the witness times satisfy D1-D3 with respect to ``mu_any``.
    """
    if ell is None:
        ell = compute_lca_sigma(g, s)
    _require_valid(g, s, mu_any, ell)
    graph = build_aux_graph(g, s, mu_any, "A2", ell)
    order = topological_order(graph, first=(s.planted_root,))
    if isinstance(order, CycleWitness):
        return Verdict(False, graph, witness=order)
    rank = {x: i for i, x in enumerate(order)}
    return Verdict(True, graph, times=_times_from_ranks(g, s, mu_any, rank, len(s.tree)))


OK = "ok"
NOT_TIME_CONSISTENT = "not-time-consistent"
NO_RECONCILIATION = "no-reconciliation"


@dataclass
class Construction:
    status: str
    mu: Optional[ReconciliationMap] = None
    times: Optional[TimeAssignment] = None
    witness: Optional[CycleWitness] = None
    graph: Optional[AuxGraph] = None
    violations: list = field(default_factory=list)
    ell: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.status == OK


def construct_time_consistent(g: GeneTree, s: SpeciesTree, verify: bool = True) -> Construction:
    """Build a time-consistent reconciliation map with explicit time stamps.

    Starts from the lowest placement, rejects if the ``A2`` graph has a cycle,
    otherwise times every node by its rank in a topological order and lifts
    each □/△ vertex edge by edge until its time falls strictly inside its edge.
    """
    ell = compute_lca_sigma(g, s)
    mu = build_initial_map(g, s, ell)
    bad = validate_reconciliation(g, s, mu, ell)
    if bad:
        return Construction(NO_RECONCILIATION, violations=bad, ell=ell)
    graph = build_aux_graph(g, s, mu, "A2", ell)
    order = topological_order(graph, first=(s.planted_root,))
    if isinstance(order, CycleWitness):
        return Construction(NOT_TIME_CONSISTENT, witness=order, graph=graph, ell=ell)

    n_s = len(s.tree)
    rank = [0] * (n_s + len(g))
    for i, x in enumerate(order):
        rank[x] = i
    sparent = s.tree.parent
    placed = list(mu)
    for u, event in enumerate(g.events):
        if not event.on_edge:
            continue
        t = rank[n_s + u]
        x, y = placed[u].parent, placed[u].child
        while not rank[x] < t < rank[y]:
            if sparent[x] is None:
                raise InternalInvariantError(
                    f"no edge above {s.name(ell[u])} brackets the time of {g.tree.name(u)}"
                )
            x, y = sparent[x], x
        placed[u] = Edge(x, y)
    mu = ReconciliationMap(placed)

    if verify:
        # the normalisation below is strictly increasing and affine, so checking
        # the integer ranks checks the returned times
        ranks = TimeAssignment(
            tuple(rank[n_s + u] if e.on_edge else rank[m.v] for u, (e, m) in enumerate(zip(g.events, mu))),
            tuple(rank[:n_s]),
        )
        bad = (
            validate_reconciliation(g, s, mu, ell)
            + check_time_map(g.tree, ranks.gene)
            + check_time_map(s.tree, ranks.species)
            + check_C(g, s, mu, ranks)
        )
        if bad:
            raise InternalInvariantError(f"constructed map fails {bad[0]}")
    times = _times_from_ranks(g, s, mu, rank, n_s)
    return Construction(OK, mu=mu, times=times, graph=graph, ell=ell)
