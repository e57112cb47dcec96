"""Random observable scenarios: a dated species tree and a gene tree evolved inside it.

Gene lineages run along species edges; along an edge, duplications, transfers
and losses arrive as a Poisson process whose per-type rates are ``p_dup``,
``p_hgt`` and ``p_loss`` per unit of time. Lost lineages are pruned, unary
vertices suppressed, and instances failing the observability checks are
redrawn from the same random stream.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .errors import InputError
from .scenario import Event, GeneTree, SpeciesTree, augment_species_tree, check_observability
from .trees import RootedTree

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class ScenarioParams:
    """``n_genes`` caps the gene leaves that duplications and transfers may add;
    the species-driven minimum of ``n_species`` leaves is always produced.

    ``polytomy`` is the chance that an internal species edge is contracted;
    ``contemporary`` restricts transfer recipients to edges alive at the
    donor's time, which yields time-consistent scenarios.
    """

    seed: int = 0
    n_species: int = 4
    n_genes: int = 8
    p_dup: float = 0.3
    p_hgt: float = 0.3
    p_loss: float = 0.1
    polytomy: float = 0.0
    contemporary: bool = False

    def __post_init__(self):
        if self.n_species < 1 or self.n_genes < 1:
            raise InputError("n_species and n_genes must be at least 1")
        for name in ("p_dup", "p_hgt", "p_loss", "polytomy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")


class _Reject(Exception):
    pass


def _species_tree(rng: random.Random, params: ScenarioParams):
    """Random splits grow the topology; each vertex gets a time after its parent
    and all leaves share the final time. Returns parents and times."""
    parents: list[Optional[int]] = [None]
    times = [0.0]
    tips = [0]
    while len(tips) < params.n_species:
        k = rng.randrange(len(tips))
        x = tips[k]
        tips[k] = tips[-1]
        tips.pop()
        for _ in range(2):
            parents.append(x)
            times.append(0.0)
            tips.append(len(parents) - 1)
    n = len(parents)
    children: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parents):
        if p is not None:
            children[p].append(v)
    order = [0]
    for v in order:
        order.extend(children[v])
    for v in order[1:]:
        times[v] = times[parents[v]] + rng.expovariate(1.0)
    end = max(times) + 1.0
    for v in range(n):
        if not children[v]:
            times[v] = end

    if params.polytomy > 0:
        keep = [v == 0 or not children[v] or rng.random() >= params.polytomy for v in range(n)]
        parents, times = _contract(parents, times, keep)
    return parents, times


def _contract(parents, times, keep):
    """Remove vertices with ``keep[v]`` false, attaching children to the nearest kept ancestor."""
    new_id = {}
    for v in range(len(parents)):
        if keep[v]:
            new_id[v] = len(new_id)
    out_parents: list[Optional[int]] = []
    out_times = []
    for v in range(len(parents)):
        if not keep[v]:
            continue
        p = parents[v]
        while p is not None and not keep[p]:
            p = parents[p]
        out_parents.append(None if p is None else new_id[p])
        out_times.append(times[v])
    return out_parents, out_times


class _GeneBuilder:
    def __init__(self):
        self.parent: list[Optional[int]] = []
        self.event: list[Optional[Event]] = []
        self.transfer: list[bool] = []
        self.species: list[int] = []
        self.lost: list[bool] = []

    def add(self, parent, event, transfer, species, lost=False) -> int:
        self.parent.append(parent)
        self.event.append(event)
        self.transfer.append(transfer)
        self.species.append(species)
        self.lost.append(lost)
        return len(self.parent) - 1


def _evolve(rng, params, sp_parent, sp_times):
    n_s = len(sp_parent)
    children: list[list[int]] = [[] for _ in range(n_s)]
    for v, p in enumerate(sp_parent):
        if p is not None:
            children[p].append(v)
    # tin/tout for comparability of species edges
    tin = [0] * n_s
    tout = [0] * n_s
    n_leaves = [0] * n_s
    clock = 0
    stack = [(0, False)]
    while stack:
        v, done = stack.pop()
        if done:
            tout[v] = clock - 1
            n_leaves[v] = 1 if not children[v] else sum(n_leaves[c] for c in children[v])
            continue
        tin[v] = clock
        clock += 1
        stack.append((v, True))
        for c in reversed(children[v]):
            stack.append((c, False))

    def comparable(x, y):
        return (tin[x] <= tin[y] <= tout[x]) or (tin[y] <= tin[x] <= tout[y])

    rates = (params.p_dup, params.p_hgt, params.p_loss)
    total_rate = sum(rates)
    start = sp_times[0] - 1.0
    b = _GeneBuilder()
    projected = n_leaves[0]
    # lineage: (species vertex at the bottom of its edge, current time, gene parent, incoming transfer flag)
    work = [(0, start, None, False)]
    while work:
        x, t, gp, flag = work.pop()
        end = sp_times[x]
        if total_rate > 0:
            t += rng.expovariate(total_rate)
        if total_rate == 0 or t >= end:
            if not children[x]:
                b.add(gp, Event.LEAF, flag, x)
            else:
                u = b.add(gp, Event.SPECIATION, flag, x)
                for c in reversed(children[x]):
                    work.append((c, end, u, False))
            continue
        kind = rng.choices(("dup", "hgt", "loss"), weights=rates)[0]
        if kind == "loss":
            b.add(gp, None, flag, x, lost=True)
            projected -= n_leaves[x]
            continue
        if kind == "dup":
            if projected + n_leaves[x] > params.n_genes:
                work.append((x, t, gp, flag))
                continue
            projected += n_leaves[x]
            u = b.add(gp, Event.DUPLICATION, flag, x)
            work.append((x, t, u, False))
            work.append((x, t, u, False))
            continue
        y = None
        for _ in range(32):
            c = rng.randrange(n_s)
            if c == 0 or comparable(c, x):
                continue
            if params.contemporary and not sp_times[sp_parent[c]] < t < sp_times[c]:
                continue
            y = c
            break
        if y is None or projected + n_leaves[y] > params.n_genes:
            work.append((x, t, gp, flag))
            continue
        projected += n_leaves[y]
        u = b.add(gp, Event.TRANSFER, flag, x)
        t_y = t if params.contemporary else rng.uniform(sp_times[sp_parent[y]], sp_times[y])
        work.append((y, t_y, u, True))
        work.append((x, t, u, False))
    return b


def _prune(b: _GeneBuilder):
    """Drop lost lineages and suppress unary vertices; parents get smaller ids than children."""
    n = len(b.parent)
    children: list[list[int]] = [[] for _ in range(n)]
    root = None
    for v, p in enumerate(b.parent):
        if p is None:
            root = v
        else:
            children[p].append(v)
    order = [root]
    for v in order:
        order.extend(children[v])
    alive = [False] * n
    for v in reversed(order):
        alive[v] = (b.event[v] is Event.LEAF) or any(alive[c] for c in children[v])
    if not alive[root]:
        raise _Reject()

    def resolve(v):
        """Follow unary chains down; returns (vertex, transfer edges crossed on the way)."""
        crossed = 0
        while True:
            kids = [c for c in children[v] if alive[c]]
            if b.event[v] is Event.LEAF or len(kids) >= 2:
                return v, crossed
            c = kids[0]
            crossed += b.transfer[c]
            v = c

    top, _ = resolve(root)
    parents: list[Optional[int]] = [None]
    events = [b.event[top]]
    transfer = [False]
    species = [b.species[top]]
    stack = [(top, 0)]
    while stack:
        v, new_v = stack.pop()
        kids = [c for c in children[v] if alive[c]]
        for c in reversed(kids):
            w, extra = resolve(c)
            crossed = b.transfer[c] + extra
            # two transfers merged into one edge can land back beside the donor
            if crossed > 1:
                raise _Reject()
            is_transfer = crossed == 1
            if is_transfer and events[new_v] is not Event.TRANSFER:
                raise _Reject()
            parents.append(new_v)
            events.append(b.event[w])
            transfer.append(is_transfer)
            species.append(b.species[w])
            stack.append((w, len(parents) - 1))
    return parents, events, transfer, species


def _relabel_preorder(parents):
    n = len(parents)
    children: list[list[int]] = [[] for _ in range(n)]
    root = 0
    for v, p in enumerate(parents):
        if p is None:
            root = v
        else:
            children[p].append(v)
    stack = [root]
    order = []
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))
    return order


def random_scenario(params: ScenarioParams) -> tuple[GeneTree, SpeciesTree]:
    """Draw one observable scenario; deterministic in ``params``."""
    rng = random.Random(params.seed)
    for _ in range(MAX_ATTEMPTS):
        sp_parent, sp_times = _species_tree(rng, params)
        try:
            parents, events, transfer, species = _prune(_evolve(rng, params, sp_parent, sp_times))
        except _Reject:
            continue
        if len(parents) < 2:
            continue
        g, s = _assemble(sp_parent, parents, events, transfer, species)
        if not check_observability(g, s):
            return g, s
    raise InputError(f"no observable scenario after {MAX_ATTEMPTS} attempts; adjust the rates")


def _assemble(sp_parent, parents, events, transfer, species):
    order = _relabel_preorder(sp_parent)
    new = {v: i for i, v in enumerate(order)}
    s_parents = [None if sp_parent[v] is None else new[sp_parent[v]] for v in order]
    s_children = [0] * len(order)
    for p in s_parents:
        if p is not None:
            s_children[p] += 1
    labels = {}
    k = 0
    for i in range(len(order)):
        if s_children[i] == 0:
            labels[i] = f"s{k}"
            k += 1
        else:
            labels[i] = f"n{i}"
    s = augment_species_tree(RootedTree(s_parents, labels))

    g_labels = {}
    sigma = {}
    n_leaf = n_inner = 0
    for v, event in enumerate(events):
        if event is Event.LEAF:
            g_labels[v] = f"g{n_leaf}"
            sigma[v] = labels[new[species[v]]]
            n_leaf += 1
        else:
            g_labels[v] = f"u{n_inner}"
            n_inner += 1
    g = GeneTree(RootedTree(parents, g_labels), events, transfer, sigma)
    return g, s
