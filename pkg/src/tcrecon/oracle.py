"""Brute-force verifiers used as independent witnesses in the test suite.

Nothing here touches the auxiliary graphs or the sparse-table LCA: lca is an
upward walk, species sets are explicit scans, and time-consistency is decided
from the definitions of time maps and C1/C2.
"""
from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .errors import InputError, SizeCapError
from .reconciliation import ReconciliationMap, validate_reconciliation
from .scenario import GeneTree, SpeciesTree
from .trees import Edge, RootedTree, TreeElement, Vertex

PERMUTATION_LIMIT = 9
CLOSURE_LIMIT = 60
DEFAULT_CAP = 10**6


def naive_ancestors(tree: RootedTree, v: int) -> list[int]:
    """``v`` followed by its ancestors up to the root."""
    out = [v]
    while tree.parent[out[-1]] is not None:
        out.append(tree.parent[out[-1]])
    return out


def naive_lca(tree: RootedTree, u: int, v: int) -> int:
    above_u = set(naive_ancestors(tree, u))
    for x in naive_ancestors(tree, v):
        if x in above_u:
            return x
    raise AssertionError("vertices in different trees")


def naive_leaf_set(tree: RootedTree, v: int) -> frozenset[int]:
    out = set()
    for leaf in tree.leaves:
        if v in naive_ancestors(tree, leaf):
            out.add(leaf)
    return frozenset(out)


def naive_sigma_hat(g: GeneTree, v: int) -> set[str]:
    """Species of leaves ``x`` below ``v`` whose path up to ``v`` has no transfer edge."""
    out = set()
    for leaf in g.tree.leaves:
        x = leaf
        while x != v and x is not None and not g.transfer[x]:
            x = g.tree.parent[x]
        if x == v:
            out.add(g.sigma[leaf])
    return out


def naive_lca_sigma(g: GeneTree, s: SpeciesTree) -> tuple[int, ...]:
    ell = []
    for u in range(len(g)):
        names = sorted(naive_sigma_hat(g, u))
        if not names:
            raise InputError(f"vertex {g.tree.name(u)} has an empty species set")
        acc = s.vertex(names[0])
        for name in names[1:]:
            acc = naive_lca(s.tree, acc, s.vertex(name))
        ell.append(acc)
    return tuple(ell)


def candidate_images(g: GeneTree, s: SpeciesTree, ell: Sequence[int]) -> list[list[TreeElement]]:
    """Per gene vertex, every image that M1, M2 and the lower bound leave open."""
    out = []
    for u, event in enumerate(g.events):
        if event.on_edge:
            path = naive_ancestors(s.tree, ell[u])
            out.append([Edge(p, c) for c, p in zip(path, path[1:])])
        else:
            out.append([Vertex(ell[u])])
    return out


def count_candidates(g: GeneTree, s: SpeciesTree, ell: Optional[Sequence[int]] = None) -> int:
    if ell is None:
        ell = naive_lca_sigma(g, s)
    total = 1
    for options in candidate_images(g, s, ell):
        total *= len(options)
    return total


def enumerate_reconciliations(g: GeneTree, s: SpeciesTree, cap: int = DEFAULT_CAP) -> list[ReconciliationMap]:
    """All valid reconciliation maps, in lexicographic order of the candidates."""
    ell = naive_lca_sigma(g, s)
    options = candidate_images(g, s, ell)
    total = 1
    for opts in options:
        total *= len(opts)
    if total > cap:
        raise SizeCapError(f"{total} candidate maps exceed the cap of {cap}")
    found = []
    for combo in itertools.product(*options):
        mu = ReconciliationMap(combo)
        if not validate_reconciliation(g, s, mu):
            found.append(mu)
    return found


class _Classes:
    """Quotient of gene and species vertices by the C1 equalities."""

    def __init__(self, g: GeneTree, s: SpeciesTree, mu: Sequence[TreeElement]):
        n_s = len(s.tree)
        self.n_s = n_s
        cls = {}
        next_id = n_s
        for x in range(n_s):
            cls[("S", x)] = x
        for u, event in enumerate(g.events):
            m = mu[u]
            if event.on_edge:
                if not isinstance(m, Edge):
                    raise InputError(f"{g.tree.name(u)} must map to an edge")
                cls[("T", u)] = next_id
                next_id += 1
            else:
                if not isinstance(m, Vertex):
                    raise InputError(f"{g.tree.name(u)} must map to a vertex")
                cls[("T", u)] = m.v
        self.of = cls
        self.count = next_id

        # (a, b): class a must be strictly earlier than class b
        before = set()
        for tree, tag in ((g.tree, "T"), (s.tree, "S")):
            for y in range(len(tree)):
                for x in naive_ancestors(tree, y)[1:]:
                    before.add((cls[(tag, x)], cls[(tag, y)]))
        for u, event in enumerate(g.events):
            if event.on_edge:
                m = mu[u]
                before.add((cls[("S", m.parent)], cls[("T", u)]))
                before.add((cls[("T", u)], cls[("S", m.child)]))
        self.before = before


def _order_is_time_consistent(classes: _Classes, order: Sequence[int]) -> bool:
    pos = {c: i for i, c in enumerate(order)}
    return all(pos[a] < pos[b] for a, b in classes.before)


def _permutation_search(classes: _Classes) -> bool:
    """Depth-first search over total orders of the classes, pruning prefixes that
    already break a precedence; every complete order is re-checked literally."""
    n = classes.count
    if any(a == b for a, b in classes.before):
        return False
    must_follow = [set() for _ in range(n)]
    for a, b in classes.before:
        must_follow[a].add(b)
    placed: list[int] = []
    used = [False] * n

    def extend() -> bool:
        if len(placed) == n:
            return _order_is_time_consistent(classes, placed)
        for c in range(n):
            if used[c]:
                continue
            # c may not come after anything that must follow it
            if any(used[d] for d in must_follow[c]):
                continue
            used[c] = True
            placed.append(c)
            if extend():
                return True
            placed.pop()
            used[c] = False
        return False

    return extend()


def _closure_search(classes: _Classes) -> bool:
    n = classes.count
    reach = [0] * n
    for a, b in classes.before:
        reach[a] |= 1 << b
    for k in range(n):
        bit = 1 << k
        row = reach[k]
        for i in range(n):
            if reach[i] & bit:
                reach[i] |= row
    return not any(reach[i] >> i & 1 for i in range(n))


def oracle_time_consistent(
    g: GeneTree, s: SpeciesTree, mu: Sequence[TreeElement], mode: str = "auto"
) -> bool:
    """Literal check of the time-consistency definition for a fixed map."""
    classes = _Classes(g, s, mu)
    if mode == "auto":
        mode = "permutation" if classes.count <= PERMUTATION_LIMIT else "closure"
    if mode == "permutation":
        if classes.count > PERMUTATION_LIMIT:
            raise SizeCapError(f"{classes.count} classes exceed the permutation limit")
        return _permutation_search(classes)
    if mode == "closure":
        if classes.count > CLOSURE_LIMIT:
            raise SizeCapError(f"{classes.count} classes exceed the closure limit")
        return _closure_search(classes)
    raise ValueError(f"unknown mode {mode!r}")


def class_count(g: GeneTree, s: SpeciesTree) -> int:
    """Number of merged classes; independent of the map."""
    return len(s.tree) + sum(1 for e in g.events if e.on_edge)


def oracle_exists_tc(
    g: GeneTree, s: SpeciesTree, cap: int = DEFAULT_CAP, mode: str = "auto"
) -> bool:
    return any(oracle_time_consistent(g, s, mu, mode) for mu in enumerate_reconciliations(g, s, cap))


def iter_time_consistent(
    g: GeneTree, s: SpeciesTree, cap: int = DEFAULT_CAP, mode: str = "auto"
) -> Iterator[ReconciliationMap]:
    for mu in enumerate_reconciliations(g, s, cap):
        if oracle_time_consistent(g, s, mu, mode):
            yield mu
