"""Rooted trees, the ancestor order on vertices and edges, and LCA queries.

Vertices are dense integers ``0..n-1`` in input order. A tree is immutable
once built; its :class:`AncestorIndex` is computed lazily and cached.
"""
from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import InputError, PreconditionError


@dataclass(frozen=True, slots=True)
class Vertex:
    v: int

    @property
    def bottom(self) -> int:
        return self.v


@dataclass(frozen=True, slots=True)
class Edge:
    """The tree edge ``(parent, child)``."""

    parent: int
    child: int

    @property
    def bottom(self) -> int:
        return self.child


TreeElement = Union[Vertex, Edge]


class Relation(enum.Enum):
    """How a first element relates to a second one."""

    ANCESTOR = "ancestor"
    DESCENDANT = "descendant"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class RootedTree:
    """A rooted tree given by its parent array.

    ``parents[v]`` is the parent of ``v`` or ``None`` for the root.
    ``labels`` optionally names vertices; names must be pairwise distinct.
    """

    def __init__(self, parents: Sequence[Optional[int]], labels: Optional[Mapping[int, str]] = None):
        n = len(parents)
        if n == 0:
            raise InputError("tree has no vertices")
        children: list[list[int]] = [[] for _ in range(n)]
        roots = []
        for v, p in enumerate(parents):
            if p is None:
                roots.append(v)
                continue
            if not isinstance(p, int) or not 0 <= p < n:
                raise InputError(f"vertex {v}: parent {p!r} is not a vertex id")
            if p == v:
                raise InputError(f"vertex {v} is its own parent")
            children[p].append(v)
        if len(roots) != 1:
            raise InputError(f"expected exactly one root, found {len(roots)}: {roots[:5]}")
        root = roots[0]

        seen = 0
        stack = [root]
        while stack:
            v = stack.pop()
            seen += 1
            stack.extend(children[v])
        if seen != n:
            reached = set()
            stack = [root]
            while stack:
                v = stack.pop()
                reached.add(v)
                stack.extend(children[v])
            bad = min(v for v in range(n) if v not in reached)
            raise InputError(f"vertex {bad} is not reachable from root {root} (cycle)")

        labels = dict(labels or {})
        for v in labels:
            if not 0 <= v < n:
                raise InputError(f"label on unknown vertex {v}")
        names = list(labels.values())
        if len(set(names)) != len(names):
            dup = sorted({x for x in names if names.count(x) > 1})
            raise InputError(f"duplicate vertex labels: {dup}")

        self.parent: tuple[Optional[int], ...] = tuple(parents)
        self.children: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in children)
        self.root: int = root
        self.labels: Mapping[int, str] = MappingProxyType(labels)

    def __len__(self) -> int:
        return len(self.parent)

    def __repr__(self) -> str:
        return f"RootedTree(n={len(self)}, root={self.root})"

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(len(self)) if not self.children[v])

    def edges(self) -> Iterable[tuple[int, int]]:
        for v, p in enumerate(self.parent):
            if p is not None:
                yield p, v

    def is_phylogenetic(self) -> bool:
        """No internal vertex other than the root has exactly one child."""
        return all(
            len(self.children[v]) != 1 for v in range(len(self)) if v != self.root
        )

    def preorder(self) -> list[int]:
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    def name(self, v: int) -> str:
        return self.labels.get(v, str(v))

    @cached_property
    def index(self) -> "AncestorIndex":
        return AncestorIndex(self)


class AncestorIndex:
    """Entry/exit intervals plus an Euler-tour sparse table.

    ``is_ancestor`` is O(1); pairwise ``lca`` is O(1) after O(n log n)
    preprocessing.
    """

    def __init__(self, tree: RootedTree):
        n = len(tree)
        self.tree = tree
        tin = [0] * n
        tout = [0] * n
        depth = [0] * n
        first = [0] * n
        euler: list[int] = []
        clock = 0
        children = tree.children
        stack = [(tree.root, 0)]
        while stack:
            v, i = stack.pop()
            if i == 0:
                tin[v] = clock
                clock += 1
                first[v] = len(euler)
            euler.append(v)
            kids = children[v]
            if i < len(kids):
                stack.append((v, i + 1))
                c = kids[i]
                depth[c] = depth[v] + 1
                stack.append((c, 0))
            else:
                tout[v] = clock - 1
        self.tin = tin
        self.tout = tout
        self.depth = depth
        self._first = first

        table = [euler]
        span = 1
        while 2 * span <= len(euler):
            prev = table[-1]
            row = [
                a if depth[a] <= depth[b] else b
                for a, b in zip(prev, prev[span:])
            ]
            table.append(row)
            span *= 2
        self._table = table

        by_tin = sorted(tree.leaves, key=tin.__getitem__)
        self._leaves_by_tin = by_tin
        self._leaf_tins = [tin[v] for v in by_tin]

    def is_ancestor(self, u: int, v: int) -> bool:
        """True iff ``u`` is an ancestor of ``v`` (``v ⪯ u``, reflexive)."""
        return self.tin[u] <= self.tin[v] and self.tout[v] <= self.tout[u]

    def lca2(self, u: int, v: int) -> int:
        left = self._first[u]
        right = self._first[v]
        if left > right:
            left, right = right, left
        k = (right - left + 1).bit_length() - 1
        row = self._table[k]
        a = row[left]
        b = row[right - (1 << k) + 1]
        return a if self.depth[a] <= self.depth[b] else b

    def lca(self, vs: Iterable[int]) -> int:
        it = iter(vs)
        try:
            acc = next(it)
        except StopIteration:
            raise PreconditionError("lca of an empty vertex set") from None
        for v in it:
            acc = self.lca2(acc, v)
        return acc

    def leaf_set(self, v: int) -> frozenset[int]:
        lo = bisect.bisect_left(self._leaf_tins, self.tin[v])
        hi = bisect.bisect_right(self._leaf_tins, self.tout[v])
        return frozenset(self._leaves_by_tin[lo:hi])

    def element_leq(self, x: TreeElement, y: TreeElement) -> bool:
        """The extended order ``x ⪯ y`` on vertices and edges."""
        bx, by = x.bottom, y.bottom
        if not self.is_ancestor(by, bx):
            return False
        # an edge lies strictly above its child vertex
        return not (bx == by and isinstance(x, Edge) and isinstance(y, Vertex))

    def compare(self, x: TreeElement, y: TreeElement) -> Relation:
        if x == y:
            return Relation.EQUAL
        if self.element_leq(x, y):
            return Relation.DESCENDANT
        if self.element_leq(y, x):
            return Relation.ANCESTOR
        return Relation.INCOMPARABLE

    def comparable(self, x: TreeElement, y: TreeElement) -> bool:
        return self.element_leq(x, y) or self.element_leq(y, x)

    def check_element(self, x: TreeElement) -> None:
        n = len(self.tree)
        if isinstance(x, Vertex):
            if not 0 <= x.v < n:
                raise PreconditionError(f"{x} is not in the tree")
        elif isinstance(x, Edge):
            if not 0 <= x.child < n or self.tree.parent[x.child] != x.parent:
                raise PreconditionError(f"{x} is not an edge of the tree")
        else:
            raise PreconditionError(f"not a tree element: {x!r}")


def build_ancestor_index(tree: RootedTree) -> AncestorIndex:
    return tree.index


def lca(index: AncestorIndex, vs: Iterable[int]) -> int:
    return index.lca(vs)


def compare_elements(index: AncestorIndex, x: TreeElement, y: TreeElement) -> Relation:
    """Relation of ``x`` to ``y``: ``DESCENDANT`` means ``x ≺ y``."""
    index.check_element(x)
    index.check_element(y)
    return index.compare(x, y)


def leaf_set(index: AncestorIndex, v: int) -> frozenset[int]:
    return index.leaf_set(v)
