import random

import pytest

from scenarios import gid, load, sid
from strategies import labeled_instances, simulated_instances
from tcrecon.errors import InputError, PreconditionError
from tcrecon.oracle import naive_sigma_hat
from tcrecon.scenario import (
    Event,
    GeneTree,
    augment_species_tree,
    check_observability,
    remove_transfer_edges,
    sigma_hat,
)
from tcrecon.trees import RootedTree


def names(g, vertices):
    return {g.tree.name(v) for v in vertices}


def test_augment_single_species():
    s = augment_species_tree(RootedTree([None], {0: "A"}))
    assert len(s.tree) == 2
    assert s.tree.parent[s.core_root] == s.planted_root
    assert s.name(s.planted_root) == "_root"


def test_augment_cherry():
    raw = RootedTree([None, 0, 0], {0: "r", 1: "A", 2: "B"})
    s = augment_species_tree(raw)
    assert s.tree.children[s.planted_root] == (0,)
    assert s.tree.children[0] == (1, 2)
    assert s.tree.index.leaf_set(s.planted_root) == raw.index.leaf_set(raw.root)
    assert s.vertex("A") == 1 and s.name(0) == "r"


def test_augment_rejects_non_phylogenetic():
    with pytest.raises(PreconditionError):
        augment_species_tree(RootedTree([None, 0, 0, 2], {1: "A", 3: "B"}))


def test_augment_requires_leaf_names():
    with pytest.raises(InputError):
        augment_species_tree(RootedTree([None, 0, 0], {1: "A"}))


def test_forest_without_transfers_is_one_component():
    g, _ = load("F1")
    f = remove_transfer_edges(g)
    assert f.component_roots == (g.tree.root,)


def test_forest_components_f2_f4():
    g, _ = load("F2")
    assert names(g, remove_transfer_edges(g).component_roots) == {"u", "b"}
    g, _ = load("F4")
    assert names(g, remove_transfer_edges(g).component_roots) == {"u_c", "s1", "s2", "s1''"}


def test_sigma_hat_examples():
    g, _ = load("F2")
    f = remove_transfer_edges(g)
    assert sigma_hat(g, f, gid(g, "u")) == {"A"}
    assert sigma_hat(g, f, gid(g, "b")) == {"B"}
    g, _ = load("F4")
    assert sigma_hat(g, remove_transfer_edges(g), gid(g, "s1")) == {"A", "B"}


@pytest.mark.parametrize("name", ["F1", "F2", "F3", "F4"])
def test_fixtures_are_observable(name):
    g, s = load(name)
    assert check_observability(g, s) == []


def test_sigma2_violation_on_overlapping_transfer():
    # F3 variant whose transfer recipient shares species A with the donor side
    g, s = load("F3")
    sigma = dict(g.sigma)
    sigma[gid(g, "c")] = "A"
    bad = check_observability(GeneTree(g.tree, g.events, g.transfer, sigma), s)
    assert [v.condition for v in bad] == ["Sigma2"]
    assert bad[0].vertices == (gid(g, "u"), gid(g, "w"))


def small_species():
    return augment_species_tree(RootedTree([None, 0, 0], {0: "r", 1: "A", 2: "B"}))


def test_o1_and_o2_and_sigma1():
    s = small_species()
    # root duplication with one child: O1
    t = RootedTree([None, 0], {1: "a"})
    g = GeneTree(t, [Event.DUPLICATION, Event.LEAF], [False, False], {1: "A"})
    assert [v.condition for v in check_observability(g, s)] == ["O1"]
    # transfer vertex without a transfer edge: O2
    t = RootedTree([None, 0, 0], {1: "a", 2: "b"})
    g = GeneTree(t, [Event.TRANSFER, Event.LEAF, Event.LEAF], [False] * 3, {1: "A", 2: "B"})
    assert [v.condition for v in check_observability(g, s)] == ["O2"]
    # speciation whose children share a species: Sigma1
    g = GeneTree(t, [Event.SPECIATION, Event.LEAF, Event.LEAF], [False] * 3, {1: "A", 2: "A"})
    assert [v.condition for v in check_observability(g, s)] == ["Sigma1"]


def test_unknown_species_names_the_leaf():
    s = small_species()
    t = RootedTree([None, 0, 0], {1: "a", 2: "b"})
    g = GeneTree(t, [Event.SPECIATION, Event.LEAF, Event.LEAF], [False] * 3, {1: "A", 2: "Z"})
    with pytest.raises(InputError, match="b"):
        check_observability(g, s)


def test_gene_tree_contracts():
    t = RootedTree([None, 0, 0], {1: "a", 2: "b"})
    with pytest.raises(InputError):
        GeneTree(t, [Event.LEAF, Event.LEAF, Event.LEAF], [False] * 3, {1: "A", 2: "B"})
    with pytest.raises(InputError, match="non-transfer"):
        GeneTree(t, [Event.SPECIATION, Event.LEAF, Event.LEAF], [False, True, False], {1: "A", 2: "B"})
    with pytest.raises(InputError, match="sigma"):
        GeneTree(t, [Event.SPECIATION, Event.LEAF, Event.LEAF], [False] * 3, {1: "A"})


def instances():
    return labeled_instances(11, 60, binary=False) + simulated_instances(3, 30)


def test_component_leaf_sets_partition_leaves():
    for g, _ in instances():
        f = remove_transfer_edges(g)
        seen = []
        for root in f.component_roots:
            stack = [root]
            while stack:
                x = stack.pop()
                if g.tree.is_leaf(x):
                    seen.append(x)
                stack.extend(c for c in g.tree.children[x] if not g.transfer[c])
        assert sorted(seen) == sorted(g.tree.leaves)
        # every component reaches at least one leaf
        assert all(
            any(f.component_id[x] == f.component_id[r] for x in g.tree.leaves) for r in f.component_roots
        )


def test_sigma_hat_monotone_and_matches_scan():
    for g, _ in instances():
        f = remove_transfer_edges(g)
        for v in range(len(g)):
            hat = sigma_hat(g, f, v)
            assert hat == naive_sigma_hat(g, v)
            p = g.tree.parent[v]
            if p is not None and not g.transfer[v]:
                assert hat <= sigma_hat(g, f, p)


def relabel(g, rng):
    """Same gene tree with shuffled vertex ids."""
    n = len(g)
    perm = list(range(n))
    rng.shuffle(perm)
    parents = [None] * n
    labels = {}
    events = [None] * n
    transfer = [False] * n
    for v in range(n):
        p = g.tree.parent[v]
        parents[perm[v]] = None if p is None else perm[p]
        events[perm[v]] = g.events[v]
        transfer[perm[v]] = g.transfer[v]
        labels[perm[v]] = g.tree.name(v)
    sigma = {perm[v]: x for v, x in g.sigma.items()}
    return GeneTree(RootedTree(parents, labels), events, transfer, sigma), perm


def test_checker_independent_of_vertex_order():
    rng = random.Random(1)
    for g, s in labeled_instances(5, 40, binary=False):
        # perturb to get some violations
        sigma = {v: rng.choice(list(s.by_name)) if rng.random() < 0.3 else x for v, x in g.sigma.items()}
        sigma = {v: x for v, x in sigma.items() if x in {s.tree.name(y) for y in s.tree.leaves}}
        if len(sigma) != len(g.sigma):
            continue
        g = GeneTree(g.tree, g.events, g.transfer, sigma)
        h, perm = relabel(g, rng)
        a = sorted((v.condition, tuple(g.tree.name(x) for x in v.vertices)) for v in check_observability(g, s))
        b = sorted((v.condition, tuple(h.tree.name(x) for x in v.vertices)) for v in check_observability(h, s))
        assert a == b


def test_species_lookup():
    _, s = load("F4")
    assert s.name(sid(s, "p1")) == "p1"
    with pytest.raises(InputError):
        s.vertex("nope")
