"""Random instances for property tests.

``random_labeled`` draws arbitrary event-labeled gene trees (random shape,
labels, transfer flags and leaf species) and keeps only observable ones. It
reaches far more failing cases than the evolutionary simulator.
"""
import functools
import random

from tcrecon.scenario import Event, GeneTree, augment_species_tree, check_observability
from tcrecon.simulate import ScenarioParams, random_scenario
from tcrecon.trees import RootedTree


def random_tree(rng, n_leaves, binary=True):
    """Parent array of a random rooted tree with ``n_leaves`` leaves; no unary vertices."""
    parents = [None]
    tips = [0]
    while len(tips) < n_leaves:
        k = rng.randrange(len(tips))
        x = tips.pop(k)
        arity = 2 if binary else rng.choice((2, 2, 3))
        arity = min(arity, n_leaves - len(tips))
        arity = max(arity, 2)
        for _ in range(arity):
            parents.append(x)
            tips.append(len(parents) - 1)
    return parents


def random_species(rng, n_species, binary=True):
    parents = random_tree(rng, n_species, binary)
    n = len(parents)
    has_child = {p for p in parents if p is not None}
    labels = {}
    k = 0
    for v in range(n):
        if v in has_child:
            labels[v] = f"n{v}"
        else:
            labels[v] = f"S{k}"
            k += 1
    return augment_species_tree(RootedTree(parents, labels))


def random_labeled(rng, n_species, n_leaves, binary=True, weights=(1, 1, 1), max_tries=200):
    s = random_species(rng, n_species, binary)
    species_leaves = [s.tree.name(x) for x in s.tree.leaves]
    for _ in range(max_tries):
        parents = random_tree(rng, n_leaves, binary)
        tree = RootedTree(parents, {})
        n = len(parents)
        events = []
        for v in range(n):
            if tree.is_leaf(v):
                events.append(Event.LEAF)
            else:
                events.append(rng.choices((Event.SPECIATION, Event.DUPLICATION, Event.TRANSFER), weights)[0])
        transfer = [False] * n
        for v in range(n):
            if events[v] is Event.TRANSFER:
                kids = list(tree.children[v])
                rng.shuffle(kids)
                m = rng.randint(1, len(kids) - 1)
                for c in kids[:m]:
                    transfer[c] = True
        labels = {}
        k = 0
        for v in range(n):
            labels[v] = f"g{k}" if tree.is_leaf(v) else f"u{v}"
            k += tree.is_leaf(v)
        sigma = {v: rng.choice(species_leaves) for v in tree.leaves}
        g = GeneTree(RootedTree(parents, labels), events, transfer, sigma)
        if not check_observability(g, s):
            return g, s
    return None


def labeled_instances(seed, count, n_species=(2, 4), n_leaves=(2, 6), binary=True, weights=(1, 1, 1)):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        inst = random_labeled(rng, rng.randint(*n_species), rng.randint(*n_leaves), binary, weights)
        if inst is not None:
            out.append(inst)
    return out


def simulated_instances(seed, count, **kw):
    base = dict(n_species=4, n_genes=10, p_dup=0.3, p_hgt=1.0, p_loss=0.2)
    base.update(kw)
    return [random_scenario(ScenarioParams(seed=seed * 100003 + i, **base)) for i in range(count)]


SMALL_CONFIGS = (
    dict(n_species=(2, 3), n_leaves=(3, 7), binary=False),
    dict(n_species=(3, 3), n_leaves=(4, 8), binary=True),
    dict(n_species=(2, 4), n_leaves=(3, 8), binary=False),
)
SMALL_WEIGHTS = ((1, 1, 1), (1, 1, 3), (0, 1, 3), (1, 0, 3))


@functools.lru_cache(maxsize=None)
def small_map_pool(seed, count, min_negative, classes=9, max_draws=200_000):
    """(g, s, mu, verdict) with at most ``classes`` merged classes.

    Keeps drawing mixed shapes until ``count`` pairs are collected and at least
    ``min_negative`` of them are not time-consistent according to the oracle;
    positives beyond the quota are skipped so the pool stays balanced.
    """
    from tcrecon.oracle import class_count, enumerate_reconciliations, oracle_time_consistent

    rng = random.Random(seed)
    pos, neg = [], []
    for _ in range(max_draws):
        cfg = rng.choice(SMALL_CONFIGS)
        inst = random_labeled(
            rng, rng.randint(*cfg["n_species"]), rng.randint(*cfg["n_leaves"]), cfg["binary"],
            rng.choice(SMALL_WEIGHTS),
        )
        if inst is None or class_count(*inst) > classes:
            continue
        g, s = inst
        for mu in enumerate_reconciliations(g, s):
            # cheap screen first; kept pairs carry the permutation verdict
            if oracle_time_consistent(g, s, mu, "closure") and len(pos) >= count - min_negative:
                continue
            verdict = oracle_time_consistent(g, s, mu, "permutation")
            if verdict and len(pos) < count - min_negative:
                pos.append((g, s, mu, True))
            elif not verdict:
                neg.append((g, s, mu, False))
        if len(neg) >= min_negative and len(pos) + len(neg) >= count:
            return tuple(pos + neg)
    raise RuntimeError("pool quota not reached")
