"""Structural invariants as functions returning a list of violations.

The hypothesis suite asserts each list is empty; the acceptance run counts
violations over fixed seeded corpora.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import prod

from partsys.core import (
    GroundSet,
    Partition,
    PartitionMultiset,
    Split,
    SplitMultiset,
    is_compatible_system,
    is_hierarchical,
    is_strongly_compatible,
    sigma_of_partition,
    sigma_of_system,
)
from partsys.decide import SimpleGraph
from partsys.formats import (
    parse_family,
    parse_graph,
    parse_partitions,
    parse_splits,
    parse_tree,
    serialize_family,
    serialize_graph,
    serialize_partitions,
    serialize_splits,
    serialize_tree,
)
from partsys.kernel import RealPartitionFamily, RealSplitFamily, integral_family_of, kappa
from partsys.represent import enumerate_systems, is_equidistant
from partsys.tree import (
    WeakTree,
    are_isomorphic,
    components_after_deletion,
    contract,
    decompose,
    find_display_set,
    is_even_tree,
    parity_coloring,
    splits_of_tree,
    tree_from_splits,
)

# -- random values for the format round-trips -----------------------------

# all-digit tokens without a leading zero read back as integers
NAMES = ["a", "b", "c", "x1", "x2", "x10", "taxon", "Q", 7, 12, "03", "é"]


def random_ground(rng: random.Random, lo: int = 2, hi: int = 7) -> GroundSet:
    if rng.random() < 0.5:
        return GroundSet(range(1, rng.randint(lo, hi) + 1))
    return GroundSet(rng.sample(NAMES, rng.randint(lo, min(hi, len(NAMES)))))


def random_splits(rng: random.Random, ground: GroundSet, count: int = 6) -> SplitMultiset:
    counts = {}
    for _ in range(rng.randint(0, count)):
        mask = rng.randrange(1, ground.full)
        counts[Split.from_mask(ground, mask)] = rng.randint(1, 3)
    return SplitMultiset(ground, counts)


def random_partitions(rng: random.Random, ground: GroundSet, count: int = 5) -> PartitionMultiset:
    parts = []
    for _ in range(rng.randint(0, count)):
        while True:
            labels = [rng.randrange(len(ground)) for _ in ground.elements]
            masks = {}
            for i, lab in enumerate(labels):
                masks[lab] = masks.get(lab, 0) | (1 << i)
            if len(masks) >= 2:
                break
        parts.append(Partition.from_masks(ground, masks.values()))
    return PartitionMultiset(ground, parts)


def random_fraction(rng: random.Random, zero: bool = False) -> Fraction:
    lo = 0 if zero else 1
    return Fraction(rng.randint(lo, 12), rng.randint(1, 6))


def random_split_family(rng: random.Random, ground: GroundSet) -> RealSplitFamily:
    values = {}
    for _ in range(rng.randint(0, 6)):
        values[Split.from_mask(ground, rng.randrange(1, ground.full))] = random_fraction(rng)
    return RealSplitFamily(ground, values)


def random_partition_family(rng: random.Random, ground: GroundSet, count: int = 4) -> RealPartitionFamily:
    values = {}
    for p in random_partitions(rng, ground, count):
        values[p] = random_fraction(rng)
    return RealPartitionFamily(ground, values)


def random_simple_graph(rng: random.Random) -> SimpleGraph:
    vertices = random_ground(rng, 2, 8).elements
    pairs = list(combinations(vertices, 2))
    return SimpleGraph(vertices, rng.sample(pairs, rng.randint(0, len(pairs))))


def random_weak_tree(rng: random.Random, max_vertices: int = 12) -> WeakTree:
    """Any shape: random attachment, leaves labelled, some interior vertices labelled."""
    n = rng.randint(2, max_vertices)
    edges = [(rng.randrange(v), v) for v in range(1, n)]
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    labels: list[list[int]] = [[] for _ in range(n)]
    taxon = 1
    for v in range(n):
        if degree[v] == 1 or rng.random() < 0.3:
            for _ in range(rng.choices([1, 2], weights=[4, 1])[0]):
                labels[v].append(taxon)
                taxon += 1
    if taxon < 3:
        labels[0].append(taxon)
        taxon += 1
    return WeakTree(GroundSet(range(1, taxon)), edges, labels)


# -- core ------------------------------------------------------------------


def core_laws(system: PartitionMultiset, other: PartitionMultiset) -> list[str]:
    out = []
    X = system.ground
    for p in system.support():
        for m in p.masks:
            if Split.from_mask(X, m) != Split.from_mask(X, X.full ^ m):
                out.append(f"split of {X.format(m)} depends on the side given")
        if sigma_of_partition(p).size != len(p.masks):
            out.append(f"shadow of {p} has the wrong size")
        if sigma_of_system(system - PartitionMultiset(X, [p])) != sigma_of_system(system) - sigma_of_partition(p):
            out.append(f"removing {p} does not subtract its shadow")
    if sigma_of_system(system + other) != sigma_of_system(system) + sigma_of_system(other):
        out.append("shadow of a union is not the union of shadows")
    shadow = sigma_of_system(system)
    if is_strongly_compatible(system) and not is_compatible_system(shadow):
        out.append(f"strongly compatible {system} has an incompatible shadow")
    if is_hierarchical(system) and not is_compatible_system(shadow):
        out.append(f"hierarchical {system} has an incompatible shadow")
    return out


# -- formats ---------------------------------------------------------------


def format_round_trips(rng: random.Random) -> list[str]:
    out = []
    X = random_ground(rng)
    splits = random_splits(rng, X)
    if parse_splits(serialize_splits(splits)) != splits:
        out.append(f"split round-trip failed for {splits}")
    system = random_partitions(rng, X)
    if parse_partitions(serialize_partitions(system)) != system:
        out.append(f"partition round-trip failed for {system}")
    family = random_split_family(rng, X)
    if parse_family(serialize_family(family)) != family:
        out.append(f"family round-trip failed for {family}")
    graph = random_simple_graph(rng)
    back = parse_graph(serialize_graph(graph))
    if (back.vertices, back.edges) != (graph.vertices, graph.edges):
        out.append("graph round-trip failed")
    return out


def tree_round_trip(splits: SplitMultiset) -> list[str]:
    out = []
    tree = tree_from_splits(splits)
    if splits_of_tree(tree) != splits:
        out.append(f"splits of the tree of {splits} differ")
    if tree.num_edges != splits.size:
        out.append("edge count differs from the number of splits")
    text = serialize_tree(tree)
    back = parse_tree(text)
    if splits_of_tree(back) != splits or not are_isomorphic(back, tree):
        out.append(f"Newick round-trip failed for {text!r}")
    if serialize_tree(back) != text:
        out.append(f"Newick text is not stable for {text!r}")
    # a relabelled copy must be recognised as the same tree
    perm = list(range(tree.n))
    random.Random(splits.size).shuffle(perm)
    moved = WeakTree._from_masks(
        tree.ground, tree.n, [(perm[u], perm[v]) for u, v in tree.edges],
        [tree.labels[perm.index(i)] for i in range(tree.n)],
    )
    if not are_isomorphic(moved, tree) or splits_of_tree(moved) != splits:
        out.append("renumbered tree is not isomorphic to the original")
    return out


# -- trees -----------------------------------------------------------------


def parity_soundness(tree: WeakTree) -> list[str]:
    if not is_even_tree(tree):
        return []
    col = parity_coloring(tree)
    out = []
    for u, v in tree.edges:
        if (u in col.even) == (v in col.even):
            out.append(f"edge {u}-{v} joins one class")
    for v in tree.labelled_vertices():
        if v not in col.even:
            out.append(f"labelled vertex {v} is odd")
    return out


def _path_counts(tree: WeakTree, chosen: set) -> set:
    labelled = tree.labelled_vertices()
    return {
        len(chosen.intersection(tree.path_edges(u, v)))
        for i, u in enumerate(labelled)
        for v in labelled[i + 1:]
    }


def display_law(tree: WeakTree, partitions) -> list[str]:
    """Every partition must be displayed, with paths meeting it in 0 or 2 edges,
    and contracting it must keep an even tree even."""
    out = []
    for p in partitions:
        ds = find_display_set(tree, p)
        if ds is None:
            out.append(f"{p} is not displayed")
            continue
        chosen = set(ds.edges)
        if len(chosen) != len(p.masks):
            out.append(f"display set of {p} repeats an edge")
        if not _path_counts(tree, chosen) <= {0, 2}:
            out.append(f"a path meets the display set of {p} in neither 0 nor 2 edges")
        if is_even_tree(tree):
            small = contract(tree, chosen)
            if small.n > 1 and not is_even_tree(small):
                out.append(f"contracting the display set of {p} breaks evenness")
    return out


def _displays(tree: WeakTree, edges, parts) -> bool:
    remaining = {tree.ground.mask(a) for a in parts}
    if len(edges) != len(remaining):
        return False
    for e in edges:
        u, v = tree.edges[e]
        sides = {tree.side_mask(e, u), tree.side_mask(e, v)} & remaining
        if not sides:
            return False
        remaining -= {min(sides)}
    return not remaining


def converse_display(tree: WeakTree, rng: random.Random, samples: int = 256) -> list[str]:
    """Edge sets meeting every labelled path in 0 or 2 edges display the
    partition read off the components left after deleting them."""
    if not is_even_tree(tree):
        return []
    m = tree.num_edges
    if 2 ** m <= samples:
        subsets = (frozenset(e for e in range(m) if bits >> e & 1) for bits in range(1, 2 ** m))
    else:
        subsets = (frozenset(e for e in range(m) if rng.random() < 0.3) for _ in range(samples))
    out = []
    for chosen in subsets:
        if not chosen or not _path_counts(tree, set(chosen)) <= {0, 2}:
            continue
        parts = [labels for _, labels in components_after_deletion(tree, chosen) if labels]
        if len(parts) < 2 or not _displays(tree, chosen, parts):
            out.append(f"edges {sorted(chosen)} do not display {parts}")
    return out


def decomposition(tree: WeakTree, oracle: bool = True) -> list[str]:
    out = []
    whole = splits_of_tree(tree)
    for v in tree.interior():
        if not tree.is_labelled(v):
            continue
        children = decompose(tree, v)
        shadows = [splits_of_tree(c) for c in children]
        if sum(shadows, SplitMultiset(tree.ground)) != whole:
            out.append(f"decomposing at {v} loses splits")
        for a, b in combinations(shadows, 2):
            if a.support() & b.support():
                out.append(f"children at {v} share a split")
        if oracle:
            count = len(enumerate_systems(whole).systems)
            parts = prod(len(enumerate_systems(s).systems) for s in shadows)
            if count != parts:
                out.append(f"|P(T)|={count} but the children give {parts} at {v}")
    return out


def two_colour_count(tree: WeakTree) -> list[str]:
    """|V_odd| >= |V_int even| + 1 for both colourings of a tree with two leaves or more."""
    if len(tree.leaves()) < 2:
        return []
    dist = tree.distances_from(0)
    classes = [{v for v in range(tree.n) if dist[v] % 2 == c} for c in (0, 1)]
    interior = set(tree.interior())
    out = []
    for even, odd in (classes, classes[::-1]):
        if len(odd) < len(even & interior) + 1:
            out.append(f"colouring with {len(odd)} odd and {len(even & interior)} even interior vertices")
    return out


# -- representations ---------------------------------------------------------


def hierarchical_depth(splits: SplitMultiset) -> list[str]:
    """Each hierarchical member sits on an equidistant tree at depth |Π|."""
    tree = tree_from_splits(splits)
    out = []
    for member in enumerate_systems(splits).systems:
        if not is_hierarchical(member):
            continue
        centre = is_equidistant(tree)
        if centre is None:
            out.append(f"hierarchical {member} on a tree that is not equidistant")
            continue
        dist = tree.distances_from(centre)
        if {dist[u] for u in tree.labelled_vertices()} != {member.size}:
            out.append(f"hierarchical {member} is not at depth {member.size}")
    return out


# -- kernel ------------------------------------------------------------------


def kappa_linearity(rng: random.Random) -> list[str]:
    X = random_ground(rng, 2, 5)
    mu1, mu2 = random_partition_family(rng, X), random_partition_family(rng, X)
    a, b = random_fraction(rng, zero=True), random_fraction(rng, zero=True)
    if kappa(mu1.scale(a) + mu2.scale(b)) != kappa(mu1).scale(a) + kappa(mu2).scale(b):
        return [f"kappa is not linear at {mu1}, {mu2}, {a}, {b}"]
    return []


def kappa_bridge(system: PartitionMultiset) -> list[str]:
    if kappa(integral_family_of(system)) != RealSplitFamily.from_multiset(sigma_of_system(system)):
        return [f"kappa of {system} differs from its shadow"]
    return []
