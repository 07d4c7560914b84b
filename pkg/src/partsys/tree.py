"""Weak X-trees, rooted weak X-trees and the operations on them.

Vertices are ``0..n-1``; edges are indexed by their position in
``WeakTree.edges``. Vertex labels are bitmasks over the ground set.
"""

from __future__ import annotations

from collections import Counter, deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Optional

from .core import (
    GroundSet,
    HierarchyError,
    IncompatibleSplitsError,
    Partition,
    Split,
    SplitMultiset,
    Taxon,
    _first_overlap,
    bits,
    find_incompatible_pair,
)


class NotEvenError(ValueError):
    """Raised when a tree has two labelled vertices at odd distance."""

    def __init__(self, x: Taxon, y: Taxon, distance: int):
        self.witness = (x, y)
        self.distance = distance
        super().__init__(f"taxa {x!r} and {y!r} are at odd distance {distance}")


class WeakTree:
    """A tree together with a labelling of its vertices by subsets of X.

    ``labels`` is either a sequence with one iterable of taxa per vertex or
    a mapping ``vertex -> taxa``; unmentioned vertices are unlabelled.
    """

    __slots__ = ("ground", "n", "edges", "labels", "adj", "_rooted0", "_split_cache")

    def __init__(
        self,
        ground: GroundSet,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[Iterable[Taxon]] | Mapping[int, Iterable[Taxon]],
        n: int | None = None,
    ):
        edges = [tuple(e) for e in edges]
        if isinstance(labels, Mapping):
            keys = list(labels)
            if n is None:
                n = 1 + max([v for e in edges for v in e] + keys + [0])
            masks = [0] * n
            for v, taxa in labels.items():
                masks[v] = ground.mask(taxa)
        else:
            masks = [ground.mask(taxa) for taxa in labels]
            if n is None:
                n = max(len(masks), 1 + max([v for e in edges for v in e] + [0]))
            masks += [0] * (n - len(masks))
        self._init(ground, n, edges, masks, allow_trivial=False)

    @classmethod
    def _from_masks(cls, ground, n, edges, masks, allow_trivial=False) -> "WeakTree":
        obj = cls.__new__(cls)
        obj._init(ground, n, list(edges), list(masks), allow_trivial)
        return obj

    def _init(self, ground, n, edges, masks, allow_trivial):
        if n < 1 or len(masks) != n:
            raise ValueError("label list does not match vertex count")
        if n == 1 and not allow_trivial:
            raise ValueError("a weak X-tree needs at least one edge")
        if len(edges) != n - 1:
            raise ValueError(f"a tree on {n} vertices has {n - 1} edges, got {len(edges)}")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        seen_edges = set()
        norm = []
        for i, (u, v) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge {(u, v)}")
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                raise ValueError(f"duplicate edge {key}")
            seen_edges.add(key)
            norm.append(key)
            adj[u].append((v, i))
            adj[v].append((u, i))
        seen = 0
        for m in masks:
            if m & seen:
                raise ValueError("vertex labels must be disjoint")
            seen |= m
        if seen != ground.full:
            raise ValueError("vertex labels must cover the ground set")
        self.ground = ground
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(norm)
        self.labels: tuple[int, ...] = tuple(masks)
        self.adj = tuple(tuple(sorted(a)) for a in adj)
        self._rooted0 = None
        self._split_cache = None
        if len(self._order_from(0)) != n:
            raise ValueError("edges do not form a connected tree")
        for v in range(n):
            if len(self.adj[v]) == 1 and not masks[v]:
                raise ValueError(f"leaf {v} is unlabelled")

    # -- basic structure -------------------------------------------------

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return [u for u, _ in self.adj[v]]

    def leaves(self) -> list[int]:
        return [v for v in range(self.n) if len(self.adj[v]) == 1]

    def interior(self) -> list[int]:
        return [v for v in range(self.n) if len(self.adj[v]) >= 2]

    def is_labelled(self, v: int) -> bool:
        return bool(self.labels[v])

    def label(self, v: int) -> frozenset:
        return frozenset(self.ground.members(self.labels[v]))

    def vertex_of(self, x: Taxon) -> int:
        bit = 1 << self.ground.index(x)
        return next(v for v, m in enumerate(self.labels) if m & bit)

    def labelled_vertices(self) -> list[int]:
        return [v for v, m in enumerate(self.labels) if m]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def _order_from(self, root: int) -> list[tuple[int, int, int]]:
        """BFS order as (vertex, parent, parent edge); root has parent -1."""
        order = [(root, -1, -1)]
        visited = {root}
        i = 0
        while i < len(order):
            v = order[i][0]
            for u, e in self.adj[v]:
                if u not in visited:
                    visited.add(u)
                    order.append((u, v, e))
            i += 1
        return order

    def rooted_sides(self, root: int = 0) -> list[tuple[int, int, int]]:
        """Per edge: (child vertex, label mask below, vertex count below)."""
        if root == 0 and self._rooted0 is not None:
            return self._rooted0
        order = self._order_from(root)
        sub_mask = list(self.labels)
        sub_count = [1] * self.n
        result: list = [None] * len(self.edges)
        for v, parent, e in reversed(order):
            if parent >= 0:
                sub_mask[parent] |= sub_mask[v]
                sub_count[parent] += sub_count[v]
                result[e] = (v, sub_mask[v], sub_count[v])
        if root == 0:
            self._rooted0 = result
        return result

    def side_mask(self, edge: int, toward: int) -> int:
        """Labels of the component containing ``toward`` after deleting ``edge``."""
        child, mask, _ = self.rooted_sides()[edge]
        return mask if toward == child else self.ground.full ^ mask

    def side_size(self, edge: int, toward: int) -> int:
        child, _, count = self.rooted_sides()[edge]
        return count if toward == child else self.n - count

    def edge_split(self, edge: int) -> Split:
        if self._split_cache is None:
            self._split_cache = [
                Split.from_mask(self.ground, mask) for _, mask, _ in self.rooted_sides()
            ]
        return self._split_cache[edge]

    def distances_from(self, source: int) -> list[int]:
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u, _ in self.adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def path_edges(self, u: int, v: int) -> list[int]:
        parent_edge = {u: (-1, -1)}
        queue = deque([u])
        while queue and v not in parent_edge:
            w = queue.popleft()
            for x, e in self.adj[w]:
                if x not in parent_edge:
                    parent_edge[x] = (w, e)
                    queue.append(x)
        path = []
        while v != u:
            v, e = parent_edge[v]
            path.append(e)
        return path[::-1]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, WeakTree)
            and self.ground == other.ground
            and self.n == other.n
            and self.edges == other.edges
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.labels))

    def __repr__(self) -> str:
        lab = {v: self.ground.format(m) for v, m in enumerate(self.labels) if m}
        return f"WeakTree(n={self.n}, edges={list(self.edges)}, labels={lab})"


@dataclass(frozen=True)
class RootedWeakTree:
    tree: WeakTree
    root: int

    def __post_init__(self):
        if not 0 <= self.root < self.tree.n:
            raise ValueError(f"root {self.root} is not a vertex")
        if self.tree.labels[self.root]:
            raise ValueError("the root must be unlabelled")
        if self.tree.degree(self.root) < 2:
            raise ValueError("the root must have degree at least two")


@dataclass(frozen=True)
class ParityColoring:
    even: frozenset
    odd: frozenset


@dataclass(frozen=True)
class DisplaySet:
    """Edges displaying ``partition``; ``edges[i]`` realizes ``partition.masks[i]``."""

    partition: Partition
    edges: tuple[int, ...]

    def mapping(self) -> dict[frozenset, int]:
        return dict(zip(self.partition.parts, self.edges))


@dataclass(frozen=True)
class WeightedTree:
    """An X-tree with positive integer edge weights; ``edges`` holds (u, v, w)."""

    ground: GroundSet
    labels: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]

    @property
    def n(self) -> int:
        return len(self.labels)


# -- construction ------------------------------------------------------


def _laminar_tree(ground: GroundSet, clusters: Mapping[int, int]):
    """Rooted tree of a laminar multiset of cluster masks.

    Vertex 0 is the root and receives every taxon in no cluster; a cluster
    of multiplicity m hangs below its smallest strict superset as a chain of
    m edges. Returns (n, edges, label masks, node of each cluster).
    """
    order = sorted(clusters, key=lambda c: (-_popcount(c), c))
    node_of: dict[int, int] = {}
    placed: list[int] = []
    edges: list[tuple[int, int]] = []
    n = 1
    for c in order:
        parent = 0
        best = None
        for d in placed:
            if c & ~d == 0 and (best is None or _popcount(d) < _popcount(best)):
                best = d
        if best is not None:
            parent = node_of[best]
        for _ in range(clusters[c]):
            edges.append((parent, n))
            parent = n
            n += 1
        node_of[c] = parent
        placed.append(c)
    masks = [0] * n
    for i in range(len(ground)):
        bit = 1 << i
        best = None
        for c in placed:
            if c & bit and (best is None or _popcount(c) < _popcount(best)):
                best = c
        masks[0 if best is None else node_of[best]] |= bit
    return n, edges, masks, node_of


def _popcount(m: int) -> int:
    return m.bit_count()


def splits_of_tree(tree: WeakTree) -> SplitMultiset:
    counts: dict[Split, int] = {}
    for e in range(tree.num_edges):
        s = tree.edge_split(e)
        counts[s] = counts.get(s, 0) + 1
    return SplitMultiset._raw(tree.ground, counts)


def tree_from_splits(splits: SplitMultiset) -> WeakTree:
    """The unique weak X-tree whose edges display exactly ``splits``."""
    if not splits:
        raise ValueError("cannot build a tree from an empty split system")
    return _tree_from_splits(splits)


def _tree_from_splits(splits: SplitMultiset) -> WeakTree:
    pair = find_incompatible_pair(splits)
    if pair is not None:
        raise IncompatibleSplitsError(*pair)
    ground = splits.ground
    # the sides avoiding min(X) form a laminar family
    clusters = {s.other: m for s, m in splits.items()}
    n, edges, masks, _ = _laminar_tree(ground, clusters)
    return WeakTree._from_masks(ground, n, edges, masks, allow_trivial=True)


def _cluster_counts(ground: GroundSet, clusters) -> dict[int, int]:
    if isinstance(clusters, Mapping):
        pairs = clusters.items()
    else:
        pairs = ((c, 1) for c in clusters)
    counts: dict[int, int] = {}
    for c, m in pairs:
        mask = ground.mask(c)
        if m < 0:
            raise ValueError("negative cluster multiplicity")
        if m:
            counts[mask] = counts.get(mask, 0) + m
    return counts


def rooted_tree_from_hierarchy(ground: GroundSet, clusters) -> RootedWeakTree:
    """The unique rooted weak X-tree with the given multiset of clusters.

    ``clusters`` is a mapping cluster -> multiplicity or an iterable of
    clusters (each an iterable of taxa).
    """
    counts = _cluster_counts(ground, clusters)
    union = 0
    for c in counts:
        if c == 0 or c == ground.full:
            raise ValueError("clusters must be non-empty proper subsets")
        union |= c
    if union != ground.full:
        raise ValueError("the clusters must cover the ground set")
    overlap = _first_overlap(counts)
    if overlap is not None:
        a, b = overlap
        raise HierarchyError(frozenset(ground.members(a)), frozenset(ground.members(b)))
    n, edges, masks, _ = _laminar_tree(ground, counts)
    return RootedWeakTree(WeakTree._from_masks(ground, n, edges, masks), 0)


def clusters_of_rooted(rooted: RootedWeakTree) -> Counter:
    """Multiset of clusters C_e: the taxa whose path to the root crosses e."""
    tree = rooted.tree
    return Counter(
        frozenset(tree.ground.members(mask)) for _, mask, _ in tree.rooted_sides(rooted.root)
    )


def unroot(rooted: RootedWeakTree) -> WeakTree:
    return rooted.tree


# -- weighted trees ----------------------------------------------------


def to_weighted(tree: WeakTree) -> WeightedTree:
    """Suppress unlabelled degree-2 vertices; chain lengths become weights."""
    keep = [v for v in range(tree.n) if tree.labels[v] or tree.degree(v) != 2]
    new_id = {v: i for i, v in enumerate(keep)}
    seen = set()
    out = []
    for a in keep:
        for nxt, first in tree.adj[a]:
            prev, cur, last, w = a, nxt, first, 1
            while cur not in new_id:
                (x, e), = [(x, e) for x, e in tree.adj[cur] if x != prev]
                prev, cur, last, w = cur, x, e, w + 1
            key = frozenset((first, last))
            if key in seen:
                continue
            seen.add(key)
            u, v = new_id[a], new_id[cur]
            out.append((min(u, v), max(u, v), w))
    return WeightedTree(tree.ground, tuple(tree.labels[v] for v in keep), tuple(sorted(out)))


def from_weighted(weighted: WeightedTree) -> WeakTree:
    """Subdivide each edge of weight w into a path of w edges."""
    n = weighted.n
    masks = list(weighted.labels)
    edges = []
    for u, v, w in weighted.edges:
        if not isinstance(w, int) or w < 1:
            raise ValueError(f"edge weights must be positive integers, got {w!r}")
        prev = u
        for _ in range(w - 1):
            masks.append(0)
            edges.append((prev, n))
            prev = n
            n += 1
        edges.append((prev, v))
    return WeakTree._from_masks(weighted.ground, n, edges, masks)


# -- parity ------------------------------------------------------------


def parity_coloring(tree: WeakTree) -> ParityColoring:
    """Even/odd classes of an even X-tree; raises NotEvenError otherwise."""
    ground = tree.ground
    source = tree.vertex_of(ground.elements[0])
    dist = tree.distances_from(source)
    for i, x in enumerate(ground.elements):
        d = dist[tree.vertex_of(x)]
        if d % 2:
            raise NotEvenError(ground.elements[0], x, d)
    even = frozenset(v for v in range(tree.n) if dist[v] % 2 == 0)
    return ParityColoring(even, frozenset(range(tree.n)) - even)


def is_even_tree(tree: WeakTree) -> bool:
    try:
        parity_coloring(tree)
    except NotEvenError:
        return False
    return True


def odd_pair(tree: WeakTree) -> Optional[tuple[Taxon, Taxon]]:
    try:
        parity_coloring(tree)
    except NotEvenError as err:
        return err.witness
    return None


# -- partitions displayed by vertices and edge sets -------------------


def vertex_partition(tree: WeakTree, v: int) -> Partition:
    """π(v): label sets of the components of T minus the unlabelled vertex v."""
    if tree.labels[v]:
        raise ValueError(f"vertex {v} is labelled")
    return Partition.from_masks(tree.ground, [tree.side_mask(e, u) for u, e in tree.adj[v]])


def _edges_by_split(tree: WeakTree) -> dict[Split, list[int]]:
    index: dict[Split, list[int]] = {}
    for e in range(tree.num_edges):
        index.setdefault(tree.edge_split(e), []).append(e)
    return index


def _side_vertex(tree: WeakTree, edge: int, part: int) -> int:
    """The endpoint of ``edge`` whose side carries exactly the labels ``part``."""
    u, v = tree.edges[edge]
    return u if tree.side_mask(edge, u) == part else v


def _closest(tree: WeakTree, candidates: list[int], part: int) -> int:
    # fewest vertices on the part's side means nearest the part's labels
    return min(
        candidates,
        key=lambda e: (tree.side_size(e, _side_vertex(tree, e, part)), e),
    )


def find_display_set(tree: WeakTree, partition: Partition) -> Optional[DisplaySet]:
    """Edges of ``tree`` in bijection with the parts of ``partition``, or None."""
    tree.ground.check_same(partition.ground)
    index = _edges_by_split(tree)
    masks = partition.masks
    if len(masks) == 2:
        cand = index.get(partition.to_split(), [])
        if len(cand) < 2:
            return None
        ea = _closest(tree, cand, masks[0])
        eb = _closest(tree, cand, masks[1])
        return DisplaySet(partition, (ea, eb))
    chosen = []
    for m in masks:
        cand = index.get(Split.from_mask(tree.ground, m))
        if not cand:
            return None
        chosen.append(_closest(tree, cand, m))
    return DisplaySet(partition, tuple(chosen))


def _check_edges(tree: WeakTree, edges: Iterable[int]) -> set[int]:
    out = set()
    for e in edges:
        if not isinstance(e, int) or not 0 <= e < tree.num_edges:
            raise ValueError(f"unknown edge {e!r}")
        out.add(e)
    return out


def contract(tree: WeakTree, edges: Iterable[int]) -> WeakTree:
    """T/F: contract every edge of F, merging labels; independent of order.

    Contracting every edge yields the single-vertex tree labelled X.
    """
    chosen = _check_edges(tree, edges)
    parent = list(range(tree.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in chosen:
        u, v = tree.edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    roots = sorted({find(v) for v in range(tree.n)})
    new_id = {r: i for i, r in enumerate(roots)}
    masks = [0] * len(roots)
    for v in range(tree.n):
        masks[new_id[find(v)]] |= tree.labels[v]
    new_edges = [
        (new_id[find(u)], new_id[find(v)])
        for e, (u, v) in enumerate(tree.edges)
        if e not in chosen
    ]
    return WeakTree._from_masks(tree.ground, len(roots), new_edges, masks, allow_trivial=True)


def components_after_deletion(tree: WeakTree, edges: Iterable[int]) -> list[tuple[frozenset, frozenset]]:
    """(vertex set, label set) of each component of T minus the edges F."""
    removed = _check_edges(tree, edges)
    comp = [-1] * tree.n
    out = []
    for start in range(tree.n):
        if comp[start] >= 0:
            continue
        comp[start] = len(out)
        stack, verts, mask = [start], [], 0
        while stack:
            v = stack.pop()
            verts.append(v)
            mask |= tree.labels[v]
            for u, e in tree.adj[v]:
                if e not in removed and comp[u] < 0:
                    comp[u] = comp[start]
                    stack.append(u)
        out.append((frozenset(verts), frozenset(tree.ground.members(mask))))
    return out


def decompose(tree: WeakTree, v: int) -> list[WeakTree]:
    """D(T, v): one weak X-tree per edge class at the labelled interior vertex v.

    Each child keeps the full ground set; the copy of v is relabelled with
    B_i, the side of the incident edge e_i containing v's own labels.
    """
    if not tree.labels[v]:
        raise ValueError(f"vertex {v} is unlabelled")
    if tree.degree(v) < 2:
        raise ValueError(f"vertex {v} is a leaf")
    full = tree.ground.full
    children = []
    for start, first in tree.adj[v]:
        verts = [start]
        seen = {v, start}
        comp_edges = [first]
        i = 0
        while i < len(verts):
            w = verts[i]
            for x, e in tree.adj[w]:
                if x not in seen:
                    seen.add(x)
                    verts.append(x)
                    comp_edges.append(e)
            i += 1
        verts.sort()
        new_id = {v: 0}
        new_id.update((w, i + 1) for i, w in enumerate(verts))
        masks = [0] * (len(verts) + 1)
        for w in verts:
            masks[new_id[w]] = tree.labels[w]
        masks[0] = full ^ tree.side_mask(first, start)
        new_edges = [(new_id[a], new_id[b]) for a, b in (tree.edges[e] for e in sorted(comp_edges))]
        children.append(WeakTree._from_masks(tree.ground, len(masks), new_edges, masks))
    return children


def diameter(tree: WeakTree) -> int:
    """Longest leaf-to-leaf path, in edges."""
    if tree.n < 2:
        raise ValueError("diameter needs at least two vertices")
    d0 = tree.distances_from(0)
    far = max(range(tree.n), key=lambda v: d0[v])
    return max(tree.distances_from(far))


# -- isomorphism -------------------------------------------------------


def _centers(tree: WeakTree) -> list[int]:
    degree = [tree.degree(v) for v in range(tree.n)]
    layer = [v for v in range(tree.n) if degree[v] <= 1]
    remaining = tree.n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for u, _ in tree.adj[v]:
                degree[u] -= 1
                if degree[u] == 1:
                    nxt.append(u)
        layer = nxt
    return sorted(layer)


def _rooted_code(tree: WeakTree, root: int, avoid: int = -1) -> tuple:
    order = [(root, avoid)]
    i = 0
    while i < len(order):
        v, p = order[i]
        order.extend((u, v) for u, _ in tree.adj[v] if u != p)
        i += 1
    codes: dict[int, tuple] = {}
    for v, p in reversed(order):
        kids = sorted(codes[u] for u, _ in tree.adj[v] if u != p)
        codes[v] = (tuple(bits(tree.labels[v])), tuple(kids))
    return codes[root]


def canonical_form(tree: WeakTree) -> tuple:
    """A code equal for two trees exactly when they are label-isomorphic."""
    if tree.n == 1:
        return ("V", _rooted_code(tree, 0))
    centers = _centers(tree)
    if len(centers) == 1:
        return ("V", _rooted_code(tree, centers[0]))
    a, b = centers
    return ("E",) + tuple(sorted((_rooted_code(tree, a, b), _rooted_code(tree, b, a))))


def are_isomorphic(first: WeakTree, second: WeakTree) -> bool:
    first.ground.check_same(second.ground)
    if first.n != second.n:
        return False
    return canonical_form(first) == canonical_form(second)
