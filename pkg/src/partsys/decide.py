"""The general Partition System decision problem and the cubic-graph reduction.

Given an arbitrary split system Σ, deciding whether some partition system
has split-shadow Σ is NP-complete, already for sets of splits built from
cubic graphs: Σ is realizable iff the graph is 3-edge-colourable.
"""

from __future__ import annotations

import random
from collections.abc import Hashable, Iterable
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from . import _search
from .core import (
    GroundSet,
    GuardExceeded,
    Partition,
    PartitionMultiset,
    Split,
    SplitMultiset,
    sigma_of_system,
    taxon_key,
)

MAX_SOLVER_GROUND = 16
MAX_SOLVER_SIZE = 64


class NotCubicError(ValueError):
    pass


class SimpleGraph:
    """A loopless graph without parallel edges."""

    __slots__ = ("vertices", "edges", "_adj")

    def __init__(self, vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]):
        self.vertices = tuple(sorted(set(vertices), key=taxon_key))
        known = set(self.vertices)
        seen: set[frozenset] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at {u!r}")
            if u not in known or v not in known:
                raise ValueError(f"edge {(u, v)!r} uses an unknown vertex")
            e = frozenset((u, v))
            if e in seen:
                raise ValueError(f"parallel edge {(u, v)!r}")
            seen.add(e)
        self.edges = tuple(sorted(seen, key=self._edge_key))
        self._adj = {v: set() for v in self.vertices}
        for e in self.edges:
            u, v = tuple(e)
            self._adj[u].add(v)
            self._adj[v].add(u)

    @staticmethod
    def _edge_key(e: frozenset) -> tuple:
        return tuple(sorted((taxon_key(x) for x in e)))

    def degree(self, v) -> int:
        return len(self._adj[v])

    def is_cubic(self) -> bool:
        return all(len(a) == 3 for a in self._adj.values())

    def __repr__(self) -> str:
        return f"SimpleGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"


def _require_cubic(graph: SimpleGraph) -> None:
    if len(graph.vertices) < 5:
        raise NotCubicError("the reduction needs at least five vertices")
    if not graph.is_cubic():
        bad = next(v for v in graph.vertices if graph.degree(v) != 3)
        raise NotCubicError(f"vertex {bad!r} has degree {graph.degree(bad)}, not 3")


def solve_partition_system(
    splits: SplitMultiset,
    *,
    max_ground: int = MAX_SOLVER_GROUND,
    max_size: int = MAX_SOLVER_SIZE,
    allow_large: bool = False,
) -> Optional[PartitionMultiset]:
    """Some Π with Σ_Π = ``splits``, or None; exact backtracking.

    Branches on the smallest split still uncovered and tries the partitions
    covering it in canonical order; infeasible residuals are memoized. The
    witness returned is the first one in that order.
    """
    ground = splits.ground
    if not allow_large and (len(ground) > max_ground or splits.size > max_size):
        raise GuardExceeded(
            f"instance has |X|={len(ground)} and {splits.size} splits; the solver "
            f"guard is |X|<={max_ground} and <={max_size} splits"
        )
    full = ground.full
    dead: set[frozenset] = set()

    def search(residual: dict[int, int]) -> Optional[list]:
        if not residual:
            return []
        key = _search.residual_key(residual)
        if key in dead:
            return None
        target = _search.smallest(residual)
        for masks in _search.covering_partitions(ground, residual, target):
            rest = _search.subtract(residual, masks, full)
            if rest is None:
                continue
            tail = search(rest)
            if tail is not None:
                return [masks] + tail
        dead.add(key)
        return None

    found = search(_search.residual_of(splits))
    if found is None:
        return None
    result = PartitionMultiset(ground, [Partition.from_masks(ground, ms) for ms in found])
    if sigma_of_system(result) != splits:
        raise AssertionError("solver produced a system with the wrong split-shadow")
    return result


def reduce_cubic_graph(graph: SimpleGraph) -> SplitMultiset:
    """One split {u,v}|(V-{u,v}) per edge, over the ground set V."""
    _require_cubic(graph)
    ground = GroundSet(graph.vertices)
    return SplitMultiset(ground, [Split(ground, e) for e in graph.edges])


def three_edge_colouring(graph: SimpleGraph) -> Optional[tuple[frozenset, ...]]:
    """Direct backtracking search for a proper 3-edge-colouring.

    Returns the three colour classes, or None.
    """
    edges = list(graph.edges)
    colour: dict[frozenset, int] = {}
    used = {v: set() for v in graph.vertices}

    def place(i: int) -> bool:
        if i == len(edges):
            return True
        u, v = tuple(edges[i])
        # the first edge's colour is fixed by symmetry
        options = (0,) if i == 0 else range(3)
        for c in options:
            if c in used[u] or c in used[v]:
                continue
            colour[edges[i]] = c
            used[u].add(c)
            used[v].add(c)
            if place(i + 1):
                return True
            used[u].discard(c)
            used[v].discard(c)
            del colour[edges[i]]
        return False

    if not place(0):
        return None
    return tuple(frozenset(e for e in edges if colour[e] == c) for c in range(3))


def matchings_from_system(system: PartitionMultiset, graph: SimpleGraph) -> tuple[frozenset, ...]:
    """Read three disjoint perfect matchings of ``graph`` off a solution."""
    _require_cubic(graph)
    parts = system.elements()
    if len(parts) != 3:
        raise ValueError(f"expected three partitions, got {len(parts)}")
    edge_set = set(graph.edges)
    matchings = []
    for p in parts:
        blocks = [frozenset(b) for b in p.parts]
        if any(len(b) != 2 or b not in edge_set for b in blocks):
            raise ValueError(f"partition {p} is not a perfect matching of the graph")
        matchings.append(frozenset(blocks))
    union = frozenset().union(*matchings)
    if union != edge_set or sum(map(len, matchings)) != len(edge_set):
        raise ValueError("the matchings do not partition the edge set")
    return tuple(matchings)


def is_perfect_matching(graph: SimpleGraph, matching: Iterable[frozenset]) -> bool:
    matching = list(matching)
    covered = [v for e in matching for v in e]
    return (
        all(e in set(graph.edges) for e in matching)
        and len(covered) == len(set(covered)) == len(graph.vertices)
    )


@dataclass(frozen=True)
class ColouringResult:
    colourable: bool
    matchings: Optional[tuple[frozenset, ...]]
    system: Optional[PartitionMultiset]


def edge_chromatic_is_three(graph: SimpleGraph, *, allow_large: bool = False) -> ColouringResult:
    """Decide 3-edge-colourability through the split reduction, checked
    against direct colouring search; the two must agree."""
    splits = reduce_cubic_graph(graph)
    system = solve_partition_system(splits, allow_large=allow_large)
    direct = three_edge_colouring(graph)
    if (system is None) != (direct is None):
        raise AssertionError("reduction and direct colouring search disagree")
    if system is None:
        return ColouringResult(False, None, None)
    return ColouringResult(True, matchings_from_system(system, graph), system)


# -- graph constructors ----------------------------------------------


def prism_graph() -> SimpleGraph:
    """The triangular prism: two triangles joined by a perfect matching."""
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    return SimpleGraph(range(6), edges)


def k33_graph() -> SimpleGraph:
    return SimpleGraph(range(6), [(a, b) for a in range(3) for b in range(3, 6)])


def petersen_graph() -> SimpleGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return SimpleGraph(range(10), outer + spokes + inner)


def bridged_cubic_graph() -> SimpleGraph:
    """Two copies of K4 with one edge subdivided, joined at the new vertices.

    Cubic graphs with a bridge have no 3-edge-colouring.
    """
    edges = []
    for base in (0, 5):
        a = [base + i for i in range(5)]
        edges += [(a[0], a[2]), (a[0], a[3]), (a[1], a[2]), (a[1], a[3]), (a[2], a[3])]
        edges += [(a[4], a[0]), (a[4], a[1])]
    return SimpleGraph(range(10), edges + [(4, 9)])


def random_cubic_graph(n: int, rng: random.Random, max_tries: int = 1000) -> SimpleGraph:
    """A random simple cubic graph on ``n`` vertices (configuration model
    with rejection)."""
    if n % 2 or n < 4:
        raise ValueError("cubic graphs need an even number of vertices, at least 4")
    for _ in range(max_tries):
        stubs = [v for v in range(n) for _ in range(3)]
        rng.shuffle(stubs)
        pairs = list(zip(stubs[::2], stubs[1::2]))
        keys = {frozenset(p) for p in pairs}
        if all(u != v for u, v in pairs) and len(keys) == len(pairs):
            return SimpleGraph(range(n), pairs)
    raise RuntimeError(f"no simple cubic graph found in {max_tries} tries")


def all_perfect_matchings(graph: SimpleGraph) -> list[frozenset]:
    """Every perfect matching, by brute force over edge subsets."""
    k = len(graph.vertices) // 2
    return [frozenset(c) for c in combinations(graph.edges, k) if is_perfect_matching(graph, c)]
