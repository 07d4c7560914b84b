"""Partition systems realizing a compatible split system.

For a compatible split system the tree T_Σ decides everything: P(Σ) is
non-empty exactly when T_Σ is even, the odd vertices give the unique
strongly compatible (and maximum) member, MinSizePartition gives a minimum
member, and an equidistant vertex gives the hierarchical members.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import _search
from .core import (
    GuardExceeded,
    Partition,
    PartitionMultiset,
    SplitMultiset,
    Taxon,
    is_hierarchical,
    lowest_bit,
    sigma_of_partition,
    sigma_of_system,
)
from .tree import (
    NotEvenError,
    WeakTree,
    contract,
    decompose,
    find_display_set,
    parity_coloring,
    splits_of_tree,
    tree_from_splits,
    vertex_partition,
)

# Oracle guards; the enumeration is exponential by design.
MAX_ORACLE_GROUND = 8
MAX_ORACLE_SIZE = 24


@dataclass(frozen=True)
class RepresentationReport:
    exists: bool
    witness_odd_pair: Optional[tuple[Taxon, Taxon]] = None
    strong_system: Optional[PartitionMultiset] = None
    min_system: Optional[PartitionMultiset] = None

    @property
    def max_size(self) -> Optional[int]:
        return None if self.strong_system is None else self.strong_system.size

    @property
    def min_size(self) -> Optional[int]:
        return None if self.min_system is None else self.min_system.size


@dataclass(frozen=True)
class SystemEnumeration:
    """All members of P(Σ) in canonical order, possibly cut at ``cap``."""

    systems: tuple[PartitionMultiset, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.systems)

    def __iter__(self):
        return iter(self.systems)

    def __getitem__(self, i):
        return self.systems[i]


@dataclass(frozen=True)
class MinHierarchyReport:
    members: int
    minimum_size: int
    minimum_members: int
    hierarchical_members: int
    violations: tuple[PartitionMultiset, ...] = field(default=())

    @property
    def holds(self) -> bool:
        return not self.violations


def has_partition_system(splits: SplitMultiset) -> bool:
    """True iff some partition system has split-shadow ``splits``.

    Requires a compatible, non-empty split system; see ``odd_witness`` for
    the certificate when the answer is negative.
    """
    return odd_witness(splits) is None


def odd_witness(splits: SplitMultiset) -> Optional[tuple[Taxon, Taxon]]:
    """Two taxa at odd distance in T_Σ, or None when T_Σ is even."""
    try:
        parity_coloring(tree_from_splits(splits))
    except NotEvenError as err:
        return err.witness
    return None


def _strong_from_tree(tree: WeakTree) -> PartitionMultiset:
    coloring = parity_coloring(tree)
    return PartitionMultiset(tree.ground, [vertex_partition(tree, v) for v in sorted(coloring.odd)])


def strongly_compatible_system(splits: SplitMultiset) -> PartitionMultiset:
    """Π_s: the vertex partitions of the odd vertices of T_Σ."""
    return _strong_from_tree(tree_from_splits(splits))


def max_size(splits: SplitMultiset) -> int:
    return strongly_compatible_system(splits).size


def pi_min(tree: WeakTree) -> Partition:
    """The partition of X into the leaf label sets."""
    if tree.n < 2:
        raise ValueError("pi_min needs a tree with at least two leaves")
    if any(tree.labels[v] for v in tree.interior()):
        raise ValueError("pi_min is defined only when every interior vertex is unlabelled")
    return Partition.from_masks(tree.ground, [tree.labels[v] for v in tree.leaves()])


def _labelled_interior(tree: WeakTree) -> Optional[int]:
    candidates = [v for v in tree.interior() if tree.labels[v]]
    if not candidates:
        return None
    return min(candidates, key=lambda v: lowest_bit(tree.labels[v]))


def min_size_partition(tree: WeakTree) -> PartitionMultiset:
    """MinSizePartition: a minimum-size member of P(T) for an even X-tree."""
    parity_coloring(tree)
    return _min_size_partition(tree)


def _min_size_partition(tree: WeakTree) -> PartitionMultiset:
    v = _labelled_interior(tree)
    if v is not None:
        result = PartitionMultiset(tree.ground)
        for child in decompose(tree, v):
            result = result + _min_size_partition(child)
        return result
    leaves = pi_min(tree)
    here = PartitionMultiset(tree.ground, [leaves])
    display = find_display_set(tree, leaves)
    if display is None:
        raise RuntimeError("an even tree always displays its leaf partition")
    rest = contract(tree, display.edges)
    assert splits_of_tree(rest) == splits_of_tree(tree) - sigma_of_partition(leaves)
    if rest.num_edges == 0:
        return here
    return here + _min_size_partition(rest)


def min_size(splits: SplitMultiset) -> int:
    return min_size_partition(tree_from_splits(splits)).size


def report(splits: SplitMultiset) -> RepresentationReport:
    tree = tree_from_splits(splits)
    try:
        strong = _strong_from_tree(tree)
    except NotEvenError as err:
        return RepresentationReport(False, witness_odd_pair=err.witness)
    return RepresentationReport(True, None, strong, _min_size_partition(tree))


def check_oracle_guard(
    splits: SplitMultiset,
    max_ground: int = MAX_ORACLE_GROUND,
    max_size: int = MAX_ORACLE_SIZE,
) -> None:
    if len(splits.ground) > max_ground or splits.size > max_size:
        raise GuardExceeded(
            f"instance has |X|={len(splits.ground)} and {splits.size} splits; the "
            f"enumeration oracle is limited to |X|<={max_ground} and <={max_size} "
            "splits (use the general solver in partsys.decide for a single answer)"
        )


def enumerate_systems(
    splits: SplitMultiset,
    cap: Optional[int] = None,
    *,
    max_ground: int = MAX_ORACLE_GROUND,
    max_size: int = MAX_ORACLE_SIZE,
    allow_large: bool = False,
) -> SystemEnumeration:
    """Every partition multiset Π with Σ_Π = ``splits``, by exhaustive search.

    Works for any split system, compatible or not.
    """
    if not allow_large:
        check_oracle_guard(splits, max_ground, max_size)
    ground = splits.ground
    full = ground.full
    memo: dict[frozenset, frozenset] = {}

    def solutions(residual: dict[int, int]) -> frozenset:
        if not residual:
            return frozenset([()])
        key = _search.residual_key(residual)
        if key in memo:
            return memo[key]
        target = _search.smallest(residual)
        found = set()
        for masks in _search.covering_partitions(ground, residual, target):
            rest = _search.subtract(residual, masks, full)
            if rest is None:
                continue
            for tail in solutions(rest):
                found.add(tuple(sorted(tail + (masks,))))
        memo[key] = frozenset(found)
        return memo[key]

    raw = solutions(_search.residual_of(splits))
    systems = sorted(
        (PartitionMultiset(ground, [Partition.from_masks(ground, ms) for ms in sol]) for sol in raw),
        key=lambda s: s.sort_key,
    )
    truncated = cap is not None and len(systems) > cap
    if truncated:
        systems = systems[:cap]
    return SystemEnumeration(tuple(systems), truncated)


def is_equidistant(tree: WeakTree) -> Optional[int]:
    """First vertex at one common distance from all labelled vertices."""
    labelled = tree.labelled_vertices()
    for v in range(tree.n):
        dist = tree.distances_from(v)
        if len({dist[u] for u in labelled}) == 1:
            return v
    return None


def hierarchical_system(splits: SplitMultiset) -> Optional[PartitionMultiset]:
    """Π_h built level by level from an equidistant vertex, or None."""
    tree = tree_from_splits(splits)
    rho = is_equidistant(tree)
    if rho is None:
        return None
    depth = tree.distances_from(rho)
    levels: dict[int, list[int]] = {}
    for child, mask, _ in tree.rooted_sides(rho):
        levels.setdefault(depth[child], []).append(mask)
    ground = tree.ground
    result = PartitionMultiset(ground, [Partition.from_masks(ground, levels[d]) for d in sorted(levels)])
    assert sigma_of_system(result) == splits
    return result


def certify_min_iff_hierarchical(splits: SplitMultiset, **guards) -> MinHierarchyReport:
    """Check over all of P(Σ) that hierarchical members are exactly the minimum ones."""
    if hierarchical_system(splits) is None:
        raise ValueError("T_Σ has no equidistant vertex")
    members = enumerate_systems(splits, **guards).systems
    smallest_size = min(s.size for s in members)
    violations = tuple(s for s in members if is_hierarchical(s) != (s.size == smallest_size))
    return MinHierarchyReport(
        members=len(members),
        minimum_size=smallest_size,
        minimum_members=sum(s.size == smallest_size for s in members),
        hierarchical_members=sum(is_hierarchical(s) for s in members),
        violations=violations,
    )
