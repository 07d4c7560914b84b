"""Partition systems whose split-shadow is a given multiset of splits."""

from .core import (
    GroundSet,
    GroundSetMismatch,
    GuardExceeded,
    HierarchyError,
    IncompatibleSplitsError,
    Partition,
    PartitionMultiset,
    Split,
    SplitMultiset,
    are_compatible,
    is_compatible_system,
    is_hierarchical,
    is_strongly_compatible,
    sigma_of_partition,
    sigma_of_system,
)
from .decide import SimpleGraph, edge_chromatic_is_three, reduce_cubic_graph, solve_partition_system
from .kernel import (
    RealPartitionFamily,
    RealSplitFamily,
    integral_family_of,
    integral_point,
    kappa,
    kernel_polytope,
)
from .represent import (
    enumerate_systems,
    has_partition_system,
    hierarchical_system,
    min_size_partition,
    strongly_compatible_system,
)
from .tree import NotEvenError, WeakTree, is_even_tree, tree_from_splits

__all__ = [
    "GroundSet",
    "GroundSetMismatch",
    "GuardExceeded",
    "HierarchyError",
    "IncompatibleSplitsError",
    "NotEvenError",
    "Partition",
    "PartitionMultiset",
    "RealPartitionFamily",
    "RealSplitFamily",
    "SimpleGraph",
    "Split",
    "SplitMultiset",
    "WeakTree",
    "are_compatible",
    "edge_chromatic_is_three",
    "enumerate_systems",
    "has_partition_system",
    "hierarchical_system",
    "integral_family_of",
    "integral_point",
    "is_compatible_system",
    "is_even_tree",
    "is_hierarchical",
    "is_strongly_compatible",
    "kappa",
    "kernel_polytope",
    "min_size_partition",
    "reduce_cubic_graph",
    "sigma_of_partition",
    "sigma_of_system",
    "solve_partition_system",
    "strongly_compatible_system",
    "tree_from_splits",
]
