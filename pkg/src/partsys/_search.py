"""Candidate generation shared by the exhaustive solvers.

Residual split multisets are plain ``{canonical side mask: count}`` dicts.
"""

from __future__ import annotations

from collections.abc import Iterator

from .core import GroundSet, Partition, bits


def residual_of(splits) -> dict[int, int]:
    return {s.mask: m for s, m in splits.items()}


def residual_key(residual: dict[int, int]) -> frozenset:
    return frozenset(residual.items())


def smallest(residual: dict[int, int]) -> int:
    return min(residual, key=lambda m: tuple(bits(m)))


def _blocks(residual: dict[int, int], full: int) -> dict[int, list[int]]:
    """Available part masks indexed by their lowest bit."""
    by_low: dict[int, list[int]] = {}
    for m in residual:
        for block in (m, full ^ m):
            by_low.setdefault(block & -block, []).append(block)
    return by_low


def _split_into(rest: int, by_low: dict[int, list[int]]) -> Iterator[list[int]]:
    if not rest:
        yield []
        return
    low = rest & -rest
    for block in by_low.get(low, ()):
        if block & ~rest == 0:
            for tail in _split_into(rest ^ block, by_low):
                yield [block] + tail


def covering_partitions(ground: GroundSet, residual: dict[int, int], target: int) -> list[tuple[int, ...]]:
    """Partitions with a part on either side of split ``target`` whose own
    splits all fit under ``residual``; returned in canonical order."""
    full = ground.full
    other = full ^ target
    found: list[tuple[int, ...]] = []
    if residual.get(target, 0) >= 2:
        found.append((target, other))
    by_low = _blocks(residual, full)
    for part, rest in ((target, other), (other, target)):
        for blocks in _split_into(rest, by_low):
            if len(blocks) >= 2:
                found.append(tuple(sorted([part] + blocks, key=lambda m: m & -m)))
    found.sort(key=lambda ms: tuple(tuple(bits(m)) for m in ms))
    return found


def subtract(residual: dict[int, int], masks: tuple[int, ...], full: int) -> dict[int, int] | None:
    """Residual minus the splits of a partition; None if it does not fit."""
    out = dict(residual)
    for m in masks:
        key = m if m & 1 else full ^ m
        left = out.get(key, 0) - 1
        if left < 0:
            return None
        if left:
            out[key] = left
        else:
            del out[key]
    return out


def to_partition(ground: GroundSet, masks: tuple[int, ...]) -> Partition:
    return Partition.from_masks(ground, masks)
