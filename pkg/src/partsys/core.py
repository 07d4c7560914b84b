"""Ground sets, splits, partitions and their multisets.

Subsets of the ground set are stored as integer bitmasks over the canonical
element order, so split and partition equality is integer equality.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from functools import total_ordering
from typing import Generic, TypeVar, Union

Taxon = Union[str, int]


class GroundSetMismatch(ValueError):
    """Raised when values built over different ground sets are combined."""


class IncompatibleSplitsError(ValueError):
    """Raised when a split system is required to be compatible but is not."""

    def __init__(self, first: "Split", second: "Split"):
        self.witness = (first, second)
        super().__init__(f"splits {first} and {second} are incompatible")


class HierarchyError(ValueError):
    def __init__(self, first: frozenset, second: frozenset):
        self.witness = (first, second)
        super().__init__(
            f"clusters {sorted(first, key=taxon_key)} and "
            f"{sorted(second, key=taxon_key)} overlap without nesting"
        )


class GuardExceeded(RuntimeError):
    """An exponential routine was asked to run on an instance above its guard."""


def taxon_key(x: Taxon) -> tuple:
    # all-digit tokens sort numerically, everything else lexicographically after
    if isinstance(x, int):
        return (0, x, str(x))
    if x.isdigit():
        return (0, int(x), x)
    return (1, 0, x)


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class GroundSet:
    """An ordered finite set X of at least two taxa."""

    __slots__ = ("elements", "full", "_index")

    def __init__(self, elements: Iterable[Taxon]):
        items = list(elements)
        if len(set(items)) != len(items):
            raise ValueError("ground set elements must be pairwise distinct")
        if len(items) < 2:
            raise ValueError("a ground set needs at least two elements")
        self.elements: tuple[Taxon, ...] = tuple(sorted(items, key=taxon_key))
        self._index = {x: i for i, x in enumerate(self.elements)}
        self.full = (1 << len(self.elements)) - 1

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Taxon]:
        return iter(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.elements)!r})"

    def index(self, x: Taxon) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise ValueError(f"unknown taxon {x!r}") from None

    def mask(self, items: Iterable[Taxon]) -> int:
        m = 0
        for x in items:
            m |= 1 << self.index(x)
        return m

    def members(self, mask: int) -> tuple[Taxon, ...]:
        return tuple(self.elements[i] for i in bits(mask))

    @property
    def compact(self) -> bool:
        """True when every taxon is a one-character string or digit."""
        return all(len(str(x)) == 1 for x in self.elements)

    def format(self, mask: int) -> str:
        sep = "" if self.compact else " "
        return sep.join(str(x) for x in self.members(mask))

    def parse_block(self, text: str) -> int:
        """Parse one block: whitespace-separated taxa, or packed characters
        when all taxa are single characters (``"123"``)."""
        text = text.strip()
        tokens = text.split()
        if len(tokens) == 1 and tokens[0] not in self._index and self.compact:
            tokens = list(tokens[0])
        return self.mask(self._coerce(t) for t in tokens)

    def _coerce(self, token: str) -> Taxon:
        if token in self._index:
            return token
        if token.lstrip("-").isdigit() and int(token) in self._index:
            return int(token)
        raise ValueError(f"unknown taxon {token!r}")

    def check_same(self, other: "GroundSet") -> None:
        if self != other:
            raise GroundSetMismatch(f"{self!r} differs from {other!r}")


@total_ordering
class Split:
    """A bipartition A|(X-A); stored as the side containing min(X)."""

    __slots__ = ("ground", "mask")

    def __init__(self, ground: GroundSet, side: Iterable[Taxon]):
        self._set(ground, ground.mask(side))

    @classmethod
    def from_mask(cls, ground: GroundSet, mask: int) -> "Split":
        obj = cls.__new__(cls)
        obj._set(ground, mask)
        return obj

    @classmethod
    def parse(cls, ground: GroundSet, text: str) -> "Split":
        """``Split.parse(X, "12|3456")``; the second side may be omitted."""
        sides = text.split("|")
        if len(sides) not in (1, 2):
            raise ValueError(f"bad split {text!r}")
        a = ground.parse_block(sides[0])
        if len(sides) == 2:
            b = ground.parse_block(sides[1])
            if a & b or (a | b) != ground.full:
                raise ValueError(f"sides of {text!r} are not complementary")
        return cls.from_mask(ground, a)

    def _set(self, ground: GroundSet, mask: int) -> None:
        if mask <= 0 or mask >= ground.full or mask & ~ground.full:
            raise ValueError("a split side must be a non-empty proper subset")
        if not mask & 1:
            mask ^= ground.full
        self.ground = ground
        self.mask = mask

    @property
    def other(self) -> int:
        return self.ground.full ^ self.mask

    @property
    def side_a(self) -> frozenset:
        return frozenset(self.ground.members(self.mask))

    @property
    def side_b(self) -> frozenset:
        return frozenset(self.ground.members(self.other))

    def sides(self) -> tuple[frozenset, frozenset]:
        return self.side_a, self.side_b

    def separates(self, x: Taxon, y: Taxon) -> bool:
        ix, iy = self.ground.index(x), self.ground.index(y)
        return bool((self.mask >> ix) & 1) != bool((self.mask >> iy) & 1)

    def to_partition(self) -> "Partition":
        return Partition.from_masks(self.ground, (self.mask, self.other))

    @property
    def sort_key(self) -> tuple[int, ...]:
        return tuple(bits(self.mask))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Split)
            and self.mask == other.mask
            and self.ground == other.ground
        )

    def __lt__(self, other: "Split") -> bool:
        return self.sort_key < other.sort_key

    def __hash__(self) -> int:
        return hash(("split", self.mask, len(self.ground)))

    def __str__(self) -> str:
        return f"{self.ground.format(self.mask)}|{self.ground.format(self.other)}"

    def __repr__(self) -> str:
        return f"Split({self})"


@total_ordering
class Partition:
    """A partition of X into at least two non-empty parts."""

    __slots__ = ("ground", "masks")

    def __init__(self, ground: GroundSet, parts: Iterable[Iterable[Taxon]]):
        self._set(ground, [ground.mask(p) for p in parts])

    @classmethod
    def from_masks(cls, ground: GroundSet, masks: Iterable[int]) -> "Partition":
        obj = cls.__new__(cls)
        obj._set(ground, list(masks))
        return obj

    @classmethod
    def parse(cls, ground: GroundSet, text: str) -> "Partition":
        """``Partition.parse(X, "123|4|56")``; ``/`` also separates parts."""
        blocks = text.replace("/", "|").split("|")
        return cls.from_masks(ground, [ground.parse_block(b) for b in blocks])

    def _set(self, ground: GroundSet, masks: list[int]) -> None:
        seen = 0
        for m in masks:
            if m <= 0:
                raise ValueError("partition parts must be non-empty")
            if m & seen:
                raise ValueError("partition parts must be disjoint")
            seen |= m
        if seen != ground.full:
            raise ValueError("partition parts must cover the ground set")
        if len(masks) < 2:
            raise ValueError("a partition needs at least two parts")
        self.ground = ground
        self.masks: tuple[int, ...] = tuple(sorted(masks, key=lowest_bit))

    @property
    def parts(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(self.ground.members(m)) for m in self.masks)

    def __len__(self) -> int:
        return len(self.masks)

    def to_split(self) -> Split:
        if len(self.masks) != 2:
            raise ValueError("only a two-part partition converts to a split")
        return Split.from_mask(self.ground, self.masks[0])

    def splits(self) -> list[Split]:
        return [Split.from_mask(self.ground, m) for m in self.masks]

    @property
    def sort_key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(bits(m)) for m in self.masks)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Partition)
            and self.masks == other.masks
            and self.ground == other.ground
        )

    def __lt__(self, other: "Partition") -> bool:
        return self.sort_key < other.sort_key

    def __hash__(self) -> int:
        return hash(("partition", self.masks))

    def __str__(self) -> str:
        return "|".join(self.ground.format(m) for m in self.masks)

    def __repr__(self) -> str:
        return f"Partition({self})"


E = TypeVar("E", Split, Partition)


class _Multiset(Generic[E]):
    """Immutable multiset over one ground set; absent elements have count 0."""

    __slots__ = ("ground", "_counts", "_hash")
    _element_type: type = object

    def __init__(
        self,
        ground: GroundSet,
        items: Mapping[E, int] | Iterable[E] = (),
    ):
        counts: dict[E, int] = {}
        pairs = items.items() if isinstance(items, Mapping) else ((x, 1) for x in items)
        for x, m in pairs:
            if not isinstance(x, self._element_type):
                raise TypeError(f"expected {self._element_type.__name__}, got {x!r}")
            ground.check_same(x.ground)
            if not isinstance(m, int) or m < 0:
                raise ValueError(f"multiplicity must be a non-negative integer, got {m!r}")
            if m:
                counts[x] = counts.get(x, 0) + m
        self.ground = ground
        self._counts = counts
        self._hash: int | None = None

    @classmethod
    def _raw(cls, ground: GroundSet, counts: dict):
        obj = cls.__new__(cls)
        obj.ground = ground
        obj._counts = counts
        obj._hash = None
        return obj

    def count(self, x: E) -> int:
        return self._counts.get(x, 0)

    __getitem__ = count

    def __contains__(self, x: object) -> bool:
        return x in self._counts

    def __iter__(self) -> Iterator[E]:
        return iter(sorted(self._counts))

    def items(self) -> list[tuple[E, int]]:
        return sorted(self._counts.items())

    def elements(self) -> list[E]:
        return [x for x, m in self.items() for _ in range(m)]

    def support(self) -> frozenset:
        return frozenset(self._counts)

    @property
    def size(self) -> int:
        return sum(self._counts.values())

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return bool(self._counts)

    def _check(self, other: "_Multiset") -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        self.ground.check_same(other.ground)

    def __add__(self, other):
        self._check(other)
        counts = dict(self._counts)
        for x, m in other._counts.items():
            counts[x] = counts.get(x, 0) + m
        return type(self)._raw(self.ground, counts)

    def __sub__(self, other):
        self._check(other)
        counts = {}
        for x, m in self._counts.items():
            left = m - other._counts.get(x, 0)
            if left > 0:
                counts[x] = left
        return type(self)._raw(self.ground, counts)

    def __le__(self, other) -> bool:
        self._check(other)
        return all(other._counts.get(x, 0) >= m for x, m in self._counts.items())

    def __eq__(self, other: object) -> bool:
        return (
            type(other) is type(self)
            and self.ground == other.ground
            and self._counts == other._counts
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    @property
    def sort_key(self) -> tuple:
        return tuple(x.sort_key for x in self.elements())

    def __str__(self) -> str:
        body = ", ".join(f"{x}" + (f":{m}" if m > 1 else "") for x, m in self.items())
        return "{" + body + "}"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


class SplitMultiset(_Multiset[Split]):
    """A split system: a multiset of X-splits."""

    __slots__ = ()
    _element_type = Split

    @classmethod
    def parse(cls, ground: GroundSet, *specs: str | tuple[str, int]) -> "SplitMultiset":
        """Build from compact strings, e.g. ``("56|1234", 2), "4|12356"``."""
        counts: dict[Split, int] = {}
        for spec in specs:
            text, m = (spec, 1) if isinstance(spec, str) else spec
            s = Split.parse(ground, text)
            counts[s] = counts.get(s, 0) + m
        return cls(ground, counts)


class PartitionMultiset(_Multiset[Partition]):
    """A partition system: a multiset of partitions of X."""

    __slots__ = ()
    _element_type = Partition

    @classmethod
    def parse(cls, ground: GroundSet, *specs: str | tuple[str, int]) -> "PartitionMultiset":
        counts: dict[Partition, int] = {}
        for spec in specs:
            text, m = (spec, 1) if isinstance(spec, str) else spec
            p = Partition.parse(ground, text)
            counts[p] = counts.get(p, 0) + m
        return cls(ground, counts)


def sigma_of_partition(partition: Partition) -> SplitMultiset:
    """The splits A|(X-A) over the parts A; a two-part partition gives its
    single split with multiplicity 2."""
    counts: dict[Split, int] = {}
    for s in partition.splits():
        counts[s] = counts.get(s, 0) + 1
    return SplitMultiset._raw(partition.ground, counts)


def sigma_of_system(system: PartitionMultiset) -> SplitMultiset:
    counts: dict[Split, int] = {}
    for p, m in system._counts.items():
        for s in p.splits():
            counts[s] = counts.get(s, 0) + m
    return SplitMultiset._raw(system.ground, counts)


def multiset_union(first: SplitMultiset, second: SplitMultiset) -> SplitMultiset:
    return first + second


def multiset_difference(first: SplitMultiset, second: SplitMultiset) -> SplitMultiset:
    """Multiplicities subtract and clamp at zero."""
    return first - second


def _masks_compatible(a1: int, a2: int, full: int) -> bool:
    # both sides contain min(X), so a1 & a2 is never empty
    b1, b2 = full ^ a1, full ^ a2
    return not (a1 & b2) or not (b1 & a2) or not (b1 & b2)


def are_compatible(first: Split, second: Split) -> bool:
    first.ground.check_same(second.ground)
    return _masks_compatible(first.mask, second.mask, first.ground.full)


def find_incompatible_pair(splits: SplitMultiset) -> tuple[Split, Split] | None:
    support = sorted(splits.support())
    full = splits.ground.full
    for i, s in enumerate(support):
        for t in support[i + 1:]:
            if not _masks_compatible(s.mask, t.mask, full):
                return s, t
    return None


def is_compatible_system(splits: SplitMultiset) -> bool:
    return find_incompatible_pair(splits) is None


def _has_covering_pair(p: Partition, q: Partition) -> bool:
    full = p.ground.full
    return any((a | b) == full for a in p.masks for b in q.masks)


def is_strongly_compatible(system: PartitionMultiset) -> bool:
    """Every two members of Π have parts A, B with A | B = X.

    Members are counted with multiplicity, so a repeated partition must
    cover X with two of its own parts; only two-part partitions can.
    """
    support = sorted(system.support())
    if any(len(p.masks) > 2 and m > 1 for p, m in system.items()):
        return False
    return all(
        _has_covering_pair(p, q)
        for i, p in enumerate(support)
        for q in support[i + 1:]
    )


def _first_overlap(masks: Iterable[int]) -> tuple[int, int] | None:
    distinct = sorted(set(masks))
    for i, a in enumerate(distinct):
        for b in distinct[i + 1:]:
            if a & b not in (0, a, b):
                return a, b
    return None


def is_hierarchical(system: PartitionMultiset) -> bool:
    return _first_overlap(m for p in system.support() for m in p.masks) is None


def is_refinement(finer: Partition, coarser: Partition) -> bool:
    """Every part of ``finer`` lies inside some part of ``coarser``."""
    finer.ground.check_same(coarser.ground)
    return all(any(a & ~b == 0 for b in coarser.masks) for a in finer.masks)


def all_partitions(ground: GroundSet, mask: int | None = None) -> Iterator[tuple[int, ...]]:
    """All set partitions of ``mask`` (default X) as tuples of part masks,
    including the one-block partition."""
    mask = ground.full if mask is None else mask
    if not mask:
        yield ()
        return
    low = mask & -mask
    rest = mask ^ low
    sub = rest
    # iterate every subset of ``rest`` to join the lowest element
    while True:
        block = low | sub
        for tail in all_partitions(ground, mask ^ block):
            yield (block,) + tail
        if not sub:
            break
        sub = (sub - 1) & rest
