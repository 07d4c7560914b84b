"""Real-valued partition families, the map κ, and the kernel polytope κ⁻¹(ν).

κ sends μ: Π(X) → R≥0 to the split family whose value on A|B is the total
weight of partitions having A or B as a part. Everything here is exact
(``fractions.Fraction``); there is no floating point.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Generic, Optional, TypeVar

from . import _search
from .core import (
    GroundSet,
    GuardExceeded,
    Partition,
    PartitionMultiset,
    Split,
    SplitMultiset,
    all_partitions,
    is_compatible_system,
    sigma_of_system,
)

MAX_KERNEL_GROUND = 5
# above this many candidate bases, walk the basis graph instead
BRUTE_FORCE_BASES = 5000

K = TypeVar("K", Split, Partition)


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


class _Family(Generic[K]):
    """Finite-support map to non-negative rationals; zeros are dropped."""

    __slots__ = ("ground", "_values")
    _key_type: type = object

    def __init__(self, ground: GroundSet, values: Mapping[K, object] = None):
        out: dict[K, Fraction] = {}
        for key, raw in (values or {}).items():
            if not isinstance(key, self._key_type):
                raise TypeError(f"expected {self._key_type.__name__}, got {key!r}")
            ground.check_same(key.ground)
            v = _as_fraction(raw)
            if v < 0:
                raise ValueError(f"negative value {v} at {key}")
            if v:
                out[key] = out.get(key, Fraction(0)) + v
        self.ground = ground
        self._values = out

    def __getitem__(self, key: K) -> Fraction:
        return self._values.get(key, Fraction(0))

    def items(self) -> list[tuple[K, Fraction]]:
        return sorted(self._values.items(), key=lambda kv: kv[0].sort_key)

    def support(self) -> frozenset:
        return frozenset(self._values)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self._values.values())

    def __bool__(self) -> bool:
        return bool(self._values)

    def __add__(self, other):
        self.ground.check_same(other.ground)
        merged = dict(self._values)
        for k, v in other._values.items():
            merged[k] = merged.get(k, Fraction(0)) + v
        return type(self)(self.ground, merged)

    def scale(self, factor) -> "_Family[K]":
        factor = _as_fraction(factor)
        return type(self)(self.ground, {k: v * factor for k, v in self._values.items()})

    def __eq__(self, other: object) -> bool:
        return type(other) is type(self) and self.ground == other.ground and self._values == other._values

    def __hash__(self) -> int:
        return hash((self.ground, frozenset(self._values.items())))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}: {v}" for k, v in self.items()) + "}"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


class RealPartitionFamily(_Family[Partition]):
    _key_type = Partition

    def to_multiset(self) -> PartitionMultiset:
        if not self.is_integral():
            raise ValueError("family has non-integral values")
        return PartitionMultiset(self.ground, {p: int(v) for p, v in self._values.items()})


class RealSplitFamily(_Family[Split]):
    _key_type = Split

    @classmethod
    def from_multiset(cls, splits: SplitMultiset) -> "RealSplitFamily":
        return cls(splits.ground, dict(splits.items()))

    def to_multiset(self) -> SplitMultiset:
        if not self.is_integral():
            raise ValueError("family has non-integral values")
        return SplitMultiset(self.ground, {s: int(v) for s, v in self._values.items()})


def kappa(mu: RealPartitionFamily) -> RealSplitFamily:
    """κ(μ)(A|B) = Σ μ(π) over π with A ∈ π, plus the same over π with B ∈ π."""
    ground = mu.ground
    out: dict[Split, Fraction] = {}
    for p, v in mu.items():
        for s in p.splits():
            out[s] = out.get(s, Fraction(0)) + v
    return RealSplitFamily(ground, out)


def integral_family_of(system: PartitionMultiset) -> RealPartitionFamily:
    return RealPartitionFamily(system.ground, {p: m for p, m in system.items()})


# -- exact linear algebra -------------------------------------------------


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; zero rows are dropped."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: list[list[Fraction]]) -> int:
    return len(_rref(rows)[1]) if rows else 0


def affine_dimension(points: list[tuple[Fraction, ...]]) -> int:
    if not points:
        return -1
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return rank(diffs) if diffs else 0


class _Tableau:
    """Dictionary form B⁻¹[A | b] for a basis of the full-row-rank system."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        for i, col in enumerate(basis):
            self._pivot(i, col)

    def _pivot(self, i: int, col: int) -> None:
        row = self.rows[i]
        inv = 1 / row[col]
        row = [x * inv for x in row]
        self.rows[i] = row
        for k, other in enumerate(self.rows):
            if k != i and other[col]:
                f = other[col]
                self.rows[k] = [a - f * b for a, b in zip(other, row)]
        self.basis[i] = col

    def copy(self) -> "_Tableau":
        t = _Tableau.__new__(_Tableau)
        t.rows = [list(r) for r in self.rows]
        t.basis = list(self.basis)
        return t

    def point(self, n: int) -> tuple[Fraction, ...]:
        x = [Fraction(0)] * n
        for i, col in enumerate(self.basis):
            x[col] = self.rows[i][-1]
        return tuple(x)


def _solve_basis(rows, rhs, cols) -> Optional[tuple[Fraction, ...]]:
    """x_B for basis ``cols`` or None when singular."""
    aug = [[r[c] for c in cols] + [b] for r, b in zip(rows, rhs)]
    red, piv = _rref(aug)
    if len(piv) != len(cols) or (piv and piv[-1] == len(cols)):
        return None
    return tuple(red[i][-1] for i in range(len(cols)))


def _phase_one(rows, rhs, n) -> Optional[_Tableau]:
    """A feasible basis via the auxiliary problem with Bland's rule."""
    r = len(rows)
    sign = [(-1 if b < 0 else 1) for b in rhs]
    aux = [[x * s for x in row] + [Fraction(int(i == k)) for k in range(r)] for i, (row, s) in enumerate(zip(rows, sign))]
    b = [x * s for x, s in zip(rhs, sign)]
    t = _Tableau(aux, b, list(range(n, n + r)))
    total = n + r
    while True:
        # reduced cost of column j for minimising the artificial sum
        cost = [
            (-sum(t.rows[i][j] for i, col in enumerate(t.basis) if col >= n) if j < n else Fraction(0))
            for j in range(total)
        ]
        for j in t.basis:
            cost[j] = Fraction(0)
        entering = next((j for j in range(n) if j not in t.basis and cost[j] < 0), None)
        if entering is None:
            break
        ratios = [(t.rows[i][-1] / t.rows[i][entering], t.basis[i], i) for i in range(r) if t.rows[i][entering] > 0]
        _, _, leave = min(ratios)
        t._pivot(leave, entering)
    if any(t.rows[i][-1] for i, col in enumerate(t.basis) if col >= n):
        return None
    for i, col in enumerate(list(t.basis)):
        if col >= n:
            j = next(j for j in range(n) if j not in t.basis and t.rows[i][j])
            t._pivot(i, j)
    t.rows = [row[:n] + [row[-1]] for row in t.rows]
    return t


def _vertices_by_pivoting(rows, rhs, n) -> list[tuple[Fraction, ...]]:
    """Walk every feasible basis reachable by ratio-test pivots."""
    start = _phase_one(rows, rhs, n)
    if start is None:
        return []
    seen = {frozenset(start.basis)}
    stack = [start]
    points = set()
    while stack:
        t = stack.pop()
        points.add(t.point(n))
        for j in range(n):
            if j in t.basis:
                continue
            pos = [(t.rows[i][-1] / t.rows[i][j], i) for i in range(len(t.rows)) if t.rows[i][j] > 0]
            if not pos:
                continue
            best = min(q for q, _ in pos)
            for q, i in pos:
                if q != best:
                    continue
                key = frozenset(t.basis) - {t.basis[i]} | {j}
                if key in seen:
                    continue
                seen.add(key)
                nxt = t.copy()
                nxt._pivot(i, j)
                stack.append(nxt)
    return sorted(points)


def _vertices_by_bases(rows, rhs, n) -> list[tuple[Fraction, ...]]:
    """Every column subset of full rank with a non-negative solution."""
    r = len(rows)
    points = set()
    for cols in combinations(range(n), r):
        xb = _solve_basis(rows, rhs, cols)
        if xb is None or any(v < 0 for v in xb):
            continue
        x = [Fraction(0)] * n
        for c, v in zip(cols, xb):
            x[c] = v
        points.add(tuple(x))
    return sorted(points)


def enumerate_vertices(matrix, rhs, method: str = "auto") -> list[tuple[Fraction, ...]]:
    """Vertices of {x ≥ 0 : matrix·x = rhs} for a bounded polyhedron."""
    n = len(matrix[0]) if matrix else 0
    aug = [list(r) + [b] for r, b in zip(matrix, rhs)]
    red, piv = _rref(aug) if aug else ([], [])
    if piv and piv[-1] == n:
        return []
    rows = [r[:n] for r in red]
    b = [r[n] for r in red]
    if not rows:
        return [tuple([Fraction(0)] * n)] if n == 0 else []
    if method == "auto":
        method = "bases" if comb(n, len(rows)) <= BRUTE_FORCE_BASES else "pivot"
    if method == "bases":
        return _vertices_by_bases(rows, b, n)
    if method == "pivot":
        return _vertices_by_pivoting(rows, b, n)
    raise ValueError(f"unknown method {method!r}")


# -- the kernel polytope ---------------------------------------------------


def _check_ground(ground: GroundSet, max_ground: int, allow_large: bool) -> None:
    if not allow_large and len(ground) > max_ground:
        raise GuardExceeded(
            f"|X|={len(ground)} exceeds the kernel guard of {max_ground}; the number "
            "of partitions grows like the Bell numbers"
        )


def all_split_masks(ground: GroundSet) -> list[int]:
    full = ground.full
    return [m for m in range(1, full, 2)]


def _split_masks_of(masks: tuple[int, ...], full: int) -> list[int]:
    return [m if m & 1 else full ^ m for m in masks]


@dataclass(frozen=True)
class KernelPolytope:
    target: RealSplitFamily
    variables: tuple[Partition, ...]
    eliminated: tuple[Partition, ...]
    rows: tuple[Split, ...]
    matrix: tuple[tuple[int, ...], ...]
    rhs: tuple[Fraction, ...]

    @property
    def ground(self) -> GroundSet:
        return self.target.ground

    @cached_property
    def vertices(self) -> tuple[RealPartitionFamily, ...]:
        return tuple(self._family(p) for p in self.vertex_points())

    def vertex_points(self, method: str = "auto") -> list[tuple[Fraction, ...]]:
        return enumerate_vertices([list(map(Fraction, r)) for r in self.matrix], list(self.rhs), method)

    @cached_property
    def dimension(self) -> int:
        return affine_dimension(self.vertex_points())

    @cached_property
    def box_bounds(self) -> tuple[Fraction, ...]:
        return tuple(box_bound(self.target, p) for p in self.variables)

    def _family(self, point) -> RealPartitionFamily:
        return RealPartitionFamily(self.ground, dict(zip(self.variables, point)))

    def point_of(self, mu: RealPartitionFamily) -> tuple[Fraction, ...]:
        extra = mu.support() - set(self.variables)
        if extra:
            raise ValueError(f"{min(extra, key=lambda p: p.sort_key)} is not a variable")
        return tuple(mu[p] for p in self.variables)

    def contains(self, mu: RealPartitionFamily) -> bool:
        """Exact membership: μ ≥ 0 and κ(μ) = ν."""
        return mu.ground == self.ground and kappa(mu) == self.target


def box_bound(nu: RealSplitFamily, p: Partition) -> Fraction:
    """Upper bound on μ(π) inside κ⁻¹(ν): each part A forces μ(π) ≤ ν(A|X-A),
    halved when π has two parts (they share one split)."""
    bound = min(nu[s] for s in p.splits())
    return bound / 2 if len(p) == 2 else bound


def kernel_polytope(
    nu: RealSplitFamily,
    *,
    max_ground: int = MAX_KERNEL_GROUND,
    allow_large: bool = False,
) -> KernelPolytope:
    ground = nu.ground
    _check_ground(ground, max_ground, allow_large)
    full = ground.full
    support = {s.mask for s in nu.support()}
    variables, eliminated = [], []
    for masks in all_partitions(ground):
        if len(masks) < 2:
            continue
        p = Partition.from_masks(ground, masks)
        if all(m in support for m in _split_masks_of(p.masks, full)):
            variables.append(p)
        else:
            eliminated.append(p)
    variables.sort(key=lambda p: p.sort_key)
    eliminated.sort(key=lambda p: p.sort_key)
    row_masks = all_split_masks(ground)
    index = {m: i for i, m in enumerate(row_masks)}
    matrix = [[0] * len(variables) for _ in row_masks]
    for j, p in enumerate(variables):
        for m in _split_masks_of(p.masks, full):
            matrix[index[m]][j] += 1
    rows = tuple(Split.from_mask(ground, m) for m in row_masks)
    return KernelPolytope(
        target=nu,
        variables=tuple(variables),
        eliminated=tuple(eliminated),
        rows=rows,
        matrix=tuple(map(tuple, matrix)),
        rhs=tuple(nu[s] for s in rows),
    )


def _support_partitions(nu: RealSplitFamily) -> list[Partition]:
    """Partitions all of whose splits lie in supp(ν), without touching the rest."""
    ground = nu.ground
    full = ground.full
    residual = {s.mask: 1 for s in nu.support()}
    by_low = _search._blocks(residual, full)
    found = [
        Partition.from_masks(ground, blocks)
        for blocks in _search._split_into(full, by_low)
        if len(blocks) >= 2
    ]
    return sorted(set(found), key=lambda p: p.sort_key)


def integral_point(
    nu: RealSplitFamily,
    *,
    max_ground: int = MAX_KERNEL_GROUND,
    allow_large: bool = False,
) -> Optional[RealPartitionFamily]:
    """An integral μ with κ(μ) = ν, or None.

    Depth-first over the variables, each ranging over 0..its box bound, with
    the residual of ν kept non-negative and every still-positive split
    required to have a later variable able to cover it.
    """
    if not nu.is_integral():
        raise ValueError("integral_point needs an integral split family")
    ground = nu.ground
    _check_ground(ground, max_ground, allow_large)
    if not nu:
        return RealPartitionFamily(ground)
    full = ground.full
    variables = _support_partitions(nu)
    cover = [_split_masks_of(p.masks, full) for p in variables]
    bounds = [int(box_bound(nu, p)) for p in variables]
    last_use: dict[int, int] = {}
    for j, masks in enumerate(cover):
        for m in masks:
            last_use[m] = j
    residual = {s.mask: int(v) for s, v in nu.items()}
    if any(m not in last_use for m in residual):
        return None
    chosen = [0] * len(variables)

    def feasible_from(j: int) -> bool:
        return all(last_use[m] >= j for m, left in residual.items() if left)

    def go(j: int) -> bool:
        if j == len(variables):
            return not any(residual.values())
        if not feasible_from(j):
            return False
        cap = min([bounds[j]] + [residual[m] // cover[j].count(m) for m in set(cover[j])])
        for k in range(cap, -1, -1):
            for m in cover[j]:
                residual[m] -= k
            chosen[j] = k
            if go(j + 1):
                return True
            for m in cover[j]:
                residual[m] += k
        chosen[j] = 0
        return False

    if not go(0):
        return None
    mu = RealPartitionFamily(ground, {p: k for p, k in zip(variables, chosen) if k})
    assert kappa(mu) == nu
    return mu


@dataclass(frozen=True)
class ConsistencyReport:
    integral_exists: bool
    system_exists: bool
    members_checked: int
    members_in_kernel: bool

    @property
    def consistent(self) -> bool:
        return self.integral_exists == self.system_exists and self.members_in_kernel


def kernel_consistency_check(splits: SplitMultiset, **guards) -> ConsistencyReport:
    """Integral feasibility of ν_Σ against the tree criterion, and every
    enumerated member of P(Σ) against the kernel."""
    from .represent import MAX_ORACLE_GROUND, enumerate_systems, has_partition_system

    if not is_compatible_system(splits):
        raise ValueError("the consistency check is defined for compatible split systems")
    nu = RealSplitFamily.from_multiset(splits)
    found = integral_point(nu, max_ground=MAX_ORACLE_GROUND, allow_large=guards.get("allow_large", False))
    exists = has_partition_system(splits)
    members = enumerate_systems(splits, **guards).systems
    in_kernel = all(kappa(integral_family_of(pi)) == nu for pi in members)
    if found is not None:
        assert sigma_of_system(found.to_multiset()) == splits
    return ConsistencyReport(found is not None, exists, len(members), in_kernel and (bool(members) == exists))


def parse_value(text: str) -> Fraction:
    """Non-negative rational from ``"3"``, ``"1/2"`` or ``"0.25"``."""
    v = Fraction(text)
    if v < 0:
        raise ValueError(f"negative value {text!r}")
    return v


def split_family(ground: GroundSet, pairs: Iterable[tuple[str, object]]) -> RealSplitFamily:
    """``split_family(X, [("12|34", 1), ("1|234", "1/2")])``."""
    return RealSplitFamily(ground, {Split.parse(ground, s): _as_fraction(v) for s, v in pairs})
