"""Acceptance run: ten criteria, each reported as one PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import random
import re
import sys
import time
from fractions import Fraction

import pytest

import invariants as inv
from conftest import PI_LISTING, SIGMA_STAR
from corpus import random_compatible_corpus, random_equidistant_splits, random_system
from partsys.cli import run as cli_run
from partsys.core import (
    GroundSet,
    PartitionMultiset,
    SplitMultiset,
    is_hierarchical,
    is_strongly_compatible,
    sigma_of_system,
)
from partsys.decide import (
    bridged_cubic_graph,
    is_perfect_matching,
    k33_graph,
    matchings_from_system,
    petersen_graph,
    prism_graph,
    random_cubic_graph,
    reduce_cubic_graph,
    solve_partition_system,
    three_edge_colouring,
)
from partsys.formats import parse_partitions, serialize_splits
from partsys.kernel import kernel_polytope, integral_point, split_family
from partsys.represent import (
    certify_min_iff_hierarchical,
    enumerate_systems,
    hierarchical_system,
    min_size_partition,
    pi_min,
    strongly_compatible_system,
)
from partsys.tree import diameter, is_even_tree, tree_from_splits, vertex_partition

X6 = GroundSet(range(1, 7))
X4 = GroundSet(range(1, 5))
PIS = {k: PartitionMultiset.parse(X6, *v) for k, v in PI_LISTING.items()}
CORPUS_SEED = 20240501
CORPUS_SIZE = 500

RESULTS: dict[int, str] = {}


def _cli(*argv) -> tuple[int, str]:
    out = io.StringIO()
    code = cli_run(list(argv), stdout=out, stderr=io.StringIO())
    return code, out.getvalue()


def _sigma_star_file(tmp_dir) -> str:
    path = tmp_dir / "sigma_star.splits"
    path.write_text(serialize_splits(sigma_of_system(PIS[1])))
    return str(path)


def _corpus():
    return list(random_compatible_corpus(CORPUS_SIZE, CORPUS_SEED, max_ground=6, max_size=14))


# -- criteria ------------------------------------------------------------------


def criterion_1(tmp_dir):
    start = time.perf_counter()
    sigma = sigma_of_system(PIS[1])
    found = enumerate_systems(sigma).systems
    elapsed = time.perf_counter() - start
    code, out = _cli("enumerate", _sigma_star_file(tmp_dir))
    header, _, body = out.partition("\n")
    blocks = re.split(r"^# system.*$", body, flags=re.M)[1:]
    listed = [parse_partitions(header + "\n" + block) for block in blocks]
    ok = (
        sigma == SplitMultiset.parse(X6, *SIGMA_STAR)
        and len(found) == 6
        and set(found) == set(PIS.values())
        and code == 0
        and sorted(listed, key=str) == sorted(PIS.values(), key=str)
        and elapsed < 1
    )
    return ok, f"{len(found)} systems, {elapsed:.3f}s"


def criterion_2(tmp_dir):
    start = time.perf_counter()
    sigma = sigma_of_system(PIS[1])
    strong = strongly_compatible_system(sigma)
    members = enumerate_systems(sigma).systems
    strong_members = [m for m in members if is_strongly_compatible(m)]
    elapsed = time.perf_counter() - start
    code, out = _cli("strong", _sigma_star_file(tmp_dir))
    ok = (
        strong == PIS[1]
        and strong.size == 4
        and strong_members == [strong]
        and max(m.size for m in members) == 4
        and code == 0
        and parse_partitions(out) == PIS[1]
        and elapsed < 1
    )
    return ok, f"size {strong.size}, {len(strong_members)} strong member(s), {elapsed:.3f}s"


def criterion_3(tmp_dir):
    start = time.perf_counter()
    sigma = sigma_of_system(PIS[1])
    smallest = min_size_partition(tree_from_splits(sigma))
    least = min(m.size for m in enumerate_systems(sigma).systems)
    elapsed = time.perf_counter() - start
    code, out = _cli("min", _sigma_star_file(tmp_dir))
    ok = (
        smallest == PIS[6]
        and smallest.size == 3 == least
        and code == 0
        and parse_partitions(out) == PIS[6]
        and elapsed < 1
    )
    return ok, f"size {smallest.size}, oracle minimum {least}, {elapsed:.3f}s"


def criterion_4(tmp_dir):
    start = time.perf_counter()
    corpus = _corpus()
    bad = sum(bool(enumerate_systems(s).systems) != is_even_tree(tree_from_splits(s)) for s in corpus)
    even = sum(is_even_tree(tree_from_splits(s)) for s in corpus)
    elapsed = time.perf_counter() - start
    ok = len(corpus) >= 500 and bad == 0 and elapsed < 120
    return ok, f"{len(corpus)} instances ({even} even), {bad} discrepancies, {elapsed:.1f}s"


def criterion_5(tmp_dir):
    violations = checked = pi_min_cases = 0
    for s in _corpus():
        tree = tree_from_splits(s)
        members = enumerate_systems(s).systems
        if not members:
            continue
        delta = diameter(tree)
        for m in members:
            checked += 1
            violations += delta > 2 * m.size
        if any(tree.is_labelled(v) for v in tree.interior()):
            continue
        pi_min_cases += 1
        least = min(m.size for m in members)
        p = pi_min(tree)
        violations += not any(m.size == least and p in m for m in members)
    ok = violations == 0 and pi_min_cases > 0
    return ok, f"{checked} members, {pi_min_cases} unlabelled-interior trees, {violations} violations"


def criterion_6(tmp_dir):
    rng = random.Random(CORPUS_SEED + 6)
    start = time.perf_counter()
    violations = members = 0
    for _ in range(200):
        s = random_equidistant_splits(rng)
        h = hierarchical_system(s)
        report = certify_min_iff_hierarchical(s)
        members += report.members
        if h is None or sigma_of_system(h) != s or not is_hierarchical(h):
            violations += 1
            continue
        violations += h.size != report.minimum_size or not report.holds
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 120
    return ok, f"200 instances, {members} members, {violations} violations, {elapsed:.1f}s"


def _witness_ok(graph) -> bool:
    pi = solve_partition_system(reduce_cubic_graph(graph))
    if pi is None:
        return False
    matchings = matchings_from_system(pi, graph)
    return (
        len(matchings) == 3
        and all(is_perfect_matching(graph, m) for m in matchings)
        and frozenset().union(*matchings) == set(graph.edges)
    )


def criterion_7(tmp_dir):
    start = time.perf_counter()
    named = _witness_ok(prism_graph()) and _witness_ok(k33_graph())
    for g in (petersen_graph(), bridged_cubic_graph()):
        named = named and solve_partition_system(reduce_cubic_graph(g)) is None and three_edge_colouring(g) is None
    rng = random.Random(CORPUS_SEED + 7)
    disagreements = colourable = 0
    for i in range(50):
        g = random_cubic_graph(6 + 2 * (i % 4), rng)
        by_reduction = solve_partition_system(reduce_cubic_graph(g)) is not None
        direct = three_edge_colouring(g) is not None
        colourable += direct
        disagreements += by_reduction != direct or (by_reduction and not _witness_ok(g))
    elapsed = time.perf_counter() - start
    ok = named and disagreements == 0 and elapsed < 300
    return ok, f"named graphs {'ok' if named else 'wrong'}, 50 random ({colourable} colourable), {disagreements} disagreements, {elapsed:.1f}s"


def criterion_8(tmp_dir):
    start = time.perf_counter()
    nu0 = split_family(X4, [("1|234", 1), ("2|134", 1), ("3|124", 1), ("4|123", 1), ("12|34", 1)])
    poly = kernel_polytope(nu0)
    point = integral_point(nu0)
    exact = all(isinstance(x, Fraction) for v in poly.vertex_points() for x in v)
    elapsed = time.perf_counter() - start
    ok = poly.dimension == 3 and len(poly.vertices) == 5 and point is None and exact and elapsed < 10
    return ok, f"dimension {poly.dimension}, {len(poly.vertices)} vertices, integral point {point}, {elapsed:.2f}s"


def criterion_9(tmp_dir):
    rng = random.Random(CORPUS_SEED + 9)
    bad = sum(bool(inv.kappa_bridge(random_system(rng))) for _ in range(500))
    return bad == 0, f"500 systems, {bad} discrepancies"


def criterion_10(tmp_dir):
    rng = random.Random(CORPUS_SEED + 10)
    counts: dict[str, int] = {}

    def tally(name, found):
        counts[name] = counts.get(name, 0) + len(found)

    for _ in range(200):
        tally("format round-trips", inv.format_round_trips(rng))
        tally("two-colour counting", inv.two_colour_count(inv.random_weak_tree(rng, 20)))
        tree = inv.random_weak_tree(rng)
        tally("parity", inv.parity_soundness(tree))
        tally("decomposition", inv.decomposition(tree, oracle=False))
        tally("display 0-or-2", inv.display_law(tree, [vertex_partition(tree, v) for v in range(tree.n) if not tree.labels[v]]))
    for s in random_compatible_corpus(200, CORPUS_SEED + 11):
        tree = tree_from_splits(s)
        tally("tree round-trip", inv.tree_round_trip(s))
        tally("decomposition", inv.decomposition(tree))
        if is_even_tree(tree):
            members = enumerate_systems(s).systems
            tally("display 0-or-2", inv.display_law(tree, {p for m in members for p in m.support()}))
            tally("converse display", inv.converse_display(tree, rng, samples=128))
    total = sum(counts.values())
    return total == 0, ", ".join(f"{k} {v}" for k, v in counts.items()) + " violations"


CRITERIA = {
    1: ("family reproduction", criterion_1),
    2: ("strongly compatible system", criterion_2),
    3: ("minimum system", criterion_3),
    4: ("existence iff even", criterion_4),
    5: ("diameter bound and pi_min in a minimum member", criterion_5),
    6: ("hierarchical iff minimum", criterion_6),
    7: ("cubic graph reduction", criterion_7),
    8: ("kernel polytope", criterion_8),
    9: ("kappa bridge", criterion_9),
    10: ("structural properties", criterion_10),
}


def _report(n: int, tmp_dir) -> bool:
    name, func = CRITERIA[n]
    try:
        ok, detail = func(tmp_dir)
    except Exception as err:  # a crash is a failure, reported like one
        ok, detail = False, f"{type(err).__name__}: {err}"
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS[n] = line
    print(line)
    return ok


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, tmp_path):
    assert _report(n, tmp_path), RESULTS[n]


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        results = [_report(n, Path(d)) for n in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
