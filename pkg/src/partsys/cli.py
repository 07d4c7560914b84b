"""Command-line interface: ``partsys <command> FILE [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import decide, kernel, represent
from .core import (
    GuardExceeded,
    Partition,
    PartitionMultiset,
    Split,
    SplitMultiset,
    find_incompatible_pair,
    is_strongly_compatible,
    taxon_key,
)
from .formats import (
    ParseError,
    parse_family,
    parse_graph,
    parse_splits,
    serialize_family,
    serialize_partitions,
    serialize_splits,
    serialize_tree,
)
from .tree import NotEvenError, diameter, tree_from_splits

GUARD_ENV = "PARTSYS_ALLOW_LARGE"

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

EPILOG = f"""\
exit codes: 0 success, 1 negative answer (for example an odd tree or an
uncolourable graph), 2 usage or input error, 3 size guard exceeded.

environment: setting {GUARD_ENV}=1 has the same effect as --allow-large.
"""


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- JSON encodings ----------------------------------------------------------


def _taxa(ground, mask) -> list:
    return list(ground.members(mask))


def _j_split(s: Split) -> list:
    return [_taxa(s.ground, s.mask), _taxa(s.ground, s.other)]


def _j_partition(p: Partition) -> list:
    return [_taxa(p.ground, m) for m in p.masks]


def _j_system(pi: Optional[PartitionMultiset]):
    if pi is None:
        return None
    return {
        "size": pi.size,
        "partitions": [{"parts": _j_partition(p), "multiplicity": m} for p, m in pi.items()],
    }


def _j_value(v: Fraction) -> str:
    return str(v)


def _j_family(fam) -> list:
    out = []
    for key, v in fam.items():
        enc = _j_split(key) if isinstance(key, Split) else _j_partition(key)
        out.append({"key": enc, "value": _j_value(v)})
    return out


# -- helpers -----------------------------------------------------------------


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise _Failure(EXIT_USAGE, f"cannot read {path}: {err.strerror}") from None


def _load_splits(path: str) -> SplitMultiset:
    return parse_splits(_read(path))


def _require_compatible(splits: SplitMultiset) -> None:
    pair = find_incompatible_pair(splits)
    if pair is not None:
        raise _Failure(EXIT_USAGE, f"splits {pair[0]} and {pair[1]} are incompatible; use 'decide' for general inputs")


def _system_text(pi: PartitionMultiset) -> str:
    return serialize_partitions(pi)


class _Run:
    def __init__(self, args):
        self.args = args
        self.allow_large = args.allow_large or os.environ.get(GUARD_ENV, "") not in ("", "0")
        self.out: list[str] = []
        self.data: dict = {}

    def say(self, text: str) -> None:
        self.out.append(text.rstrip("\n"))


# -- subcommands -------------------------------------------------------------


def cmd_check(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    pair = find_incompatible_pair(splits)
    run.data.update(compatible=pair is None, incompatible_pair=None)
    if pair is not None:
        run.data.update(exists=None, incompatible_pair=[_j_split(pair[0]), _j_split(pair[1])])
        run.say(f"incompatible: {pair[0]} and {pair[1]}")
        return EXIT_NEGATIVE
    rep = represent.report(splits)
    run.data.update(
        exists=rep.exists,
        witness_odd_pair=list(rep.witness_odd_pair) if rep.witness_odd_pair else None,
        max_size=rep.max_size,
        min_size=rep.min_size,
    )
    if not rep.exists:
        x, y = rep.witness_odd_pair
        run.say(f"compatible, not even: taxa {x} and {y} are at odd distance")
        return EXIT_NEGATIVE
    run.say(f"compatible and even: partition systems exist (sizes {rep.min_size}..{rep.max_size})")
    return EXIT_OK


def cmd_tree(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    _require_compatible(splits)
    tree = tree_from_splits(splits)
    text = serialize_tree(tree)
    run.data.update(newick=text.splitlines()[-1], vertices=tree.n, edges=tree.num_edges, diameter=diameter(tree))
    run.say(text)
    return EXIT_OK


def _odd(splits: SplitMultiset):
    pair = represent.odd_witness(splits)
    if pair is not None:
        raise _Failure(EXIT_NEGATIVE, f"no partition system: taxa {pair[0]} and {pair[1]} are at odd distance")


def cmd_strong(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    _require_compatible(splits)
    _odd(splits)
    pi = represent.strongly_compatible_system(splits)
    run.data.update(system=_j_system(pi))
    run.say(_system_text(pi))
    return EXIT_OK


def cmd_min(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    _require_compatible(splits)
    _odd(splits)
    pi = represent.min_size_partition(tree_from_splits(splits))
    run.data.update(system=_j_system(pi))
    run.say(_system_text(pi))
    return EXIT_OK


def cmd_enumerate(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    found = represent.enumerate_systems(splits, run.args.cap, allow_large=run.allow_large)
    run.data.update(count=len(found), truncated=found.truncated, systems=[_j_system(s) for s in found])
    for i, pi in enumerate(found, 1):
        lines = _system_text(pi).splitlines()
        if i == 1:
            run.say(lines[0])
        run.say(f"# system {i} (size {pi.size})")
        run.say("\n".join(lines[1:]))
    if found.truncated:
        run.say(f"# stopped after {run.args.cap} systems")
    if not found.systems:
        run.say("no partition system")
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_hier(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    _require_compatible(splits)
    _odd(splits)
    pi = represent.hierarchical_system(splits)
    run.data.update(equidistant=pi is not None, system=_j_system(pi))
    if pi is None:
        run.say("the tree has no equidistant vertex")
        return EXIT_NEGATIVE
    run.say(_system_text(pi))
    return EXIT_OK


def cmd_decide(run: _Run) -> int:
    splits = _load_splits(run.args.file)
    pi = decide.solve_partition_system(splits, allow_large=run.allow_large)
    run.data.update(exists=pi is not None, system=_j_system(pi))
    if pi is None:
        run.say("no partition system")
        return EXIT_NEGATIVE
    run.say(_system_text(pi))
    return EXIT_OK


def _load_graph(path: str):
    return parse_graph(_read(path))


def cmd_reduce(run: _Run) -> int:
    splits = decide.reduce_cubic_graph(_load_graph(run.args.file))
    run.data.update(splits=[{"split": _j_split(s), "multiplicity": m} for s, m in splits.items()])
    run.say(serialize_splits(splits))
    return EXIT_OK


def cmd_color3(run: _Run) -> int:
    graph = _load_graph(run.args.file)
    result = decide.edge_chromatic_is_three(graph, allow_large=run.allow_large)
    run.data.update(colourable=result.colourable, matchings=_j_matchings(result.matchings))
    if not result.colourable:
        run.say("not 3-edge-colourable")
        return EXIT_NEGATIVE
    run.say("3-edge-colourable")
    for i, m in enumerate(_j_matchings(result.matchings), 1):
        run.say(f"matching {i}: " + ", ".join(f"{u}-{v}" for u, v in m))
    return EXIT_OK


def _j_matchings(matchings):
    if matchings is None:
        return None
    return [
        [sorted(e, key=taxon_key) for e in sorted(m, key=decide.SimpleGraph._edge_key)]
        for m in matchings
    ]


def cmd_kernel(run: _Run) -> int:
    nu = parse_family(_read(run.args.file))
    poly = kernel.kernel_polytope(nu, allow_large=run.allow_large)
    verts = poly.vertices
    run.data.update(
        variables=len(poly.variables),
        eliminated=len(poly.eliminated),
        vertex_count=len(verts),
        dimension=poly.dimension,
    )
    run.say(f"variables: {len(poly.variables)} (eliminated {len(poly.eliminated)})")
    run.say(f"dimension: {poly.dimension}")
    run.say(f"vertices: {len(verts)}")
    code = EXIT_OK
    if run.args.vertices:
        run.data["vertex_list"] = [_j_family(v) for v in verts]
        for i, v in enumerate(verts, 1):
            run.say(f"# vertex {i}")
            run.say("\n".join(serialize_family(v).splitlines()[1:]))
    if run.args.integral:
        point = kernel.integral_point(nu, allow_large=run.allow_large)
        run.data["integral_point"] = None if point is None else _j_family(point)
        if point is None:
            run.say("integral point: none")
            code = EXIT_NEGATIVE
        else:
            run.say("integral point:")
            run.say("\n".join(serialize_family(point).splitlines()[1:]))
    return code


def cmd_oracle(run: _Run) -> int:
    if not run.args.i_know_this_is_exponential:
        raise _Failure(EXIT_USAGE, "the oracle is exponential; pass --i-know-this-is-exponential")
    splits = _load_splits(run.args.file)
    _require_compatible(splits)
    members = represent.enumerate_systems(splits, allow_large=run.allow_large).systems
    checks: dict[str, bool] = {}
    exists = represent.has_partition_system(splits)
    checks["existence matches evenness"] = bool(members) == exists
    if exists:
        strong = represent.strongly_compatible_system(splits)
        smallest = represent.min_size_partition(tree_from_splits(splits))
        sizes = [s.size for s in members]
        checks["strong system is a member"] = strong in members
        checks["strong system is the only strongly compatible member"] = [
            s for s in members if is_strongly_compatible(s)
        ] == [strong]
        checks["strong system is maximum"] = strong.size == max(sizes)
        checks["minimum construction is minimum"] = smallest in members and smallest.size == min(sizes)
        checks["diameter bound"] = all(diameter(tree_from_splits(splits)) <= 2 * s.size for s in members)
        if represent.hierarchical_system(splits) is not None:
            checks["hierarchical iff minimum"] = represent.certify_min_iff_hierarchical(
                splits, allow_large=run.allow_large
            ).holds
    if len(splits.ground) <= represent.MAX_ORACLE_GROUND:
        checks["kernel consistency"] = kernel.kernel_consistency_check(splits, allow_large=run.allow_large).consistent
    run.data.update(members=len(members), checks=checks)
    run.say(f"members: {len(members)}")
    for name, ok in checks.items():
        run.say(f"{'ok  ' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(checks.values()) else EXIT_NEGATIVE


COMMANDS = {
    "check": (cmd_check, "compatibility and evenness, with witnesses"),
    "tree": (cmd_tree, "build the tree of a compatible split system (weighted Newick)"),
    "strong": (cmd_strong, "the strongly compatible (maximum) partition system"),
    "min": (cmd_min, "a minimum-size partition system"),
    "enumerate": (cmd_enumerate, "every partition system with the given splits (exponential)"),
    "hier": (cmd_hier, "equidistance test and the hierarchical partition system"),
    "decide": (cmd_decide, "general solver for arbitrary split systems (exponential)"),
    "reduce": (cmd_reduce, "cubic graph to split system"),
    "color3": (cmd_color3, "3-edge-colourability of a cubic graph, with matchings"),
    "kernel": (cmd_kernel, "kernel polytope of a rational split family"),
    "oracle": (cmd_oracle, "cross-check every construction against exhaustive enumeration"),
}


def _common(defaults: bool) -> argparse.ArgumentParser:
    # sub-commands suppress their defaults so flags given before the command survive
    default = False if defaults else argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=default, help="print a machine-readable report")
    common.add_argument(
        "--allow-large",
        action="store_true",
        default=default,
        help=f"lift the size guards on exponential routines (or set {GUARD_ENV}=1)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(True)
    inner = _common(False)
    parser = argparse.ArgumentParser(
        prog="partsys",
        description="Partition systems realizing split systems.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, parents=[inner], epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("file", help="input file, or - for standard input")
        if name == "enumerate":
            p.add_argument("--cap", type=int, default=None, help="stop after this many systems")
        if name == "kernel":
            p.add_argument("--vertices", action="store_true", help="list the vertices")
            p.add_argument("--integral", action="store_true", help="search for an integral point")
        if name == "oracle":
            p.add_argument("--i-know-this-is-exponential", action="store_true",
                           help="required: confirms the exhaustive run")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    state = _Run(args)
    func = COMMANDS[args.command][0]
    message = None
    try:
        code = func(state)
    except _Failure as f:
        code, message = f.code, str(f)
    except GuardExceeded as err:
        code, message = EXIT_GUARD, f"{err} (pass --allow-large or set {GUARD_ENV}=1 to override)"
    except NotEvenError as err:
        code, message = EXIT_NEGATIVE, str(err)
    except (ParseError, ValueError) as err:
        code, message = EXIT_USAGE, str(err)
    if args.json:
        report = {"command": args.command, "exit_code": code, **state.data}
        if message:
            report["error"] = message
        print(json.dumps(report, sort_keys=True, indent=2, default=str), file=stdout)
    else:
        if state.out:
            print("\n".join(state.out), file=stdout)
        if message:
            print(f"partsys {args.command}: {message}", file=stderr)
    return code


def main() -> None:
    sys.exit(run())
