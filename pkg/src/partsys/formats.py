"""Text formats: split and partition multisets, split families, trees, graphs.

All line formats share one layout: an optional ``X: ...`` header naming the
ground set, then one record per line, ``#`` starting a comment. See
docs/formats.md for the grammars.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .core import GroundSet, Partition, PartitionMultiset, Split, SplitMultiset, Taxon, taxon_key
from .decide import SimpleGraph
from .kernel import RealPartitionFamily, RealSplitFamily
from .tree import WeakTree, WeightedTree, from_weighted, to_weighted

RESERVED = set("|/*#(),:;'")
_TOKEN = re.compile(r"[|/*]|[^\s|/*]+")


class ParseError(ValueError):
    """A syntax or content error at a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Document:
    kind: str
    ground: GroundSet
    payload: object


def taxon_from_token(token: str) -> Taxon:
    """Canonical all-digit tokens become ints; anything else stays a string."""
    if token.isdigit() and str(int(token)) == token:
        return int(token)
    return token


def format_taxon(x: Taxon) -> str:
    return str(x)


def _check_taxon(token: str, line: int, col: int) -> None:
    bad = RESERVED.intersection(token)
    if bad:
        raise ParseError(f"taxon {token!r} contains reserved character {min(bad)!r}", line, col)


def _lines(text: str):
    """(line number, stripped content, offset of content) for non-blank lines."""
    for no, raw in enumerate(text.split("\n"), 1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.lstrip()
        if stripped:
            yield no, stripped, len(body) - len(stripped)


def _tokens(content: str, offset: int) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + offset + 1) for m in _TOKEN.finditer(content)]


def _parse_header(content: str, offset: int, line: int, tag: str) -> list[tuple[str, int]]:
    body = content[len(tag) + 1:]
    toks = _tokens(body, offset + len(tag) + 1)
    for t, c in toks:
        _check_taxon(t, line, c)
    return toks


def _ground_from_header(toks: list[tuple[str, int]], line: int) -> GroundSet:
    seen: dict[Taxon, int] = {}
    for t, c in toks:
        x = taxon_from_token(t)
        if x in seen:
            raise ParseError(f"duplicate taxon {t!r} in header", line, c)
        seen[x] = c
    if len(seen) < 2:
        raise ParseError("the ground set needs at least two taxa", line, 1)
    return GroundSet(seen)


def _split_header(text: str, tag: str = "X"):
    """The ground set from the header plus the remaining record lines."""
    ground = None
    records = []
    for no, content, offset in _lines(text):
        if content.startswith(tag + ":"):
            if ground is not None:
                raise ParseError("duplicate header", no, offset + 1)
            if records:
                raise ParseError("the header must come first", no, offset + 1)
            ground = _ground_from_header(_parse_header(content, offset, no, tag), no)
        else:
            records.append((no, content, offset))
    if ground is None:
        raise ParseError(f"missing '{tag}:' header", 1, 1)
    return ground, records


def _block(ground: GroundSet, toks: list[tuple[str, int]], line: int, col: int) -> int:
    """Mask of a block of taxon tokens; digits may be packed ("123")."""
    if not toks:
        raise ParseError("empty side", line, col)
    if len(toks) == 1 and taxon_from_token(toks[0][0]) not in ground and ground.compact:
        t, c = toks[0]
        toks = [(ch, c + i) for i, ch in enumerate(t)]
    mask = 0
    for t, c in toks:
        x = taxon_from_token(t)
        if x not in ground:
            raise ParseError(f"unknown taxon {t!r}", line, c)
        bit = 1 << ground.index(x)
        if mask & bit:
            raise ParseError(f"taxon {t!r} repeated", line, c)
        mask |= bit
    return mask


def _record(ground, content, offset, line, sep, value: Callable[[str, int], object]):
    """Blocks separated by ``sep`` and an optional ``* value`` suffix."""
    mult = None
    star = content.find("*")
    if star >= 0:
        raw = content[star + 1:]
        tail = raw.split()
        if len(tail) != 1:
            raise ParseError("expected a single value after '*'", line, offset + star + 1)
        col = offset + star + 2 + (len(raw) - len(raw.lstrip()))
        mult = value(tail[0], col)
        content = content[:star]
    toks = _tokens(content, offset)
    blocks, current, start = [], [], offset + 1
    for t, c in toks:
        if t in "|/" and len(t) == 1:
            if t != sep:
                raise ParseError(f"unexpected {t!r}; blocks are separated by {sep!r}", line, c)
            blocks.append((current, start))
            current, start = [], c
        else:
            current.append((t, c))
    blocks.append((current, start))
    masks = [_block(ground, b, line, c) for b, c in blocks]
    return masks, mult


def _positive_int(line: int) -> Callable[[str, int], int]:
    def conv(text: str, col: int) -> int:
        if not text.isdigit() or int(text) < 1:
            raise ParseError(f"multiplicity must be a positive integer, got {text!r}", line, col)
        return int(text)

    return conv


def _rational(line: int) -> Callable[[str, int], Fraction]:
    def conv(text: str, col: int) -> Fraction:
        try:
            v = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad rational value {text!r}", line, col) from None
        if v < 0:
            raise ParseError(f"value must be non-negative, got {text!r}", line, col)
        return v

    return conv


def _split_of(ground, masks, line, offset) -> Split:
    if len(masks) != 2:
        raise ParseError(f"a split has two sides, got {len(masks)}", line, offset + 1)
    a, b = masks
    if a & b or a | b != ground.full:
        raise ParseError("the two sides must be complementary", line, offset + 1)
    return Split.from_mask(ground, a)


def parse_splits(text: str) -> SplitMultiset:
    ground, records = _split_header(text)
    counts: dict[Split, int] = {}
    for line, content, offset in records:
        masks, m = _record(ground, content, offset, line, "|", _positive_int(line))
        s = _split_of(ground, masks, line, offset)
        counts[s] = counts.get(s, 0) + (m or 1)
    return SplitMultiset(ground, counts)


def _header(ground: GroundSet, tag: str = "X") -> str:
    for x in ground.elements:
        if RESERVED.intersection(str(x)) or not str(x) or any(ch.isspace() for ch in str(x)):
            raise ValueError(f"taxon {x!r} cannot be written in this format")
    return f"{tag}: " + " ".join(map(format_taxon, ground.elements))


def _side(ground: GroundSet, mask: int) -> str:
    return " ".join(map(format_taxon, ground.members(mask)))


def _suffix(value) -> str:
    return "" if value == 1 else f" * {value}"


def serialize_splits(splits: SplitMultiset) -> str:
    g = splits.ground
    out = [_header(g)]
    for s, m in splits.items():
        out.append(f"{_side(g, s.mask)} | {_side(g, s.other)}{_suffix(m)}")
    return "\n".join(out) + "\n"


def parse_partitions(text: str) -> PartitionMultiset:
    ground, records = _split_header(text)
    counts: dict[Partition, int] = {}
    for line, content, offset in records:
        masks, m = _record(ground, content, offset, line, "/", _positive_int(line))
        try:
            p = Partition.from_masks(ground, masks)
        except ValueError as err:
            raise ParseError(str(err), line, offset + 1) from None
        counts[p] = counts.get(p, 0) + (m or 1)
    return PartitionMultiset(ground, counts)


def _partition_line(p: Partition) -> str:
    return " / ".join(_side(p.ground, m) for m in p.masks)


def serialize_partitions(system: PartitionMultiset) -> str:
    out = [_header(system.ground)]
    out += [f"{_partition_line(p)}{_suffix(m)}" for p, m in system.items()]
    return "\n".join(out) + "\n"


def parse_family(text: str) -> RealSplitFamily:
    """Split family with rational values: ``1 2 | 3 4 * 1/2``."""
    ground, records = _split_header(text)
    values: dict[Split, Fraction] = {}
    for line, content, offset in records:
        masks, v = _record(ground, content, offset, line, "|", _rational(line))
        s = _split_of(ground, masks, line, offset)
        values[s] = values.get(s, Fraction(0)) + (Fraction(1) if v is None else v)
    return RealSplitFamily(ground, values)


def serialize_family(family: Union[RealSplitFamily, RealPartitionFamily]) -> str:
    g = family.ground
    out = [_header(g)]
    for key, v in family.items():
        body = f"{_side(g, key.mask)} | {_side(g, key.other)}" if isinstance(key, Split) else _partition_line(key)
        out.append(f"{body}{_suffix(v)}")
    return "\n".join(out) + "\n"


def parse_graph(text: str) -> SimpleGraph:
    vertices = None
    edges = []
    seen: set[frozenset] = set()
    for line, content, offset in _lines(text):
        if content.startswith("V:"):
            if vertices is not None:
                raise ParseError("duplicate header", line, offset + 1)
            toks = _parse_header(content, offset, line, "V")
            vertices = {}
            for t, c in toks:
                x = taxon_from_token(t)
                if x in vertices:
                    raise ParseError(f"duplicate vertex {t!r}", line, c)
                vertices[x] = c
            continue
        if vertices is None:
            raise ParseError("missing 'V:' header", line, offset + 1)
        toks = _tokens(content, offset)
        if len(toks) != 2:
            raise ParseError("an edge line holds exactly two vertices", line, offset + 1)
        (a, ca), (b, cb) = toks
        u, v = taxon_from_token(a), taxon_from_token(b)
        for x, t, c in ((u, a, ca), (v, b, cb)):
            if x not in vertices:
                raise ParseError(f"unknown vertex {t!r}", line, c)
        if u == v:
            raise ParseError(f"loop at {a!r}", line, cb)
        if frozenset((u, v)) in seen:
            raise ParseError(f"parallel edge {a} {b}", line, ca)
        seen.add(frozenset((u, v)))
        edges.append((u, v))
    if vertices is None:
        raise ParseError("missing 'V:' header", 1, 1)
    return SimpleGraph(vertices, edges)


def serialize_graph(graph: SimpleGraph) -> str:
    out = ["V: " + " ".join(map(str, graph.vertices))]
    for e in graph.edges:
        u, v = sorted(e, key=taxon_key)
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


# -- weighted Newick -----------------------------------------------------


def _newick_label(ground: GroundSet, mask: int) -> str:
    names = [format_taxon(x) for x in ground.members(mask)]
    if len(names) > 1:
        return "'" + ",".join(names) + "'"
    return "".join(names)


def serialize_tree(tree: WeakTree) -> str:
    """Weighted Newick, rooted at the vertex holding the smallest taxon.

    Chains of unlabelled degree-2 vertices become integer branch lengths;
    ``:1`` is left implicit. Children appear in order of their smallest taxon.
    """
    g = tree.ground
    _header(g)
    w = to_weighted(tree)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(w.n)]
    for u, v, wt in w.edges:
        adj[u].append((v, wt))
        adj[v].append((u, wt))
    root = next(v for v in range(w.n) if w.labels[v] & 1)

    def render(v: int, parent: int) -> tuple[int, str]:
        # subtrees are compared by their smallest taxon, as a lowest-bit mask
        pieces = []
        for c, wt in adj[v]:
            if c != parent:
                m, text = render(c, v)
                pieces.append((m, text + (f":{wt}" if wt != 1 else "")))
        pieces.sort(key=lambda item: item[0])
        own = w.labels[v] & -w.labels[v]
        low = min([m for m, _ in pieces] + ([own] if own else []))
        inner = "(" + ",".join(t for _, t in pieces) + ")" if pieces else ""
        return low, inner + _newick_label(g, w.labels[v])

    return _header(g) + "\n" + render(root, -1)[1] + ";\n"


class _NewickReader:
    def __init__(self, text: str, line: int, col0: int):
        self.s = text
        self.i = 0
        self.line = line
        self.col0 = col0

    def error(self, msg: str):
        return ParseError(msg, self.line, self.col0 + self.i)

    def peek(self) -> str:
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.i += 1

    def label(self) -> list[tuple[str, int]]:
        if self.peek() == "'":
            start = self.i
            end = self.s.find("'", self.i + 1)
            if end < 0:
                raise self.error("unterminated quoted label")
            body = self.s[self.i + 1:end]
            self.i = end + 1
            names = [n.strip() for n in body.split(",")]
            if any(not n for n in names):
                self.i = start
                raise self.error("empty taxon in quoted label")
            return [(n, self.col0 + start) for n in names]
        start = self.i
        while self.i < len(self.s) and self.s[self.i] not in "(),:;'" and not self.s[self.i].isspace():
            self.i += 1
        text = self.s[start:self.i]
        return [(text, self.col0 + start)] if text else []

    def length(self) -> int:
        if self.peek() != ":":
            return 1
        self.i += 1
        self.peek()
        start = self.i
        while self.i < len(self.s) and self.s[self.i] not in "(),:;" and not self.s[self.i].isspace():
            self.i += 1
        text = self.s[start:self.i]
        if not text.isdigit() or int(text) < 1:
            self.i = start
            raise self.error(f"branch length must be a positive integer, got {text!r}")
        return int(text)

    def subtree(self, nodes: list, edges: list) -> int:
        v = len(nodes)
        nodes.append([])
        if self.peek() == "(":
            self.i += 1
            while True:
                c = self.subtree(nodes, edges)
                edges.append((v, c, self.length()))
                if self.peek() == ",":
                    self.i += 1
                    continue
                self.expect(")")
                break
        nodes[v] = self.label()
        return v


def parse_tree(text: str) -> WeakTree:
    """Inverse of ``serialize_tree`` up to vertex numbering."""
    declared = None
    body = []
    for line, content, offset in _lines(text):
        if content.startswith("X:") and not body:
            if declared is not None:
                raise ParseError("duplicate header", line, offset + 1)
            declared = _ground_from_header(_parse_header(content, offset, line, "X"), line)
        else:
            body.append((line, content, offset))
    if len(body) != 1:
        line = body[1][0] if len(body) > 1 else 1
        raise ParseError("expected exactly one Newick line", line, 1)
    line, content, offset = body[0]
    reader = _NewickReader(content, line, offset + 1)
    nodes: list = []
    edges: list = []
    reader.subtree(nodes, edges)
    if reader.peek() == ":":
        raise reader.error("the root has no branch length")
    reader.expect(";")
    if reader.peek():
        raise reader.error("trailing text after ';'")
    names: dict[Taxon, int] = {}
    for labels in nodes:
        for t, c in labels:
            _check_taxon(t, line, c)
            x = taxon_from_token(t)
            if x in names:
                raise ParseError(f"taxon {t!r} labels two vertices", line, c)
            names[x] = c
    ground = declared or GroundSet(names)
    for x, c in names.items():
        if x not in ground:
            raise ParseError(f"taxon {x!r} is not in the header", line, c)
    missing = [x for x in ground.elements if x not in names]
    if missing:
        raise ParseError(f"taxon {missing[0]!r} from the header does not appear", line, 1)
    masks = tuple(ground.mask(taxon_from_token(t) for t, _ in labels) for labels in nodes)
    try:
        return from_weighted(WeightedTree(ground, masks, tuple(edges)))
    except ValueError as err:
        raise ParseError(str(err), line, 1) from None


_PARSERS = {
    "splits": parse_splits,
    "partitions": parse_partitions,
    "family": parse_family,
    "tree": parse_tree,
    "graph": parse_graph,
}


def parse_document(kind: str, text: str) -> Document:
    if kind not in _PARSERS:
        raise ValueError(f"unknown document kind {kind!r}; expected one of {', '.join(sorted(_PARSERS))}")
    payload = _PARSERS[kind](text)
    ground = GroundSet(payload.vertices) if kind == "graph" else payload.ground
    return Document(kind, ground, payload)
