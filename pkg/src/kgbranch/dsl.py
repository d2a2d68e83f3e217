"""Text formats for graphs (``.kg``) and interval branching systems (``.bs``).

Graph file::

    RANK 2                 # optional; defaults to the largest colour used
    VERTICES
      v
    EDGES
      f1 1 v v             # id colour source range
      e  2 v v
    SQUARES
      f1 e = e f1          # either side may be written first

Branching-system file::

    GRAPH lambda2.kg       # relative to this file, else the bundled corpus
    DIMENSION 1
    DOMAIN
      v: [0,1]             # several lines for one vertex form a union
    MAPS
      f1: [0,1] -> (1/2*x)
      e1: [0,1] x [-1,1] -> (x^2, 1/2*y + 1/2)
    EXHAUSTIVE
      v: e

Expressions are ``a*x + b`` (rational a, b) or ``c*x^r`` where ``c`` may
carry radicals such as ``sqrt(2)`` or ``2^(1/2)``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from importlib import resources
from pathlib import Path as FSPath
from typing import Optional, Union

from .boxes import BoxError, BoxSet, make_box
from .branching import BranchingError, IntervalBranchingSystem
from .kgraph import Edge, KGraph, KGraphError, Square
from .maps import Affine, MapError, Monomial, PiecewiseMap, make_monomial
from .scalars import Surd, UnsupportedArithmetic, _add, fmt, normalize, rpow, rsign

__all__ = [
    "DSLError",
    "parse_graph",
    "parse_bs",
    "parse_exhaustive",
    "serialize_graph",
    "serialize_bs",
    "load_graph",
    "load_bs",
    "resolve",
    "corpus_dir",
    "parse_map_expr",
]


class DSLError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, source: str = "<input>"):
        self.msg, self.line, self.col, self.source = msg, line, col, source
        super().__init__(f"{source}:{line}:{col}: {msg}" if line else f"{source}: {msg}")


def corpus_dir() -> FSPath:
    return FSPath(str(resources.files("kgbranch") / "corpus"))


def resolve(name: Union[str, FSPath], base: Optional[FSPath] = None) -> FSPath:
    """Locate a file: as given, relative to ``base``, then in the bundled corpus."""
    p = FSPath(name)
    candidates = [p]
    if base is not None and not p.is_absolute():
        candidates.append(base / p)
    candidates.append(corpus_dir() / p.name)
    for c in candidates:
        if c.is_file():
            return c
    raise FileNotFoundError(f"cannot find {name}")


# ---------------------------------------------------------------------------
# lines and sections


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield n, raw, body.rstrip()


def _col(raw: str, token: str) -> int:
    i = raw.find(token)
    return i + 1 if i >= 0 else 1


_GRAPH_SECTIONS = {"VERTICES", "EDGES", "SQUARES"}


def parse_graph(text: str, source: str = "<input>") -> KGraph:
    rank = None
    section = None
    vertices: list[str] = []
    edges: list[tuple[int, str, Edge]] = []
    squares_raw: list[tuple[int, str, list[str]]] = []
    seen: dict[str, int] = {}

    def claim(name, n, raw):
        if name in seen:
            raise DSLError(f"duplicate id {name!r} (first declared on line {seen[name]})", n, _col(raw, name), source)
        seen[name] = n

    for n, raw, body in _lines(text):
        words = body.split()
        head = words[0].upper()
        if head == "RANK" and len(words) == 2 and section is None:
            try:
                rank = int(words[1])
            except ValueError:
                raise DSLError(f"bad rank {words[1]!r}", n, _col(raw, words[1]), source) from None
            continue
        if head in _GRAPH_SECTIONS and len(words) == 1:
            section = head
            continue
        if section is None:
            raise DSLError(f"expected a section header, found {words[0]!r}", n, _col(raw, words[0]), source)
        if section == "VERTICES":
            for w in words:
                claim(w, n, raw)
                vertices.append(w)
        elif section == "EDGES":
            if len(words) != 4:
                raise DSLError("edge lines are 'id colour source range'", n, 1, source)
            eid, color, s, r = words
            try:
                c = int(color)
            except ValueError:
                raise DSLError(f"bad colour {color!r}", n, _col(raw, color), source) from None
            claim(eid, n, raw)
            edges.append((n, raw, Edge(eid, c, s, r)))
        else:
            m = re.fullmatch(r"\s*(\S+)\s+(\S+)\s*=\s*(\S+)\s+(\S+)\s*", body)
            if not m:
                raise DSLError("square lines are 'a b = c d'", n, 1, source)
            squares_raw.append((n, raw, list(m.groups())))

    vset = set(vertices)
    for n, raw, e in edges:
        for end in (e.source, e.range):
            if end not in vset:
                raise DSLError(f"edge {e.id!r} has undeclared endpoint {end!r}", n, _col(raw, end), source)
    if rank is None:
        rank = max([e.color for _, _, e in edges], default=1)
    for n, raw, e in edges:
        if not 1 <= e.color <= rank:
            raise DSLError(f"colour {e.color} outside 1..{rank}", n, _col(raw, str(e.color)), source)
    colors = {e.id: e.color for _, _, e in edges}
    squares = []
    for n, raw, ids in squares_raw:
        for x in ids:
            if x not in colors:
                raise DSLError(f"unknown edge {x!r} in square", n, _col(raw, x), source)
        a, b, c, d = ids
        if colors[a] == colors[b]:
            raise DSLError(f"square side {a} {b} is single-coloured", n, _col(raw, a), source)
        if colors[a] < colors[b]:
            squares.append(Square((a, b), (c, d)))
        else:
            squares.append(Square((c, d), (a, b)))
    try:
        return KGraph(rank, vertices, [e for _, _, e in edges], squares)
    except KGraphError as exc:
        raise DSLError(str(exc), 0, 0, source) from None


def serialize_graph(g: KGraph) -> str:
    out = [f"RANK {g.rank}", "VERTICES"]
    out += [f"  {v}" for v in g.vertices]
    out.append("EDGES")
    out += [f"  {e.id} {e.color} {e.source} {e.range}" for e in g.edges.values()]
    out.append("SQUARES")
    out += [f"  {sq.left[0]} {sq.left[1]} = {sq.right[0]} {sq.right[1]}" for sq in g.squares]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\S))")


class _ExprParser:
    """Recursive descent over + - * / ^ ( ) with numbers, one variable and sqrt."""

    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            num, name, sym = m.groups()
            start = m.start(m.lastindex)
            if num is not None:
                self.toks.append(("num", Fraction(int(num)), start))
            elif name is not None:
                self.toks.append(("name", name, start))
            else:
                self.toks.append((sym, sym, start))
            pos = m.end()
        self.i = 0
        self.var = None

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind=None):
        if self.i >= len(self.toks):
            raise ValueError("unexpected end of expression")
        t = self.toks[self.i]
        if kind is not None and t[0] != kind:
            raise ValueError(f"expected {kind!r} at position {t[2] + 1}")
        self.i += 1
        return t

    # values are dicts exponent -> coefficient
    def parse(self):
        v = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"unexpected {self.toks[self.i][1]!r} at position {self.toks[self.i][2] + 1}")
        return v

    def expr(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        v = _scale(self.term(), sign)
        while self.peek() in ("+", "-"):
            s = -1 if self.take()[0] == "-" else 1
            v = _plus(v, _scale(self.term(), s))
        return v

    def term(self):
        v = self.power()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            w = self.power()
            if op == "*":
                v = _times(v, w)
            else:
                c = _const(w)
                if c is None or rsign(c) == 0:
                    raise ValueError("division by a non-constant or by zero")
                v = _scale(v, Surd.of(c) ** -1)
        return v

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            if self.peek() == "-":
                self.take()
                ex = -self._rational_exponent()
            else:
                ex = self._rational_exponent()
            c = _const(base)
            if c is not None:
                return {Fraction(0): rpow(c, ex)}
            if base == {Fraction(1): Fraction(1)}:
                return {ex: Fraction(1)}
            raise ValueError("only x or a constant may be raised to a power")
        return base

    def _rational_exponent(self) -> Fraction:
        if self.peek() == "(":
            self.take()
            v = _const(self.expr())
            self.take(")")
        else:
            v = self.take("num")[1]
        if not isinstance(normalize(v), Fraction):
            raise ValueError("exponents must be rational")
        return Fraction(normalize(v))

    def atom(self):
        kind = self.peek()
        if kind == "num":
            return {Fraction(0): self.take()[1]}
        if kind == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        if kind == "name":
            _, name, pos = self.take()
            if name == "sqrt":
                self.take("(")
                c = _const(self.expr())
                self.take(")")
                if c is None or rsign(c) < 0:
                    raise ValueError("sqrt needs a nonnegative constant")
                return {Fraction(0): rpow(c, Fraction(1, 2))}
            if self.var is None:
                self.var = name
            elif name != self.var:
                raise ValueError(f"expression mixes variables {self.var!r} and {name!r}")
            return {Fraction(1): Fraction(1)}
        raise ValueError("expected a number, variable or '('")


def _const(v):
    if not v:
        return Fraction(0)
    if set(v) == {Fraction(0)}:
        return v[Fraction(0)]
    return None


def _scale(v, c):
    return {k: normalize(Surd.of(x) * Surd.of(c)) for k, x in v.items()}


def _plus(a, b):
    out = dict(a)
    for k, x in b.items():
        out[k] = _add(out[k], x) if k in out else x
    return {k: x for k, x in out.items() if rsign(x) != 0}


def _times(a, b):
    ca, cb = _const(a), _const(b)
    if ca is not None:
        return _scale(b, ca)
    if cb is not None:
        return _scale(a, cb)
    raise ValueError("products of two non-constant factors are not supported")


def parse_map_expr(text: str):
    """A coordinate map ``a*x + b`` or ``c*x^r``."""
    p = _ExprParser(text)
    try:
        v = p.parse()
    except (ValueError, ZeroDivisionError, UnsupportedArithmetic) as exc:
        raise ValueError(f"bad expression {text!r}: {exc}") from None
    v = {k: x for k, x in v.items() if rsign(x) != 0}
    keys = set(v)
    if keys <= {Fraction(0), Fraction(1)} and Fraction(1) in keys:
        a, b = normalize(v[Fraction(1)]), normalize(v.get(Fraction(0), Fraction(0)))
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return Affine(a, b)
        if b == 0:
            return make_monomial(a, 1)
    if len(keys) == 1:
        (r,) = keys
        if r > 0:
            try:
                return make_monomial(v[r], r)
            except MapError as exc:
                raise ValueError(f"bad expression {text!r}: {exc}") from None
    raise ValueError(f"bad expression {text!r}: expected a*x + b or c*x^r")


def parse_constant(text: str):
    p = _ExprParser(text)
    try:
        v = _const(p.parse())
    except (ValueError, ZeroDivisionError, UnsupportedArithmetic) as exc:
        raise ValueError(f"bad number {text!r}: {exc}") from None
    if v is None:
        raise ValueError(f"bad number {text!r}")
    return normalize(v)


def map_to_text(m, var: str = "x") -> str:
    if isinstance(m, Affine):
        lead = var if m.a == 1 else (f"-{var}" if m.a == -1 else f"{fmt(m.a)}*{var}")
        if m.b == 0:
            return lead
        return f"{lead} + {fmt(m.b)}" if m.b > 0 else f"{lead} - {fmt(-m.b)}"
    lead = "" if m.c == 1 else f"{fmt(m.c)}*"
    return f"{lead}{var}^({fmt(m.p)})"


# ---------------------------------------------------------------------------
# boxes

_INTERVAL = re.compile(r"\[([^\[\],]+),([^\[\],]+)\]")


def _parse_box(text: str, dim: Optional[int]):
    parts = [p.strip() for p in re.split(r"\s+x\s+|\s*×\s*", text.strip())]
    ivs = []
    for part in parts:
        m = _INTERVAL.fullmatch(part.replace(" ", ""))
        if not m:
            raise ValueError(f"bad interval {part!r}")
        ivs.append((parse_constant(m.group(1)), parse_constant(m.group(2))))
    if dim is not None and len(ivs) != dim:
        raise ValueError(f"box {text.strip()!r} has dimension {len(ivs)}, expected {dim}")
    return make_box(*ivs)


def _box_text(b) -> str:
    return " x ".join(f"[{fmt(lo)},{fmt(hi)}]" for lo, hi in b)


# ---------------------------------------------------------------------------
# branching systems

_BS_SECTIONS = {"DOMAIN", "MAPS", "EXHAUSTIVE"}
_VARS = ("x", "y")


def parse_exhaustive(text: str, graph: KGraph, source: str = "<input>") -> list[tuple[str, ...]]:
    out = []
    for n, raw, body in _lines(text):
        if body.strip().upper() == "EXHAUSTIVE":
            continue
        out.append(_exhaustive_line(body, graph, n, raw, source))
    return out


def _exhaustive_line(body, graph, n, raw, source):
    vertex = None
    if ":" in body:
        vertex, body = body.split(":", 1)
        vertex = vertex.strip()
    ids = body.split()
    if not ids:
        raise DSLError("empty exhaustive set", n, 1, source)
    for e in ids:
        if e not in graph.edges:
            raise DSLError(f"unknown edge {e!r}", n, _col(raw, e), source)
        if vertex is not None and graph.edges[e].range != vertex:
            raise DSLError(f"edge {e!r} does not have range {vertex!r}", n, _col(raw, e), source)
    return tuple(ids)


def parse_bs(text: str, source: str = "<input>", base: Optional[FSPath] = None, graph: Optional[KGraph] = None):
    """Parse a branching-system file; returns (system, graph file reference)."""
    section = None
    dim = None
    gref = None
    domains: dict[str, list] = {}
    pieces: dict[str, list] = {}
    exh_lines = []
    for n, raw, body in _lines(text):
        words = body.split()
        head = words[0].upper()
        if section is None and head == "GRAPH" and len(words) == 2:
            gref = words[1]
            continue
        if section is None and head == "DIMENSION" and len(words) == 2:
            if words[1] not in ("1", "2"):
                raise DSLError("dimension must be 1 or 2", n, _col(raw, words[1]), source)
            dim = int(words[1])
            continue
        if head in _BS_SECTIONS and len(words) == 1:
            section = head
            continue
        if section is None:
            raise DSLError(f"expected a header, found {words[0]!r}", n, _col(raw, words[0]), source)
        if section == "EXHAUSTIVE":
            exh_lines.append((n, raw, body))
            continue
        if ":" not in body:
            raise DSLError("expected 'name: ...'", n, 1, source)
        name, rest = body.split(":", 1)
        name = name.strip()
        try:
            if section == "DOMAIN":
                for part in re.split(r"\s*\bu\b\s*|\s*∪\s*", rest.strip()):
                    b = _parse_box(part, dim)
                    dim = dim or len(b)
                    domains.setdefault(name, []).append(b)
            else:
                if "->" not in rest:
                    raise ValueError("expected 'box -> (expr, ...)'")
                lhs, rhs = rest.split("->", 1)
                b = _parse_box(lhs, dim)
                dim = dim or len(b)
                rhs = rhs.strip()
                if not (rhs.startswith("(") and rhs.endswith(")")):
                    raise ValueError("map images are written '(expr, ...)'")
                exprs = _split_top(rhs[1:-1])
                if len(exprs) != dim:
                    raise ValueError(f"{len(exprs)} coordinate maps for dimension {dim}")
                maps = tuple(parse_map_expr(e) for e in exprs)
                pieces.setdefault(name, []).append((b, maps))
        except (ValueError, BoxError, MapError) as exc:
            raise DSLError(str(exc), n, _col(raw, rest.strip()[:1]) if rest.strip() else 1, source) from None

    if graph is None:
        if gref is None:
            raise DSLError("missing GRAPH line", 0, 0, source)
        try:
            path = resolve(gref, base)
        except FileNotFoundError as exc:
            raise DSLError(str(exc), 0, 0, source) from None
        graph = parse_graph(path.read_text(), str(path))
    if dim is None:
        dim = 1
    exhaustive = [_exhaustive_line(body, graph, n, raw, source) for n, raw, body in exh_lines]
    try:
        for v in domains:
            if v not in graph.vertices:
                raise BranchingError(f"unknown vertex {v!r} in DOMAIN")
        bs = IntervalBranchingSystem(
            graph,
            dim,
            {v: BoxSet(dim, bs_) for v, bs_ in domains.items()},
            {e: PiecewiseMap(dim, ps) for e, ps in pieces.items()},
            exhaustive,
        )
    except (BranchingError, MapError, BoxError) as exc:
        raise DSLError(str(exc), 0, 0, source) from None
    bs.graph_ref = gref
    return bs


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def serialize_bs(bs: IntervalBranchingSystem, graph_ref: Optional[str] = None) -> str:
    ref = graph_ref or getattr(bs, "graph_ref", None) or "graph.kg"
    out = [f"GRAPH {ref}", f"DIMENSION {bs.dim}", "DOMAIN"]
    for v in bs.graph.vertices:
        for b in bs.domains[v].boxes:
            out.append(f"  {v}: {_box_text(b)}")
    out.append("MAPS")
    for e in bs.graph.edges:
        for b, maps in bs.maps[e].pieces:
            exprs = ", ".join(map_to_text(m, _VARS[i]) for i, m in enumerate(maps))
            out.append(f"  {e}: {_box_text(b)} -> ({exprs})")
    if bs.exhaustive:
        out.append("EXHAUSTIVE")
        for E in bs.exhaustive:
            out.append(f"  {bs.graph.edges[E[0]].range}: {' '.join(E)}")
    return "\n".join(out) + "\n"


def load_graph(name) -> KGraph:
    path = resolve(name)
    return parse_graph(path.read_text(), str(path))


def load_bs(name) -> IntervalBranchingSystem:
    path = resolve(name)
    return parse_bs(path.read_text(), str(path), base=path.parent)
