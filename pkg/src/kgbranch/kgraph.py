"""Finite k-graphs presented by a coloured 1-skeleton and factorization squares.

A morphism is stored in colour-ascending normal form: all colour-1 edges
first, then colour 2, and so on.  Any word of edges is brought to normal form
by swapping adjacent out-of-order colour pairs through the squares, which
terminates because each swap removes one colour inversion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

__all__ = [
    "Edge",
    "Square",
    "Path",
    "KGraph",
    "KGraphError",
    "ValidationReport",
    "Problem",
    "ExhaustiveResult",
    "validate_kgraph",
    "join",
    "meet",
]


class KGraphError(ValueError):
    """Structural problem with graph data or a misuse of paths."""


Degree = tuple[int, ...]


def join(n: Degree, m: Degree) -> Degree:
    return tuple(max(a, b) for a, b in zip(n, m))


def meet(n: Degree, m: Degree) -> Degree:
    return tuple(min(a, b) for a, b in zip(n, m))


def _leq(n: Degree, m: Degree) -> bool:
    return all(a <= b for a, b in zip(n, m))


@dataclass(frozen=True)
class Edge:
    id: str
    color: int
    source: str
    range: str


@dataclass(frozen=True)
class Square:
    """``left[0] left[1] = right[0] right[1]`` with colours (i, j) on the left, i < j."""

    left: tuple[str, str]
    right: tuple[str, str]


@dataclass(frozen=True, order=True)
class Path:
    degree: Degree
    word: tuple[str, ...]
    range: str
    source: str

    @property
    def length(self) -> int:
        return len(self.word)

    def is_vertex(self) -> bool:
        return not self.word

    def __str__(self):
        return " ".join(self.word) if self.word else self.range


@dataclass
class Problem:
    kind: str
    detail: str
    witness: tuple = ()

    def as_dict(self) -> dict:
        return {"kind": self.kind, "detail": self.detail, "witness": list(self.witness)}


@dataclass
class ValidationReport:
    problems: list[Problem] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def kinds(self) -> set[str]:
        return {p.kind for p in self.problems}

    def as_dict(self) -> dict:
        return {"valid": self.ok, "problems": [p.as_dict() for p in self.problems]}


@dataclass(frozen=True)
class ExhaustiveResult:
    exhaustive: bool
    witness: Optional[Path] = None

    def __bool__(self):
        return self.exhaustive


class KGraph:
    """A k-graph Lambda given by its 1-skeleton and square table.

    The constructor only rejects structural defects (unknown endpoints,
    duplicate ids, bad colours).  The factorization rules are checked by
    :func:`validate_kgraph`.
    """

    def __init__(self, rank: int, vertices: Iterable[str], edges: Iterable[Edge], squares: Iterable[Square] = ()):
        self.rank = int(rank)
        if self.rank < 1:
            raise KGraphError("rank must be positive")
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise KGraphError("duplicate vertex id")
        vset = set(self.vertices)
        self.edges: dict[str, Edge] = {}
        for e in edges:
            if e.id in self.edges or e.id in vset:
                raise KGraphError(f"duplicate id {e.id!r}")
            if not 1 <= e.color <= self.rank:
                raise KGraphError(f"edge {e.id!r} has colour {e.color} outside 1..{self.rank}")
            for end in (e.source, e.range):
                if end not in vset:
                    raise KGraphError(f"edge {e.id!r} has dangling endpoint {end!r}")
            self.edges[e.id] = e
        self.squares: tuple[Square, ...] = tuple(squares)
        # optional limit on the total degree a refinement may reach
        self.refine_cap: Optional[int] = None
        self._convex: Optional[bool] = None
        for sq in self.squares:
            for x in sq.left + sq.right:
                if x not in self.edges:
                    raise KGraphError(f"square mentions unknown edge {x!r}")
        self._fwd: dict[tuple[str, str], tuple[str, str]] = {}
        self._bwd: dict[tuple[str, str], tuple[str, str]] = {}
        for sq in self.squares:
            self._fwd.setdefault(sq.left, sq.right)
            self._bwd.setdefault(sq.right, sq.left)
        self._in: dict[tuple[str, int], tuple[str, ...]] = {}
        for v in self.vertices:
            for c in range(1, self.rank + 1):
                self._in[(v, c)] = tuple(e.id for e in self.edges.values() if e.range == v and e.color == c)

    # -- basic data -------------------------------------------------------
    def color(self, e: str) -> int:
        return self.edges[e].color

    def unit(self, i: int) -> Degree:
        return tuple(1 if j == i - 1 else 0 for j in range(self.rank))

    def zero(self) -> Degree:
        return (0,) * self.rank

    def in_edges(self, v: str, color: Optional[int] = None) -> tuple[str, ...]:
        """Edges of the given colour whose range is ``v`` (i.e. the set vLambda^{e_i})."""
        if color is None:
            return tuple(itertools.chain.from_iterable(self._in[(v, c)] for c in range(1, self.rank + 1)))
        return self._in[(v, color)]

    def edges_of_color(self, c: int) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges.values() if e.color == c)

    def is_row_finite_no_sources(self) -> bool:
        return all(self._in[(v, c)] for v in self.vertices for c in range(1, self.rank + 1))

    def vertex(self, v: str) -> Path:
        if v not in self.vertices:
            raise KGraphError(f"unknown vertex {v!r}")
        return Path(self.zero(), (), v, v)

    def edge(self, e: str) -> Path:
        ed = self.edges[e]
        return Path(self.unit(ed.color), (e,), ed.range, ed.source)

    def path(self, *word: str) -> Path:
        """Normal form of the morphism spelled by ``word`` (edges in any colour order)."""
        if not word:
            raise KGraphError("empty word; use vertex()")
        if len(word) == 1 and word[0] in self.vertices:
            return self.vertex(word[0])
        p = self.edge(word[0])
        for e in word[1:]:
            p = self.compose(p, self.edge(e))
        return p

    # -- swaps and normal forms ---------------------------------------------
    def _swap(self, a: str, b: str) -> tuple[str, str]:
        if self.color(a) < self.color(b):
            table = self._fwd
        else:
            table = self._bwd
        try:
            return table[(a, b)]
        except KeyError:
            raise KGraphError(f"no factorization square for the pair ({a}, {b})") from None

    def _reorder(self, word: list[str], ranks: list) -> list[str]:
        word, ranks = list(word), list(ranks)
        changed = True
        while changed:
            changed = False
            for i in range(len(word) - 1):
                if ranks[i] > ranks[i + 1]:
                    word[i], word[i + 1] = self._swap(word[i], word[i + 1])
                    ranks[i], ranks[i + 1] = ranks[i + 1], ranks[i]
                    changed = True
        return word

    def _check_word(self, word) -> None:
        for a, b in zip(word, word[1:]):
            if self.edges[a].source != self.edges[b].range:
                raise KGraphError(f"edges {a} and {b} are not composable")

    def compose(self, p: Path, q: Path) -> Path:
        if p.source != q.range:
            raise KGraphError(f"cannot compose {p} with {q}: s(p)={p.source} but r(q)={q.range}")
        if not p.word:
            return q
        if not q.word:
            return p
        word = list(p.word + q.word)
        word = self._reorder(word, [self.color(e) for e in word])
        deg = tuple(a + b for a, b in zip(p.degree, q.degree))
        return Path(deg, tuple(word), p.range, q.source)

    def factorize(self, p: Path, n: Degree) -> tuple[Path, Path]:
        """The unique ``(prefix, suffix)`` with ``d(prefix) = n`` and ``prefix suffix = p``."""
        n = tuple(n)
        if len(n) != self.rank or not _leq(n, p.degree) or min(n) < 0:
            raise KGraphError(f"degree {n} is not <= d(p) = {p.degree}")
        seen = [0] * (self.rank + 1)
        ranks = []
        for e in p.word:
            c = self.color(e)
            ranks.append((0 if seen[c] < n[c - 1] else 1, c))
            seen[c] += 1
        word = self._reorder(list(p.word), ranks)
        cut = sum(n)
        head, tail = tuple(word[:cut]), tuple(word[cut:])
        mid = self.edges[head[-1]].source if head else p.range
        rest = tuple(a - b for a, b in zip(p.degree, n))
        return Path(n, head, p.range, mid), Path(rest, tail, mid, p.source)

    def extends(self, p: Path, prefix: Path) -> bool:
        """True when ``p = prefix alpha`` for some alpha."""
        if p.range != prefix.range or not _leq(prefix.degree, p.degree):
            return False
        return self.factorize(p, prefix.degree)[0] == prefix

    # -- enumeration ------------------------------------------------------------
    def enumerate_paths(self, v: str, n: Degree) -> list[Path]:
        """All normal forms in vLambda^n, sorted."""
        n = tuple(n)
        colors = [c for c in range(1, self.rank + 1) for _ in range(n[c - 1])]
        out = []

        def grow(word: tuple[str, ...], tip: str, i: int):
            if i == len(colors):
                out.append(Path(n, word, v, tip))
                return
            for e in self._in[(tip, colors[i])]:
                grow(word + (e,), self.edges[e].source, i + 1)

        grow((), v, 0)
        return sorted(out)

    def lambda_min(self, mu: Path, nu: Path) -> list[tuple[Path, Path]]:
        """Minimal common extensions: pairs (alpha, beta) with mu alpha = nu beta of degree d(mu) v d(nu)."""
        if mu.range != nu.range:
            raise KGraphError(f"lambda_min needs r(mu) = r(nu); got {mu.range} and {nu.range}")
        top = join(mu.degree, nu.degree)
        gap = tuple(a - b for a, b in zip(top, mu.degree))
        out = []
        for alpha in self.enumerate_paths(mu.source, gap):
            head, beta = self.factorize(self.compose(mu, alpha), nu.degree)
            if head == nu:
                out.append((alpha, beta))
        return sorted(out)

    def is_locally_convex(self) -> bool:
        """No vertex receives colours i and j along edges whose sources miss one of them."""
        for v in self.vertices:
            for i in range(1, self.rank + 1):
                for j in range(1, self.rank + 1):
                    if i == j or not self._in[(v, j)]:
                        continue
                    if any(not self._in[(self.edges[e].source, j)] for e in self._in[(v, i)]):
                        return False
        return True

    def refine(self, p: Path, n: Degree) -> list[Path]:
        """Split the cylinder of ``p`` into cylinders of its boundary-truncated extensions up to degree n.

        The pieces are the p alpha with d(p alpha) <= n v d(p) that admit no
        further edge in a colour still below that bound (the set Lambda^{<=n}).
        """
        if self.refine_cap is not None and sum(n) > self.refine_cap:
            raise KGraphError(f"refinement to degree {tuple(n)} exceeds the depth cap {self.refine_cap}")
        if self._convex is None:
            self._convex = self.is_locally_convex()
        out = set()
        seen = {p}
        stack = [p]
        while stack:
            q = stack.pop()
            grew = False
            for i in range(self.rank):
                if q.degree[i] < n[i] and self._in[(q.source, i + 1)]:
                    grew = True
                    for e in self._in[(q.source, i + 1)]:
                        r = self.compose(q, self.edge(e))
                        if r not in seen:
                            seen.add(r)
                            stack.append(r)
                    # locally convex graphs reach every piece growing one colour at a time
                    if self._convex:
                        break
            if not grew:
                out.add(q)
        return sorted(out)

    def is_exhaustive(self, v: str, E: Iterable[Path]) -> ExhaustiveResult:
        E = list(E)
        for nu in E:
            if nu.range != v:
                raise KGraphError(f"{nu} is not in {v}Lambda")
        top = self.zero()
        for nu in E:
            top = join(top, nu.degree)
        if self._convex is None:
            self._convex = self.is_locally_convex()
        if not self._convex:
            # a vertex may receive colours whose continuations die out; look one step further
            top = tuple(t + 1 for t in top)
        for beta in self.refine(self.vertex(v), top):
            if not any(self.lambda_min(beta, nu) for nu in E):
                return ExhaustiveResult(False, beta)
        return ExhaustiveResult(True)

    def minimal_exhaustive_edge_sets(self, v: str, limit: int = 14) -> Optional[list[tuple[str, ...]]]:
        """All inclusion-minimal exhaustive subsets of the edges with range v.

        Returns None when v receives more than ``limit`` edges.
        """
        cand = self.in_edges(v)
        if len(cand) > limit:
            return None
        found: list[tuple[str, ...]] = []
        for size in range(1, len(cand) + 1):
            for combo in itertools.combinations(cand, size):
                if any(set(f) <= set(combo) for f in found):
                    continue
                if self.is_exhaustive(v, [self.edge(e) for e in combo]):
                    found.append(combo)
        return found

    # -- misc -------------------------------------------------------------------
    def single_vertex(self) -> bool:
        return len(self.vertices) == 1

    def __repr__(self):
        return f"KGraph(rank={self.rank}, vertices={len(self.vertices)}, edges={len(self.edges)}, squares={len(self.squares)})"


def validate_kgraph(g: KGraph) -> ValidationReport:
    """Check that the square table defines a k-graph on the skeleton of ``g``."""
    rep = ValidationReport()
    E = g.edges
    seen_left: dict[tuple[str, str], int] = {}
    for sq in g.squares:
        (a, b), (c, d) = sq.left, sq.right
        ca, cb, cc, cd = E[a].color, E[b].color, E[c].color, E[d].color
        if not (ca < cb and cc == cb and cd == ca):
            rep.problems.append(Problem("shape", f"square {a} {b} = {c} {d} has colours ({ca},{cb}) = ({cc},{cd})", (a, b, c, d)))
            continue
        if E[a].source != E[b].range or E[c].source != E[d].range:
            rep.problems.append(Problem("shape", f"square {a} {b} = {c} {d} has a non-composable side", (a, b, c, d)))
            continue
        if E[a].range != E[c].range or E[b].source != E[d].source:
            rep.problems.append(Problem("shape", f"square {a} {b} = {c} {d} does not commute (endpoints differ)", (a, b, c, d)))
            continue
        seen_left[sq.left] = seen_left.get(sq.left, 0) + 1

    for (a, b), count in sorted(seen_left.items()):
        if count > 1:
            rep.problems.append(Problem("duplicate", f"pair ({a}, {b}) appears in {count} squares", (a, b)))

    left_pairs, right_pairs = [], []
    for a in E.values():
        for b in E.values():
            if a.source != b.range or a.color == b.color:
                continue
            (left_pairs if a.color < b.color else right_pairs).append((a.id, b.id))
    for pair in sorted(left_pairs):
        if pair not in seen_left:
            rep.problems.append(Problem("missing", f"missing square for pair ({pair[0]}, {pair[1]})", pair))

    images: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for sq in g.squares:
        if sq.left in seen_left:
            images.setdefault(sq.right, []).append(sq.left)
    for r, lefts in sorted(images.items()):
        if len(lefts) > 1:
            rep.problems.append(Problem("bijectivity", f"pair ({r[0]}, {r[1]}) is the image of {len(lefts)} pairs", tuple(r) + tuple(x for lf in lefts for x in lf)))
    for pair in sorted(right_pairs):
        if pair not in images:
            rep.problems.append(Problem("bijectivity", f"pair ({pair[0]}, {pair[1]}) is not the image of any square", pair))

    if g.rank >= 3 and rep.ok:
        for triple in _ascending_triples(g):
            try:
                a = _route(g, list(triple), (0, 1, 0))
                b = _route(g, list(triple), (1, 0, 1))
            except KGraphError:
                continue
            if a != b:
                rep.problems.append(Problem("associativity", f"triple {' '.join(triple)} reorders to {' '.join(a)} and {' '.join(b)}", tuple(triple)))
    return rep


def _ascending_triples(g: KGraph):
    E = g.edges
    for a in sorted(E.values(), key=lambda e: e.id):
        for b in g.in_edges(a.source):
            if E[b].color <= a.color:
                continue
            for c in g.in_edges(E[b].source):
                if E[c].color > E[b].color:
                    yield (a.id, b, c)


def _route(g: KGraph, word: list[str], positions) -> tuple[str, ...]:
    for p in positions:
        word[p], word[p + 1] = g._swap(word[p], word[p + 1])
    return tuple(word)
