"""Finite unions of boundary-path cylinders Z(mu) = mu Lambda^{<=inf}.

Boundary paths are never built.  Every question is answered on generators:
a set is refined to a common degree with :meth:`KGraph.refine`, whose pieces
are pairwise equal or disjoint and each either inside or outside any
cylinder of smaller degree.
"""

from __future__ import annotations

from typing import Iterable

from .kgraph import KGraph, KGraphError, Path, join

__all__ = ["CylinderSet", "cyl_intersect", "cyl_equal_ae", "shift"]


class CylinderSet:
    """An antichain of paths denoting the union of their cylinders."""

    __slots__ = ("graph", "terms")

    def __init__(self, graph: KGraph, terms: Iterable[Path] = ()):
        self.graph = graph
        self.terms: tuple[Path, ...] = _reduce(graph, terms)

    # constructors
    @classmethod
    def vertex(cls, g: KGraph, v: str) -> "CylinderSet":
        return cls(g, [g.vertex(v)])

    @classmethod
    def of(cls, g: KGraph, *paths: Path) -> "CylinderSet":
        return cls(g, paths)

    def is_empty(self) -> bool:
        # every cylinder of a finite graph contains a boundary path
        return not self.terms

    def level(self) -> tuple[int, ...]:
        top = self.graph.zero()
        for t in self.terms:
            top = join(top, t.degree)
        return top

    def pieces(self, n) -> frozenset[Path]:
        """The partition of this set into boundary-truncated cylinders of degree up to n."""
        out = set()
        for t in self.terms:
            out.update(self.graph.refine(t, n))
        return frozenset(out)

    # set algebra
    def __or__(self, other: "CylinderSet") -> "CylinderSet":
        return CylinderSet(self.graph, self.terms + other.terms)

    def __and__(self, other: "CylinderSet") -> "CylinderSet":
        return cyl_intersect(self, other)

    def __sub__(self, other: "CylinderSet") -> "CylinderSet":
        g = self.graph
        if not g.is_locally_convex():
            raise KGraphError("set difference of cylinder unions needs a locally convex graph")
        n = join(self.level(), other.level())
        keep = self.pieces(n) - other.pieces(n)
        return CylinderSet(g, keep)

    def uncovered(self, other: "CylinderSet") -> tuple[Path, ...]:
        """Terms p of this set with Z(p) not contained in ``other``.

        Z(p) lies in the union of the Z(q) exactly when the paths alpha with
        (alpha, beta) in Lambda^min(p, q) form an exhaustive set at s(p).
        """
        g = self.graph
        out = []
        for p in self.terms:
            ext = []
            for q in other.terms:
                if q.range == p.range:
                    ext.extend(alpha for alpha, _ in g.lambda_min(p, q))
            if any(a.is_vertex() for a in ext):
                continue
            if not ext or not g.is_exhaustive(p.source, ext):
                out.append(p)
        return tuple(out)

    def __le__(self, other: "CylinderSet") -> bool:
        return not self.uncovered(other)

    def equals(self, other: "CylinderSet") -> bool:
        return cyl_equal_ae(self, other)

    # prefix maps
    def prepend(self, mu: Path) -> "CylinderSet":
        """Image under x -> mu x of the part of this set lying in Z(s(mu))."""
        g = self.graph
        return CylinderSet(g, [g.compose(mu, t) for t in self.terms if t.range == mu.source])

    def strip(self, mu: Path) -> "CylinderSet":
        """Image of (this set intersected with Z(mu)) under the inverse prefix map."""
        g = self.graph
        inside = self & CylinderSet(g, [mu])
        return CylinderSet(g, [g.factorize(t, mu.degree)[1] for t in inside.terms])

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        body = ", ".join(f"Z({t})" for t in self.terms)
        return "{" + body + "}"


def _reduce(g: KGraph, terms: Iterable[Path]) -> tuple[Path, ...]:
    ts = sorted(set(terms), key=lambda p: (sum(p.degree), p))
    kept: list[Path] = []
    for t in ts:
        if not any(g.extends(t, k) for k in kept):
            kept.append(t)
    return tuple(sorted(kept))


def cyl_intersect(a: CylinderSet, b: CylinderSet) -> CylinderSet:
    g = a.graph
    out = []
    for mu in a.terms:
        for nu in b.terms:
            if mu.range != nu.range:
                continue
            out.extend(g.compose(mu, alpha) for alpha, _ in g.lambda_min(mu, nu))
    return CylinderSet(g, out)


def cyl_equal_ae(a: CylinderSet, b: CylinderSet) -> bool:
    """Exact equality of the denoted subsets (counting measure: a.e. means everywhere)."""
    return a <= b and b <= a


def shift(g: KGraph, prefix: Path, m) -> CylinderSet:
    """sigma^m applied to Z(prefix)."""
    m = tuple(m)
    if any(x > y for x, y in zip(m, prefix.degree)):
        raise KGraphError(f"shift by {m} exceeds the degree {prefix.degree} of {prefix}")
    return CylinderSet(g, [g.factorize(prefix, m)[1]])
