"""Exact piecewise coordinatewise maps on boxes and their Radon-Nikodym derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .boxes import Box, BoxError, BoxSet, box_intersect, fmt_box, make_box
from .scalars import Real, Surd, UnsupportedArithmetic, _add, fmt, normalize, rcmp, rpow, rsign

__all__ = [
    "Affine",
    "Monomial",
    "Map1D",
    "GenMonomial",
    "PiecewiseMap",
    "UnsupportedComposition",
    "MapError",
    "make_monomial",
    "compose1",
    "map_compose",
    "map_equal_ae",
    "rn_derivative",
    "identity_map",
]


class UnsupportedComposition(ArithmeticError):
    """Composition leaves the affine/monomial classes."""


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class Affine:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.a == 0:
            raise MapError("affine slope must be nonzero")

    def __call__(self, x: Real) -> Real:
        return _add(normalize(Surd.of(x) * self.a) if isinstance(x, Surd) else self.a * x, self.b)

    def inverse(self) -> "Affine":
        return Affine(1 / self.a, -self.b / self.a)

    @property
    def increasing(self) -> bool:
        return self.a > 0

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0

    def derivative(self) -> "GenMonomial":
        return GenMonomial(abs(self.a), Fraction(0))

    def __str__(self):
        if self.is_identity():
            return "x"
        lead = "x" if self.a == 1 else f"{fmt(self.a)}*x"
        if self.b == 0:
            return lead
        return f"{lead} + {fmt(self.b)}" if self.b > 0 else f"{lead} - {fmt(-self.b)}"


@dataclass(frozen=True)
class Monomial:
    """x -> c * x**p on [0, inf), with c > 0 and p > 0."""

    c: Real
    p: Fraction

    def __call__(self, x: Real) -> Real:
        if rsign(x) < 0:
            raise MapError(f"monomial map evaluated at negative point {fmt(x)}")
        return normalize(Surd.of(self.c) * Surd.of(rpow(x, self.p))) if rsign(x) else Fraction(0)

    def inverse(self) -> "Map1D":
        q = 1 / self.p
        return make_monomial(rpow(self.c, -q), q)

    @property
    def increasing(self) -> bool:
        return True

    def is_identity(self) -> bool:
        return False

    def derivative(self) -> "GenMonomial":
        return GenMonomial(normalize(Surd.of(self.c) * self.p), self.p - 1)

    def __str__(self):
        lead = "" if self.c == 1 else f"{fmt(self.c)}*"
        return f"{lead}x^({fmt(self.p)})"


Map1D = Union[Affine, Monomial]


def make_monomial(c, p) -> Map1D:
    c, p = normalize(c), Fraction(p)
    if rsign(c) <= 0 or p <= 0:
        raise MapError("monomial maps need a positive coefficient and exponent")
    if p == 1 and isinstance(c, Fraction):
        return Affine(c, 0)
    return Monomial(c, p)


def _as_power(m: Map1D):
    if isinstance(m, Monomial):
        return m.c, m.p
    if m.b == 0 and m.a > 0:
        return m.a, Fraction(1)
    return None


def compose1(f: Map1D, g: Map1D) -> Map1D:
    """f o g."""
    if f.is_identity():
        return g
    if g.is_identity():
        return f
    if isinstance(f, Affine) and isinstance(g, Affine):
        return Affine(f.a * g.a, f.a * g.b + f.b)
    pf, pg = _as_power(f), _as_power(g)
    if pf is None or pg is None:
        raise UnsupportedComposition(f"cannot compose ({f}) o ({g}) exactly")
    (c1, p1), (c2, p2) = pf, pg
    return make_monomial(Surd.of(c1) * Surd.of(rpow(c2, p1)), p1 * p2)


@dataclass(frozen=True)
class GenMonomial:
    """c * x**e with c > 0; e = 0 gives a constant."""

    c: Real
    e: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", normalize(self.c))
        object.__setattr__(self, "e", Fraction(self.e))

    def __mul__(self, other: "GenMonomial") -> "GenMonomial":
        return GenMonomial(Surd.of(self.c) * Surd.of(other.c), self.e + other.e)

    def after(self, m: Map1D) -> "GenMonomial":
        """self o m."""
        if self.e == 0:
            return self
        pw = _as_power(m)
        if pw is None:
            raise UnsupportedComposition(f"cannot compose {self} with ({m})")
        d, p = pw
        return GenMonomial(Surd.of(self.c) * Surd.of(rpow(d, self.e)), self.e * p)

    def power(self, q) -> "GenMonomial":
        return GenMonomial(rpow(self.c, q), self.e * Fraction(q))

    def __call__(self, x: Real) -> Real:
        return normalize(Surd.of(self.c) * Surd.of(rpow(x, self.e))) if self.e else self.c

    def __str__(self):
        if self.e == 0:
            return fmt(self.c)
        return f"{fmt(self.c)}*x^({fmt(self.e)})"


ONE = GenMonomial(Fraction(1), Fraction(0))


def _apply_interval(m: Map1D, lo: Real, hi: Real):
    a, b = m(lo), m(hi)
    return (a, b) if m.increasing else (b, a)


def apply_box(maps: tuple[Map1D, ...], box: Box) -> Box:
    return tuple(_apply_interval(m, lo, hi) for m, (lo, hi) in zip(maps, box))


def _check_piece(box: Box, maps: tuple[Map1D, ...]):
    if len(box) != len(maps):
        raise MapError(f"piece {fmt_box(box)} has {len(maps)} coordinate maps")
    for m, (lo, _) in zip(maps, box):
        if isinstance(m, Monomial) and rsign(lo) < 0:
            raise MapError(f"monomial map {m} on piece {fmt_box(box)} which leaves [0, inf)")


class PiecewiseMap:
    """Finitely many (box, coordinate maps) pieces."""

    __slots__ = ("dim", "pieces")

    def __init__(self, dim: int, pieces: Iterable[tuple[Box, tuple[Map1D, ...]]]):
        self.dim = dim
        ps = []
        for box, maps in pieces:
            box = make_box(*box)
            maps = tuple(maps)
            _check_piece(box, maps)
            ps.append((box, maps))
        self.pieces: tuple[tuple[Box, tuple[Map1D, ...]], ...] = tuple(ps)

    @classmethod
    def identity(cls, domain: BoxSet) -> "PiecewiseMap":
        return cls(domain.dim, [(b, (Affine(1, 0),) * domain.dim) for b in domain.boxes])

    def domain(self) -> BoxSet:
        return BoxSet(self.dim, [b for b, _ in self.pieces])

    def image(self, subset: Optional[BoxSet] = None) -> BoxSet:
        """f(subset), or f(domain) when subset is None."""
        out = []
        for box, maps in self.pieces:
            if subset is None:
                out.append(apply_box(maps, box))
                continue
            for s in subset.boxes:
                inter = box_intersect(box, s)
                if inter is not None:
                    out.append(apply_box(maps, inter))
        return BoxSet(self.dim, out)

    def inverse(self) -> "PiecewiseMap":
        return PiecewiseMap(self.dim, [(apply_box(maps, box), tuple(m.inverse() for m in maps)) for box, maps in self.pieces])

    def restrict(self, subset: BoxSet) -> "PiecewiseMap":
        out = []
        for box, maps in self.pieces:
            for s in subset.boxes:
                inter = box_intersect(box, s)
                if inter is not None:
                    out.append((inter, maps))
        return PiecewiseMap(self.dim, out)

    def injectivity_witness(self) -> Optional[BoxSet]:
        """A non-null overlap of two piece domains or two piece images, if any."""
        for getter in (lambda p: p[0], lambda p: apply_box(p[1], p[0])):
            boxes = [getter(p) for p in self.pieces]
            for i in range(len(boxes)):
                for j in range(i + 1, len(boxes)):
                    inter = box_intersect(boxes[i], boxes[j])
                    if inter is not None:
                        return BoxSet(self.dim, [inter])
        return None

    def __call__(self, point):
        for box, maps in self.pieces:
            if all(rcmp(lo, x) <= 0 <= rcmp(hi, x) for (lo, hi), x in zip(box, point)):
                return tuple(m(x) for m, x in zip(maps, point))
        raise MapError("point outside the domain")

    def __str__(self):
        return "; ".join(
            f"{fmt_box(b)} -> ({', '.join(str(m).replace('x', v) for m, v in zip(ms, 'xy'))})" for b, ms in self.pieces
        )

    __repr__ = __str__


def identity_map(domain: BoxSet) -> PiecewiseMap:
    return PiecewiseMap.identity(domain)


def _compose_pieces(f: PiecewiseMap, g: PiecewiseMap):
    for gbox, gmaps in g.pieces:
        gimg = apply_box(gmaps, gbox)
        ginv = tuple(m.inverse() for m in gmaps)
        for fbox, fmaps in f.pieces:
            inter = box_intersect(gimg, fbox)
            if inter is None:
                continue
            try:
                maps = tuple(compose1(a, b) for a, b in zip(fmaps, gmaps))
            except UnsupportedComposition as exc:
                raise UnsupportedComposition(f"{exc} (pieces {fmt_box(fbox)} and {fmt_box(gbox)})") from None
            yield apply_box(ginv, inter), maps


def map_compose(f: PiecewiseMap, g: PiecewiseMap, *, strict: bool = True) -> PiecewiseMap:
    """f o g on the domain of g.

    With ``strict`` the image of g must lie in the domain of f up to a null set.
    """
    if strict:
        extra = g.image() - f.domain()
        if not extra.is_null():
            raise MapError(f"image of the inner map leaves the outer domain on {extra}")
    return PiecewiseMap(f.dim, _compose_pieces(f, g))


def map_equal_ae(f: PiecewiseMap, g: PiecewiseMap) -> bool:
    return map_difference(f, g) is None


def map_difference(f: PiecewiseMap, g: PiecewiseMap) -> Optional[BoxSet]:
    """None when f = g a.e.; otherwise a non-null box set where they differ."""
    df, dg = f.domain(), g.domain()
    sym = df ^ dg
    if not sym.is_null():
        return sym
    for fbox, fmaps in f.pieces:
        for gbox, gmaps in g.pieces:
            inter = box_intersect(fbox, gbox)
            if inter is not None and fmaps != gmaps:
                return BoxSet(f.dim, [inter])
    return None


@dataclass(frozen=True)
class RNDerivative:
    """Per piece, the density of eta o f as a product of per-coordinate monomials."""

    pieces: tuple[tuple[Box, tuple[GenMonomial, ...]], ...]

    def __str__(self):
        return "; ".join(f"{fmt_box(b)}: " + " * ".join(str(g) for g in gs) for b, gs in self.pieces)


def rn_derivative(f: PiecewiseMap) -> RNDerivative:
    return RNDerivative(tuple((box, tuple(m.derivative() for m in maps)) for box, maps in f.pieces))


def rn_chain_rhs(f: PiecewiseMap, g: PiecewiseMap) -> RNDerivative:
    """(Phi_f o g) * Phi_g, split over the pieces of f o g."""
    out = []
    for gbox, gmaps in g.pieces:
        gimg = apply_box(gmaps, gbox)
        ginv = tuple(m.inverse() for m in gmaps)
        for fbox, fmaps in f.pieces:
            inter = box_intersect(gimg, fbox)
            if inter is None:
                continue
            dens = tuple(fm.derivative().after(gm) * gm.derivative() for fm, gm in zip(fmaps, gmaps))
            out.append((apply_box(ginv, inter), dens))
    return RNDerivative(tuple(out))


def rn_equal(a: RNDerivative, b: RNDerivative) -> bool:
    """Equality a.e. of two piecewise densities."""
    da = BoxSet(len(a.pieces[0][0]) if a.pieces else 1, [p[0] for p in a.pieces])
    db = BoxSet(da.dim, [p[0] for p in b.pieces])
    if not (da ^ db).is_null():
        return False
    for abox, ag in a.pieces:
        for bbox, bg in b.pieces:
            if box_intersect(abox, bbox) is not None and ag != bg:
                return False
    return True
