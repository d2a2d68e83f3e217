"""Symbolic weighted composition operators and the Cuntz-Krieger relations.

Interval operators act on L^2 of a box set.  A term ``(B, m, w)`` sends
``phi`` to ``y -> chi_B(y) * w(y) * phi(m^{-1}(y))``.  Path operators act on
the boundary-path space with counting measure; a term ``(beta, alpha, c)``
is ``c * S_beta S_alpha^*``, the partial bijection ``alpha y -> beta y``.
Neither kind is ever turned into a matrix: equality is decided after
refining both operands to a common partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .boxes import Box, BoxSet, box_intersect, fmt_box
from .branching import CanonicalBS, IntervalBranchingSystem, check_axioms, exhaustive_sets_for
from .cylinder import CylinderSet
from .kgraph import KGraph, Path, join
from .maps import Affine, GenMonomial, Map1D, UnsupportedComposition, apply_box, compose1
from .scalars import RadicalScalar, Surd, fmt, rpow

__all__ = [
    "OperatorError",
    "Weight",
    "IntervalOperator",
    "PathOperator",
    "Family",
    "CKCondition",
    "CKReport",
    "build_generators",
    "verify_ck",
    "build_W",
    "op_mul",
    "op_add",
    "op_adjoint",
]


class OperatorError(ValueError):
    pass


# ---------------------------------------------------------------------------
# weights


class Weight:
    """A finite sum of ``c * x1**e1 * x2**e2`` with RadicalScalar coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms: dict[tuple[Fraction, ...], RadicalScalar] = {k: v for k, v in terms.items() if not v.is_zero()}

    @classmethod
    def one(cls, dim: int) -> "Weight":
        return cls({(Fraction(0),) * dim: RadicalScalar.of(1)})

    @classmethod
    def from_monomials(cls, gms: Sequence[GenMonomial]) -> "Weight":
        c = RadicalScalar.of(1)
        for g in gms:
            c = c * RadicalScalar.of(g.c)
        return cls({tuple(g.e for g in gms): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "Weight") -> "Weight":
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, RadicalScalar()) + c1 * c2
        return Weight(out)

    def __add__(self, other: "Weight") -> "Weight":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, RadicalScalar()) + c
        return Weight(out)

    def __neg__(self) -> "Weight":
        return Weight({k: -c for k, c in self.terms.items()})

    def scale(self, c) -> "Weight":
        c = RadicalScalar.of(c)
        return Weight({k: v * c for k, v in self.terms.items()})

    def after(self, maps: Sequence[Map1D]) -> "Weight":
        """self o (m1 x m2)."""
        out: dict = {}
        for k, c in self.terms.items():
            coeff, exps = c, []
            for e, m in zip(k, maps):
                if e == 0:
                    exps.append(e)
                    continue
                g = GenMonomial(1, e).after(m)
                coeff = coeff * RadicalScalar.of(g.c)
                exps.append(g.e)
            key = tuple(exps)
            out[key] = out.get(key, RadicalScalar()) + coeff
        return Weight(out)

    def __eq__(self, other):
        return isinstance(other, Weight) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        vars_ = ("x", "y")
        parts = []
        for k, c in sorted(self.terms.items()):
            mon = "*".join(f"{vars_[i]}^({fmt(e)})" for i, e in enumerate(k) if e != 0)
            coeff = str(c)
            parts.append(f"({coeff})*{mon}" if mon and " + " in coeff else (f"{coeff}*{mon}" if mon else coeff))
        return " + ".join(parts)


def _jacobian(maps: Sequence[Map1D]) -> Weight:
    return Weight.from_monomials([m.derivative() for m in maps])


# ---------------------------------------------------------------------------
# interval operators


@dataclass(frozen=True)
class Term:
    support: Box
    maps: tuple
    weight: Weight

    def source(self) -> Box:
        return apply_box(tuple(m.inverse() for m in self.maps), self.support)


class IntervalOperator:
    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Iterable[Term] = ()):
        self.dim = dim
        self.terms: tuple[Term, ...] = tuple(t for t in terms if not t.weight.is_zero())

    @classmethod
    def projection(cls, s: BoxSet) -> "IntervalOperator":
        ident = (Affine(1, 0),) * s.dim
        return cls(s.dim, [Term(b, ident, Weight.one(s.dim)) for b in s.boxes])

    @classmethod
    def zero(cls, dim: int) -> "IntervalOperator":
        return cls(dim)

    def __mul__(self, other: "IntervalOperator") -> "IntervalOperator":
        out = []
        for t1 in self.terms:
            src1 = t1.source()
            inv1 = tuple(m.inverse() for m in t1.maps)
            for t2 in other.terms:
                inter = box_intersect(src1, t2.support)
                if inter is None:
                    continue
                try:
                    maps = tuple(compose1(a, b) for a, b in zip(t1.maps, t2.maps))
                    w = t1.weight * t2.weight.after(inv1)
                except UnsupportedComposition as exc:
                    raise UnsupportedComposition(f"{exc} (terms on {fmt_box(t1.support)} and {fmt_box(t2.support)})") from None
                out.append(Term(apply_box(t1.maps, inter), maps, w))
        return IntervalOperator(self.dim, out)

    def __add__(self, other: "IntervalOperator") -> "IntervalOperator":
        return IntervalOperator(self.dim, self.terms + other.terms)

    def __neg__(self) -> "IntervalOperator":
        return IntervalOperator(self.dim, [Term(t.support, t.maps, -t.weight) for t in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def adjoint(self) -> "IntervalOperator":
        out = []
        for t in self.terms:
            w = t.weight.after(t.maps) * _jacobian(t.maps)
            out.append(Term(t.source(), tuple(m.inverse() for m in t.maps), w))
        return IntervalOperator(self.dim, out)

    def normal_form(self, grid_from: Sequence["IntervalOperator"] = ()) -> dict:
        """cell box -> {maps: weight}, over the grid of all supports involved."""
        from .boxes import _grid

        supports = [t.support for op in (self, *grid_from) for t in op.terms]
        if not supports:
            return {}
        grid = _grid(self.dim, supports)
        index = [{v: k for k, v in enumerate(axis)} for axis in grid]
        cells: dict = {}
        for t in self.terms:
            spans = [range(index[i][t.support[i][0]], index[i][t.support[i][1]]) for i in range(self.dim)]
            idxs = [(i,) for i in spans[0]] if self.dim == 1 else [(i, j) for i in spans[0] for j in spans[1]]
            for c in idxs:
                slot = cells.setdefault(c, {})
                slot[t.maps] = slot[t.maps] + t.weight if t.maps in slot else t.weight
        out = {}
        for c, slot in cells.items():
            slot = {m: w for m, w in slot.items() if not w.is_zero()}
            if slot:
                box = tuple((grid[i][c[i]], grid[i][c[i] + 1]) for i in range(self.dim))
                out[box] = slot
        return out

    def difference_support(self, other: "IntervalOperator") -> Optional[BoxSet]:
        """None when equal; else the union of cells where the two operators differ."""
        a = self.normal_form([other])
        b = other.normal_form([self])
        bad = [box for box in set(a) | set(b) if a.get(box) != b.get(box)]
        return BoxSet(self.dim, bad) if bad else None

    def equals(self, other) -> bool:
        return self.difference_support(other) is None

    def is_zero(self) -> bool:
        return not self.normal_form()

    def support(self) -> BoxSet:
        return BoxSet(self.dim, list(self.normal_form().keys()))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"[{fmt_box(t.support)}; ({', '.join(map(str, t.maps))}); {t.weight}]" for t in self.terms)


# ---------------------------------------------------------------------------
# path operators


class PathOperator:
    __slots__ = ("graph", "terms")

    def __init__(self, graph: KGraph, terms: Iterable[tuple[Path, Path, Fraction]] = ()):
        self.graph = graph
        self.terms = tuple((b, a, Fraction(c)) for b, a, c in terms if c != 0)

    @classmethod
    def zero(cls, g: KGraph) -> "PathOperator":
        return cls(g)

    def __mul__(self, other: "PathOperator") -> "PathOperator":
        g = self.graph
        out = []
        for b1, a1, c1 in self.terms:
            for b2, a2, c2 in other.terms:
                if a1.range != b2.range:
                    continue
                for eta, zeta in g.lambda_min(a1, b2):
                    out.append((g.compose(b1, eta), g.compose(a2, zeta), c1 * c2))
        return PathOperator(g, out)

    def __add__(self, other):
        return PathOperator(self.graph, self.terms + other.terms)

    def __neg__(self):
        return PathOperator(self.graph, [(b, a, -c) for b, a, c in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def adjoint(self) -> "PathOperator":
        return PathOperator(self.graph, [(a, b, c) for b, a, c in self.terms])

    def normal_form(self, others: Sequence["PathOperator"] = ()) -> dict:
        g = self.graph
        top = g.zero()
        for op in (self, *others):
            for _, a, _ in op.terms:
                top = join(top, a.degree)
        out: dict = {}
        for b, a, c in self.terms:
            for piece in g.refine(a, top):
                gamma = g.factorize(piece, a.degree)[1]
                img = g.compose(b, gamma)
                slot = out.setdefault(piece, {})
                slot[img] = slot.get(img, Fraction(0)) + c
        return {p: {k: v for k, v in s.items() if v} for p, s in out.items() if any(s.values())}

    def difference_support(self, other: "PathOperator") -> Optional[CylinderSet]:
        a = self.normal_form([other])
        b = other.normal_form([self])
        bad = [p for p in set(a) | set(b) if a.get(p) != b.get(p)]
        return CylinderSet(self.graph, bad) if bad else None

    def equals(self, other) -> bool:
        return self.difference_support(other) is None

    def is_zero(self) -> bool:
        return not self.normal_form()

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{'' if c == 1 else fmt(c) + '*'}S[{b}]S[{a}]*" for b, a, c in self.terms)


def op_mul(a, b):
    return a * b


def op_add(a, b):
    return a + b


def op_adjoint(a):
    return a.adjoint()


# ---------------------------------------------------------------------------
# generator families


@dataclass
class Family:
    graph: KGraph
    kind: str
    S: dict
    zero: object

    def __getitem__(self, name: str):
        return self.S[name]

    def path(self, mu: Path):
        """S_mu for a path: the product of its edge operators."""
        if not mu.word:
            return self.S[mu.range]
        out = self.S[mu.word[0]]
        for e in mu.word[1:]:
            out = out * self.S[e]
        return out


def build_generators(bs, *, checked: bool = True) -> Family:
    """S_v and S_mu for every vertex and edge of a checked branching system."""
    g = bs.graph
    if checked:
        rep = check_axioms(bs)
        if not rep.ok:
            raise OperatorError("branching system fails its axioms: " + "; ".join(f"({c.number}) {c.detail}" for c in rep.failed()))
    if isinstance(bs, CanonicalBS):
        if not g.is_locally_convex():
            # operator normal forms refine cylinders into Lambda^{<=n}, a partition only here
            raise OperatorError("canonical operator families need a locally convex graph")
        S = {v: PathOperator(g, [(g.vertex(v), g.vertex(v), 1)]) for v in g.vertices}
        for e in g.edges:
            S[e] = PathOperator(g, [(g.edge(e), g.vertex(g.edges[e].source), 1)])
        return Family(g, "canonical", S, PathOperator.zero(g))
    if isinstance(bs, IntervalBranchingSystem):
        S = {v: IntervalOperator.projection(bs.D(v)) for v in g.vertices}
        for e in g.edges:
            terms = []
            for box, maps in bs.maps[e].pieces:
                inv = tuple(m.inverse() for m in maps)
                w = Weight.from_monomials([m.derivative().power(Fraction(1, 2)) for m in inv])
                terms.append(Term(apply_box(maps, box), maps, w))
            S[e] = IntervalOperator(bs.dim, terms)
        return Family(g, "interval", S, IntervalOperator.zero(bs.dim))
    raise OperatorError(f"unsupported system {type(bs).__name__}")


@dataclass
class CKCondition:
    number: int
    name: str
    passed: bool = True
    witness: Optional[str] = None
    detail: str = ""
    checked: int = 0

    def fail(self, witness, detail):
        if self.passed:
            self.passed, self.witness, self.detail = False, witness, detail

    def as_dict(self) -> dict:
        return {"condition": self.number, "name": self.name, "passed": self.passed, "witness": self.witness, "detail": self.detail, "instances": self.checked}


@dataclass
class CKReport:
    conditions: list[CKCondition] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, n: int) -> CKCondition:
        return self.conditions[n - 1]

    def as_dict(self) -> dict:
        return {"passed": self.ok, "conditions": [c.as_dict() for c in self.conditions], "notes": list(self.notes)}


def _diff_str(a, b) -> Optional[str]:
    d = a.difference_support(b)
    return None if d is None else str(d)


def verify_ck(family: Family, g: Optional[KGraph] = None, exhaustive_sets: Sequence[Sequence[str]] = ()) -> CKReport:
    """Check the four relations that determine a Cuntz-Krieger family from its generators.

    1. the S_v are mutually orthogonal projections;
    2. S_mu S_nu = S_alpha S_beta whenever mu nu = alpha beta (and vertex projections act as units);
    3. S_mu^* S_nu = sum over Lambda^min(mu, nu) of S_alpha S_beta^*;
    4. prod over mu in E of (S_v - S_mu S_mu^*) = 0 for exhaustive E.
    """
    g = g or family.graph
    S = family.S
    rep = CKReport()
    c1 = CKCondition(1, "vertex projections are mutually orthogonal projections")
    for v in g.vertices:
        c1.checked += 1
        p = S[v]
        for lhs, rhs, what in ((p * p, p, "S_v^2 = S_v"), (p.adjoint(), p, "S_v^* = S_v")):
            w = _diff_str(lhs, rhs)
            if w:
                c1.fail(w, f"{what} fails at {v}")
        for u in g.vertices:
            if u != v:
                w = _diff_str(S[v] * S[u], family.zero)
                if w:
                    c1.fail(w, f"S_{v} S_{u} != 0")
    rep.conditions.append(c1)

    c2 = CKCondition(2, "S_mu S_nu = S_alpha S_beta for mu nu = alpha beta")
    for sq in g.squares:
        c2.checked += 1
        (a, b), (c, d) = sq.left, sq.right
        w = _diff_str(S[a] * S[b], S[c] * S[d])
        if w:
            c2.fail(w, f"S_{a} S_{b} != S_{c} S_{d}")
    for e, ed in g.edges.items():
        c2.checked += 1
        w = _diff_str(S[ed.range] * S[e], S[e]) or _diff_str(S[e] * S[ed.source], S[e])
        if w:
            c2.fail(w, f"vertex projections do not act as units on S_{e}")
    rep.conditions.append(c2)

    c3 = CKCondition(3, "S_mu^* S_nu = sum of S_alpha S_beta^* over Lambda^min(mu, nu)")
    gens = [g.vertex(v) for v in g.vertices] + [g.edge(e) for e in sorted(g.edges)]
    for i, mu in enumerate(gens):
        for nu in gens[i:]:
            c3.checked += 1
            lhs = family.path(mu).adjoint() * family.path(nu)
            rhs = family.zero
            if mu.range == nu.range:
                for alpha, beta in g.lambda_min(mu, nu):
                    rhs = rhs + family.path(alpha) * family.path(beta).adjoint()
            if not lhs.equals(rhs):
                # localise the failure in the range of S_mu and S_nu
                d = family.path(mu) * (lhs - rhs) * family.path(nu).adjoint()
                where = d.difference_support(family.zero)
                c3.fail(str(where) if where is not None else _diff_str(lhs, rhs), f"pair ({mu}, {nu})")
    rep.conditions.append(c3)

    c4 = CKCondition(4, "prod over E of (S_v - S_mu S_mu^*) = 0 for exhaustive E")
    sets, notes = exhaustive_sets_for(g, list(exhaustive_sets))
    rep.notes.extend(notes)
    for v, E, origin in sets:
        c4.checked += 1
        prod = None
        for e in E:
            factor = S[v] - S[e] * S[e].adjoint()
            prod = factor if prod is None else prod * factor
        w = _diff_str(prod, family.zero)
        if w:
            c4.fail(w, f"{{{', '.join(E)}}} at {v} ({origin})")
    if sets:
        c4.detail = c4.detail or "sets checked: " + "; ".join(f"{v}: {{{', '.join(E)}}} ({o})" for v, E, o in sets)
    rep.conditions.append(c4)
    return rep


def build_W(family: Family, h: dict[Path, Path]):
    """W = sum over mu of S_{h(mu)} S_mu^*."""
    if not h:
        raise OperatorError("no periodicity bijection given")
    W = family.zero
    for mu, hmu in sorted(h.items()):
        W = W + family.path(hmu) * family.path(mu).adjoint()
    return W
