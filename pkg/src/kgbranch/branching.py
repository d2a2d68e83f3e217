"""Branching systems: the boundary-path model, interval models, and one axiom checker for both.

The checker talks to a *set model* that supplies the sets D_v and R_mu, the
images f_mu(S), and two map-level tests (bijectivity of f_mu and agreement of
composites on squares).  Cylinder sets and box sets both fit, so the same
code verifies the canonical system and every interval system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .boxes import BoxSet
from .cylinder import CylinderSet
from .kgraph import KGraph, Path, validate_kgraph
from .maps import MapError, PiecewiseMap, UnsupportedComposition, map_compose, map_difference

__all__ = [
    "BranchingError",
    "ConditionResult",
    "AxiomReport",
    "EquivalenceReport",
    "CanonicalBS",
    "IntervalBranchingSystem",
    "SemibranchingSystem",
    "canonical_bs",
    "check_axioms",
    "check_equivalence_rowfinite",
    "exhaustive_sets_for",
    "to_semibranching",
    "from_semibranching",
    "check_semibranching",
]

FINITELY_ALIGNED = "finitely-aligned"
ROW_FINITE = "row-finite"

# auto-enumeration of minimal exhaustive sets stops above this many edges at a vertex
AUTO_EXHAUSTIVE_LIMIT = 12


class BranchingError(ValueError):
    """Bad input or a violated precondition (not a failed axiom)."""


@dataclass
class ConditionResult:
    number: int
    name: str
    passed: bool
    witness: Optional[str] = None
    detail: str = ""
    checked: int = 0

    def as_dict(self) -> dict:
        return {
            "condition": self.number,
            "name": self.name,
            "passed": self.passed,
            "witness": self.witness,
            "detail": self.detail,
            "instances": self.checked,
        }


@dataclass
class AxiomReport:
    mode: str
    conditions: list[ConditionResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> list[ConditionResult]:
        return [c for c in self.conditions if not c.passed]

    def condition(self, n: int) -> ConditionResult:
        return next(c for c in self.conditions if c.number == n)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "passed": self.ok, "conditions": [c.as_dict() for c in self.conditions], "notes": list(self.notes)}


@dataclass
class EquivalenceReport:
    finitely_aligned: AxiomReport
    row_finite: AxiomReport

    @property
    def agree(self) -> bool:
        return self.finitely_aligned.ok == self.row_finite.ok

    def as_dict(self) -> dict:
        return {
            "agree": self.agree,
            "finitely_aligned": self.finitely_aligned.as_dict(),
            "row_finite": self.row_finite.as_dict(),
        }


# ---------------------------------------------------------------------------
# set models


class CanonicalBS:
    """D_v = v Lambda^{<=inf}, R_mu = mu Lambda^{<=inf}, f_mu = prefixing by mu, counting measure."""

    kind = "canonical"

    def __init__(self, graph: KGraph, exhaustive: Sequence[Sequence[str]] = ()):
        self.graph = graph
        self.exhaustive = [tuple(E) for E in exhaustive]

    def D(self, v: str) -> CylinderSet:
        return CylinderSet.vertex(self.graph, v)

    def R(self, e: str) -> CylinderSet:
        return CylinderSet(self.graph, [self.graph.edge(e)])

    def empty(self) -> CylinderSet:
        return CylinderSet(self.graph)

    def null(self, s: CylinderSet) -> bool:
        return s.is_empty()

    def image(self, e: str, s: CylinderSet) -> CylinderSet:
        return s.prepend(self.graph.edge(e))

    def uncovered(self, a: CylinderSet, b: CylinderSet) -> Optional[str]:
        bad = a.uncovered(b)
        return str(CylinderSet(self.graph, bad)) if bad else None

    def preimage(self, e: str, s: CylinderSet) -> CylinderSet:
        return s.strip(self.graph.edge(e))

    def map_witness(self, e: str) -> Optional[str]:
        g = self.graph
        src = self.D(g.edges[e].source)
        if not self.image(e, src).equals(self.R(e)):
            return f"image of D_{g.edges[e].source} under prefixing by {e} is not Z({e})"
        if not self.preimage(e, self.R(e)).equals(src):
            return f"removing the prefix {e} does not return D_{g.edges[e].source}"
        return None

    def composite_witness(self, a: str, b: str, c: str, d: str) -> Optional[str]:
        g = self.graph
        if g.compose(g.edge(a), g.edge(b)) != g.compose(g.edge(c), g.edge(d)):
            return f"Z({a} {b}) differs from Z({c} {d})"
        return None


class IntervalBranchingSystem:
    """Per-vertex box sets D_v and per-edge piecewise maps f_mu: D_{s(mu)} -> R_mu."""

    kind = "interval"

    def __init__(
        self,
        graph: KGraph,
        dim: int,
        domains: dict[str, BoxSet],
        maps: dict[str, PiecewiseMap],
        exhaustive: Sequence[Sequence[str]] = (),
    ):
        self.graph = graph
        self.dim = dim
        for v in graph.vertices:
            domains.setdefault(v, BoxSet.empty(dim))
        unknown = set(domains) - set(graph.vertices)
        if unknown:
            raise BranchingError(f"domains given for unknown vertices {sorted(unknown)}")
        missing = [e for e in graph.edges if e not in maps]
        if missing:
            raise BranchingError(f"no map given for edges {missing}")
        unknown = set(maps) - set(graph.edges)
        if unknown:
            raise BranchingError(f"maps given for unknown edges {sorted(unknown)}")
        for name, s in list(domains.items()) + [(e, m.domain()) for e, m in maps.items()]:
            if s.dim != dim:
                raise BranchingError(f"{name} has dimension {s.dim}, expected {dim}")
        self.domains = dict(domains)
        self.maps = dict(maps)
        self.exhaustive = [tuple(E) for E in exhaustive]
        self._ranges: dict[str, BoxSet] = {}

    def D(self, v: str) -> BoxSet:
        return self.domains[v]

    def R(self, e: str) -> BoxSet:
        if e not in self._ranges:
            self._ranges[e] = self.maps[e].image()
        return self._ranges[e]

    def X(self) -> BoxSet:
        out = BoxSet.empty(self.dim)
        for v in self.graph.vertices:
            out = out | self.domains[v]
        return out

    def empty(self) -> BoxSet:
        return BoxSet.empty(self.dim)

    def uncovered(self, a: BoxSet, b: BoxSet) -> Optional[str]:
        gap = a - b
        return None if gap.is_null() else str(gap)

    def null(self, s: BoxSet) -> bool:
        return s.is_null()

    def image(self, e: str, s: BoxSet) -> BoxSet:
        return self.maps[e].image(s)

    def map_witness(self, e: str) -> Optional[str]:
        f = self.maps[e]
        src = self.graph.edges[e].source
        diff = f.domain() ^ self.D(src)
        if not diff.is_null():
            return f"domain of f_{e} differs from D_{src} on {diff}"
        overlap = f.injectivity_witness()
        if overlap is not None:
            return f"f_{e} is not injective: overlapping pieces on {overlap}"
        return None

    def composite(self, a: str, b: str) -> PiecewiseMap:
        return map_compose(self.maps[a], self.maps[b], strict=False)

    def composite_witness(self, a: str, b: str, c: str, d: str) -> Optional[str]:
        try:
            diff = map_difference(self.composite(a, b), self.composite(c, d))
        except (UnsupportedComposition, MapError) as exc:
            return f"cannot compare f_{a} o f_{b} with f_{c} o f_{d}: {exc}"
        if diff is None:
            return None
        return f"f_{a} o f_{b} and f_{c} o f_{d} differ on {diff}"

    def __eq__(self, other):
        if not isinstance(other, IntervalBranchingSystem):
            return NotImplemented
        if other.graph is not self.graph and not _same_graph(self.graph, other.graph):
            return False
        if self.dim != other.dim or sorted(self.exhaustive) != sorted(other.exhaustive):
            return False
        if any(self.domains[v] != other.domains[v] for v in self.graph.vertices):
            return False
        return all(map_difference(self.maps[e], other.maps[e]) is None for e in self.graph.edges)

    __hash__ = None


def _same_graph(g: KGraph, h: KGraph) -> bool:
    return (
        g.rank == h.rank
        and g.vertices == h.vertices
        and g.edges == h.edges
        and sorted((s.left, s.right) for s in g.squares) == sorted((s.left, s.right) for s in h.squares)
    )


def canonical_bs(g: KGraph, exhaustive: Sequence[Sequence[str]] = ()) -> CanonicalBS:
    rep = validate_kgraph(g)
    if not rep.ok:
        raise BranchingError("graph is not a k-graph: " + "; ".join(p.detail for p in rep.problems))
    return CanonicalBS(g, exhaustive)


# ---------------------------------------------------------------------------
# the checker


def _union(model, sets):
    out = model.empty()
    for s in sets:
        out = out | s
    return out


def exhaustive_sets_for(g: KGraph, declared: Sequence[Sequence[str]] = (), *, auto_limit: int = AUTO_EXHAUSTIVE_LIMIT):
    """Edge sets on which the exhaustive-set condition is tested, with notes on coverage.

    Returns a list of (vertex, edge tuple, origin) and a list of notes.
    """
    found: dict[tuple[str, tuple[str, ...]], str] = {}
    notes = []
    for E in declared:
        E = tuple(E)
        if not E:
            raise BranchingError("declared exhaustive set is empty")
        vs = {g.edges[e].range for e in E}
        if len(vs) != 1:
            raise BranchingError(f"declared set {E} has edges with different ranges")
        v = vs.pop()
        if not g.is_exhaustive(v, [g.edge(e) for e in E]):
            raise BranchingError(f"declared set {{{', '.join(E)}}} is not exhaustive for {v}")
        found.setdefault((v, tuple(sorted(E))), "declared")
    for v in g.vertices:
        mins = g.minimal_exhaustive_edge_sets(v, limit=auto_limit)
        if mins is None:
            notes.append(f"vertex {v} receives more than {auto_limit} edges; minimal exhaustive sets not enumerated")
            continue
        for E in mins:
            found.setdefault((v, tuple(sorted(E))), "minimal")
    if g.is_row_finite_no_sources():
        for v in g.vertices:
            for c in range(1, g.rank + 1):
                found.setdefault((v, tuple(sorted(g.in_edges(v, c)))), f"colour {c}")
    return [(v, E, origin) for (v, E), origin in sorted(found.items())], notes


def check_axioms(bs, mode: str = FINITELY_ALIGNED, exhaustive_sets: Optional[Sequence[Sequence[str]]] = None) -> AxiomReport:
    """Check every branching-system condition of the chosen definition.

    ``finitely-aligned``: conditions 1-7 (disjoint ranges, disjoint domains,
    R inside D, invertible maps with densities, composites along squares,
    the Lambda^min image condition, exhaustive sets).  ``row-finite``:
    conditions 1-5 with per-colour covering in place of 3, 6 and 7.
    """
    g = bs.graph
    if mode not in (FINITELY_ALIGNED, ROW_FINITE):
        raise BranchingError(f"unknown mode {mode!r}")
    if mode == ROW_FINITE and not g.is_row_finite_no_sources():
        raise BranchingError("row-finite mode needs a row-finite graph without sources")
    declared = list(bs.exhaustive) + [tuple(E) for E in (exhaustive_sets or ())]
    rep = AxiomReport(mode)

    rep.conditions.append(_same_color_ranges(bs, 1))
    rep.conditions.append(_disjoint_domains(bs, 2))
    if mode == FINITELY_ALIGNED:
        rep.conditions.append(_ranges_inside(bs, 3))
        rep.conditions.append(_maps(bs, 4))
        rep.conditions.append(_squares(bs, 5))
        rep.conditions.append(_min_condition(bs, 6))
        sets, notes = exhaustive_sets_for(g, declared)
        rep.notes.extend(notes)
        rep.conditions.append(_exhaustive(bs, 7, sets))
    else:
        rep.conditions.append(_maps(bs, 3))
        rep.conditions.append(_squares(bs, 4))
        sets = [(v, tuple(sorted(g.in_edges(v, c))), f"colour {c}") for v in g.vertices for c in range(1, g.rank + 1)]
        rep.conditions.append(_exhaustive(bs, 5, sets))
    for v in g.vertices:
        if bs.null(bs.D(v)) and g.in_edges(v):
            rep.notes.append(f"warning: D_{v} is null although {v} receives edges")
    return rep


def _same_color_ranges(bs, n):
    g = bs.graph
    res = ConditionResult(n, "ranges of distinct same-colour edges are disjoint", True)
    for c in range(1, g.rank + 1):
        es = g.edges_of_color(c)
        for i, a in enumerate(es):
            for b in es[i + 1 :]:
                res.checked += 1
                inter = bs.R(a) & bs.R(b)
                if not bs.null(inter):
                    res.passed, res.witness, res.detail = False, str(inter), f"R_{a} and R_{b} overlap"
                    return res
    return res


def _disjoint_domains(bs, n):
    g = bs.graph
    res = ConditionResult(n, "domains of distinct vertices are disjoint", True)
    for i, v in enumerate(g.vertices):
        for w in g.vertices[i + 1 :]:
            res.checked += 1
            inter = bs.D(v) & bs.D(w)
            if not bs.null(inter):
                res.passed, res.witness, res.detail = False, str(inter), f"D_{v} and D_{w} overlap"
                return res
    return res


def _ranges_inside(bs, n):
    g = bs.graph
    res = ConditionResult(n, "each R_mu lies in D_r(mu)", True)
    for e in g.edges:
        res.checked += 1
        out = bs.uncovered(bs.R(e), bs.D(g.edges[e].range))
        if out is not None:
            res.passed, res.witness, res.detail = False, out, f"R_{e} leaves D_{g.edges[e].range}"
            return res
    return res


def _maps(bs, n):
    g = bs.graph
    res = ConditionResult(n, "each f_mu is an a.e. bijection D_s(mu) -> R_mu with Radon-Nikodym densities", True)
    for e in g.edges:
        res.checked += 1
        w = bs.map_witness(e)
        if w is not None:
            res.passed, res.witness, res.detail = False, e, w
            return res
    return res


def _squares(bs, n):
    g = bs.graph
    res = ConditionResult(n, "f_mu o f_nu = f_alpha o f_beta whenever mu nu = alpha beta", True)
    for sq in g.squares:
        res.checked += 1
        (a, b), (c, d) = sq.left, sq.right
        w = bs.composite_witness(a, b, c, d)
        if w is not None:
            res.passed, res.witness, res.detail = False, f"{a} {b} = {c} {d}", w
            return res
    return res


def _min_condition(bs, n):
    g = bs.graph
    res = ConditionResult(n, "images outside the minimal common extensions are disjoint", True)
    for mu in sorted(g.edges):
        for nu in sorted(g.edges):
            em, en = g.edges[mu], g.edges[nu]
            if em.range != en.range or em.color >= en.color:
                continue
            res.checked += 1
            pairs = g.lambda_min(g.edge(mu), g.edge(nu))
            # f_mu(D minus U) = R_mu minus f_mu(U) since condition 4 makes f_mu a bijection
            both = bs.R(mu) & bs.R(nu)
            through = bs.image(mu, _union(bs, [bs.R(a.word[0]) for a, _ in pairs])) | bs.image(
                nu, _union(bs, [bs.R(b.word[0]) for _, b in pairs])
            )
            inter = bs.uncovered(both, through)
            if inter is not None:
                res.passed, res.witness, res.detail = False, inter, f"pair ({mu}, {nu})"
                return res
    return res


def _exhaustive(bs, n, sets):
    res = ConditionResult(n, "exhaustive sets cover D_v", True)
    for v, E, origin in sets:
        res.checked += 1
        gap = bs.uncovered(bs.D(v), _union(bs, [bs.R(e) for e in E]))
        if gap is not None:
            res.passed, res.witness = False, gap
            res.detail = f"{{{', '.join(E)}}} ({origin}) leaves part of D_{v} uncovered"
            return res
    if sets:
        res.detail = "sets checked: " + "; ".join(f"{v}: {{{', '.join(E)}}} ({o})" for v, E, o in sets)
    return res


def check_equivalence_rowfinite(bs) -> EquivalenceReport:
    return EquivalenceReport(check_axioms(bs, FINITELY_ALIGNED), check_axioms(bs, ROW_FINITE))


# ---------------------------------------------------------------------------
# partial semibranching function systems


@dataclass
class SemibranchingSystem:
    """Sets D_mu, R_mu and maps tau_mu for mu a vertex or an edge, plus the coding maps tau^n.

    ``coding[0]`` is tau^0 and ``coding[i]`` is tau^{e_i}.
    """

    graph: KGraph
    dim: int
    D: dict[str, BoxSet]
    R: dict[str, BoxSet]
    tau: dict[str, PiecewiseMap]
    coding: dict[int, PiecewiseMap]
    X: BoxSet
    exhaustive: list = field(default_factory=list)


def to_semibranching(bs: IntervalBranchingSystem) -> SemibranchingSystem:
    g = bs.graph
    for v in g.vertices:
        if bs.D(v).is_null() or bs.D(v).measure() <= 0:
            raise BranchingError(f"D_{v} has measure zero")
    X = bs.X()
    D, R, tau = {}, {}, {}
    for v in g.vertices:
        D[v] = R[v] = bs.D(v)
        tau[v] = PiecewiseMap.identity(bs.D(v))
    for e in g.edges:
        D[e] = bs.D(g.edges[e].source)
        R[e] = bs.R(e)
        tau[e] = bs.maps[e]
    coding = {0: PiecewiseMap.identity(X)}
    for c in range(1, g.rank + 1):
        pieces = []
        for e in g.edges_of_color(c):
            pieces.extend(tau[e].inverse().pieces)
        coding[c] = PiecewiseMap(bs.dim, pieces)
    return SemibranchingSystem(g, bs.dim, D, R, tau, coding, X, list(bs.exhaustive))


def from_semibranching(sb: SemibranchingSystem) -> IntervalBranchingSystem:
    g = sb.graph
    return IntervalBranchingSystem(
        g,
        sb.dim,
        {v: sb.D[v] for v in g.vertices},
        {e: sb.tau[e] for e in g.edges},
        sb.exhaustive,
    )


def check_semibranching(sb: SemibranchingSystem) -> AxiomReport:
    """The six conditions of a partial semibranching function system."""
    g = sb.graph
    rep = AxiomReport("semibranching")
    keys = list(g.vertices) + sorted(g.edges)
    degrees = {0: list(g.vertices)}
    for c in range(1, g.rank + 1):
        degrees[c] = list(g.edges_of_color(c))

    res = ConditionResult(1, "each tau_mu is an a.e. bijection D_mu -> R_mu", True)
    for k in keys:
        res.checked += 1
        t = sb.tau[k]
        if not (t.domain() ^ sb.D[k]).is_null() or not (t.image() ^ sb.R[k]).is_null() or t.injectivity_witness() is not None:
            res.passed, res.witness = False, k
            break
    rep.conditions.append(res)

    res = ConditionResult(2, "for each degree n in {0, e_i}, the R_mu with d(mu) = n cover X", True)
    for n, ks in degrees.items():
        res.checked += 1
        cover = BoxSet.empty(sb.dim)
        for k in ks:
            cover = cover | sb.R[k]
        gap = sb.X - cover
        if not gap.is_null():
            res.passed, res.witness, res.detail = False, str(gap), f"degree {'0' if n == 0 else f'e_{n}'}"
            break
    rep.conditions.append(res)

    res = ConditionResult(3, "ranges of the same degree are disjoint", True)
    for n, ks in degrees.items():
        for i, a in enumerate(ks):
            for b in ks[i + 1 :]:
                res.checked += 1
                inter = sb.R[a] & sb.R[b]
                if res.passed and not inter.is_null():
                    res.passed, res.witness, res.detail = False, str(inter), f"R_{a} and R_{b}"
    rep.conditions.append(res)

    res = ConditionResult(4, "tau_v is the identity and D_v has positive measure", True)
    for v in g.vertices:
        res.checked += 1
        if map_difference(sb.tau[v], PiecewiseMap.identity(sb.D[v])) is not None or sb.D[v].measure() <= 0:
            res.passed, res.witness = False, v
            break
    rep.conditions.append(res)

    res = ConditionResult(5, "R_mu lies in D_r(mu) and D_mu = D_s(mu)", True)
    for e in sorted(g.edges):
        res.checked += 1
        ed = g.edges[e]
        if not (sb.R[e] <= sb.D[ed.range]) or sb.D[e] != sb.D[ed.source]:
            res.passed, res.witness = False, e
            break
    rep.conditions.append(res)

    res = ConditionResult(6, "the coding maps tau^n commute", True)
    for n in sb.coding:
        for m in sb.coding:
            if n >= m:
                continue
            res.checked += 1
            try:
                diff = map_difference(
                    map_compose(sb.coding[n], sb.coding[m], strict=False),
                    map_compose(sb.coding[m], sb.coding[n], strict=False),
                )
            except UnsupportedComposition as exc:
                res.passed, res.detail = False, str(exc)
                break
            if diff is not None:
                res.passed, res.witness, res.detail = False, str(diff), f"tau^{n} and tau^{m}"
                break
    rep.conditions.append(res)
    return rep
