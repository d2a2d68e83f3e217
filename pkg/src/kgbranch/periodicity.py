"""Periodicity of single-vertex 2-graphs and faithfulness certificates for their interval representations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence, Union

from .boxes import Box, BoxSet, fmt_box, make_box
from .branching import CanonicalBS, IntervalBranchingSystem
from .kgraph import KGraph, Path
from .maps import PiecewiseMap, map_compose
from .operator import Family, OperatorError, build_W, build_generators
from .scalars import fmt

__all__ = [
    "NotApplicable",
    "PeriodicityResult",
    "FaithfulnessCertificate",
    "FaithfulnessFailure",
    "detect_periodicity",
    "periodic_bijections_bruteforce",
    "check_faithfulness",
    "iterate_image",
    "word_map",
    "verify_w_unitary",
    "WUnitaryResult",
    "confirm_disjoint",
]


class NotApplicable(ValueError):
    """The graph is outside the hypotheses of the periodicity criterion."""


@dataclass
class PeriodicityResult:
    periodic: bool
    a: Optional[int] = None
    b: Optional[int] = None
    h: dict = field(default_factory=dict)
    bound: int = 6

    @property
    def verdict(self) -> str:
        return "periodic" if self.periodic else "aperiodic-up-to-bound"

    def h_text(self) -> dict[str, str]:
        return {str(m): str(n) for m, n in sorted(self.h.items())}

    def as_dict(self) -> dict:
        return {"periodic": self.periodic, "verdict": self.verdict, "a": self.a, "b": self.b, "h": self.h_text(), "bound": self.bound}


def _counts(g: KGraph) -> tuple[int, int]:
    if g.rank != 2 or not g.single_vertex():
        raise NotApplicable("periodicity is decided for single-vertex 2-graphs only")
    m, n = len(g.edges_of_color(1)), len(g.edges_of_color(2))
    if m < 2 or n < 2:
        raise NotApplicable(f"needs at least two edges of each colour (found {m} and {n})")
    return m, n


def _exponent_pairs(m: int, n: int, bound: int):
    for p in range(1, bound + 1):
        target = m**p
        q, power = 0, 1
        while power < target:
            power *= n
            q += 1
        if power == target:
            yield p, q


def _test_pair(g: KGraph, p: int, q: int) -> Optional[dict]:
    v = g.vertices[0]
    mus = g.enumerate_paths(v, (p, 0))
    nus = g.enumerate_paths(v, (0, q))
    h: dict[Path, Path] = {}
    inv: dict[Path, Path] = {}
    for mu in mus:
        for nu in nus:
            head, tail = g.factorize(g.compose(mu, nu), (0, q))
            if h.setdefault(mu, head) != head or inv.setdefault(nu, tail) != tail:
                return None
    if len(set(h.values())) != len(h) or any(inv[h[mu]] != mu for mu in mus):
        return None
    return h


def detect_periodicity(g: KGraph, bound: int = 6) -> PeriodicityResult:
    """Scan (p, q) with |Lambda^{e_1}|^p = |Lambda^{e_2}|^q and p <= bound, smallest p first.

    At (p, q) the graph is periodic iff factorizing mu nu = nu' mu' gives a nu'
    depending only on mu and a mu' depending only on nu, with the two
    assignments mutually inverse.
    """
    m, n = _counts(g)
    for p, q in _exponent_pairs(m, n, bound):
        h = _test_pair(g, p, q)
        if h is not None:
            return PeriodicityResult(True, p, q, h, bound)
    return PeriodicityResult(False, bound=bound)


def periodic_bijections_bruteforce(g: KGraph, p: int, q: int) -> list[dict]:
    """All bijections h with mu nu = h(mu) h^{-1}(nu), by backtracking."""
    v = g.vertices[0]
    mus = g.enumerate_paths(v, (p, 0))
    nus = g.enumerate_paths(v, (0, q))
    if len(mus) != len(nus):
        return []
    prod = {(mu, nu): g.compose(mu, nu) for mu in mus for nu in nus}
    found = []

    def consistent(h):
        inv = {b: a for a, b in h.items()}
        for (mu, nu), val in prod.items():
            if mu in h and nu in inv and g.compose(h[mu], inv[nu]) != val:
                return False
        return True

    def extend(i, h, used):
        if i == len(mus):
            found.append(dict(h))
            return
        for nu in nus:
            if nu in used:
                continue
            h[mus[i]] = nu
            if consistent(h):
                extend(i + 1, h, used | {nu})
            del h[mus[i]]

    extend(0, {}, frozenset())
    return found


# ---------------------------------------------------------------------------
# faithfulness


def word_map(bs: IntervalBranchingSystem, mu: Path) -> PiecewiseMap:
    """f_mu = f_{mu_1} o ... o f_{mu_n}."""
    return reduce(lambda f, e: map_compose(f, bs.maps[e], strict=False), mu.word[1:], bs.maps[mu.word[0]])


def iterate_image(T: PiecewiseMap, E: BoxSet, n: int) -> BoxSet:
    """T^n(E); negative n iterates the inverse."""
    step = T if n >= 0 else T.inverse()
    out = E
    for _ in range(abs(n)):
        out = step.image(out)
    return out


@dataclass
class FaithfulnessCertificate:
    mu: Path
    h_mu: Path
    E: BoxSet
    kind: str  # "all-n" or "bounded"
    T: PiecewiseMap
    T_inverse: PiecewiseMap
    exponents: tuple = ()
    escape: Optional[dict] = None
    candidates_tried: int = 0

    def as_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "mu": str(self.mu),
            "h_mu": str(self.h_mu),
            "E": str(self.E),
            "T": str(self.T),
            "T_inverse": str(self.T_inverse),
            "candidates_tried": self.candidates_tried,
            "conclusion": "the hypothesis of the faithfulness criterion holds, hence the induced representation is faithful"
            if self.kind == "all-n"
            else "T^n(E) and E are a.e. disjoint for the listed n only",
        }
        if self.exponents:
            d["exponents"] = list(self.exponents)
        if self.escape:
            d["escape"] = self.escape
        return d


@dataclass
class FaithfulnessFailure:
    reason: str
    tried: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"certified": False, "reason": self.reason, "tried": self.tried}


def _derived_identities(bs: IntervalBranchingSystem, pr: PeriodicityResult) -> dict[Path, PiecewiseMap]:
    g = bs.graph
    v = g.vertices[0]
    D = bs.D(v)
    if D.is_null():
        raise NotApplicable(f"D_{v} is null")
    images = {}
    fmaps = {}
    for mu, hmu in sorted(pr.h.items()):
        f_mu, f_h = word_map(bs, mu), word_map(bs, hmu)
        fmaps[mu], fmaps[hmu] = f_mu, f_h
        a, b = f_mu.image(), f_h.image()
        if a != b:
            raise NotApplicable(f"f_{mu}(D_{v}) and f_{hmu}(D_{v}) differ on {a ^ b}")
        images[mu] = a
    keys = sorted(images)
    for i, x in enumerate(keys):
        for y in keys[i + 1 :]:
            inter = images[x] & images[y]
            if not inter.is_null():
                raise NotApplicable(f"f_{x}(D_{v}) and f_{y}(D_{v}) overlap on {inter}")
    cover = reduce(lambda s, t: s | t, images.values())
    if cover != D:
        raise NotApplicable(f"the images f_mu(D_{v}) do not cover D_{v}: gap {D - cover}")
    return fmaps


def _candidates(T: PiecewiseMap) -> list[Box]:
    out = []
    for box, maps in T.pieces:
        moving = [i for i, m in enumerate(maps) if not m.is_identity()]
        if not moving:
            continue
        if any(not isinstance(x, Fraction) for iv in box for x in iv):
            continue
        for i in moving:
            lo, hi = box[i]
            for j in (1, 2):
                sub = list(box)
                sub[i] = (lo + (hi - lo) * j / 4, lo + (hi - lo) * (j + 1) / 4)
                out.append(make_box(*sub))
    return out


def _escape(T: PiecewiseMap, E: BoxSet) -> Optional[dict]:
    """A half-slab H on one side of E with T(E) and T(H) inside H."""
    dom = T.domain()
    hull = dom.hull()
    ebox = E.hull()
    img = T.image(E)
    for i in range(T.dim):
        for side in ("below", "above"):
            cut = ebox[i][0] if side == "below" else ebox[i][1]
            slab = list(hull)
            slab[i] = (hull[i][0], cut) if side == "below" else (cut, hull[i][1])
            try:
                H = dom & BoxSet(T.dim, [make_box(*slab)])
            except ValueError:
                continue
            if H.is_null() or not (img <= H):
                continue
            if T.image(H) <= H:
                return {"coordinate": i + 1, "side": side, "H": str(H), "T(E)": str(img)}
    return None


def check_faithfulness(
    bs: IntervalBranchingSystem,
    pr: PeriodicityResult,
    mode: str = "all-n",
    exponents: Sequence[int] = (1, -1, 2),
    candidates: Iterable[tuple[Path, BoxSet]] = (),
) -> Union[FaithfulnessCertificate, FaithfulnessFailure]:
    """Look for mu and E with (f_mu o f_{h(mu)}^{-1})^n(E) and E a.e. disjoint.

    ``all-n`` asks for an escape half-slab, which settles every n != 0 at
    once; ``bounded`` iterates exactly for the given exponents.
    """
    if not pr.periodic:
        raise NotApplicable("the graph is not periodic (up to the searched bound)")
    if mode not in ("all-n", "bounded"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "bounded" and (not exponents or 0 in exponents):
        raise ValueError("bounded mode needs nonzero exponents")
    fmaps = _derived_identities(bs, pr)
    tried = []
    user = list(candidates)
    for mu, hmu in sorted(pr.h.items()):
        T = map_compose(fmaps[mu], fmaps[hmu].inverse())
        Tinv = T.inverse()
        boxes = [E for m, E in user if m == mu] + [BoxSet(T.dim, [b]) for b in _candidates(T)]
        for E in boxes:
            if E.is_null() or not (E <= fmaps[mu].image()):
                tried.append({"mu": str(mu), "E": str(E), "result": "not a non-null subset of f_mu(D_v)"})
                continue
            if mode == "all-n":
                # either direction settles every n != 0; the inverse is tried first
                for direction, S in (("T^-1", Tinv), ("T", T)):
                    esc = _escape(S, E)
                    if esc is not None:
                        esc["map"] = direction
                        return FaithfulnessCertificate(mu, hmu, E, "all-n", T, Tinv, escape=esc, candidates_tried=len(tried) + 1)
                tried.append({"mu": str(mu), "E": str(E), "result": "no invariant half-slab"})
            else:
                bad = [n for n in exponents if not (iterate_image(T, E, n) & E).is_null()]
                if not bad:
                    return FaithfulnessCertificate(mu, hmu, E, "bounded", T, Tinv, exponents=tuple(exponents), candidates_tried=len(tried) + 1)
                tried.append({"mu": str(mu), "E": str(E), "result": f"T^n(E) meets E for n in {bad}"})
    return FaithfulnessFailure("no candidate produced a certificate", tried)


def confirm_disjoint(cert: FaithfulnessCertificate, upto: int = 20) -> list[int]:
    """Exponents 1 <= |n| <= upto for which T^n(E) meets E (empty for a sound certificate)."""
    bad = []
    for sign in (1, -1):
        img = cert.E
        step = cert.T if sign > 0 else cert.T_inverse
        for k in range(1, upto + 1):
            img = step.image(img)
            if not (img & cert.E).is_null():
                bad.append(sign * k)
    return bad


# ---------------------------------------------------------------------------
# the unitary W


@dataclass
class WUnitaryResult:
    unitary: bool
    witness: Optional[str] = None
    detail: str = ""
    W: object = None

    def __bool__(self):
        return self.unitary

    def as_dict(self) -> dict:
        return {"unitary": self.unitary, "witness": self.witness, "detail": self.detail, "W": str(self.W)}


def verify_w_unitary(system, pr: PeriodicityResult) -> WUnitaryResult:
    """Build W = sum S_{h(mu)} S_mu^* and test W^*W = WW^* = S_v."""
    if not pr.periodic:
        raise OperatorError("W needs a periodic graph")
    family = system if isinstance(system, Family) else build_generators(system)
    v = family.graph.vertices[0]
    W = build_W(family, pr.h)
    Sv = family[v]
    for name, prod in (("W^*W", W.adjoint() * W), ("WW^*", W * W.adjoint())):
        d = prod.difference_support(Sv)
        if d is not None:
            return WUnitaryResult(False, str(d), f"{name} differs from S_{v}", W)
    return WUnitaryResult(True, None, "W^*W = WW^* = S_v", W)
