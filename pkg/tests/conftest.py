import itertools
import random

import mpmath
import pytest

from kgbranch.dsl import load_bs, load_graph
from kgbranch.kgraph import Edge, KGraph, Square

GRAPHS = ["lambda2", "lambda3", "uv-graph", "eightvertex", "flip"]
EXTRA_GRAPHS = ["trivial3", "commuting"]


@pytest.fixture(autouse=True)
def _precision():
    with mpmath.workdps(50):
        yield


@pytest.fixture(scope="session")
def corpus_graphs():
    return {n: load_graph(n + ".kg") for n in GRAPHS + EXTRA_GRAPHS}


@pytest.fixture(scope="session")
def corpus_systems():
    return {n: load_bs(n + ".bs") for n in GRAPHS}


def random_2graph(rng: random.Random, n_vertices=None, max_per_color=3):
    """A random valid 2-graph with one or two vertices and at most max_per_color edges per colour.

    Squares are a random bijection between composable (1,2)- and (2,1)-pairs
    with matching endpoints; skeletons where no such bijection exists are redrawn.
    """
    while True:
        nv = n_vertices or rng.choice([1, 2])
        vs = [f"v{i}" for i in range(nv)]
        edges = []
        for c, prefix in ((1, "a"), (2, "b")):
            for i in range(rng.randint(1, max_per_color)):
                edges.append(Edge(f"{prefix}{i}", c, rng.choice(vs), rng.choice(vs)))
        by = {e.id: e for e in edges}
        left = [(x.id, y.id) for x in edges for y in edges if x.color == 1 and y.color == 2 and x.source == y.range]
        right = [(y.id, x.id) for y in edges for x in edges if y.color == 2 and x.color == 1 and y.source == x.range]
        groups = {}
        for p in left:
            groups.setdefault((by[p[0]].range, by[p[1]].source), [[], []])[0].append(p)
        for p in right:
            groups.setdefault((by[p[0]].range, by[p[1]].source), [[], []])[1].append(p)
        if any(len(a) != len(b) for a, b in groups.values()):
            continue
        squares = []
        for a, b in groups.values():
            b = list(b)
            rng.shuffle(b)
            squares += [Square(x, y) for x, y in zip(a, b)]
        return KGraph(2, vs, edges, squares)


def small_paths(g, max_deg=(1, 1)):
    out = []
    for v in g.vertices:
        for d in itertools.product(*(range(m + 1) for m in max_deg)):
            out.extend(g.enumerate_paths(v, d))
    return out


def to_mpf(x):
    """High-precision value of an exact scalar, computed independently of the library's arithmetic."""
    import mpmath
    from fractions import Fraction

    from kgbranch.scalars import RadicalScalar, Surd

    if isinstance(x, RadicalScalar):
        return mpmath.fsum(to_mpf(Fraction(c)) * to_mpf(Surd(1, k)) for k, c in x.terms.items())
    if isinstance(x, Surd):
        v = mpmath.mpf(x.sign)
        for p, e in x.exps:
            v *= mpmath.power(p, mpmath.mpf(e.numerator) / e.denominator)
        return v
    q = Fraction(x)
    return mpmath.mpf(q.numerator) / q.denominator


def random_map_pair(rng: random.Random):
    """A composable pair (f, g) of piecewise maps of dimension 1 or 2 with image(g) inside dom(f)."""
    from fractions import Fraction as F

    from kgbranch.maps import Affine, PiecewiseMap, make_monomial

    def affine_onto(lo, hi, u, w, flip):
        a = (w - u) / (hi - lo)
        if flip:
            return Affine(-a, w + a * lo)
        return Affine(a, u - a * lo)

    def coord_pair():
        if rng.random() < 0.5:
            cuts = sorted({F(rng.randint(1, 7), 8) for _ in range(rng.randint(0, 2))})
            pts = [F(0)] + cuts + [F(1)]
            gp, fp = [], []
            for lo, hi in zip(pts, pts[1:]):
                u = F(rng.randint(0, 3), 8)
                w = u + F(rng.randint(1, 4), 8)
                gp.append(((lo, hi), affine_onto(lo, hi, u, w, rng.random() < 0.3)))
            f_cut = F(rng.randint(1, 7), 8)
            for lo, hi in ((F(0), f_cut), (f_cut, F(1))):
                u = F(rng.randint(-4, 4), 3)
                fp.append(((lo, hi), affine_onto(lo, hi, u, u + F(rng.randint(1, 5), 2), rng.random() < 0.3)))
            return fp, gp
        exps = [F(1, 2), F(2), F(1, 3), F(3), F(3, 2), F(2, 3)]
        cs = [F(1), F(1, 2), F(1, 4), F(4, 9), F(1, 8)]
        g = make_monomial(rng.choice(cs), rng.choice(exps))
        f = make_monomial(rng.choice([F(1), F(2), F(3), F(1, 2)]), rng.choice(exps))
        return [((F(0), F(1)), f)], [((F(0), F(1)), g)]

    dim = rng.choice([1, 2])
    coords = [coord_pair() for _ in range(dim)]

    def product(which):
        pieces = [((), ())]
        for c in coords:
            pieces = [(box + (iv,), maps + (m,)) for box, maps in pieces for iv, m in c[which]]
        return PiecewiseMap(dim, pieces)

    return product(0), product(1)
