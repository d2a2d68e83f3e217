import random
from fractions import Fraction as F

import mpmath
import pytest

from kgbranch.boxes import BoxSet, make_box
from kgbranch.branching import canonical_bs
from kgbranch.dsl import corpus_dir, parse_bs
from kgbranch.maps import Affine
from kgbranch.operator import IntervalOperator, OperatorError, build_generators, op_adjoint, op_add, op_mul, verify_ck
from kgbranch.scalars import RadicalScalar, rpow

from conftest import GRAPHS, EXTRA_GRAPHS, to_mpf



@pytest.fixture(scope="module")
def families(corpus_systems):
    return {n: build_generators(bs) for n, bs in corpus_systems.items()}


def test_lambda2_generator_shape(families):
    S = families["lambda2"].S
    (t,) = S["f1"].terms
    assert t.support == make_box((0, F(1, 2)))
    assert t.maps == (Affine(F(1, 2), 0),)
    assert t.weight.terms == {(F(0),): RadicalScalar.sqrt(2)}
    assert S["v"].equals(IntervalOperator.projection(BoxSet.of((0, 1))))


def test_lambda2_relations(families):
    S = families["lambda2"].S
    assert (S["f1"].adjoint() * S["f1"]).equals(S["v"])
    assert (S["f1"] * S["f1"].adjoint() + S["f2"] * S["f2"].adjoint()).equals(S["v"])


def test_canonical_prefix_isometry(corpus_graphs):
    fam = build_generators(canonical_bs(corpus_graphs["lambda2"]))
    g = corpus_graphs["lambda2"]
    assert fam.S["f1"].terms == ((g.edge("f1"), g.vertex("v"), F(1)),)
    assert (fam.S["f1"].adjoint() * fam.S["f1"]).equals(fam.S["v"])


def _words(fam, rng, n=25):
    gens = list(fam.S.values())
    pool = gens + [x.adjoint() for x in gens]
    out = []
    for _ in range(n):
        w = rng.choice(pool)
        for _ in range(rng.randint(0, 2)):
            w = w * rng.choice(pool)
        out.append(w)
    return out


@pytest.mark.parametrize("name", GRAPHS)
def test_adjoint_laws(families, name):
    fam = families[name]
    rng = random.Random(name)
    ws = _words(fam, rng)
    for a in ws:
        assert op_adjoint(op_adjoint(a)).equals(a)
    for a, b in zip(ws, ws[1:]):
        assert op_adjoint(op_mul(a, b)).equals(op_mul(op_adjoint(b), op_adjoint(a)))
        assert op_adjoint(op_add(a, b)).equals(op_add(op_adjoint(a), op_adjoint(b)))


@pytest.mark.parametrize("name", GRAPHS)
def test_range_projections(families, name):
    fam = families[name]
    for e in fam.graph.edges:
        p = fam.S[e] * fam.S[e].adjoint()
        assert (p * p).equals(p) and p.adjoint().equals(p)


# numeric oracle: apply an operator to a test function by its defining formula


def _apply(op, phi, x):
    total = mpmath.mpf(0)
    for t in op.terms:
        if not all(to_mpf(lo) < xi < to_mpf(hi) for (lo, hi), xi in zip(t.support, x)):
            continue
        pre = []
        for m, xi in zip(t.maps, x):
            inv = m.inverse()
            if isinstance(inv, Affine):
                pre.append(to_mpf(inv.a) * xi + to_mpf(inv.b))
            else:
                pre.append(to_mpf(inv.c) * xi ** (mpmath.mpf(inv.p.numerator) / inv.p.denominator))
        w = mpmath.mpf(0)
        for k, c in t.weight.terms.items():
            mon = to_mpf(c)
            for e, xi in zip(k, x):
                mon *= xi ** (mpmath.mpf(e.numerator) / e.denominator)
            w += mon
        total += w * phi(pre)
    return total


def _lift(op):
    return lambda phi: (lambda x: _apply(op, phi, x))


@pytest.mark.parametrize("name", ["lambda2", "lambda3", "uv-graph", "flip"])
def test_products_match_composition(families, corpus_systems, name):
    fam = families[name]
    rng = random.Random(name + "num")
    hull = corpus_systems[name].X().hull()
    phi = lambda p: 1 + 3 * p[0] + (p[1] ** 2 if len(p) > 1 else 0)
    ws = _words(fam, rng, 10)
    for a, b in zip(ws, ws[1:]):
        ab = a * b
        for _ in range(5):
            x = [to_mpf(lo) + (to_mpf(hi) - to_mpf(lo)) * mpmath.mpf(rng.randint(1, 997)) / 1000 for lo, hi in hull]
            lhs = _apply(ab, phi, x)
            rhs = _lift(a)(_lift(b)(phi))(x)
            assert abs(lhs - rhs) < mpmath.mpf(10) ** -25


def test_adjoint_inner_product_lambda3(families):
    S = families["lambda3"].S
    a = S["f2"] * S["e"]
    phi = lambda p: 1 + p[0]
    psi = lambda p: p[0] ** 2
    lhs = mpmath.quad(lambda x: _apply(a, phi, [x]) * psi([x]), [0, 0.25, 0.5, 0.75, 1])
    rhs = mpmath.quad(lambda x: phi([x]) * _apply(a.adjoint(), psi, [x]), [0, 0.25, 0.5, 0.75, 1])
    assert abs(lhs - rhs) < mpmath.mpf(10) ** -20


def test_radical_squares_numeric():
    rng = random.Random(7)
    for _ in range(50):
        a = RadicalScalar.of(rpow(F(rng.randint(1, 30), rng.randint(1, 30)), F(1, rng.choice([2, 4]))))
        b = RadicalScalar.of(F(rng.randint(-5, 5), rng.randint(1, 5)))
        s = a + b
        assert abs(to_mpf(s * s) - to_mpf(s) ** 2) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("name", GRAPHS)
def test_ck_interval(families, name):
    assert verify_ck(families[name]).ok


@pytest.mark.parametrize("name", GRAPHS + EXTRA_GRAPHS)
def test_ck_canonical(corpus_graphs, name):
    g = corpus_graphs[name]
    assert verify_ck(build_generators(canonical_bs(g))).ok


def test_ck_broken_witness():
    text = (corpus_dir() / "lambda2.bs").read_text().replace("(1/2*x + 1/2)", "(3/4*x + 1/4)")
    fam = build_generators(parse_bs(text, base=corpus_dir()), checked=False)
    rep = verify_ck(fam)
    assert not rep.ok
    assert rep.condition(1).passed
    assert not rep.condition(3).passed and rep.condition(3).witness == "[1/4,1/2]"


def test_unchecked_refused():
    text = (corpus_dir() / "lambda2.bs").read_text().replace("(1/2*x + 1/2)", "(3/4*x + 1/4)")
    with pytest.raises(OperatorError):
        build_generators(parse_bs(text, base=corpus_dir()))
