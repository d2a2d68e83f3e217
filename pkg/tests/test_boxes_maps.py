import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from kgbranch.boxes import BoxError, BoxSet, make_box
from kgbranch.dsl import load_bs
from kgbranch.maps import (
    Affine,
    GenMonomial,
    MapError,
    PiecewiseMap,
    map_compose,
    map_equal_ae,
    make_monomial,
    rn_chain_rhs,
    rn_derivative,
    rn_equal,
)
from kgbranch.scalars import Surd, rpow

from conftest import random_map_pair, to_mpf


unit = BoxSet.of((0, 1))


def _interval_sets():
    frac = st.fractions(min_value=0, max_value=1, max_denominator=6)
    iv = st.tuples(frac, frac).filter(lambda t: t[0] != t[1]).map(lambda t: (min(t), max(t)))
    box = st.tuples(iv, iv)
    return st.lists(box, max_size=4).map(lambda bs: BoxSet(2, bs))


@settings(max_examples=80, deadline=None)
@given(_interval_sets(), _interval_sets())
def test_measure_inclusion_exclusion(a, b):
    assert (a | b).measure() == a.measure() + b.measure() - (a & b).measure()
    assert (a - b).measure() == a.measure() - (a & b).measure()
    assert (a ^ b) == ((a - b) | (b - a))
    assert (a & b) <= a and a <= (a | b)


def test_canonical_form_merges():
    left, right = BoxSet.of((0, F(1, 2))), BoxSet.of((F(1, 2), 1))
    assert (left | right) == unit
    sq = BoxSet(2, [make_box((0, 1), (0, F(1, 2))), make_box((0, 1), (F(1, 2), 1))])
    assert sq == BoxSet.of((0, 1), (0, 1))


def test_degenerate_box_rejected():
    with pytest.raises(BoxError):
        make_box((F(1, 2), F(1, 2)))


def test_surd_endpoints():
    s = rpow(F(2), F(1, 2))
    a = BoxSet.of((0, s / 2))
    b = BoxSet.of((F(1, 2), 1))
    inter = a & b
    assert inter == BoxSet.of((F(1, 2), s / 2))


def test_composition_examples():
    fl = load_bs("flip.bs")
    T = map_compose(fl.maps["e1"], fl.maps["f1"].inverse())
    assert T.pieces == ((make_box((0, 1), (0, 1)), (make_monomial(1, 4), Affine(1, 0))),)
    f = fl.maps["f2"]
    assert map_equal_ae(map_compose(f, f.inverse()), PiecewiseMap.identity(f.image()))
    l3 = load_bs("lambda3.bs")
    fe = l3.maps["e"]
    assert map_equal_ae(map_compose(fe, fe), PiecewiseMap.identity(unit))


def test_equal_ae_examples():
    l3 = load_bs("lambda3.bs")
    m = l3.maps
    assert map_equal_ae(map_compose(m["f1"], m["e"]), map_compose(m["e"], m["f2"]))
    assert not map_equal_ae(PiecewiseMap.identity(unit), PiecewiseMap.identity(BoxSet.of((0, F(1, 2)))))
    fl = load_bs("flip.bs").maps
    assert map_equal_ae(map_compose(fl["e1"], fl["f1"]), map_compose(fl["f1"], fl["e1"]))


def test_rn_examples():
    half = PiecewiseMap(1, [(((0, 1),), (Affine(F(1, 2), 0),))])
    assert rn_derivative(half).pieces[0][1] == (GenMonomial(F(1, 2), 0),)
    assert rn_derivative(PiecewiseMap.identity(unit)).pieces[0][1] == (GenMonomial(1, 0),)
    sq = PiecewiseMap(1, [(((0, 1),), (make_monomial(1, 2),))])
    assert rn_derivative(sq).pieces[0][1] == (GenMonomial(2, 1),)


def _sample_points(box, rng):
    pts = []
    for lo, hi in box:
        lo_m, hi_m = to_mpf(lo), to_mpf(hi)
        t = mpmath.mpf(rng.randint(1, 99)) / 100
        pts.append(lo_m + (hi_m - lo_m) * t)
    return pts


def _eval_gm(gm, x):
    return to_mpf(gm.c) * (x ** (mpmath.mpf(gm.e.numerator) / gm.e.denominator))


def _eval_map(m, x):
    if isinstance(m, Affine):
        return to_mpf(m.a) * x + to_mpf(m.b)
    return to_mpf(m.c) * x ** (mpmath.mpf(m.p.numerator) / m.p.denominator)


def check_chain_rule(f, g, rng) -> bool:
    fg = map_compose(f, g)
    lhs, rhs = rn_derivative(fg), rn_chain_rhs(f, g)
    if not rn_equal(lhs, rhs):
        return False
    # independent numeric confirmation of (Phi_f o g) * Phi_g at interior points
    for box, dens in lhs.pieces:
        x = _sample_points(box, rng)
        gpiece = next(ms for b, ms in g.pieces if all(to_mpf(lo) <= xi <= to_mpf(hi) for (lo, hi), xi in zip(b, x)))
        gx = [_eval_map(m, xi) for m, xi in zip(gpiece, x)]
        fpiece = next(
            (ms for b, ms in f.pieces if all(to_mpf(lo) <= yi <= to_mpf(hi) for (lo, hi), yi in zip(b, gx))), None
        )
        if fpiece is None:
            continue
        for i, (d, xi) in enumerate(zip(dens, x)):
            expect = _eval_gm(fpiece[i].derivative(), gx[i]) * _eval_gm(gpiece[i].derivative(), xi)
            if abs(_eval_gm(d, xi) - expect) > mpmath.mpf(10) ** -40:
                return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_chain_rule_random(seed):
    rng = random.Random(seed)
    f, g = random_map_pair(rng)
    assert check_chain_rule(f, g, rng)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_inverse_density_law(seed):
    rng = random.Random(seed)
    _, g = random_map_pair(rng)
    pieces = [(b, ms) for b, ms in g.pieces]
    for box, maps in pieces:
        one = PiecewiseMap(g.dim, [(box, maps)])
        inv = one.inverse()
        # Phi_{g^-1} o g times Phi_g is identically one
        prod = rn_chain_rhs(inv, one)
        for _, dens in prod.pieces:
            assert all(d == GenMonomial(1, 0) for d in dens)


def test_radical_pow_consistency():
    s = rpow(F(2), F(1, 4))
    assert abs(to_mpf(s) - mpmath.root(2, 4)) < mpmath.mpf(10) ** -45
    assert Surd.of(s) * Surd.of(s) * Surd.of(s) * Surd.of(s) == Surd.of(2)


def test_monomial_rejects_negative():
    with pytest.raises(MapError):
        make_monomial(1, 2)(F(-1, 2))
