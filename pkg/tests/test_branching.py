import random

import pytest

from kgbranch.branching import (
    FINITELY_ALIGNED,
    ROW_FINITE,
    BranchingError,
    canonical_bs,
    check_axioms,
    check_equivalence_rowfinite,
    check_semibranching,
    from_semibranching,
    to_semibranching,
)
from kgbranch.dsl import corpus_dir, load_graph, parse_bs, parse_graph
from kgbranch.maps import Affine

from conftest import GRAPHS, EXTRA_GRAPHS, random_2graph

BROKEN_L2 = (corpus_dir() / "lambda2.bs").read_text().replace("f2: [0,1] -> (1/2*x + 1/2)", "f2: [0,1] -> (3/4*x + 1/4)")


def broken_lambda2():
    assert "3/4*x" in BROKEN_L2
    return parse_bs(BROKEN_L2, base=corpus_dir())


@pytest.mark.parametrize("name", GRAPHS)
def test_corpus_systems_pass(corpus_systems, name):
    rep = check_axioms(corpus_systems[name])
    assert rep.ok, rep.as_dict()
    assert [c.number for c in rep.conditions] == list(range(1, 8))


@pytest.mark.parametrize("name", GRAPHS + EXTRA_GRAPHS)
def test_canonical_systems_pass(corpus_graphs, name):
    assert check_axioms(canonical_bs(corpus_graphs[name])).ok


def test_random_canonical_systems_pass():
    for seed in range(60):
        g = random_2graph(random.Random(seed))
        assert check_axioms(canonical_bs(g)).ok, seed


def test_lambda2_construction(corpus_systems):
    bs = corpus_systems["lambda2"]
    assert bs.maps["e"].pieces[0][1] == (Affine(1, 0),)


def test_lambda3_conjugation(corpus_systems):
    from kgbranch.maps import map_compose, map_equal_ae

    m = corpus_systems["lambda3"].maps
    conj = map_compose(map_compose(m["e"], m["f1"]), m["e"].inverse())
    assert map_equal_ae(conj, m["f2"])


def test_broken_overlap_witness():
    rep = check_axioms(broken_lambda2())
    assert not rep.ok
    c1 = rep.condition(1)
    assert not c1.passed and c1.witness == "[1/4,1/2]"


def test_row_finite_equivalence(corpus_systems):
    for name in ("lambda2", "flip", "lambda3", "uv-graph"):
        eq = check_equivalence_rowfinite(corpus_systems[name])
        assert eq.agree and eq.finitely_aligned.ok and eq.row_finite.ok
    eq = check_equivalence_rowfinite(broken_lambda2())
    assert eq.agree and not eq.finitely_aligned.ok and not eq.row_finite.ok


def test_row_finite_needs_no_sources(corpus_systems):
    with pytest.raises(BranchingError):
        check_axioms(corpus_systems["eightvertex"], ROW_FINITE)


def test_declared_set_must_be_exhaustive(corpus_systems):
    with pytest.raises(BranchingError):
        check_axioms(corpus_systems["lambda2"], FINITELY_ALIGNED, [("f1",)])


def test_square_violation_detected():
    text = (corpus_dir() / "lambda3.bs").read_text()
    swapped = text.replace("f2: [0,1/2] -> (1/2*x + 3/4)", "f2: [0,1/2] -> (1/2*x + 1/2)")
    swapped = swapped.replace("f2: [1/2,1] -> (1/2*x + 1/4)", "f2: [1/2,1] -> (1/2*x + 1/2)")
    assert swapped != text
    rep = check_axioms(parse_bs(swapped, base=corpus_dir()))
    assert not rep.condition(5).passed


@pytest.mark.parametrize("name", GRAPHS)
def test_semibranching_roundtrip(corpus_systems, name):
    bs = corpus_systems[name]
    sb = to_semibranching(bs)
    back = from_semibranching(sb)
    assert back == bs
    rep = check_semibranching(sb)
    if bs.graph.is_row_finite_no_sources():
        assert rep.ok
    else:
        # sources leave part of X outside every colour-i range
        assert [c.number for c in rep.failed()] == [2]


def test_semibranching_lambda2_coding(corpus_systems):
    from kgbranch.maps import PiecewiseMap, map_equal_ae

    sb = to_semibranching(corpus_systems["lambda2"])
    assert map_equal_ae(sb.coding[2], PiecewiseMap.identity(sb.X))


def test_semibranching_null_domain():
    g = parse_graph("RANK 1\nVERTICES\n  u\n  w\nEDGES\nSQUARES\n")
    bs = parse_bs("DIMENSION 1\nDOMAIN\n  u: [0,1]\nMAPS\n", graph=g)
    with pytest.raises(BranchingError):
        to_semibranching(bs)
