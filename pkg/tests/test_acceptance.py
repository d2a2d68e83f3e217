"""Acceptance criteria 1-9, each printing one PASS/FAIL line with its runtime."""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from kgbranch.boxes import BoxSet
from kgbranch.branching import canonical_bs, check_axioms, check_semibranching, from_semibranching, to_semibranching
from kgbranch.cli import main
from kgbranch.dsl import load_bs, load_graph, parse_bs, parse_graph, serialize_bs, corpus_dir
from kgbranch.kgraph import KGraph, Square, validate_kgraph
from kgbranch.maps import Affine, make_monomial, map_compose, map_equal_ae, rn_chain_rhs, rn_derivative, rn_equal
from kgbranch.operator import build_generators, verify_ck
from kgbranch.periodicity import FaithfulnessCertificate, check_faithfulness, confirm_disjoint, detect_periodicity, verify_w_unitary

from conftest import GRAPHS, EXTRA_GRAPHS, random_2graph, random_map_pair, small_paths
from oracles import exhaustive_bruteforce, lambda_min_bruteforce
from test_kgraph import NONASSOC


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, budget):
        start = time.perf_counter()
        ok, note = False, ""
        try:
            yield
            elapsed = time.perf_counter() - start
            ok = elapsed < budget
            note = f"{elapsed:.2f}s (budget {budget}s)"
            assert ok, f"criterion {number} took {elapsed:.2f}s, over its {budget}s budget"
        except AssertionError as exc:
            note = note or str(exc).splitlines()[0]
            raise
        finally:
            with capsys.disabled():
                print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {title} [{note}]")

    return run


def _quiet(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def _mutations(g: KGraph):
    """Every graph obtained by deleting one square or giving it a different right-hand side."""
    pairs = [(x, y) for x in g.edges for y in g.edges if g.edges[x].source == g.edges[y].range]
    for i, sq in enumerate(g.squares):
        rest = [s for j, s in enumerate(g.squares) if j != i]
        yield f"delete {sq.left}", rest
        for alt in pairs:
            if alt != sq.right:
                yield f"{sq.left} -> {alt}", rest + [Square(sq.left, alt)]


def test_criterion_1_corpus_validity(criterion, capsys):
    with criterion(1, "corpus graphs validate; every single-square mutation is rejected", 1.0):
        for name in GRAPHS:
            assert _quiet(capsys, ["validate", f"{name}.kg"])[0] == 0, name
        mutated = 0
        for name in ("flip", "trivial3"):
            g = load_graph(f"{name}.kg")
            for what, squares in _mutations(g):
                rep = validate_kgraph(KGraph(g.rank, g.vertices, g.edges.values(), squares))
                assert not rep.ok, (name, what)
                assert rep.kinds() & {"missing", "bijectivity", "associativity", "shape", "duplicate"}
                mutated += 1
        assert mutated > 20
        assert validate_kgraph(parse_graph(NONASSOC)).kinds() == {"associativity"}


def test_criterion_2_axioms(criterion, capsys):
    with criterion(2, "check-bs passes conditions (1)-(7) on every corpus system", 1.0 * len(GRAPHS)):
        for name in GRAPHS:
            start = time.perf_counter()
            code, out = _quiet(capsys, ["check-bs", f"{name}.bs", "--json"])
            rep = json.loads(out)["report"]
            assert code == 0, name
            assert [c["condition"] for c in rep["conditions"]] == list(range(1, 8))
            assert time.perf_counter() - start < 1.0, name
        l2, l3 = load_bs("lambda2.bs"), load_bs("lambda3.bs")
        assert l2.maps["e"].pieces[0][1] == (Affine(1, 0),)
        m = l3.maps
        assert map_equal_ae(map_compose(map_compose(m["e"], m["f1"]), m["e"].inverse()), m["f2"])


def test_criterion_3_cuntz_krieger(criterion, capsys):
    with criterion(3, "ck-verify proves the four relations for corpus and canonical systems", 5.0):
        for name in GRAPHS:
            code, out = _quiet(capsys, ["ck-verify", f"{name}.bs", "--json"])
            rep = json.loads(out)["report"]
            assert code == 0 and [c["passed"] for c in rep["conditions"]] == [True] * 4, name
        for name in GRAPHS + EXTRA_GRAPHS:
            g = load_graph(f"{name}.kg")
            assert verify_ck(build_generators(canonical_bs(g))).ok, name


def test_criterion_4_chain_rule(criterion):
    rng = random.Random(2024)
    pairs = [random_map_pair(rng) for _ in range(200)]
    with criterion(4, "chain rule holds exactly on 200 random composable pairs", 1.0):
        for f, g in pairs:
            assert rn_equal(rn_derivative(map_compose(f, g)), rn_chain_rhs(f, g)), (f, g)


def test_criterion_5_oracles(criterion):
    with criterion(5, "lambda_min and is_exhaustive match brute force on 50 random 2-graphs", 5.0):
        rng = random.Random(5)
        kinds = set()
        for i in range(50):
            g = random_2graph(rng, n_vertices=1 + i % 2)
            kinds.add(len(g.vertices))
            paths = small_paths(g)
            for _ in range(10):
                mu = rng.choice(paths)
                nu = rng.choice([p for p in paths if p.range == mu.range])
                assert sorted(g.lambda_min(mu, nu)) == lambda_min_bruteforce(g, mu, nu)
            for v in g.vertices:
                cands = [p for p in paths if p.range == v and not p.is_vertex()]
                for _ in range(3):
                    E = rng.sample(cands, min(len(cands), rng.randint(0, 3)))
                    assert bool(g.is_exhaustive(v, E)) == exhaustive_bruteforce(g, v, E)[0]
        assert kinds == {1, 2}


def test_criterion_6_periodicity(criterion, capsys):
    with criterion(6, "flip periodic with (1,1) and h(f_i)=e_i; commuting aperiodic; lambda2 not applicable", 1.0):
        code, out = _quiet(capsys, ["periodicity", "flip.kg", "--json"])
        rep = json.loads(out)["report"]
        assert code == 0 and (rep["a"], rep["b"]) == (1, 1) and rep["h"] == {"f1": "e1", "f2": "e2"}
        code, out = _quiet(capsys, ["periodicity", "commuting.kg", "--bound", "6", "--json"])
        rep = json.loads(out)["report"]
        assert code == 0 and rep["verdict"] == "aperiodic-up-to-bound" and rep["bound"] == 6
        code, out = _quiet(capsys, ["periodicity", "lambda2.kg", "--json"])
        assert code == 2 and json.loads(out)["status"] == "not-applicable"


def test_criterion_7_faithfulness(criterion, capsys):
    with criterion(7, "all-n certificate with (x^4, y) and E=[1/4,1/2]x[0,1]; |n| <= 20 disjoint", 1.0):
        code, out = _quiet(capsys, ["faithfulness", "flip.bs", "--mode", "all-n", "--json"])
        rep = json.loads(out)["report"]
        assert code == 0 and rep["E"] == "[1/4,1/2] x [0,1]"
        cert = check_faithfulness(load_bs("flip.bs"), detect_periodicity(load_graph("flip.kg")), "all-n")
        assert isinstance(cert, FaithfulnessCertificate) and cert.kind == "all-n"
        assert cert.E == BoxSet.of((F(1, 4), F(1, 2)), (0, 1))
        # f_{e1} o f_{f1}^{-1} is the inverse of T = f_{f1} o f_{e1}^{-1}
        assert cert.T_inverse.pieces[0][1] == (make_monomial(1, 4), Affine(1, 0))
        assert confirm_disjoint(cert, 20) == []


def test_criterion_8_unitary(criterion):
    with criterion(8, "W*W = WW* = S_v on the interval and canonical flip systems", 1.0):
        pr = detect_periodicity(load_graph("flip.kg"))
        assert verify_w_unitary(load_bs("flip.bs"), pr)
        assert verify_w_unitary(canonical_bs(load_graph("flip.kg")), pr)


def test_criterion_9_semibranching(criterion):
    with criterion(9, "semibranching conversion round-trips every corpus system", 1.0):
        for name in GRAPHS:
            bs = load_bs(f"{name}.bs")
            back = from_semibranching(to_semibranching(bs))
            assert back == bs, name
            assert serialize_bs(back, bs.graph_ref) == serialize_bs(bs)
