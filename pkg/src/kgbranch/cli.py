"""Command line front end: ``kgbranch <subcommand> FILE [options]``.

Exit status: 0 when every check passes, 1 when a mathematical condition
fails (the report carries a witness), 2 for unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FSPath
from typing import Optional

from . import __version__
from .boxes import BoxError
from .branching import BranchingError, canonical_bs, check_axioms, check_equivalence_rowfinite
from .dsl import DSLError, load_bs, load_graph, parse_exhaustive, resolve
from .kgraph import KGraph, KGraphError, Path, validate_kgraph
from .maps import MapError, UnsupportedComposition
from .operator import OperatorError, build_generators, verify_ck
from .periodicity import NotApplicable, check_faithfulness, detect_periodicity, verify_w_unitary
from .scalars import UnsupportedArithmetic

SCHEMA = 1


class UsageError(Exception):
    pass


def _graph_of(path: str) -> KGraph:
    if str(path).endswith(".bs"):
        return load_bs(path).graph
    return load_graph(path)


def _word(g: KGraph, text: str) -> Path:
    parts = [p for p in text.replace(".", " ").split() if p]
    if not parts:
        raise UsageError("empty path")
    for p in parts:
        if p not in g.edges and p not in g.vertices:
            raise UsageError(f"unknown edge or vertex {p!r}")
    return g.path(*parts)


def _degree(g: KGraph, text: str) -> tuple[int, ...]:
    try:
        d = tuple(int(x) for x in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise UsageError(f"bad degree {text!r}") from None
    if len(d) != g.rank or min(d) < 0:
        raise UsageError(f"degree must have {g.rank} nonnegative entries")
    return d


def _exhaustive(args, g: KGraph) -> list:
    if not getattr(args, "exhaustive", None):
        return []
    p = resolve(args.exhaustive)
    return parse_exhaustive(p.read_text(), g, str(p))


def _apply_depth(args, g: KGraph):
    if getattr(args, "depth", None) is not None:
        g.refine_cap = args.depth


# ---------------------------------------------------------------------------
# subcommands; each returns (passed, report dict, text lines)


def cmd_validate(args):
    g = _graph_of(args.file)
    rep = validate_kgraph(g)
    lines = [f"{args.file}: rank {g.rank}, {len(g.vertices)} vertices, {len(g.edges)} edges, {len(g.squares)} squares"]
    lines.append("valid k-graph" if rep.ok else "NOT a k-graph")
    lines += [f"  {p.kind}: {p.detail}" for p in rep.problems]
    return rep.ok, {"rank": g.rank, **rep.as_dict()}, lines


def cmd_paths(args):
    g = _graph_of(args.file)
    d = _degree(g, args.degree)
    vs = [args.vertex] if args.vertex else list(g.vertices)
    out = {}
    for v in vs:
        if v not in g.vertices:
            raise UsageError(f"unknown vertex {v!r}")
        out[v] = [str(p) for p in g.enumerate_paths(v, d)]
    lines = [f"{v}: {len(ps)} paths of degree {d}" + "".join(f"\n  {p}" for p in ps) for v, ps in out.items()]
    return True, {"degree": list(d), "paths": out}, lines


def cmd_lmin(args):
    g = _graph_of(args.file)
    mu, nu = _word(g, args.mu), _word(g, args.nu)
    pairs = g.lambda_min(mu, nu)
    data = [{"alpha": str(a), "beta": str(b)} for a, b in pairs]
    lines = [f"Lambda^min({mu}, {nu}): {len(pairs)} pair(s)"] + [f"  ({a}, {b})" for a, b in pairs]
    return True, {"mu": str(mu), "nu": str(nu), "pairs": data}, lines


def cmd_exhaustive(args):
    g = _graph_of(args.file)
    if args.vertex not in g.vertices:
        raise UsageError(f"unknown vertex {args.vertex!r}")
    E = [_word(g, w) for w in args.paths]
    res = g.is_exhaustive(args.vertex, E)
    names = ", ".join(map(str, E))
    lines = [f"{{{names}}} is {'exhaustive' if res else 'NOT exhaustive'} for {args.vertex}"]
    if not res:
        lines.append(f"  witness: {res.witness} has no common extension with any member")
    return res.exhaustive, {"exhaustive": res.exhaustive, "witness": str(res.witness) if res.witness else None}, lines


def _axiom_lines(rep) -> list[str]:
    lines = [f"[{rep.mode}] {'all conditions pass' if rep.ok else 'FAILED'}"]
    for c in rep.conditions:
        mark = "pass" if c.passed else "FAIL"
        extra = f" -- witness {c.witness}: {c.detail}" if not c.passed else ""
        lines.append(f"  ({c.number}) {mark} {c.name}{extra}")
    lines += [f"  note: {n}" for n in rep.notes]
    return lines


def cmd_canonical_bs(args):
    g = _graph_of(args.file)
    _apply_depth(args, g)
    bs = canonical_bs(g, _exhaustive(args, g))
    rep = check_axioms(bs)
    return rep.ok, {"system": "canonical", **rep.as_dict()}, ["canonical boundary-path system"] + _axiom_lines(rep)


def cmd_check_bs(args):
    bs = load_bs(args.file)
    extra = _exhaustive(args, bs.graph)
    if args.definition == "both":
        eq = check_equivalence_rowfinite(bs)
        lines = _axiom_lines(eq.finitely_aligned) + _axiom_lines(eq.row_finite)
        lines.append("verdicts agree" if eq.agree else "VERDICTS DISAGREE")
        return eq.finitely_aligned.ok and eq.row_finite.ok and eq.agree, eq.as_dict(), lines
    rep = check_axioms(bs, args.definition, extra)
    return rep.ok, rep.as_dict(), _axiom_lines(rep)


def _system(args):
    if str(args.file).endswith(".bs"):
        return load_bs(args.file)
    g = load_graph(args.file)
    _apply_depth(args, g)
    return canonical_bs(g)


def cmd_ck_verify(args):
    bs = _system(args)
    extra = _exhaustive(args, bs.graph)
    fam = build_generators(bs)
    rep = verify_ck(fam, bs.graph, list(bs.exhaustive) + extra)
    lines = [f"{fam.kind} generators: {'all four relations hold' if rep.ok else 'FAILED'}"]
    for c in rep.conditions:
        mark = "pass" if c.passed else "FAIL"
        extra_txt = f" -- witness {c.witness}: {c.detail}" if not c.passed else ""
        lines.append(f"  ({c.number}) {mark} {c.name}{extra_txt}")
    lines += [f"  note: {n}" for n in rep.notes]
    return rep.ok, {"system": fam.kind, **rep.as_dict()}, lines


def cmd_periodicity(args):
    g = _graph_of(args.file)
    pr = detect_periodicity(g, args.bound)
    if pr.periodic:
        lines = [f"periodic: Per = Z({pr.a}, -{pr.b})"] + [f"  h({m}) = {n}" for m, n in pr.h_text().items()]
    else:
        lines = [f"aperiodic up to bound {pr.bound}"]
    return True, pr.as_dict(), lines


def cmd_faithfulness(args):
    bs = load_bs(args.file)
    pr = detect_periodicity(bs.graph, args.bound)
    try:
        exps = tuple(int(x) for x in args.exponents.split(","))
    except ValueError:
        raise UsageError(f"bad exponent list {args.exponents!r}") from None
    res = check_faithfulness(bs, pr, args.mode, exps)
    d = res.as_dict()
    if "certified" in d:
        lines = [f"no certificate: {res.reason}"] + [f"  tried mu={t['mu']} E={t['E']}: {t['result']}" for t in res.tried]
        return False, d, lines
    d["certified"] = True
    lines = [
        f"certificate ({res.kind}) for mu = {res.mu}, h(mu) = {res.h_mu}",
        f"  T = f_mu o f_h(mu)^-1: {res.T}",
        f"  T^-1: {res.T_inverse}",
        f"  E = {res.E}",
    ]
    if res.escape:
        lines.append(f"  {res.escape['map']}(E) = {res.escape['T(E)']} and H = {res.escape['H']} is invariant")
    if res.exponents:
        lines.append(f"  T^n(E) and E are a.e. disjoint for n in {list(res.exponents)}")
    lines.append(f"  {d['conclusion']}")
    return True, d, lines


def cmd_w_unitary(args):
    sysm = _system(args)
    pr = detect_periodicity(sysm.graph, args.bound)
    if not pr.periodic:
        return False, {"unitary": False, "detail": "graph is aperiodic up to the bound; W undefined"}, ["graph is aperiodic up to the bound; W undefined"]
    res = verify_w_unitary(sysm, pr)
    lines = [f"W = {res.W}", res.detail + (f" (witness {res.witness})" if res.witness else "")]
    return res.unitary, res.as_dict(), lines


COMMANDS = {
    "validate": (cmd_validate, "check the factorization rules of a graph"),
    "paths": (cmd_paths, "list the paths of a given degree"),
    "lmin": (cmd_lmin, "minimal common extensions of two paths"),
    "exhaustive": (cmd_exhaustive, "decide whether a set of paths is exhaustive"),
    "canonical-bs": (cmd_canonical_bs, "check the boundary-path branching system"),
    "check-bs": (cmd_check_bs, "check an interval branching system"),
    "ck-verify": (cmd_ck_verify, "verify the Cuntz-Krieger relations of the induced operators"),
    "periodicity": (cmd_periodicity, "decide periodicity of a single-vertex 2-graph"),
    "faithfulness": (cmd_faithfulness, "search for a faithfulness certificate"),
    "w-unitary": (cmd_w_unitary, "check that W is unitary"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgbranch", description="Higher-rank graphs and their branching systems, checked exactly.")
    p.add_argument("--version", action="version", version=f"kgbranch {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file", help="a .kg or .bs file (bundled corpus names also work)")
        sp.add_argument("--json", action="store_true", help="print a JSON report")
        if name == "paths":
            sp.add_argument("--degree", required=True, help="comma-separated degree, e.g. 1,1")
            sp.add_argument("--vertex")
        if name == "lmin":
            sp.add_argument("mu", help="path as edges separated by spaces or dots")
            sp.add_argument("nu")
        if name == "exhaustive":
            sp.add_argument("vertex")
            sp.add_argument("paths", nargs="*", help="members of E, each written e1.e2.e3")
        if name in ("canonical-bs", "check-bs", "ck-verify"):
            sp.add_argument("--exhaustive", metavar="FILE", help="extra exhaustive sets, one per line")
        if name in ("canonical-bs", "ck-verify", "w-unitary"):
            sp.add_argument("--depth", type=int, help="cap on the total degree used in cylinder refinement")
        if name == "check-bs":
            sp.add_argument("--definition", choices=["finitely-aligned", "row-finite", "both"], default="finitely-aligned")
        if name in ("periodicity", "faithfulness", "w-unitary"):
            sp.add_argument("--bound", type=int, default=6, help="largest p scanned (default 6)")
        if name == "faithfulness":
            sp.add_argument("--mode", choices=["bounded", "all-n"], default="all-n")
            sp.add_argument("--exponents", default="1,-1,2", help="exponents for bounded mode")
    return p


_INPUT_ERRORS = (
    DSLError,
    FileNotFoundError,
    UsageError,
    KGraphError,
    BranchingError,
    BoxError,
    MapError,
    NotApplicable,
    OperatorError,
    UnsupportedComposition,
    UnsupportedArithmetic,
)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        passed, report, lines = func(args)
    except _INPUT_ERRORS as exc:
        kind = "not-applicable" if isinstance(exc, NotApplicable) else "error"
        if args.json:
            print(json.dumps({"schema": SCHEMA, "command": args.command, "status": kind, "error": str(exc)}, sort_keys=True, indent=2))
        else:
            print(f"kgbranch {args.command}: {kind}: {exc}", file=sys.stderr)
        return 2
    if args.json:
        out = {"schema": SCHEMA, "command": args.command, "file": str(args.file), "passed": passed, "report": report}
        print(json.dumps(out, sort_keys=True, indent=2))
    else:
        print("\n".join(lines))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
