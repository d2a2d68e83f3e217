"""Brute-force reference implementations used only by the tests."""

import itertools

from kgbranch.kgraph import join


def lambda_min_bruteforce(g, mu, nu):
    top = join(mu.degree, nu.degree)
    ga = tuple(a - b for a, b in zip(top, mu.degree))
    gb = tuple(a - b for a, b in zip(top, nu.degree))
    out = []
    for alpha in g.enumerate_paths(mu.source, ga):
        for beta in g.enumerate_paths(nu.source, gb):
            if g.compose(mu, alpha) == g.compose(nu, beta):
                out.append((alpha, beta))
    return sorted(out)


def exhaustive_bruteforce(g, v, E):
    """Search every mu in v Lambda with d(mu) <= D + (1,...,1) for one missing all of E."""
    top = g.zero()
    for nu in E:
        top = join(top, nu.degree)
    for d in itertools.product(*(range(t + 2) for t in top)):
        for mu in g.enumerate_paths(v, d):
            if not any(lambda_min_bruteforce(g, mu, nu) for nu in E):
                return False, mu
    return True, None


def words_modulo_squares(g, v, n):
    """Normal forms of vLambda^n found by closing all composable words under square swaps."""
    k = g.rank
    length = sum(n)
    found = set()

    def words(prefix, tip):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for e in g.in_edges(tip):
            yield from words(prefix + [e], g.edges[e].source)

    for w in words([], v):
        counts = [0] * k
        for e in w:
            counts[g.color(e) - 1] += 1
        if tuple(counts) == tuple(n):
            found.add(g.path(*w) if w else g.vertex(v))
    return found
