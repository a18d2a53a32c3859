"""Random and fixed test inputs shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from artifact.bounds import SetFunction
from artifact.core import DegreeConstraint, DisjunctiveRule, attrset, full_set, incomparable, is_proper_subset, make_rule
from artifact.proofseq import FlowInequality, canonical_pair, inflow_vector
from artifact.relalg import Relation, degree

C4_EDGES = [([0, 1], "R12"), ([1, 2], "R23"), ([2, 3], "R34"), ([3, 0], "R41")]


def c4_rule(size: int = 2, targets=None, constraints=()) -> DisjunctiveRule:
    sizes = {rel: size for _, rel in C4_EDGES}
    return make_rule(4, C4_EDGES, targets=targets, sizes=sizes, constraints=constraints)


def two_target_rule(size: int = 2) -> DisjunctiveRule:
    """4-cycle body with the two targets A1A2A3 and A2A3A4."""
    return c4_rule(size, targets=[[0, 1, 2], [1, 2, 3]])


def c4_skew_data(n: int) -> dict[str, Relation]:
    star = [(i, 0) for i in range(n)]
    fan = [(0, i) for i in range(n)]
    return {
        "R12": Relation([0, 1], star),
        "R23": Relation([1, 2], fan),
        "R34": Relation([2, 3], star),
        "R41": Relation([3, 0], [(b, a) for a, b in star]),
    }


def _grid_weight(rng: random.Random, denom: int = 12, top: int = 12) -> Fraction:
    return Fraction(rng.randint(1, top), denom)


def _random_nonempty(rng: random.Random, n: int) -> int:
    return rng.randint(1, (1 << n) - 1)


def _random_chain(rng: random.Random, n: int, allow_empty: bool) -> tuple[int, int]:
    while True:
        y = _random_nonempty(rng, n)
        x = rng.randint(0, y) & y
        if x != y and (allow_empty or x):
            return x, y


def random_inequality(rng: random.Random, n: int | None = None, denom: int = 12) -> FlowInequality:
    """A valid Shannon flow inequality with all weights on the ``1/denom`` grid.

    Random λ, σ, μ and conditional δ terms are drawn first; any remaining
    deficit at a set ``Z`` is then covered by ``δ_{Z|∅}``.
    """
    n = n or rng.randint(2, 5)
    lam: dict[int, Fraction] = {}
    for _ in range(rng.randint(1, 2)):
        b = _random_nonempty(rng, n)
        lam[b] = lam.get(b, Fraction(0)) + _grid_weight(rng, denom)
    sigma: dict[tuple[int, int], Fraction] = {}
    for _ in range(rng.randint(0, 3)):
        i, j = _random_nonempty(rng, n), _random_nonempty(rng, n)
        if incomparable(i, j):
            key = canonical_pair(i, j)
            sigma[key] = sigma.get(key, Fraction(0)) + _grid_weight(rng, denom)
    mu: dict[tuple[int, int], Fraction] = {}
    for _ in range(rng.randint(0, 2)):
        key = _random_chain(rng, n, allow_empty=True)
        mu[key] = mu.get(key, Fraction(0)) + _grid_weight(rng, denom)
    delta: dict[tuple[int, int], Fraction] = {}
    for _ in range(rng.randint(0, 3)):
        key = _random_chain(rng, n, allow_empty=False)
        delta[key] = delta.get(key, Fraction(0)) + _grid_weight(rng, denom)
    ineq = FlowInequality(n, lam, delta, sigma, mu)
    bal = inflow_vector(ineq)
    for z in range(1, 1 << n):
        deficit = lam.get(z, Fraction(0)) - bal[z]
        if deficit > 0:
            ineq.delta[(0, z)] = ineq.delta.get((0, z), Fraction(0)) + deficit
    return ineq


def random_polymatroid(rng: random.Random, n: int) -> SetFunction:
    """Weighted coverage function, optionally truncated at a random level."""
    ground = rng.randint(1, 6)
    weights = [Fraction(rng.randint(0, 6), rng.randint(1, 4)) for _ in range(ground)]
    cover = [rng.getrandbits(ground) for _ in range(n)]

    def h(z: int) -> Fraction:
        covered = 0
        for v in range(n):
            if z >> v & 1:
                covered |= cover[v]
        return sum((w for g, w in enumerate(weights) if covered >> g & 1), Fraction(0))

    f = SetFunction.from_callable(n, h)
    if rng.random() < 0.3:
        cap = f(full_set(n)) * Fraction(rng.randint(1, 3), 4)
        f = SetFunction.from_callable(n, lambda z: min(h(z), cap))
    return f


def _next_pow2(k: int) -> int:
    return 1 << max(0, (k - 1).bit_length())


def random_instance(
    rng: random.Random, max_vars: int = 5, max_rows: int = 200, random_targets: bool = False
) -> tuple[DisjunctiveRule, dict[str, Relation]]:
    """Random hypergraph covering all variables, random data, and declared constraints.

    Declared sizes are the next power of two above the data size; one
    relation sometimes also declares its measured degree, rounded up the same way.
    """
    n = rng.randint(2, max_vars)
    edges: list[int] = []
    covered = 0
    while covered != full_set(n) or len(edges) < 2:
        arity = rng.randint(1, min(3, n))
        e = attrset(rng.sample(range(n), arity))
        if e not in edges:
            edges.append(e)
            covered |= e
    domain = rng.randint(2, 5)
    data: dict[str, Relation] = {}
    named = []
    for k, e in enumerate(edges):
        rel = f"R{k}"
        arity = bin(e).count("1")
        count = rng.randint(1, min(max_rows, domain ** arity))
        rows = {tuple(rng.randrange(domain) for _ in range(arity)) for _ in range(count)}
        cols = [v for v in range(n) if e >> v & 1]
        data[rel] = Relation(cols, rows)
        named.append((cols, rel))
    sizes = {rel: _next_pow2(len(data[rel])) for _, rel in named}
    constraints = []
    wide = [(cols, rel) for cols, rel in named if len(cols) >= 2]
    if wide and rng.random() < 0.5:
        cols, rel = rng.choice(wide)
        y = attrset(cols)
        x = attrset(rng.sample(cols, rng.randint(1, len(cols) - 1)))
        assert is_proper_subset(x, y)
        constraints.append(DegreeConstraint.from_count(x, y, _next_pow2(degree(data[rel], y, x)), rel))
    targets = None
    if random_targets:
        targets = [[v for v in range(n) if t >> v & 1] for t in {_random_nonempty(rng, n) for _ in range(rng.randint(1, 3))}]
    return make_rule(n, named, targets=targets, sizes=sizes, constraints=constraints), data
