"""Tree decompositions and minimax / maximin width parameters.

Decompositions come from variable elimination orderings.  Only the bag
antichain matters for every width, so orderings are explored with a memo on
the residual edge set and each bag antichain is turned back into a tree by a
maximum-weight spanning tree over bag intersections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Iterable, Mapping, Sequence

from .bounds import size_bound
from .core import (
    AttrSet,
    ClassKind,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    Hypergraph,
    attrset,
    is_subset,
    members,
    size,
)
from .ratlp import GE, LinearProgram, LpStatus, solve_lp

MAX_TD_VARS = 10
MAX_SELECTOR_PRODUCT = 10_000
ZERO = Fraction(0)


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags indexed ``0..k-1`` and undirected tree edges between bag indices."""

    bags: tuple[AttrSet, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def bag_set(self) -> frozenset[AttrSet]:
        return frozenset(self.bags)

    def neighbors(self, i: int) -> list[int]:
        return [b if a == i else a for a, b in self.edges if i in (a, b)]

    def validate(self, h: Hypergraph) -> list[str]:
        """Violated tree-decomposition conditions; empty when valid."""
        errors = []
        k = len(self.bags)
        if k == 0:
            return ["no bags"]
        if len(self.edges) != k - 1:
            errors.append(f"{len(self.edges)} tree edges for {k} bags")
        parent = list(range(k))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                errors.append(f"tree edge ({a},{b}) closes a cycle")
            parent[ra] = rb
        for e in h.edge_sets:
            if not any(is_subset(e, bag) for bag in self.bags):
                errors.append(f"edge {members(e)} is inside no bag")
        for v in range(h.n):
            holders = [i for i, bag in enumerate(self.bags) if bag >> v & 1]
            if not holders:
                errors.append(f"variable {v} is in no bag")
                continue
            seen = {holders[0]}
            frontier = [holders[0]]
            while frontier:
                i = frontier.pop()
                for j in self.neighbors(i):
                    if j not in seen and self.bags[j] >> v & 1:
                        seen.add(j)
                        frontier.append(j)
            if len(seen) != len(holders):
                errors.append(f"bags holding variable {v} are not connected")
        return errors


def _maximal(bags: Iterable[AttrSet]) -> frozenset[AttrSet]:
    bags = set(bags)
    return frozenset(b for b in bags if not any(b != c and is_subset(b, c) for c in bags))


def _junction_tree(bags: Sequence[AttrSet]) -> tuple[tuple[int, int], ...]:
    """Maximum-weight spanning tree on ``|B_i ∩ B_j|``; ties broken by index."""
    k = len(bags)
    candidates = sorted(
        ((size(bags[i] & bags[j]), i, j) for i in range(k) for j in range(i + 1, k)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    parent = list(range(k))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edges = []
    for _, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    return tuple(edges)


def tree_from_bags(bags: Iterable[AttrSet]) -> TreeDecomposition:
    ordered = tuple(sorted(bags, key=lambda b: (members(b), b)))
    return TreeDecomposition(ordered, _junction_tree(ordered))


def _dominates(finer: frozenset[AttrSet], coarser: frozenset[AttrSet]) -> bool:
    return all(any(is_subset(b, c) for c in coarser) for b in finer)


def _normalized_edges(h: Hypergraph) -> frozenset[AttrSet]:
    edges = {e for e in h.edge_sets if e}
    covered = 0
    for e in edges:
        covered |= e
    for v in range(h.n):
        if not covered >> v & 1:
            edges.add(1 << v)
    return frozenset(_maximal(edges))


def enumerate_tds(h: Hypergraph) -> list[TreeDecomposition]:
    """Non-redundant, mutually non-dominated decompositions from all elimination orders."""
    if h.n > MAX_TD_VARS:
        raise DomainError(f"tree decomposition enumeration supports at most {MAX_TD_VARS} variables")
    if h.n == 0:
        return []

    @lru_cache(maxsize=None)
    def eliminate(edges: frozenset[AttrSet]) -> frozenset[frozenset[AttrSet]]:
        if not edges:
            return frozenset([frozenset()])
        remaining = 0
        for e in edges:
            remaining |= e
        out = set()
        for v in members(remaining):
            bag = 0
            for e in edges:
                if e >> v & 1:
                    bag |= e
            rest = {e for e in edges if not e >> v & 1}
            if bag & ~(1 << v):
                rest.add(bag & ~(1 << v))
            for tail in eliminate(_maximal(rest)):
                out.add(_maximal(tail | {bag}))
        return frozenset(out)

    antichains = eliminate(_normalized_edges(h))
    key = lambda a: sorted(members(b) for b in a)  # noqa: E731
    ordered = sorted(antichains, key=key)
    kept = [a for a in ordered if not any(b != a and _dominates(b, a) for b in ordered)]
    tds = [tree_from_bags(a) for a in kept]
    for td in tds:
        errors = td.validate(h)
        if errors:
            raise AssertionError(f"invalid decomposition {td}: {errors}")
    return tds


# ---------------------------------------------------------------------------
# classic widths


def fractional_cover(h: Hypergraph, bag: AttrSet) -> Fraction:
    """ρ*: least total edge weight covering every variable of ``bag``."""
    edges = sorted(set(h.restrict(bag)))
    if not bag:
        return ZERO
    lp = LinearProgram(len(edges), [], {i: Fraction(1) for i in range(len(edges))}, maximize=False)
    for v in members(bag):
        lp.add_row({i: 1 for i, e in enumerate(edges) if e >> v & 1}, GE, 1, ("cover", v))
    sol = solve_lp(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise DomainError(f"bag {members(bag)} is not covered by the edges")
    return sol.objective


def integral_cover(h: Hypergraph, bag: AttrSet) -> int:
    """ρ: least number of edges covering every variable of ``bag``."""
    edges = sorted(_maximal(h.restrict(bag)))
    if not bag:
        return 0
    for k in range(1, len(edges) + 1):
        for combo in combinations(edges, k):
            covered = 0
            for e in combo:
                covered |= e
            if covered == bag:
                return k
    raise DomainError(f"bag {members(bag)} is not covered by the edges")


@dataclass
class WidthReport:
    kind: str
    value: Fraction
    td: TreeDecomposition | None = None
    bag_values: dict[AttrSet, Fraction] = field(default_factory=dict)
    targets: tuple[AttrSet, ...] = ()
    certificate: dict = field(default_factory=dict)


def _minimax(tds: Sequence[TreeDecomposition], bag_value: Callable[[AttrSet], Fraction], kind: str) -> WidthReport:
    if not tds:
        raise DomainError("hypergraph has no tree decomposition")
    cache: dict[AttrSet, Fraction] = {}

    def value(bag: AttrSet) -> Fraction:
        if bag not in cache:
            cache[bag] = Fraction(bag_value(bag))
        return cache[bag]

    best: tuple[Fraction, TreeDecomposition] | None = None
    for td in sorted(tds, key=lambda t: sum(size(b) for b in t.bags)):
        worst = ZERO
        for bag in sorted(td.bags, key=size, reverse=True):
            worst = max(worst, value(bag))
            if best is not None and worst >= best[0]:
                break
        else:
            if best is None or worst < best[0]:
                best = (worst, td)
    assert best is not None
    return WidthReport(kind, best[0], best[1], {b: cache[b] for b in best[1].bags})


def classic_width(h: Hypergraph, kind: str) -> WidthReport:
    """Minimum over decompositions of the largest bag measure (tw, ghtw or fhtw)."""
    measures: dict[str, Callable[[AttrSet], Fraction]] = {
        "tw": lambda bag: Fraction(size(bag) - 1),
        "ghtw": lambda bag: Fraction(integral_cover(h, bag)),
        "fhtw": lambda bag: fractional_cover(h, bag),
    }
    if kind not in measures:
        raise DomainError(f"unknown width kind {kind!r}")
    return _minimax(enumerate_tds(h), measures[kind], kind)


# ---------------------------------------------------------------------------
# degree-aware widths


def _bag_bound(fclass: FunctionClass, rule: DisjunctiveRule) -> Callable[[AttrSet], Fraction]:
    return lambda bag: size_bound(fclass, rule.with_targets([bag])).log_value


def da_minimax_width(
    rule: DisjunctiveRule, fclass: FunctionClass | None = None, tds: Sequence[TreeDecomposition] | None = None
) -> WidthReport:
    """Minimum over decompositions of the largest single-bag size bound."""
    fclass = fclass or FunctionClass(ClassKind.POLYMATROID)
    tds = enumerate_tds(rule.hypergraph) if tds is None else tds
    return _minimax(tds, _bag_bound(fclass, rule), "dafhtw")


def minimal_transversals(families: Sequence[frozenset[AttrSet]]) -> list[frozenset[AttrSet]]:
    """Inclusion-minimal sets of bags meeting every family (Berge's algorithm)."""
    current: set[frozenset[AttrSet]] = {frozenset()}
    for fam in families:
        grown = set()
        for t in current:
            if t & fam:
                grown.add(t)
            else:
                for b in fam:
                    grown.add(t | {b})
        current = {t for t in grown if not any(s < t for s in grown)}
    return sorted(current, key=lambda t: sorted(members(b) for b in t))


def bag_selector_images(tds: Sequence[TreeDecomposition]) -> list[tuple[AttrSet, ...]]:
    """Distinct images of maps choosing one bag from each decomposition."""
    count = 1
    for td in tds:
        count *= len(td.bag_set)
    if count > MAX_SELECTOR_PRODUCT:
        raise DomainError(f"{count} bag selectors exceed the enumeration limit {MAX_SELECTOR_PRODUCT}")
    images = {frozenset(choice) for choice in product(*(sorted(td.bag_set) for td in tds))}
    return sorted((tuple(sorted(img)) for img in images), key=lambda t: (len(t), [members(b) for b in t]))


def associated_td(tds: Sequence[TreeDecomposition], bags: Iterable[AttrSet]) -> TreeDecomposition | None:
    """A decomposition all of whose bags occur in ``bags``; exists when ``bags`` meets every image."""
    chosen = set(bags)
    for td in tds:
        if td.bag_set <= chosen:
            return td
    return None


def da_maximin_width(
    rule: DisjunctiveRule, fclass: FunctionClass | None = None, tds: Sequence[TreeDecomposition] | None = None
) -> WidthReport:
    """Maximum over selector images of the multi-target size bound.

    The bound only shrinks when targets are added, so the maximum is attained
    on inclusion-minimal images, which are exactly the minimal transversals of
    the decompositions' bag sets.  Transversals are visited in decreasing
    order of their best single-bag bound, which caps their value, and the scan
    stops once no remaining cap can beat the incumbent.
    """
    fclass = fclass or FunctionClass(ClassKind.POLYMATROID)
    tds = enumerate_tds(rule.hypergraph) if tds is None else tds
    if not tds:
        raise DomainError("hypergraph has no tree decomposition")
    single = _bag_bound(fclass, rule)
    cache: dict[AttrSet, Fraction] = {}

    def cap(bag: AttrSet) -> Fraction:
        if bag not in cache:
            cache[bag] = single(bag)
        return cache[bag]

    transversals = minimal_transversals([td.bag_set for td in tds])
    scored = sorted(
        ((min(cap(b) for b in t), t) for t in transversals),
        key=lambda st: (-st[0], sorted(members(b) for b in st[1])),
    )
    best: tuple[Fraction, tuple[AttrSet, ...], dict] | None = None
    for upper, t in scored:
        if best is not None and upper <= best[0]:
            break
        targets = tuple(sorted(t))
        rep = size_bound(fclass, rule.with_targets(targets))
        if best is None or rep.log_value > best[0]:
            best = (rep.log_value, targets, rep.certificate)
    assert best is not None
    return WidthReport("dasubw", best[0], None, {}, best[1], {"lambda": best[2]["lambda"], "witness": best[2].get("witness")})


def minimax_swap(matrix: Mapping[tuple, Fraction], rows: Sequence, cols_of: Mapping) -> tuple[Fraction, Fraction]:
    """``(min_a max_{b in B(a)} f(a,b), max_β min_a f(a, β(a)))`` by brute force.

    ``cols_of[a]`` lists the admissible columns for row ``a``; ``β`` ranges
    over all maps choosing one admissible column per row.
    """
    values = [[matrix[a, b] for b in cols_of[a]] for a in rows]
    left = min(max(v) for v in values)
    right = max(map(min, product(*values)))
    return left, right


def gap_hypergraph(m: int, k: int) -> tuple[Hypergraph, tuple[str, ...]]:
    """Cycle of ``2k`` independent blocks of ``m`` vertices, consecutive blocks joined completely."""
    if m < 1 or k < 1:
        raise DomainError("gap hypergraph needs m >= 1 and k >= 1")
    blocks = 2 * k
    n = blocks * m
    if n > MAX_TD_VARS:
        raise DomainError(f"gap hypergraph with {n} vertices exceeds {MAX_TD_VARS}")
    names = tuple(f"I{j + 1}_{i + 1}" for j in range(blocks) for i in range(m))
    edges = []
    for j in range(blocks):
        nxt = (j + 1) % blocks
        for a in range(m):
            for b in range(m):
                u, v = j * m + a, nxt * m + b
                edges.append((attrset([u, v]), f"R_{names[u]}_{names[v]}"))
    if blocks == 2:
        edges = list(dict((e, (e, r)) for e, r in edges).values())
    return Hypergraph(n, tuple(edges)), names

