import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.core import (
    ClassKind,
    DegreeConstraint,
    DomainError,
    FunctionClass,
    Hypergraph,
    attrset,
    make_rule,
    vertex_dominated,
)
from artifact.widths import (
    TreeDecomposition,
    associated_td,
    bag_selector_images,
    classic_width,
    da_maximin_width,
    da_minimax_width,
    enumerate_tds,
    fractional_cover,
    gap_hypergraph,
    integral_cover,
    minimal_transversals,
    minimax_swap,
)
from instances import c4_rule

B123, B134, B124, B234 = attrset([0, 1, 2]), attrset([0, 2, 3]), attrset([0, 1, 3]), attrset([1, 2, 3])


def bag_sets(tds):
    return {frozenset(td.bags) for td in tds}


def test_c4_has_two_decompositions():
    # [PAPER] bags {123,341} and {234,412}
    tds = enumerate_tds(c4_rule().hypergraph)
    assert bag_sets(tds) == {frozenset({B123, B134}), frozenset({B124, B234})}
    for td in tds:
        assert td.edges == ((0, 1),)


def test_triangle_and_path():
    # [TRIVIAL] clique -> single bag; [DERIVED] path -> its two edges
    tri = make_rule(3, [([0, 1], "R"), ([1, 2], "S"), ([0, 2], "T")])
    assert bag_sets(enumerate_tds(tri.hypergraph)) == {frozenset({0b111})}
    path = make_rule(3, [([0, 1], "R"), ([1, 2], "S")])
    assert bag_sets(enumerate_tds(path.hypergraph)) == {frozenset({0b011, 0b110})}


def test_too_many_variables():
    with pytest.raises(DomainError):
        enumerate_tds(Hypergraph(11, ((1, "R"),)))


def test_validate_detects_broken_decompositions():
    h = c4_rule().hypergraph
    assert TreeDecomposition((B123, B134), ((0, 1),)).validate(h) == []
    assert TreeDecomposition((B123,), ()).validate(h)
    disconnected = TreeDecomposition((0b0011, 0b0110, 0b1100, 0b1001), ((0, 1), (1, 2), (2, 3)))
    assert any("connected" in e for e in disconnected.validate(h))


def test_classic_widths_of_c4():
    # [PAPER] fhtw = 2; [DERIVED] tw = 2, ghtw = 2
    h = c4_rule().hypergraph
    assert classic_width(h, "fhtw").value == 2
    assert classic_width(h, "tw").value == 2
    assert classic_width(h, "ghtw").value == 2
    with pytest.raises(DomainError):
        classic_width(h, "adw")


def test_covers_of_triangle():
    # [DERIVED] fractional cover 3/2, integral 2
    h = make_rule(3, [([0, 1], "R"), ([1, 2], "S"), ([0, 2], "T")]).hypergraph
    assert fractional_cover(h, 0b111) == Fraction(3, 2)
    assert integral_cover(h, 0b111) == 2
    assert classic_width(h, "fhtw").value == Fraction(3, 2)


def test_da_widths_of_c4():
    # [PAPER] da-fhtw = 2 and da-subw = 3/2 at log N = 1
    rule = c4_rule()
    assert da_minimax_width(rule).value == 2
    rep = da_maximin_width(rule)
    assert rep.value == Fraction(3, 2)
    assert len(rep.targets) == 2


def test_fds_lower_the_minimax_width():
    # [DERIVED] A1 <-> A2 makes bag 123 cost 3/2
    fds = [DegreeConstraint(0b01, 0b11, Fraction(0), 1, "R12"), DegreeConstraint(0b10, 0b11, Fraction(0), 1, "R12")]
    assert da_minimax_width(c4_rule(constraints=fds)).value < 2


def test_single_bag_widths_equal_size_bound():
    # [TRIVIAL] one decomposition with one bag: both widths are the bag's bound
    rule = make_rule(3, [([0, 1], "R"), ([1, 2], "S"), ([0, 2], "T")], sizes={"R": 2, "S": 2, "T": 2})
    assert da_minimax_width(rule).value == Fraction(3, 2)
    assert da_maximin_width(rule).value == Fraction(3, 2)


def test_selector_images_of_c4():
    # [PAPER] the four two-target rules
    tds = enumerate_tds(c4_rule().hypergraph)
    images = {frozenset(i) for i in bag_selector_images(tds)}
    assert images == {
        frozenset({B123, B124}),
        frozenset({B123, B234}),
        frozenset({B134, B124}),
        frozenset({B134, B234}),
    }
    assert {frozenset(t) for t in minimal_transversals([td.bag_set for td in tds])} == images


def test_selector_images_of_single_decomposition():
    # [TRIVIAL]
    td = TreeDecomposition((0b011, 0b110), ((0, 1),))
    assert bag_selector_images([td]) == [(0b011,), (0b110,)]


def test_associated_td():
    # [PAPER] bags (123, 341) give the left decomposition
    tds = enumerate_tds(c4_rule().hypergraph)
    td = associated_td(tds, [B123, B134])
    assert td is not None and td.bag_set == {B123, B134}
    assert associated_td(tds, [B123, B234]) is None


def test_gap_hypergraph_widths():
    # [PAPER] m = 2, k = 2: fhtw >= 2m = 4 and da-subw <= m(2 - 1/k) = 3
    h, names = gap_hypergraph(2, 2)
    assert h.n == 8 and len(h.edges) == 16
    assert classic_width(h, "fhtw").value >= 4
    rule = make_rule(8, [([v for v in range(8) if e >> v & 1], r) for e, r in h.edges], sizes={r: 2 for _, r in h.edges})
    assert da_maximin_width(rule).value <= 3


@settings(max_examples=200)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.lists(st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)]), min_size=16, max_size=16),
    st.lists(st.integers(1, 15), min_size=4, max_size=4),
)
def test_minimax_swap(na, nb, grid, masks):
    # [DERIVED] min_a max_b f = max over selectors of min_a f(a, beta(a))
    rows = list(range(na))
    cols_of = {a: [b for b in range(nb) if masks[a] >> b & 1] or [0] for a in rows}
    f = {(a, b): grid[4 * a + b] for a in rows for b in range(nb)}
    left, right = minimax_swap(f, rows, cols_of)
    assert left == right


def random_hypergraph(rng: random.Random, n: int) -> Hypergraph:
    edges, covered = [], 0
    while covered != (1 << n) - 1:
        e = attrset(rng.sample(range(n), rng.randint(1, min(3, n))))
        edges.append((e, f"R{len(edges)}"))
        covered |= e
    return Hypergraph(n, tuple(edges))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_enumerated_decompositions_are_valid_and_non_dominated(seed):
    # [DERIVED] validity, bag count, antichain bags, mutual non-domination
    rng = random.Random(seed)
    h = random_hypergraph(rng, rng.randint(1, 6))
    tds = enumerate_tds(h)
    assert tds
    for td in tds:
        assert td.validate(h) == []
        assert len(td.bags) <= h.n
        assert all(not (a != b and a & b == a) for a, b in product(td.bags, td.bags))
    for t1, t2 in product(tds, tds):
        if t1 is not t2:
            assert not all(any(b & c == b for c in t2.bags) for b in t1.bags)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_maximin_never_exceeds_minimax(seed):
    # [DERIVED] on random small rules, across classes
    rng = random.Random(seed)
    h = random_hypergraph(rng, rng.randint(2, 4))
    rule = make_rule(h.n, [([v for v in range(h.n) if e >> v & 1], r) for e, r in h.edges], sizes={r: 1 << rng.randint(0, 2) for _, r in h.edges})
    tds = enumerate_tds(h)
    for kind in (ClassKind.MODULAR, ClassKind.POLYMATROID):
        fc = FunctionClass(kind)
        assert da_maximin_width(rule, fc, tds).value <= da_minimax_width(rule, fc, tds).value


def test_vertex_dominated_width_collapse():
    # [DERIVED] with VD constraints both widths are (tw + 1) log N in every class
    rule = c4_rule(4)
    vd = vertex_dominated(rule)
    tw = classic_width(rule.hypergraph, "tw").value
    for kind in ClassKind:
        fc = FunctionClass(kind, vd)
        assert da_minimax_width(rule, fc).value == (tw + 1) * 2
        assert da_maximin_width(rule, fc).value == (tw + 1) * 2
