from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.core import (
    ClassKind,
    DegreeConstraint,
    DomainError,
    FunctionClass,
    attrset,
    count_within,
    edge_dominated,
    elementary_generators,
    format_set,
    full_set,
    incomparable,
    log2_dyadic,
    make_rule,
    members,
    subsets,
    validate_rule,
    vertex_dominated,
)


@given(st.sets(st.integers(0, 12)))
def test_attrset_members_round_trip(vs):
    # [TRIVIAL] bitmask encoding
    assert members(attrset(vs)) == sorted(vs)


def test_subsets_enumerates_power_set():
    # [TRIVIAL] 2^3 subsets of a 3-set
    assert sorted(subsets(0b1011)) == [0, 1, 2, 3, 8, 9, 10, 11]


def test_incomparable():
    # [TRIVIAL]
    assert incomparable(0b01, 0b10)
    assert not incomparable(0b01, 0b11)
    assert not incomparable(0b11, 0b11)


def test_format_set_uses_names():
    # [TRIVIAL]
    assert format_set(0b101, ["A", "B", "C"]) == "{A,C}"
    assert format_set(0) == "{}"


@pytest.mark.parametrize("k", [0, 1, 5, 20, 64])
def test_log2_dyadic_exact_on_powers_of_two(k):
    # [TRIVIAL] log2(2^k) = k
    assert log2_dyadic(1 << k) == k


@given(st.integers(1, 10**6), st.integers(0, 6))
def test_log2_dyadic_is_least_grid_point_above(count, bits):
    # [DERIVED] q = p/2^b is the least grid point with 2^q >= count,
    # i.e. count^(2^b) <= 2^p < 2 * count^(2^b) ... checked with integers
    q = log2_dyadic(count, bits)
    scale = 1 << bits
    assert q.denominator <= scale
    p = q * scale
    assert p.denominator == 1
    p = int(p)
    assert count**scale <= 1 << p
    if count & (count - 1):
        assert count**scale > 1 << (p - 1)


def test_log2_dyadic_rejects_zero():
    with pytest.raises(DomainError):
        log2_dyadic(0)


@given(st.integers(1, 5000), st.integers(0, 40), st.integers(1, 8))
def test_count_within_matches_integer_test(count, p, q):
    # [DERIVED] count <= 2^(p/q)  iff  count^q <= 2^p
    assert count_within(count, Fraction(p, q)) == (count**q <= 1 << p)


def test_count_within_large_denominator():
    # [DERIVED] 3 <= 2^log2_dyadic(3) and 4 > that bound
    b = log2_dyadic(3)
    assert count_within(3, b)
    assert not count_within(4, b)


def test_degree_constraint_validation():
    # [TRIVIAL]
    with pytest.raises(DomainError):
        DegreeConstraint(0b11, 0b11, Fraction(1))
    with pytest.raises(DomainError):
        DegreeConstraint(0b01, 0b10, Fraction(1))
    with pytest.raises(DomainError):
        DegreeConstraint(0, 0b1, Fraction(-1))
    fd = DegreeConstraint.from_count(0b01, 0b11, 1, "R")
    assert fd.is_fd and not fd.is_cardinality
    card = DegreeConstraint.from_count(0, 0b11, 8, "R")
    assert card.log_bound == 3 and card.is_cardinality


def test_make_rule_defaults_to_full_target():
    # [TRIVIAL]
    rule = make_rule(2, [([0, 1], "R")], sizes={"R": 4})
    assert rule.targets == (0b11,)
    assert rule.is_full_query
    assert rule.constraints[0].log_bound == 2
    assert rule.names() == ("A1", "A2")


def test_validate_rule_reports_problems():
    # [TRIVIAL]
    ok = make_rule(2, [([0, 1], "R")], sizes={"R": 4})
    assert validate_rule(ok) == []
    uncovered = make_rule(3, [([0, 1], "R")])
    assert any("not covered" in d for d in validate_rule(uncovered))
    unguarded = make_rule(
        3, [([0, 1], "R"), ([2], "S")], constraints=[DegreeConstraint(0, 0b101, Fraction(1), None, "R")]
    )
    assert any("unguarded" in d for d in validate_rule(unguarded))


def test_elementary_generator_counts():
    # [DERIVED] C(n,2) * 2^(n-2) submodularities and n monotonicities
    for n in range(1, 6):
        sub, mono = elementary_generators(n)
        assert len(sub) == (n * (n - 1) // 2) * (1 << max(n - 2, 0))
        assert len(mono) == n
        for i_set, j_set in sub:
            assert incomparable(i_set, j_set)
            assert bin(i_set ^ j_set).count("1") == 2


def test_dominated_constraint_families():
    # [TRIVIAL]
    rule = make_rule(3, [([0, 1], "R"), ([1, 2], "S")], sizes={"R": 4, "S": 2})
    vd = vertex_dominated(rule)
    assert [(c.y, c.log_bound) for c in vd] == [(1, 2), (2, 2), (4, 2)]
    ed = edge_dominated(rule)
    assert [(c.y, c.log_bound) for c in ed] == [(0b011, 2), (0b110, 2)]


def test_function_class_constraints():
    # [TRIVIAL] None means the rule's own constraints
    rule = make_rule(2, [([0, 1], "R")], sizes={"R": 4})
    assert FunctionClass(ClassKind.POLYMATROID).constraints_for(rule) == rule.constraints
    assert FunctionClass(ClassKind.MODULAR, ()).constraints_for(rule) == ()
    assert full_set(3) == 0b111
