import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.bounds import polymatroid_bound
from artifact.core import DomainError
from artifact.proofseq import (
    COMP,
    DECOMP,
    MONO,
    SUB,
    FlowInequality,
    ProofStep,
    construct_flownet,
    construct_inductive,
    find_witness,
    flownet_length_bound,
    format_sequence,
    inductive_length_bound,
    inflow,
    is_tight,
    parse_sequence,
    replay,
    tighten_witness,
    truncate,
    truncation_conditions,
    verify_proof_sequence,
    verify_witness,
    witness_from_lp,
)
from instances import two_target_rule, random_inequality, random_polymatroid

A, B, C = 0b001, 0b010, 0b100
ONE = Fraction(1)


def submodularity_inequality() -> FlowInequality:
    # h(AB) + h(BC) >= h(ABC) + h(B), certified by one sigma
    return FlowInequality(3, {A | B | C: ONE, B: ONE}, {(0, A | B): ONE, (0, B | C): ONE}, {(A | B, B | C): ONE})


def two_target_inequality() -> FlowInequality:
    obj, lam, w = polymatroid_bound(two_target_rule())
    return witness_from_lp(4, lam, w)


def test_step_vectors():
    # [DERIVED] coordinates of each step type
    assert ProofStep(SUB, A | B, B | C, ONE).vector() == {(B, A | B): -1, (B | C, A | B | C): 1}
    assert ProofStep(MONO, A, A | B, ONE).vector() == {(0, A | B): -1, (0, A): 1}
    assert ProofStep(COMP, A, A | B, ONE).vector() == {(0, A): -1, (A, A | B): -1, (0, A | B): 1}
    assert ProofStep(DECOMP, A | B, A, ONE).vector() == {(0, A | B): -1, (0, A): 1, (A, A | B): 1}


def test_malformed_steps():
    # [TRIVIAL]
    assert not ProofStep(SUB, A, A | B, ONE).well_formed()
    assert not ProofStep(MONO, A | B, A, ONE).well_formed()
    assert not ProofStep(COMP, A, A | B, Fraction(0)).well_formed()
    assert not ProofStep("nope", A, A | B, ONE).well_formed()


def test_inflow_and_witness():
    # [DERIVED] inflow at ABC and B equal lambda; AB and BC balance to 0
    q = submodularity_inequality()
    assert inflow(q, A | B | C) == 1 and inflow(q, B) == 1
    assert inflow(q, A | B) == 0 and inflow(q, B | C) == 0
    assert verify_witness(q) and is_tight(q)


def test_invalid_witness_detected():
    # [TRIVIAL] without sigma the inequality h(AB)+h(BC) >= h(ABC)+h(B) is not certified
    q = FlowInequality(3, {A | B | C: ONE, B: ONE}, {(0, A | B): ONE, (0, B | C): ONE})
    assert not verify_witness(q)


def test_find_witness_recovers_sigma():
    # [DERIVED] LP search finds a certificate for the submodularity inequality
    q = find_witness(3, {A | B | C: ONE, B: ONE}, {(0, A | B): ONE, (0, B | C): ONE})
    assert q is not None and verify_witness(q)
    assert find_witness(2, {A | B: Fraction(2)}, {(0, A): ONE, (0, B): ONE}) is None


def test_submodularity_route_uses_decomp_then_sub():
    # [DERIVED] the only route splits h(BC) into h(B) + h(BC|B), then applies submodularity
    q = submodularity_inequality()
    seq = construct_inductive(q)
    kinds = [s.kind for s in seq]
    assert DECOMP in kinds and SUB in kinds
    assert kinds.index(DECOMP) < kinds.index(SUB)
    assert verify_proof_sequence(q, seq)


def test_two_target_sequences():
    # [DERIVED] both constructions verify within their length bounds
    q = two_target_inequality()
    assert q.lam == {0b0111: Fraction(1, 2), 0b1110: Fraction(1, 2)}
    for build, bound in ((construct_inductive, inductive_length_bound), (construct_flownet, flownet_length_bound)):
        seq = build(q)
        check = verify_proof_sequence(q, seq)
        assert check, check.message
        assert 0 < len(seq) <= bound(q)


def test_verify_reports_failing_step():
    q = submodularity_inequality()
    bad = [ProofStep(MONO, A, A | B | C, ONE)]
    check = verify_proof_sequence(q, bad)
    assert not check and check.failing_index == 0


def test_format_parse_round_trip():
    q = two_target_inequality()
    seq = construct_inductive(q)
    names = ["A1", "A2", "A3", "A4"]
    assert parse_sequence(format_sequence(seq, names), names) == seq
    assert parse_sequence(format_sequence(seq)) == seq
    with pytest.raises(DomainError):
        parse_sequence("sub {0} 1")


def test_truncate_requires_tight_witness():
    q = submodularity_inequality()
    loose = FlowInequality(q.n, q.lam, q.delta, q.sigma, {})
    loose.delta[(0, A)] = ONE
    assert verify_witness(loose) and not is_tight(loose)
    with pytest.raises(DomainError):
        truncate(loose, A)
    tight = tighten_witness(loose)
    assert is_tight(tight)
    after = truncate(tight, A | B)
    assert all(truncation_conditions(tight, after, A | B).values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_inequalities_have_valid_sequences(seed):
    # [DERIVED] soundness and length bounds on random valid inequalities
    q = random_inequality(random.Random(seed))
    assert verify_witness(q)
    for build, bound in ((construct_inductive, inductive_length_bound), (construct_flownet, flownet_length_bound)):
        seq = build(q)
        assert verify_proof_sequence(q, seq)
        assert len(seq) <= bound(q)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_steps_never_increase_on_polymatroids(seed):
    # [DERIVED] each step moves delta to a vector with no larger value on every polymatroid
    rng = random.Random(seed)
    q = random_inequality(rng)
    deltas = replay(q.delta, construct_inductive(q))
    for _ in range(5):
        h = random_polymatroid(rng, q.n)
        values = [sum((v * (h(y) - h(x)) for (x, y), v in d.items()), Fraction(0)) for d in deltas]
        assert all(a >= b for a, b in zip(values, values[1:]))
        lhs, rhs = q.evaluate(h)
        assert lhs <= rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_truncation_conditions_hold(seed):
    # [DERIVED] truncation keeps validity, dominates, progresses, keeps the denominator, shrinks the norm
    q = tighten_witness(random_inequality(random.Random(seed)))
    for (x, y), v in list(q.delta.items()):
        if x == 0 and v > 0:
            after = truncate(q, y)
            assert all(truncation_conditions(q, after, y).values())
