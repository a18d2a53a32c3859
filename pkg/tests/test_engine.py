import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.cli import make_instance
from artifact.core import DomainError, make_rule
from artifact.engine import (
    EvalStats,
    body_join,
    brute_min_model,
    eval_boolean_fhtw,
    eval_boolean_subw,
    eval_full_wco,
    greedy_model,
    is_valid_model,
    model_size,
    yannakakis,
)
from artifact.relalg import Relation, brute_force_join, join
from artifact.widths import TreeDecomposition
from instances import c4_rule, c4_skew_data, two_target_rule, random_instance

PATH_EDGES = [([0, 1], "R"), ([1, 2], "S"), ([2, 3], "T")]


def path_data(rng: random.Random, dom: int = 4, rows: int = 6):
    return {
        name: Relation(cols, {(rng.randrange(dom), rng.randrange(dom)) for _ in range(rows)})
        for cols, name in PATH_EDGES
    }


def test_yannakakis_single_bag():
    # [TRIVIAL]
    td = TreeDecomposition((0b11,), ())
    t = Relation([0, 1], [(1, 2)])
    assert yannakakis(td, {0b11: t}, "full") == t
    assert yannakakis(td, {0b11: t}, "boolean") is True
    assert yannakakis(td, {0b11: Relation.empty(0b11)}, "boolean") is False


def test_yannakakis_two_bags_matches_join():
    # [DERIVED] equals the plain join
    td = TreeDecomposition((0b011, 0b110), ((0, 1),))
    r = Relation([0, 1], [(1, 2), (3, 4), (5, 6)])
    s = Relation([1, 2], [(2, "a"), (2, "b"), (7, "c")])
    assert yannakakis(td, {0b011: r, 0b110: s}, "full") == join(r, s)
    assert yannakakis(td, {0b011: r, 0b110: Relation.empty(0b110)}, "full") == Relation.empty(0b111)


def test_yannakakis_schema_mismatch():
    td = TreeDecomposition((0b011,), ())
    with pytest.raises(DomainError):
        yannakakis(td, {0b011: Relation([0], [(1,)])})
    with pytest.raises(DomainError):
        yannakakis(td, {})


def test_full_wco_on_triangle():
    # [DERIVED] equals the oracle on random data
    rng = random.Random(11)
    edges = [([0, 1], "R"), ([1, 2], "S"), ([0, 2], "T")]
    data = {n: Relation(c, {(rng.randrange(12), rng.randrange(12)) for _ in range(120)}) for c, n in edges}
    rule = make_rule(3, edges, sizes={n: 128 for _, n in edges})
    assert eval_full_wco(rule, data) == brute_force_join(list(data.values()))


def test_full_wco_with_empty_relation():
    # [TRIVIAL]
    data = c4_skew_data(8)
    data["R34"] = Relation([2, 3], [])
    assert len(eval_full_wco(c4_rule(8), data)) == 0


def test_full_wco_on_band():
    # [PAPER] band instance; count matches the oracle  [DERIVED]
    qf, data = make_instance("c4-band", n=64, d=2).load()
    out = eval_full_wco(qf.rule, data)
    assert out == body_join(qf.rule, data)
    assert len(out) == 8 * 2 * 8 * 8


def test_boolean_fhtw_examples():
    # [PAPER] diagonal instance is nonempty
    qf, data = make_instance("c4-diag", n=16).load()
    assert eval_boolean_fhtw(qf.rule, data) is True
    # [TRIVIAL] disjoint A2 domains between R12 and R23
    data = c4_skew_data(8)
    data["R23"] = Relation([1, 2], [(5, i) for i in range(8)])
    assert eval_boolean_fhtw(c4_rule(8), data) is False


def test_boolean_strategies_on_path():
    # [DERIVED] acyclic path query vs the oracle
    rng = random.Random(5)
    rule = make_rule(4, PATH_EDGES, sizes={n: 8 for _, n in PATH_EDGES})
    for _ in range(5):
        data = path_data(rng)
        truth = len(brute_force_join(list(data.values()))) > 0
        assert eval_boolean_fhtw(rule, data) == truth
        assert eval_boolean_subw(rule, data) == truth


def test_boolean_subw_on_skew():
    # [PAPER] true, intermediates far below N^2
    n = 256
    stats = EvalStats()
    assert eval_boolean_subw(c4_rule(n), c4_skew_data(n), stats) is True
    assert len(stats.panda_reports) == 4
    assert stats.max_intermediate <= n ** 1.5


def test_boolean_subw_empty_instance():
    # [TRIVIAL]
    data = {k: Relation(v.schema, []) for k, v in c4_skew_data(4).items()}
    assert eval_boolean_subw(c4_rule(4), data) is False


def test_boolean_subw_on_band():
    # [DERIVED] agrees with the oracle
    qf, data = make_instance("c4-band", n=64, d=4).load()
    assert eval_boolean_subw(qf.rule, data) is (len(body_join(qf.rule, data)) > 0)


def test_greedy_model():
    # [TRIVIAL] empty body join -> empty tables
    data = c4_skew_data(4)
    data["R12"] = Relation([0, 1], [])
    model = greedy_model(two_target_rule(4), data)
    assert all(len(t) == 0 for t in model.values())
    # [PAPER] two-target rule on skew data, N = 16: size <= N^(3/2)
    rule, data = two_target_rule(16), c4_skew_data(16)
    model = greedy_model(rule, data)
    assert is_valid_model(rule, data, model)
    assert model_size(model) <= 64
    sizes = {len(t) for t in model.values()}
    assert len(sizes) == 1


def test_greedy_single_target_is_projection():
    # [TRIVIAL]
    rule = c4_rule(4, targets=[[0, 1, 2]])
    data = c4_skew_data(4)
    model = greedy_model(rule, data)
    body = body_join(rule, data)
    assert model[0b0111].rows == {(a, b, c) for a, b, c, _ in body.rows}


def test_brute_min_model_examples():
    # [TRIVIAL] empty join -> 0; single tuple, two targets -> 1
    rule = make_rule(2, [([0, 1], "R")], targets=[[0], [1]])
    assert brute_min_model(rule, {"R": Relation([0, 1], [])}) == 0
    assert brute_min_model(rule, {"R": Relation([0, 1], [(1, 1)])}) == 1
    # [DERIVED] 2x2 grid: covering all four tuples needs 2 values on one side
    grid = Relation([0, 1], [(i, j) for i in range(2) for j in range(2)])
    assert brute_min_model(rule, {"R": grid}) == 2
    # [DERIVED] star (0,j) j<3 plus (1,0): T_A = {0,1} or T_A={0}, T_B={0}
    star = Relation([0, 1], [(0, 0), (0, 1), (0, 2), (1, 0)])
    assert brute_min_model(rule, {"R": star}) == 1


def test_brute_min_model_limit():
    rule = make_rule(2, [([0, 1], "R")], targets=[[0], [1]])
    big = Relation([0, 1], [(i, i) for i in range(21)])
    with pytest.raises(DomainError):
        brute_min_model(rule, {"R": big})


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_strategies_match_oracle_on_random_instances(seed):
    # [DERIVED] wco output and both Boolean strategies against the oracle
    rule, data = random_instance(random.Random(seed))
    body = brute_force_join([data[r] for _, r in rule.hypergraph.edges])
    assert eval_full_wco(rule, data) == body
    assert eval_boolean_subw(rule, data) == (len(body) > 0)
    assert eval_boolean_fhtw(rule, data) == (len(body) > 0)
