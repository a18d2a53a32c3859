"""Query evaluation strategies built on PANDA, tree decompositions and Yannakakis."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

from .core import AttrSet, ClassKind, DisjunctiveRule, DomainError, FunctionClass, full_set, members
from .panda import RunReport, panda_run
from .relalg import Model, Relation, join, semijoin, union
from .widths import TreeDecomposition, associated_td, da_minimax_width, enumerate_tds, minimal_transversals

MAX_SUBW_VARS = 8
MAX_BRUTE_MODEL_TUPLES = 20


@dataclass
class EvalStats:
    """Instrumentation filled in by the evaluation strategies."""

    panda_reports: list[tuple[tuple[AttrSet, ...], RunReport]] = field(default_factory=list)
    tds_tried: int = 0

    @property
    def max_intermediate(self) -> int:
        sizes = [r.max_intermediate for _, r in self.panda_reports]
        sizes += [len(t) for _, r in self.panda_reports for t in r.model.values()]
        return max(sizes, default=0)


def _rooted_order(td: TreeDecomposition) -> tuple[list[int], dict[int, int]]:
    """Bags in BFS order from bag 0 and each non-root bag's parent."""
    order, parent = [0], {}
    seen = {0}
    i = 0
    while i < len(order):
        node = order[i]
        i += 1
        for nb in sorted(td.neighbors(node)):
            if nb not in seen:
                seen.add(nb)
                parent[nb] = node
                order.append(nb)
    if len(order) != len(td.bags):
        raise DomainError("tree decomposition is not connected")
    return order, parent


def yannakakis(td: TreeDecomposition, bag_tables: Mapping[AttrSet, Relation], mode: str = "full") -> bool | Relation:
    """Evaluate the acyclic join of one table per bag.

    Upward semijoins reduce the root to exactly the tuples that extend to the
    whole tree, which settles the Boolean answer; the full mode then runs the
    downward pass and joins from the root so every partial result is a
    projection of the output.
    """
    if mode not in ("full", "boolean"):
        raise DomainError(f"unknown mode {mode!r}")
    tables: dict[int, Relation] = {}
    for i, bag in enumerate(td.bags):
        if bag not in bag_tables:
            raise DomainError(f"no table for bag {members(bag)}")
        t = bag_tables[bag]
        if t.attrs != bag:
            raise DomainError(f"table schema {t.schema} does not match bag {members(bag)}")
        tables[i] = t
    order, parent = _rooted_order(td)
    for node in reversed(order[1:]):
        p = parent[node]
        tables[p] = semijoin(tables[p], tables[node])
    if mode == "boolean":
        return len(tables[order[0]]) > 0
    for node in order[1:]:
        tables[node] = semijoin(tables[node], tables[parent[node]])
    out = tables[order[0]]
    for node in order[1:]:
        out = join(out, tables[node])
    return out


def _reduce(table: Relation, data: Mapping[str, Relation], rule: DisjunctiveRule) -> Relation:
    for e, rel in rule.hypergraph.edges:
        if e & table.attrs:
            table = semijoin(table, data[rel])
    return table


def eval_full_wco(
    rule: DisjunctiveRule, data: Mapping[str, Relation], stats: EvalStats | None = None, trust: bool = False
) -> Relation:
    """Full join answer: PANDA with the single target ``[n]``, then semijoin with every input."""
    universe = full_set(rule.n)
    full_rule = rule.with_targets([universe])
    report = panda_run(full_rule, data, trust=trust)
    if stats is not None:
        stats.panda_reports.append(((universe,), report))
    return _reduce(report.model[universe], data, rule)


def _boolean_rule(rule: DisjunctiveRule) -> DisjunctiveRule:
    return rule.with_targets([full_set(rule.n)])


def eval_boolean_fhtw(
    rule: DisjunctiveRule,
    data: Mapping[str, Relation],
    fclass: FunctionClass | None = None,
    stats: EvalStats | None = None,
    trust: bool = False,
) -> bool:
    """Boolean answer via the decomposition minimizing the largest bag bound."""
    rule = _boolean_rule(rule)
    td = da_minimax_width(rule, fclass or FunctionClass(ClassKind.POLYMATROID)).td
    assert td is not None
    tables = {}
    for bag in td.bags:
        report = panda_run(rule.with_targets([bag]), data, trust=trust)
        if stats is not None:
            stats.panda_reports.append(((bag,), report))
        tables[bag] = _reduce(report.model[bag], data, rule)
    if stats is not None:
        stats.tds_tried += 1
    return bool(yannakakis(td, tables, "boolean"))


def eval_boolean_subw(
    rule: DisjunctiveRule,
    data: Mapping[str, Relation],
    stats: EvalStats | None = None,
    trust: bool = False,
) -> bool:
    """Boolean answer via one PANDA run per minimal bag-selector image.

    Tables for the same bag are unioned across runs.  For every choice of
    one target per image, the chosen bags contain all bags of some
    decomposition; its semijoin-reduced tables are checked with Yannakakis
    and the answers are OR-ed.
    """
    rule = _boolean_rule(rule)
    if rule.n > MAX_SUBW_VARS:
        raise DomainError(f"submodular-width evaluation supports at most {MAX_SUBW_VARS} variables")
    tds = enumerate_tds(rule.hypergraph)
    images = [tuple(sorted(t)) for t in minimal_transversals([td.bag_set for td in tds])]
    tables: dict[AttrSet, Relation] = {}
    for image in images:
        report = panda_run(rule.with_targets(image), data, trust=trust)
        if stats is not None:
            stats.panda_reports.append((image, report))
        for bag in image:
            tables[bag] = union(tables[bag], report.model[bag]) if bag in tables else report.model[bag]
    tables = {bag: _reduce(t, data, rule) for bag, t in tables.items()}
    tried: set[TreeDecomposition] = set()
    for choice in product(*images):
        td = associated_td(tds, choice)
        if td is None:
            raise AssertionError(f"no decomposition inside bags {[members(b) for b in choice]}")
        if td in tried:
            continue
        tried.add(td)
        if stats is not None:
            stats.tds_tried += 1
        if yannakakis(td, tables, "boolean"):
            return True
    return False


def body_join(rule: DisjunctiveRule, data: Mapping[str, Relation]) -> Relation:
    """Join of all body relations, joining connected relations first."""
    pending = [data[rel] for _, rel in rule.hypergraph.edges]
    if not pending:
        return Relation.from_mask(0, [()])
    pending.sort(key=len)
    out = pending.pop(0)
    while pending:
        idx = next((i for i, r in enumerate(pending) if r.attrs & out.attrs), 0)
        out = join(out, pending.pop(idx))
        if not out.rows:
            attrs = out.attrs
            for r in pending:
                attrs |= r.attrs
            return Relation.empty(attrs)
    return out


def greedy_model(rule: DisjunctiveRule, data: Mapping[str, Relation]) -> Model:
    """Scan the body join; a tuple not yet covered adds its projection to every target."""
    targets = list(dict.fromkeys(rule.targets))
    body = body_join(rule, data)
    getters = [(b, [body.schema.index(v) for v in members(b)]) for b in targets]
    tables: dict[AttrSet, set] = {b: set() for b in targets}
    for row in sorted(body.rows, key=repr):
        projections = [(b, tuple(row[i] for i in pos)) for b, pos in getters]
        if any(p in tables[b] for b, p in projections):
            continue
        for b, p in projections:
            tables[b].add(p)
    return {b: Relation.from_mask(b, rows) for b, rows in tables.items()}


def model_size(model: Model) -> int:
    return max((len(t) for t in model.values()), default=0)


def brute_min_model(rule: DisjunctiveRule, data: Mapping[str, Relation]) -> int:
    """Least ``max_B |T_B|`` over all models, by branch and bound on tiny instances."""
    targets = list(dict.fromkeys(rule.targets))
    body = body_join(rule, data)
    if len(body) > MAX_BRUTE_MODEL_TUPLES:
        raise DomainError(f"body join has {len(body)} tuples; the exhaustive search allows {MAX_BRUTE_MODEL_TUPLES}")
    rows = sorted(body.rows, key=repr)
    if not rows:
        return 0
    proj = [[tuple(row[body.schema.index(v)] for v in members(b)) for b in targets] for row in rows]
    tables: list[set] = [set() for _ in targets]
    best = [len(rows)]

    def search(i: int, current: int) -> None:
        if current >= best[0]:
            return
        if i == len(rows):
            best[0] = current
            return
        if any(proj[i][k] in tables[k] for k in range(len(targets))):
            search(i + 1, current)
            return
        for k in range(len(targets)):
            tables[k].add(proj[i][k])
            search(i + 1, max(current, len(tables[k])))
            tables[k].discard(proj[i][k])

    search(0, 0)
    return best[0]


def is_valid_model(rule: DisjunctiveRule, data: Mapping[str, Relation], model: Model) -> bool:
    """Every body-join tuple projects into some target table of ``model``."""
    body = body_join(rule, data)
    tables = [(b, t.rows) for b, t in model.items()]
    for row in body.rows:
        if not any(tuple(row[body.schema.index(v)] for v in members(b)) in rows for b, rows in tables):
            return False
    return True


def oracle_boolean(rule: DisjunctiveRule, data: Mapping[str, Relation]) -> bool:
    return len(body_join(rule, data)) > 0

