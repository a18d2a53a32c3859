"""Proof-sequence interpreter computing a model of a disjunctive rule.

Each proof step becomes a relational operation on guards of degree
constraints: Mono projects, Decomp partitions by degree and branches,
Comp joins when the join fits the budget ``2^OBJ`` and otherwise truncates
the inequality and restarts.  Subproblems are processed from an explicit
work stack and their per-target outputs are unioned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .bounds import compute_lambda
from .core import (
    DEFAULT_FRAC_BITS,
    AttrSet,
    ClassKind,
    DegreeConstraint,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    count_within,
    format_set,
    is_subset,
    log2_dyadic,
    validate_rule,
)
from .proofseq import (
    COMP,
    DECOMP,
    MONO,
    SUB,
    FlowInequality,
    ProofStep,
    carry_witness,
    construct_flownet,
    construct_inductive,
    tighten_witness,
    truncate,
    truncation_conditions,
    verify_proof_sequence,
    witness_from_lp,
)
from .ratlp import build_bound_lp, extract_witness, solve_lp
from .relalg import Model, Relation, degree, join, partition_by_degree, project, union

ZERO = Fraction(0)
MAX_RESTARTS = 100_000
Pair = tuple[AttrSet, AttrSet]


@dataclass
class PandaState:
    """One subproblem: guards, constraints, current inequality and remaining steps."""

    relations: dict[str, Relation]
    constraints: list[DegreeConstraint]
    ineq: FlowInequality
    remaining: list[ProofStep]
    obj: Fraction
    slack: Fraction = ZERO
    fresh: int = 0

    def child(self) -> "PandaState":
        return PandaState(
            dict(self.relations),
            list(self.constraints),
            self.ineq.copy(),
            list(self.remaining),
            self.obj,
            self.slack,
            self.fresh,
        )

    def support(self, x: AttrSet, y: AttrSet) -> DegreeConstraint | None:
        """Least-bound constraint ``(Z, W)`` with ``Z ⊆ X``, ``W ⊆ Y``, ``W − Z = Y − X``."""
        best = None
        diff = y & ~x
        for c in self.constraints:
            if is_subset(c.x, x) and is_subset(c.y, y) and c.y & ~c.x == diff:
                if best is None or (c.log_bound, c.x, c.y) < (best.log_bound, best.x, best.y):
                    best = c
        return best

    def potential(self) -> Fraction:
        total = ZERO
        for (x, y), v in self.ineq.delta.items():
            c = self.support(x, y)
            if c is not None:
                total += v * c.log_bound
        return total


def assert_invariants(state: PandaState) -> list[str]:
    """Diagnostics for the support, norm, potential and budget invariants."""
    diags = []
    for (x, y), v in sorted(state.ineq.delta.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if v > 0 and state.support(x, y) is None:
            diags.append(f"unsupported delta({y:#b}|{x:#b})")
    lam_norm = sum(state.ineq.lam.values(), ZERO)
    if not 0 < lam_norm <= 1:
        diags.append(f"lambda norm {lam_norm} outside (0, 1]")
    pot = state.potential()
    if pot > lam_norm * state.obj + state.slack:
        diags.append(f"potential {pot} exceeds {lam_norm} * OBJ")
    for (x, y), v in state.ineq.delta.items():
        if x == 0 and v > 0:
            c = state.support(x, y)
            if c is not None and c.log_bound > state.obj + state.slack:
                diags.append(f"support of delta({y:#b}|0) exceeds OBJ")
    return diags


@dataclass
class RunReport:
    model: Model
    obj: Fraction
    max_intermediate: int = 0
    branches: int = 0
    restarts: int = 0
    steps: int = 0
    trace: list[str] = field(default_factory=list)
    intermediate_sizes: list[int] = field(default_factory=list)

    def format(self, names: Sequence[str] | None = None) -> str:
        lines = [
            "panda-report v1",
            f"obj {self.obj.numerator}/{self.obj.denominator}" if self.obj.denominator != 1 else f"obj {self.obj}",
            f"max_intermediate {self.max_intermediate}",
            f"branches {self.branches}",
            f"restarts {self.restarts}",
            f"steps {self.steps}",
        ]
        for b in sorted(self.model):
            lines.append(f"target {format_set(b, names)} size {len(self.model[b])}")
        lines.extend(f"trace {t}" for t in self.trace)
        return "\n".join(lines)


class DataViolation(DomainError):
    """Input data breaks a declared degree constraint."""


def _resolve_guard(rule: DisjunctiveRule, c: DegreeConstraint, data: Mapping[str, Relation]) -> str:
    if c.guard is not None:
        return c.guard
    for e, rel in rule.hypergraph.edges:
        if e == c.y:
            return rel
    for e, rel in rule.hypergraph.edges:
        if is_subset(c.y, e):
            return rel
    raise DomainError(f"no relation guards deg({c.y:#b}|{c.x:#b})")


def check_data(rule: DisjunctiveRule, data: Mapping[str, Relation]) -> list[str]:
    """Declared constraints violated by the measured data (empty when consistent)."""
    problems = []
    for e, rel in rule.hypergraph.edges:
        if rel not in data:
            problems.append(f"missing data for relation {rel}")
        elif data[rel].attrs != e:
            problems.append(f"relation {rel} has schema {data[rel].schema}, expected {e:#b}")
    if problems:
        return problems
    for c in rule.constraints:
        guard = _resolve_guard(rule, c, data)
        r = data[guard]
        measured = degree(r, c.y, c.x)
        ok = measured <= c.raw_bound if c.raw_bound is not None else count_within(measured, c.log_bound)
        if not ok:
            problems.append(f"relation {guard}: deg({c.y:#b}|{c.x:#b}) = {measured} exceeds the declared bound")
    return problems


def _initial_state(
    rule: DisjunctiveRule,
    data: Mapping[str, Relation],
    construction: str,
) -> tuple[PandaState, list[ProofStep]]:
    fclass = FunctionClass(ClassKind.POLYMATROID)
    lr = compute_lambda(rule, fclass)
    bound = build_bound_lp(fclass, rule, lr.lam)
    sol = solve_lp(bound.lp)
    witness = extract_witness(bound, sol)
    ineq = witness_from_lp(rule.n, lr.lam, witness)
    constraints = []
    for c in rule.constraints:
        guard = _resolve_guard(rule, c, data)
        constraints.append(DegreeConstraint(c.x, c.y, c.log_bound, c.raw_bound, guard))
    relations = {rel: data[rel] for _, rel in rule.hypergraph.edges}
    seq = construct_flownet(ineq) if construction == "flownet" else construct_inductive(ineq)
    check = verify_proof_sequence(ineq, seq)
    if not check:
        raise AssertionError(f"constructed proof sequence invalid: {check.message}")
    return PandaState(relations, constraints, ineq, list(seq), sol.objective), seq


def panda_run(
    rule: DisjunctiveRule,
    data: Mapping[str, Relation],
    *,
    construction: str = "inductive",
    trace: bool = False,
    check: bool = True,
    trust: bool = False,
    frac_bits: int = DEFAULT_FRAC_BITS,
) -> RunReport:
    """Compute a model of ``rule`` on ``data`` keeping intermediates within ``2^OBJ``.

    ``trust`` skips the declared-constraint check on ``data``; the size
    guarantee then no longer holds, but the model is still valid.
    """
    diags = validate_rule(rule)
    if diags:
        raise DomainError("; ".join(diags))
    problems = [] if trust else check_data(rule, data)
    if problems:
        raise DataViolation("; ".join(problems))
    targets = list(dict.fromkeys(rule.targets))
    model: Model = {b: Relation.empty(b) for b in targets}
    if any(len(data[rel]) == 0 for _, rel in rule.hypergraph.edges):
        return RunReport(model, ZERO)
    root, _ = _initial_state(rule, data, construction)
    report = RunReport(model, root.obj)
    rounding = Fraction(1, 1 << frac_bits)
    budget_log = root.obj

    def record(rel: Relation, what: str, state: PandaState) -> None:
        size = len(rel)
        report.intermediate_sizes.append(size)
        report.max_intermediate = max(report.max_intermediate, size)
        if not count_within(size, budget_log + state.slack):
            raise AssertionError(f"{what} of size {size} exceeds the budget 2^{budget_log}")

    def new_constraint(state: PandaState, x: AttrSet, y: AttrSet, count: int, guard: str) -> None:
        log = log2_dyadic(count, frac_bits)
        if count & (count - 1):
            state.slack += rounding
        state.constraints.append(DegreeConstraint(x, y, log, count, guard))

    def add_relation(state: PandaState, rel: Relation, stem: str) -> str:
        state.fresh += 1
        name = f"{stem}#{state.fresh}"
        state.relations[name] = rel
        return name

    def check_state(state: PandaState, where: str) -> None:
        if not check:
            return
        d = assert_invariants(state)
        if d:
            raise AssertionError(f"invariant violated after {where}: {'; '.join(d)}")

    def base_case(state: PandaState) -> tuple[AttrSet, Relation] | None:
        for b in targets:
            for rel in state.relations.values():
                if rel.attrs == b:
                    return b, rel
        return None

    def finish(b: AttrSet, rel: Relation) -> None:
        model[b] = union(model[b], rel)
        report.branches += 1

    def guard_of(state: PandaState, x: AttrSet, y: AttrSet) -> tuple[DegreeConstraint, Relation]:
        c = state.support(x, y)
        if c is None:
            raise AssertionError(f"no support for delta({y:#b}|{x:#b})")
        return c, state.relations[c.guard]

    check_state(root, "initialisation")
    stack: list[PandaState] = [root]
    while stack:
        state = stack.pop()
        while True:
            hit = base_case(state)
            if hit is not None:
                finish(*hit)
                break
            if not state.remaining:
                # Sequence exhausted: δ dominates λ, so some δ_{B|∅} > 0 with λ_B > 0.
                b = next(
                    (b for b in targets if state.ineq.lam.get(b, ZERO) > 0 and state.ineq.delta.get((0, b), ZERO) > 0),
                    None,
                )
                if b is None:
                    raise AssertionError("proof sequence ended without an unconditional target term")
                _, g = guard_of(state, 0, b)
                out = project(g, b)
                record(out, "target projection", state)
                finish(b, out)
                break
            step = state.remaining.pop(0)
            report.steps += 1
            if trace:
                report.trace.append(step.format(rule.names()))
            if step.kind == SUB:
                state.ineq = carry_witness(state.ineq, step)
            elif step.kind == MONO:
                _, r = guard_of(state, 0, step.b)
                px = project(r, step.a)
                state.ineq = carry_witness(state.ineq, step)
                if step.a:
                    record(px, "projection", state)
                    name = add_relation(state, px, "proj")
                    new_constraint(state, 0, step.a, len(px), name)
            elif step.kind == DECOMP:
                y, x = step.a, step.b
                _, r = guard_of(state, 0, y)
                parts = partition_by_degree(r, y, x)
                state.ineq = carry_witness(state.ineq, step)
                children = []
                for part, n_x, n_yx in parts:
                    record(part, "partition part", state)
                    child = state.child()
                    name = add_relation(child, part, "part")
                    new_constraint(child, 0, x, n_x, name)
                    new_constraint(child, x, y, n_yx, name)
                    check_state(child, "decomposition")
                    children.append(child)
                # Process the first part now, the rest later (in order).
                stack.extend(reversed(children[1:]))
                state = children[0]
                continue
            elif step.kind == COMP:
                x, y = step.a, step.b
                cx, r = guard_of(state, 0, x)
                cw, s = guard_of(state, x, y)
                if cx.log_bound + cw.log_bound <= state.obj:
                    t = join(project(r, x), project(s, cw.y))
                    assert t.attrs == y
                    state.ineq = carry_witness(state.ineq, step)
                    record(t, "join", state)
                    if not t.rows:
                        # This branch's body join is empty: nothing to cover.
                        report.branches += 1
                        break
                    name = add_relation(state, t, "join")
                    new_constraint(state, 0, y, len(t), name)
                else:
                    advanced = carry_witness(state.ineq, step)
                    tight = tighten_witness(advanced)
                    cut = truncate(tight, y)
                    conds = truncation_conditions(tight, cut, y)
                    if not all(conds.values()):
                        raise AssertionError(f"truncation conditions failed: {conds}")
                    state.ineq = cut
                    seq = construct_inductive(cut)
                    if not verify_proof_sequence(cut, seq):
                        raise AssertionError("restarted proof sequence invalid")
                    state.remaining = list(seq)
                    report.restarts += 1
                    if report.restarts > MAX_RESTARTS:
                        raise AssertionError("restart limit exceeded")
                    if trace:
                        report.trace.append(f"restart after comp {format_set(x, rule.names())} -> {format_set(y, rule.names())}")
            else:
                raise AssertionError(f"unknown step kind {step.kind}")
            check_state(state, step.kind)
    for b, rel in model.items():
        if rel.rows:
            report.max_intermediate = max(report.max_intermediate, len(rel))
    return report
