"""Output-size bounds: vertex, integral edge cover, AGM and the LP-based bound.

All values are in log2 units (bits) and exact rationals.  Also provides
set-function classification and two closure-defined polymatroid fixtures that
exceed what entropic functions allow on their respective rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .core import (
    MAX_LP_VARS,
    AttrSet,
    ClassKind,
    DegreeConstraint,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    attrset,
    full_set,
    is_subset,
    make_rule,
    max_cardinality_log,
    members,
    size,
)
from .ratlp import (
    LpStatus,
    Witness,
    build_bound_lp,
    build_maximin_lp,
    extract_witness,
    solve_lp,
)

ZERO = Fraction(0)


# ---------------------------------------------------------------------------
# set functions


@dataclass(frozen=True)
class SetFunction:
    """Dense set function over ``2^[n]`` with ``values[0] == 0``."""

    n: int
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.values) != 1 << self.n:
            raise DomainError("set function needs one value per subset")
        if self.values[0] != 0:
            raise DomainError("set function must vanish on the empty set")

    def __call__(self, z: AttrSet) -> Fraction:
        return self.values[z]

    @classmethod
    def from_callable(cls, n: int, f: Callable[[AttrSet], Fraction | int]) -> "SetFunction":
        return cls(n, tuple(Fraction(f(z)) if z else ZERO for z in range(1 << n)))

    @classmethod
    def from_closure(cls, n: int, closed: Mapping[AttrSet, Fraction | int]) -> "SetFunction":
        """Value of the smallest listed set containing each ``Z`` (must be unique)."""
        items = sorted(closed.items(), key=lambda kv: (size(kv[0]), kv[0]))

        def lookup(z: AttrSet) -> Fraction:
            best = None
            for s, v in items:
                if is_subset(z, s):
                    if best is None:
                        best = (s, v)
                    elif size(s) == size(best[0]):
                        raise DomainError(f"closure of {z:#b} is ambiguous")
                    else:
                        break
            if best is None:
                raise DomainError(f"no listed set contains {z:#b}")
            return Fraction(best[1])

        return cls.from_callable(n, lookup)

    def scaled(self, factor: Fraction | int) -> "SetFunction":
        return SetFunction(self.n, tuple(v * factor for v in self.values))


def classify_set_function(f: SetFunction, constraints: Sequence[DegreeConstraint] = ()) -> dict[str, bool]:
    """Exhaustive class membership flags for ``f``."""
    n = f.n
    if n > MAX_LP_VARS:
        raise DomainError(f"classification supports at most {MAX_LP_VARS} variables")
    universe = full_set(n)
    vals = f.values
    nonneg = all(v >= 0 for v in vals)
    modular = all(vals[z] == sum((vals[1 << v] for v in members(z)), ZERO) for z in range(1, universe + 1))
    monotone = all(vals[z & ~(1 << v)] <= vals[z] for z in range(1, universe + 1) for v in members(z))
    submodular = True
    subadditive = True
    for a in range(1, universe + 1):
        for b in range(a + 1, universe + 1):
            if submodular and vals[a | b] + vals[a & b] > vals[a] + vals[b]:
                submodular = False
            if subadditive and vals[a | b] > vals[a] + vals[b]:
                subadditive = False
            if not (submodular or subadditive):
                break
    satisfies = all(vals[c.y] - vals[c.x] <= c.log_bound for c in constraints)
    return {
        "nonnegative": nonneg,
        "modular": modular,
        "submodular": submodular,
        "subadditive": subadditive,
        "monotone": monotone,
        "polymatroid": nonneg and submodular and monotone,
        "satisfies_constraints": satisfies,
    }


# ---------------------------------------------------------------------------
# reports


@dataclass
class BoundReport:
    kind: str
    log_value: Fraction
    certificate: dict = field(default_factory=dict)
    function_class: ClassKind | None = None


@dataclass
class LambdaResult:
    lam: dict[AttrSet, Fraction]
    value: Fraction
    degenerate: bool = False


def _targets(rule: DisjunctiveRule) -> list[AttrSet]:
    return list(dict.fromkeys(rule.targets))


def compute_lambda(rule: DisjunctiveRule, fclass: FunctionClass | None = None) -> LambdaResult:
    """Target weights turning the max-min bound into one linear objective.

    Solves ``max w, w <= h(B)`` and reads ``λ`` off the duals of the target rows.
    When the optimum is zero all weight goes to a target whose own bound is
    zero and ``degenerate`` is set.
    """
    fclass = fclass or FunctionClass(ClassKind.POLYMATROID)
    targets = _targets(rule)
    bound = build_maximin_lp(fclass, rule)
    sol = solve_lp(bound.lp)
    if sol.status is LpStatus.UNBOUNDED:
        raise DomainError("size bound is unbounded: some target variable is unconstrained")
    if sol.status is not LpStatus.OPTIMAL:
        raise AssertionError("bound LP infeasible")
    lam = {b: ZERO for b in targets}
    for row, yi in zip(bound.lp.rows, sol.dual):
        if row.tag[0] == "target":
            lam[row.tag[1]] += yi
    if sol.objective == 0:
        # Averaging per-target maximizers shows some target is forced to 0.
        for b in targets:
            if solve_lp(build_bound_lp(fclass, rule, {b: Fraction(1)}).lp).objective == 0:
                return LambdaResult({b: Fraction(1)}, ZERO, degenerate=True)
        raise AssertionError("zero max-min optimum but every target can be positive")
    if sum(lam.values()) != 1:
        raise AssertionError("target weights do not sum to one")
    check = solve_lp(build_bound_lp(fclass, rule, lam).lp)
    if check.objective != sol.objective:
        raise AssertionError("linearised bound differs from the max-min optimum")
    return LambdaResult({b: v for b, v in lam.items() if v}, sol.objective)


def size_bound(fclass: FunctionClass, rule: DisjunctiveRule) -> BoundReport:
    """``max over h in class ∩ constraints of min_B h(B)``, exactly."""
    lr = compute_lambda(rule, fclass)
    bound = build_bound_lp(fclass, rule, lr.lam)
    sol = solve_lp(bound.lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise DomainError(f"bound LP is {sol.status.value}")
    if sol.objective != lr.value:
        raise AssertionError("bound LP disagrees with the max-min optimum")
    cert: dict = {
        "lambda": lr.lam,
        "degenerate": lr.degenerate,
        "h": {z: bound.value_of(sol, z) for z in range(1, 1 << rule.n)} if bound.kind is not ClassKind.MODULAR else None,
        "dual": sol.dual,
        "lp": bound,
    }
    if bound.kind is ClassKind.POLYMATROID:
        cert["witness"] = extract_witness(bound, sol)
    return BoundReport("poly" if bound.kind is ClassKind.POLYMATROID else bound.kind.value, sol.objective, cert, bound.kind)


def polymatroid_bound(rule: DisjunctiveRule) -> tuple[Fraction, dict[AttrSet, Fraction], Witness]:
    """Convenience wrapper returning ``(OBJ, λ, witness)`` for the rule's own constraints."""
    rep = size_bound(FunctionClass(ClassKind.POLYMATROID), rule)
    return rep.log_value, rep.certificate["lambda"], rep.certificate["witness"]


def vertex_bound(rule: DisjunctiveRule) -> BoundReport:
    """``n · log N`` with ``N`` the largest declared relation size."""
    log_n = max_cardinality_log(rule)
    return BoundReport("vb", rule.n * log_n, {"log_n": log_n})


def _edge_logs(rule: DisjunctiveRule) -> list[tuple[str, AttrSet, Fraction]]:
    """Per relation: its schema and the tightest cardinality log on exactly that schema."""
    out = []
    for e, rel in rule.hypergraph.edges:
        logs = [c.log_bound for c in rule.constraints if c.x == 0 and c.y == e and c.guard in (None, rel)]
        if logs:
            out.append((rel, e, min(logs)))
    return out


def integral_edge_cover_bound(rule: DisjunctiveRule) -> BoundReport:
    """Least ``Σ log N_F`` over sets of sized relations covering every variable."""
    edges = _edge_logs(rule)
    if len(edges) > 24:
        raise DomainError("integral edge cover enumeration supports at most 24 edges")
    universe = full_set(rule.n)
    best: tuple[Fraction, tuple[str, ...]] | None = None
    for k in range(1, len(edges) + 1):
        for combo in combinations(edges, k):
            covered = 0
            for _, e, _ in combo:
                covered |= e
            if covered != universe:
                continue
            cost = sum((lg for _, _, lg in combo), ZERO)
            if best is None or cost < best[0]:
                best = (cost, tuple(rel for rel, _, _ in combo))
    if best is None:
        raise DomainError("no set of sized relations covers every variable")
    return BoundReport("iec", best[0], {"cover": best[1]}, ClassKind.SUBADDITIVE)


def cardinality_constraints(rule: DisjunctiveRule) -> tuple[DegreeConstraint, ...]:
    return tuple(c for c in rule.constraints if c.x == 0)


def agm_bound(rule: DisjunctiveRule) -> BoundReport:
    """Fractional edge cover optimum over the cardinality constraints, target ``[n]``."""
    card = cardinality_constraints(rule)
    if not card:
        raise DomainError("AGM bound needs cardinality constraints")
    covered = 0
    for c in card:
        covered |= c.y
    if covered != full_set(rule.n):
        raise DomainError("some variable is not covered by a sized relation")
    target_rule = rule.with_targets([full_set(rule.n)])
    fclass = FunctionClass(ClassKind.MODULAR, card)
    bound = build_bound_lp(fclass, target_rule, {full_set(rule.n): Fraction(1)})
    sol = solve_lp(bound.lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise AssertionError("AGM LP not optimal")
    cover = {(row.tag[1], row.tag[2]): y for row, y in zip(bound.lp.rows, sol.dual) if y}
    return BoundReport("agm", sol.objective, {"cover": cover}, ClassKind.MODULAR)


def bound_by_kind(kind: str, rule: DisjunctiveRule, fclass: FunctionClass | None = None) -> BoundReport:
    if kind == "vb":
        return vertex_bound(rule)
    if kind == "iec":
        return integral_edge_cover_bound(rule)
    if kind == "agm":
        return agm_bound(rule)
    if kind == "poly":
        return size_bound(fclass or FunctionClass(ClassKind.POLYMATROID), rule)
    raise DomainError(f"unknown bound kind {kind!r}")


# ---------------------------------------------------------------------------
# fixtures: closure-defined polymatroids beating the entropic bound


ZY_NAMES = ("A", "B", "X", "Y", "C")


def _mask(names: Sequence[str], word: Iterable[str]) -> AttrSet:
    return attrset(names.index(ch) for ch in word)


def zy_rule(log_n: Fraction | int = 1) -> DisjunctiveRule:
    """Five-variable query whose polymatroid bound exceeds the entropic one.

    Relations R(XY), S(AX), T(AY), U(BX), V(BY) have log size ``3·log_n``, W(C)
    has ``2·log_n``; K(ABXYC) is unsized but carries six key constraints.
    """
    log_n = Fraction(log_n)
    m = lambda w: _mask(ZY_NAMES, w)  # noqa: E731
    edges = [("ABXYC", "K"), ("XY", "R"), ("AX", "S"), ("AY", "T"), ("BX", "U"), ("BY", "V"), ("C", "W")]
    cons = [DegreeConstraint(0, m(w), 3 * log_n, None, rel) for w, rel in edges[1:6]]
    cons.append(DegreeConstraint(0, m("C"), 2 * log_n, None, "W"))
    for key in ("AB", "AXY", "BXY", "AC", "XC", "YC"):
        cons.append(DegreeConstraint(m(key), m("ABXYC"), ZERO, 1, "K"))
    return make_rule(
        5,
        [([ZY_NAMES.index(ch) for ch in w], rel) for w, rel in edges],
        constraints=cons,
        var_names=ZY_NAMES,
    )


def zy_function(log_n: Fraction | int = 1) -> SetFunction:
    """Closure-defined polymatroid on A,B,X,Y,C with value ``4·log_n`` on everything."""
    m = lambda w: _mask(ZY_NAMES, w)  # noqa: E731
    closed = {m("ABXYC"): 4, m("C"): 2, 0: 0}
    for w in ("AX", "BX", "XY", "AY", "BY"):
        closed[m(w)] = 3
    for w in ("X", "A", "B", "Y"):
        closed[m(w)] = 2
    return SetFunction.from_closure(5, closed).scaled(Fraction(log_n))


DOUBLE_NAMES = ("A", "B", "X", "Y", "A'", "B'", "X'", "Y'")


def double_zy_rule(log_n: Fraction | int = 1) -> DisjunctiveRule:
    """Eight-variable disjunctive rule over two copies with fifteen targets."""
    log_n = Fraction(log_n)
    names = DOUBLE_NAMES

    def m(*ws: str) -> AttrSet:
        return attrset(names.index(w) for w in ws)

    pairs = [("X", "Y"), ("A", "X"), ("A", "Y"), ("B", "X"), ("B", "Y")]
    edges, cons = [], []
    for copy, suffix in enumerate(("", "'")):
        for k, (u, v) in enumerate(pairs):
            rel = f"R{5 * copy + k + 1}"
            e = m(u + suffix, v + suffix)
            edges.append((members(e), rel))
            cons.append(DegreeConstraint(0, e, 3 * log_n, None, rel))
    targets = [
        m("A", "B"), m("A", "X", "Y"), m("B", "X", "Y"),
        m("A'", "B'"), m("A'", "X'", "Y'"), m("B'", "X'", "Y'"),
    ]
    for base in ("A", "X", "Y"):
        for primed in ("A'", "X'", "Y'"):
            targets.append(m(primed, base))
    return make_rule(8, edges, targets=[members(t) for t in targets], constraints=cons, var_names=names)


def double_zy_function(log_n: Fraction | int = 1) -> SetFunction:
    names = DOUBLE_NAMES
    closed: dict[AttrSet, int] = {full_set(8): 4, 0: 0}
    for suffix in ("", "'"):
        for u, v in (("A", "X"), ("B", "X"), ("X", "Y"), ("A", "Y"), ("B", "Y")):
            closed[attrset([names.index(u + suffix), names.index(v + suffix)])] = 3
        for u in ("X", "A", "B", "Y"):
            closed[1 << names.index(u + suffix)] = 2
    return SetFunction.from_closure(8, closed).scaled(Fraction(log_n))


def feasible_objective(f: SetFunction, rule: DisjunctiveRule) -> Fraction | None:
    """``min_B f(B)`` if ``f`` is a polymatroid meeting the rule's constraints, else None."""
    flags = classify_set_function(f, rule.constraints)
    if not (flags["polymatroid"] and flags["satisfies_constraints"]):
        return None
    return min(f(b) for b in rule.targets)

