"""Shared vocabulary: attribute sets, log-scale counts, degree constraints, rules.

Attribute sets are plain ``int`` bitmasks over variables ``0..n-1``; bit ``i``
set means variable ``i`` is a member.  Every other module indexes set
functions, schemas and LP variables by these masks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import mpmath

MAX_VARS = 30
MAX_LP_VARS = 12
DEFAULT_FRAC_BITS = 32

AttrSet = int


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


# ---------------------------------------------------------------------------
# attribute sets


def attrset(members: Iterable[int]) -> AttrSet:
    mask = 0
    for v in members:
        if v < 0 or v >= MAX_VARS:
            raise DomainError(f"variable index {v} outside 0..{MAX_VARS - 1}")
        mask |= 1 << v
    return mask


def members(mask: AttrSet) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def size(mask: AttrSet) -> int:
    return bin(mask).count("1")


def full_set(n: int) -> AttrSet:
    return (1 << n) - 1


def is_subset(a: AttrSet, b: AttrSet) -> bool:
    return a & ~b == 0


def is_proper_subset(a: AttrSet, b: AttrSet) -> bool:
    return a != b and a & ~b == 0


def incomparable(a: AttrSet, b: AttrSet) -> bool:
    """True iff neither set contains the other (written ``I ⊥ J``)."""
    return a & ~b != 0 and b & ~a != 0


def subsets(mask: AttrSet) -> Iterator[AttrSet]:
    """All subsets of ``mask`` in ascending numeric order, ∅ first."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def check_attrset(mask: AttrSet, n: int) -> None:
    if mask < 0 or mask >> n:
        raise DomainError(f"attribute set {mask:#b} uses variables outside 0..{n - 1}")


def format_set(mask: AttrSet, names: Sequence[str] | None = None) -> str:
    """Render a set as a sorted variable list, e.g. ``{A1,A3}``."""
    labels = [names[v] if names else str(v) for v in members(mask)]
    return "{" + ",".join(labels) + "}"


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def check_n(n: int, limit: int = MAX_VARS) -> None:
    if not 1 <= n <= limit:
        raise DomainError(f"variable count {n} outside 1..{limit}")


# ---------------------------------------------------------------------------
# log-scale quantities


def log2_dyadic(count: int, frac_bits: int = DEFAULT_FRAC_BITS) -> Fraction:
    """Exact log2 for powers of two; else the least ``k / 2**frac_bits`` ≥ log2(count)."""
    if count < 1:
        raise DomainError("log2 of a count requires count >= 1")
    if frac_bits < 0:
        raise DomainError("frac_bits must be non-negative")
    if count & (count - 1) == 0:
        return Fraction(count.bit_length() - 1)
    scale = 1 << frac_bits
    # log2(count) is irrational here, so raising precision eventually
    # separates scale*log2(count) from every integer.
    prec = 64 + frac_bits + count.bit_length().bit_length()
    iv = mpmath.iv
    saved = iv.prec
    try:
        while True:
            iv.prec = prec
            scaled = iv.log(iv.mpf(count)) / iv.log(iv.mpf(2)) * scale
            lo, hi = int(mpmath.floor(scaled.a)), int(mpmath.floor(scaled.b))
            if lo == hi:
                return Fraction(lo + 1, scale)
            prec *= 2
    finally:
        iv.prec = saved


def count_within(count: int, log_bound: Fraction) -> bool:
    """Exact test of ``count <= 2**log_bound``."""
    if count <= 1:
        return log_bound >= 0 or count == 0
    log_bound = Fraction(log_bound)
    if log_bound.denominator == 1:
        return log_bound >= 0 and count <= 1 << int(log_bound)
    if log_bound.denominator <= 1 << 12:
        # count**q <= 2**p, both sides exact integers
        return count ** log_bound.denominator <= 1 << max(log_bound.numerator, 0)
    if log2_dyadic(count, 64) <= log_bound:
        return True
    # log2_dyadic over-estimates by < 2**-64; decide the remaining sliver by
    # comparing 2**log_bound against count with interval arithmetic.
    iv = mpmath.iv
    saved = iv.prec
    try:
        prec = 128
        while True:
            iv.prec = prec
            val = iv.mpf(2) ** (iv.mpf(log_bound.numerator) / log_bound.denominator)
            if val.a >= count:
                return True
            if val.b < count:
                return False
            prec *= 2
    finally:
        iv.prec = saved


# ---------------------------------------------------------------------------
# constraints and rules


@dataclass(frozen=True)
class DegreeConstraint:
    """``deg_guard(Y | X) <= 2**log_bound``; an FD has ``log_bound == 0``."""

    x: AttrSet
    y: AttrSet
    log_bound: Fraction
    raw_bound: int | None = None
    guard: str | None = None

    def __post_init__(self) -> None:
        if not is_proper_subset(self.x, self.y):
            raise DomainError("degree constraint needs X strictly inside Y")
        if self.log_bound < 0:
            raise DomainError("degree bound must be at least 1")

    @classmethod
    def from_count(
        cls,
        x: AttrSet,
        y: AttrSet,
        count: int,
        guard: str | None = None,
        frac_bits: int = DEFAULT_FRAC_BITS,
    ) -> "DegreeConstraint":
        return cls(x, y, log2_dyadic(count, frac_bits), count, guard)

    @property
    def is_fd(self) -> bool:
        return self.log_bound == 0

    @property
    def is_cardinality(self) -> bool:
        return self.x == 0


@dataclass(frozen=True)
class Hypergraph:
    """Multi-hypergraph; each edge carries the id of the relation that owns it."""

    n: int
    edges: tuple[tuple[AttrSet, str], ...]

    @property
    def edge_sets(self) -> list[AttrSet]:
        return [e for e, _ in self.edges]

    def edge_of(self, rel_id: str) -> AttrSet:
        for e, r in self.edges:
            if r == rel_id:
                return e
        raise KeyError(rel_id)

    def restrict(self, bag: AttrSet) -> list[AttrSet]:
        """Edges intersected with ``bag``; empty intersections dropped."""
        return [e & bag for e in self.edge_sets if e & bag]


@dataclass(frozen=True)
class DisjunctiveRule:
    """``OR_{B in targets} T_B(A_B) <- AND_F R_F(A_F)`` with degree constraints."""

    hypergraph: Hypergraph
    targets: tuple[AttrSet, ...]
    constraints: tuple[DegreeConstraint, ...] = ()
    var_names: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.hypergraph.n

    @property
    def is_full_query(self) -> bool:
        return self.targets == (full_set(self.n),)

    def names(self) -> tuple[str, ...]:
        return self.var_names or tuple(f"A{i + 1}" for i in range(self.n))

    def with_targets(self, targets: Iterable[AttrSet]) -> "DisjunctiveRule":
        return DisjunctiveRule(self.hypergraph, tuple(targets), self.constraints, self.var_names)

    def with_constraints(self, constraints: Iterable[DegreeConstraint]) -> "DisjunctiveRule":
        return DisjunctiveRule(self.hypergraph, self.targets, tuple(constraints), self.var_names)


def make_rule(
    n: int,
    edges: Sequence[tuple[Iterable[int], str]],
    targets: Sequence[Iterable[int]] | None = None,
    sizes: dict[str, int] | None = None,
    constraints: Sequence[DegreeConstraint] = (),
    var_names: Sequence[str] = (),
) -> DisjunctiveRule:
    """Convenience constructor from index lists; ``sizes`` adds cardinality constraints."""
    hg = Hypergraph(n, tuple((attrset(e), r) for e, r in edges))
    tgt = tuple(attrset(t) for t in targets) if targets is not None else (full_set(n),)
    cons = list(constraints)
    for rel, count in (sizes or {}).items():
        cons.append(DegreeConstraint.from_count(0, hg.edge_of(rel), count, rel))
    return DisjunctiveRule(hg, tgt, tuple(cons), tuple(var_names))


class ClassKind(enum.Enum):
    MODULAR = "mod"
    POLYMATROID = "poly"
    SUBADDITIVE = "sa"


@dataclass(frozen=True)
class FunctionClass:
    """An LP feasible region: a set-function class intersected with constraints.

    ``constraints=None`` means "the rule's own degree constraints" (HDC).
    """

    kind: ClassKind
    constraints: tuple[DegreeConstraint, ...] | None = None

    def constraints_for(self, rule: DisjunctiveRule) -> tuple[DegreeConstraint, ...]:
        return rule.constraints if self.constraints is None else self.constraints


def max_cardinality_log(rule: DisjunctiveRule) -> Fraction:
    """log N where N is the largest declared relation size."""
    logs = [c.log_bound for c in rule.constraints if c.is_cardinality and c.guard is not None]
    if not logs:
        raise DomainError("rule has no cardinality constraints")
    return max(logs)


def vertex_dominated(rule: DisjunctiveRule, log_n: Fraction | None = None) -> tuple[DegreeConstraint, ...]:
    """Constraints ``h({v}) <= log N`` for every variable."""
    bound = max_cardinality_log(rule) if log_n is None else log_n
    return tuple(DegreeConstraint(0, 1 << v, bound) for v in range(rule.n))


def edge_dominated(rule: DisjunctiveRule, log_n: Fraction | None = None) -> tuple[DegreeConstraint, ...]:
    """Constraints ``h(F) <= log N`` for every hyperedge."""
    bound = max_cardinality_log(rule) if log_n is None else log_n
    seen = []
    for e in rule.hypergraph.edge_sets:
        if e not in seen:
            seen.append(e)
    return tuple(DegreeConstraint(0, e, bound) for e in seen)


def validate_rule(rule: DisjunctiveRule) -> list[str]:
    """Diagnostics for structural problems; an empty list means the rule is well formed."""
    diags: list[str] = []
    n = rule.n
    if not 1 <= n <= MAX_VARS:
        return [f"variable count {n} outside 1..{MAX_VARS}"]
    universe = full_set(n)
    covered = 0
    rel_ids = set()
    for e, rel in rule.hypergraph.edges:
        if e == 0:
            diags.append(f"relation {rel} has an empty schema")
        if e & ~universe:
            diags.append(f"relation {rel} uses variables outside the universe")
        covered |= e
        rel_ids.add(rel)
    for v in members(universe & ~covered):
        diags.append(f"variable {v} is not covered by any relation")
    if not rule.targets:
        diags.append("rule has no targets")
    for b in rule.targets:
        if b & ~universe:
            diags.append(f"target {b:#b} uses variables outside the universe")
        elif b == 0:
            diags.append("target is the empty set")
    edge_sets = rule.hypergraph.edge_sets
    for c in rule.constraints:
        label = f"deg({c.y:#b} | {c.x:#b})"
        if c.y & ~universe:
            diags.append(f"constraint {label} uses variables outside the universe")
            continue
        if c.guard is not None:
            if c.guard not in rel_ids:
                diags.append(f"constraint {label} names unknown guard {c.guard}")
            elif not is_subset(c.y, rule.hypergraph.edge_of(c.guard)):
                diags.append(f"unguarded constraint {label}: guard {c.guard} does not contain Y")
        elif not any(is_subset(c.y, e) for e in edge_sets):
            diags.append(f"unguarded constraint {label}: no relation contains Y")
    return diags


def elementary_generators(n: int) -> tuple[list[tuple[AttrSet, AttrSet]], list[tuple[AttrSet, AttrSet]]]:
    """Elementary submodularity pairs and elementary monotonicity pairs over ``[n]``.

    Submodularity pairs are ``(Y+i, Y+j)`` with ``i < j`` and ``Y`` avoiding both;
    monotonicity pairs are ``([n]-i, [n])``.  Together with ``h(∅) = 0`` they
    generate every polymatroid inequality.
    """
    check_n(n)
    universe = full_set(n)
    sub: list[tuple[AttrSet, AttrSet]] = []
    for i in range(n):
        for j in range(i + 1, n):
            rest = universe & ~(1 << i) & ~(1 << j)
            for y in subsets(rest):
                sub.append((y | 1 << i, y | 1 << j))
    mono = [(universe & ~(1 << i), universe) for i in range(n)]
    return sub, mono

