"""Shannon flow inequalities, their witnesses, and proof sequences.

An inequality ``Σ λ_B h(B) <= Σ δ_{Y|X} h(Y|X)`` is stored with its witness
``(σ, μ)``: ``σ`` is keyed by unordered incomparable pairs ``(I, J)`` with
``I < J`` numerically, ``μ`` and ``δ`` by ``(X, Y)`` with ``X ⊂ Y``, and ``λ``
by the target set ``B``.  ``inflow(Z)`` is the net dual balance at ``Z``;
the witness certifies the inequality iff ``inflow(Z) >= λ_Z`` everywhere.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from .core import (
    AttrSet,
    DomainError,
    format_rational,
    format_set,
    full_set,
    incomparable,
    is_proper_subset,
    subsets,
)
from .ratlp import GE, LinearProgram, LpStatus, solve_lp

ZERO = Fraction(0)
Pair = tuple[AttrSet, AttrSet]


def canonical_pair(i_set: AttrSet, j_set: AttrSet) -> Pair:
    return (i_set, j_set) if i_set < j_set else (j_set, i_set)


def _clean(d: Mapping) -> dict:
    return {k: Fraction(v) for k, v in d.items() if v}


def _add(d: dict, key, amount: Fraction) -> None:
    v = d.get(key, ZERO) + amount
    if v:
        d[key] = v
    else:
        d.pop(key, None)


@dataclass
class FlowInequality:
    n: int
    lam: dict[AttrSet, Fraction] = field(default_factory=dict)
    delta: dict[Pair, Fraction] = field(default_factory=dict)
    sigma: dict[Pair, Fraction] = field(default_factory=dict)
    mu: dict[Pair, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.lam = _clean(self.lam)
        self.delta = _clean(self.delta)
        self.sigma = {canonical_pair(*k): v for k, v in _clean(self.sigma).items()}
        self.mu = _clean(self.mu)

    def copy(self) -> "FlowInequality":
        return FlowInequality(self.n, dict(self.lam), dict(self.delta), dict(self.sigma), dict(self.mu))

    def denominator(self, include_mu: bool = True) -> int:
        """Least common denominator of every entry (``μ`` optional)."""
        d = 1
        groups = [self.lam, self.delta, self.sigma] + ([self.mu] if include_mu else [])
        for g in groups:
            for v in g.values():
                d = lcm(d, v.denominator)
        return d

    def norms(self) -> dict[str, Fraction]:
        return {
            "lam": sum(self.lam.values(), ZERO),
            "delta": sum(self.delta.values(), ZERO),
            "sigma": sum(self.sigma.values(), ZERO),
            "mu": sum(self.mu.values(), ZERO),
        }

    def structural_errors(self) -> list[str]:
        errs = []
        universe = full_set(self.n)
        for b, v in self.lam.items():
            if v < 0 or b == 0 or b & ~universe:
                errs.append(f"bad lambda entry at {b:#b}")
        for (x, y), v in self.delta.items():
            if v < 0 or not is_proper_subset(x, y) or y & ~universe:
                errs.append(f"bad delta entry at ({x:#b},{y:#b})")
        for (i_set, j_set), v in self.sigma.items():
            if v < 0 or not incomparable(i_set, j_set) or (i_set | j_set) & ~universe:
                errs.append(f"bad sigma entry at ({i_set:#b},{j_set:#b})")
        for (x, y), v in self.mu.items():
            if v < 0 or not is_proper_subset(x, y) or y & ~universe:
                errs.append(f"bad mu entry at ({x:#b},{y:#b})")
        return errs

    def evaluate(self, h) -> tuple[Fraction, Fraction]:
        """``(Σ λ_B h(B), Σ δ_{Y|X} (h(Y) - h(X)))`` for a set function ``h``."""
        lhs = sum((v * h(b) for b, v in self.lam.items()), ZERO)
        rhs = sum((v * (h(y) - h(x)) for (x, y), v in self.delta.items()), ZERO)
        return lhs, rhs


# ---------------------------------------------------------------------------
# inflow and witnesses


def inflow_vector(ineq: FlowInequality) -> list[Fraction]:
    """``inflow(Z)`` for every ``Z`` (index 0 is unused and kept at 0)."""
    bal = [ZERO] * (1 << ineq.n)
    for (x, y), v in ineq.delta.items():
        bal[y] += v
        bal[x] -= v
    for (i_set, j_set), v in ineq.sigma.items():
        bal[i_set | j_set] += v
        bal[i_set & j_set] += v
        bal[i_set] -= v
        bal[j_set] -= v
    for (x, y), v in ineq.mu.items():
        bal[x] += v
        bal[y] -= v
    bal[0] = ZERO
    return bal


def inflow(ineq: FlowInequality, z: AttrSet) -> Fraction:
    if z == 0:
        raise DomainError("inflow is defined for nonempty sets only")
    return inflow_vector(ineq)[z]


def verify_witness(ineq: FlowInequality) -> bool:
    if ineq.structural_errors():
        return False
    bal = inflow_vector(ineq)
    return all(bal[z] >= ineq.lam.get(z, ZERO) for z in range(1, 1 << ineq.n))


def is_tight(ineq: FlowInequality) -> bool:
    bal = inflow_vector(ineq)
    return all(bal[z] == ineq.lam.get(z, ZERO) for z in range(1, 1 << ineq.n))


def tighten_witness(ineq: FlowInequality) -> FlowInequality:
    """Absorb every inflow surplus into ``μ_{∅,Z}`` so that ``inflow == λ``."""
    if not verify_witness(ineq):
        raise DomainError("cannot tighten an invalid witness")
    out = ineq.copy()
    bal = inflow_vector(ineq)
    for z in range(1, 1 << ineq.n):
        slack = bal[z] - ineq.lam.get(z, ZERO)
        if slack:
            _add(out.mu, (0, z), slack)
    return out


def find_witness(n: int, lam: Mapping[AttrSet, Fraction], delta: Mapping[Pair, Fraction]) -> FlowInequality | None:
    """Some witness for ``(λ, δ)`` over all incomparable pairs and chains, or None."""
    universe = full_set(n)
    sig_keys = [(i, j) for i in range(1, universe + 1) for j in range(i + 1, universe + 1) if incomparable(i, j)]
    mu_keys = [(x, y) for y in range(1, universe + 1) for x in subsets(y) if x != y]
    lp = LinearProgram(len(sig_keys) + len(mu_keys), maximize=False)
    lp.objective = {j: Fraction(1) for j in range(lp.num_vars)}
    coeffs: list[dict[int, int]] = [dict() for _ in range(universe + 1)]
    for k, (i_set, j_set) in enumerate(sig_keys):
        for z, s in ((i_set | j_set, 1), (i_set & j_set, 1), (i_set, -1), (j_set, -1)):
            coeffs[z][k] = coeffs[z].get(k, 0) + s
    off = len(sig_keys)
    for k, (x, y) in enumerate(mu_keys):
        coeffs[x][off + k] = coeffs[x].get(off + k, 0) + 1
        coeffs[y][off + k] = coeffs[y].get(off + k, 0) - 1
    base = FlowInequality(n, dict(lam), dict(delta))
    bal = inflow_vector(base)
    for z in range(1, universe + 1):
        lp.add_row(coeffs[z], GE, lam.get(z, ZERO) - bal[z])
    sol = solve_lp(lp)
    if sol.status is not LpStatus.OPTIMAL:
        return None
    sigma = {sig_keys[k]: sol.primal[k] for k in range(off) if sol.primal[k]}
    mu = {mu_keys[k]: sol.primal[off + k] for k in range(len(mu_keys)) if sol.primal[off + k]}
    out = FlowInequality(n, dict(lam), dict(delta), sigma, mu)
    assert verify_witness(out)
    return out


# ---------------------------------------------------------------------------
# proof steps and sequences

SUB, MONO, COMP, DECOMP = "sub", "mono", "comp", "decomp"


@dataclass(frozen=True)
class ProofStep:
    """``kind`` with sets ``(a, b)``: Sub(I,J), Mono(X,Y), Comp(X,Y), Decomp(Y,X)."""

    kind: str
    a: AttrSet
    b: AttrSet
    weight: Fraction

    def well_formed(self) -> bool:
        if self.weight <= 0:
            return False
        if self.kind == SUB:
            return incomparable(self.a, self.b)
        if self.kind in (MONO, COMP):
            return is_proper_subset(self.a, self.b)
        if self.kind == DECOMP:
            return is_proper_subset(self.b, self.a)
        return False

    def vector(self) -> dict[Pair, int]:
        """Unit step vector over ``(X, Y)`` coordinates, without the weight."""
        a, b = self.a, self.b
        vec: dict[Pair, int] = {}

        def put(x: AttrSet, y: AttrSet, c: int) -> None:
            if x != y:
                vec[(x, y)] = vec.get((x, y), 0) + c

        if self.kind == SUB:
            put(a & b, a, -1)
            put(b, a | b, 1)
        elif self.kind == MONO:
            put(0, b, -1)
            put(0, a, 1)
        elif self.kind == COMP:
            put(0, a, -1)
            put(a, b, -1)
            put(0, b, 1)
        elif self.kind == DECOMP:
            put(0, a, -1)
            put(0, b, 1)
            put(b, a, 1)
        return {k: c for k, c in vec.items() if c}

    def apply(self, delta: dict[Pair, Fraction]) -> None:
        for key, c in self.vector().items():
            _add(delta, key, c * self.weight)

    def format(self, names: Sequence[str] | None = None) -> str:
        return f"{self.kind} {format_set(self.a, names)} {format_set(self.b, names)} {format_rational(self.weight)}"


ProofSequence = list[ProofStep]


@dataclass
class SequenceCheck:
    ok: bool
    failing_index: int | None = None
    message: str = ""
    final_delta: dict[Pair, Fraction] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def replay(delta: Mapping[Pair, Fraction], seq: Iterable[ProofStep]) -> list[dict[Pair, Fraction]]:
    """All intermediate vectors ``δ_0, ..., δ_ℓ``."""
    cur = dict(delta)
    out = [dict(cur)]
    for step in seq:
        step.apply(cur)
        out.append(dict(cur))
    return out


def verify_proof_sequence(ineq: FlowInequality, seq: Sequence[ProofStep]) -> SequenceCheck:
    cur = dict(ineq.delta)
    for i, step in enumerate(seq):
        if not step.well_formed():
            return SequenceCheck(False, i, f"step {i} ({step.kind}) is malformed")
        step.apply(cur)
        neg = [k for k, v in cur.items() if v < 0]
        if neg:
            x, y = neg[0]
            return SequenceCheck(False, i, f"step {i} ({step.kind}) drives delta({y:#b}|{x:#b}) negative")
    for b, v in ineq.lam.items():
        if cur.get((0, b), ZERO) < v:
            return SequenceCheck(False, len(seq), f"final delta below lambda at {b:#b}", cur)
    return SequenceCheck(True, None, "", cur)


def carry_witness(ineq: FlowInequality, step: ProofStep) -> FlowInequality:
    """Inequality after applying ``step`` to ``δ``; the witness follows the step.

    Mono consumes ``μ_{X,Y}`` and Sub consumes ``σ_{I,J}`` by the step weight;
    Comp and Decomp keep every inflow unchanged.  When the carried witness does
    not certify the result, a fresh witness is searched by LP.
    """
    out = ineq.copy()
    step.apply(out.delta)
    w = step.weight
    if step.kind == MONO:
        _add(out.mu, (step.a, step.b), -w)
    elif step.kind == SUB:
        _add(out.sigma, canonical_pair(step.a, step.b), -w)
    if all(v >= 0 for v in out.delta.values()) and verify_witness(out):
        return out
    if any(v < 0 for v in out.delta.values()):
        raise DomainError("proof step applied without enough budget")
    found = find_witness(out.n, out.lam, out.delta)
    if found is None:
        raise DomainError("inequality lost validity after a proof step")
    return found


def format_sequence(seq: Sequence[ProofStep], names: Sequence[str] | None = None) -> str:
    return "\n".join(step.format(names) for step in seq)


_STEP_RE = re.compile(r"^\s*(sub|mono|comp|decomp)\s+\{([^}]*)\}\s+\{([^}]*)\}\s+(-?\d+(?:/\d+)?)\s*$")


def parse_sequence(text: str, names: Sequence[str] | None = None) -> ProofSequence:
    """Inverse of :func:`format_sequence`."""
    index = {nm: i for i, nm in enumerate(names)} if names else None
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        m = _STEP_RE.match(line)
        if not m:
            raise DomainError(f"line {lineno}: malformed proof step")

        def parse_set(body: str) -> AttrSet:
            mask = 0
            for tok in filter(None, (t.strip() for t in body.split(","))):
                mask |= 1 << (index[tok] if index is not None else int(tok))
            return mask

        out.append(ProofStep(m.group(1), parse_set(m.group(2)), parse_set(m.group(3)), Fraction(m.group(4))))
    return out


# ---------------------------------------------------------------------------
# inductive construction


def _sequence_norm(ineq: FlowInequality) -> Fraction:
    nm = ineq.norms()
    return 3 * nm["sigma"] + nm["delta"] + nm["mu"]


def inductive_length_bound(ineq: FlowInequality) -> Fraction:
    return ineq.denominator() * _sequence_norm(ineq)


def flownet_length_bound(ineq: FlowInequality) -> Fraction:
    nm = ineq.norms()
    return (1 << ineq.n) * ineq.denominator(include_mu=False) * (nm["lam"] + nm["sigma"])


def construct_inductive(ineq: FlowInequality) -> ProofSequence:
    """Proof sequence built by repeatedly discharging one unconditional ``δ`` unit."""
    if not verify_witness(ineq):
        raise DomainError("inequality is not certified by its witness")
    w = Fraction(1, ineq.denominator())
    cur = ineq.copy()
    seq: ProofSequence = []
    universe = full_set(ineq.n)
    while cur.lam:
        z = next((y for (x, y) in sorted(cur.delta, key=lambda k: k[1]) if x == 0), None)
        if z is None:
            raise AssertionError("no unconditional delta left while lambda is positive")
        lam_z = cur.lam.get(z, ZERO)
        if lam_z > 0:
            _add(cur.lam, z, -w)
            _add(cur.delta, (0, z), -w)
            continue
        if inflow_vector(cur)[z] > 0:
            _add(cur.delta, (0, z), -w)
            continue
        x = next((x for x in subsets(z) if x != z and cur.mu.get((x, z), ZERO) >= w), None)
        if x is not None:
            step = ProofStep(MONO, x, z, w)
            step.apply(cur.delta)
            _add(cur.mu, (x, z), -w)
            seq.append(step)
            continue
        y = next(
            (y for y in range(z + 1, universe + 1) if is_proper_subset(z, y) and cur.delta.get((z, y), ZERO) >= w),
            None,
        )
        if y is not None:
            step = ProofStep(COMP, z, y, w)
            step.apply(cur.delta)
            seq.append(step)
            continue
        j = next(
            (j for j in range(1, universe + 1) if incomparable(z, j) and cur.sigma.get(canonical_pair(z, j), ZERO) >= w),
            None,
        )
        if j is None:
            raise AssertionError(f"no discharge rule applies at {z:#b}")
        if z & j:
            step = ProofStep(DECOMP, z, z & j, w)
            step.apply(cur.delta)
            seq.append(step)
        step = ProofStep(SUB, z, j, w)
        step.apply(cur.delta)
        seq.append(step)
        _add(cur.sigma, canonical_pair(z, j), -w)
    return seq


# ---------------------------------------------------------------------------
# truncation


def truncate(ineq: FlowInequality, y: AttrSet) -> FlowInequality:
    """Remove one ``1/D`` unit of ``δ_{Y|∅}`` and the deficit it leaves behind."""
    if not ineq.lam:
        raise DomainError("truncation needs a positive lambda")
    if ineq.delta.get((0, y), ZERO) <= 0:
        raise DomainError("truncation needs a positive delta(Y|empty)")
    if not verify_witness(ineq) or not is_tight(ineq):
        raise DomainError("truncation needs a tight witness")
    w = Fraction(1, ineq.denominator())
    out = ineq.copy()
    universe = full_set(ineq.n)
    _add(out.delta, (0, y), -w)
    z = y
    while z:
        if out.lam.get(z, ZERO) > 0:
            _add(out.lam, z, -w)
            break
        x = next((x for x in subsets(z) if x != z and out.mu.get((x, z), ZERO) >= w), None)
        if x is not None:
            _add(out.mu, (x, z), -w)
            z = x
            continue
        up = next(
            (u for u in range(z + 1, universe + 1) if is_proper_subset(z, u) and out.delta.get((z, u), ZERO) >= w),
            None,
        )
        if up is not None:
            _add(out.delta, (z, up), -w)
            z = up
            continue
        j = next(
            (j for j in range(1, universe + 1) if incomparable(z, j) and out.sigma.get(canonical_pair(z, j), ZERO) >= w),
            None,
        )
        if j is None:
            raise AssertionError(f"deficit at {z:#b} cannot be propagated")
        _add(out.sigma, canonical_pair(z, j), -w)
        _add(out.mu, (z & j, j), w)
        z = z | j
    return out


def truncation_conditions(before: FlowInequality, after: FlowInequality, y: AttrSet) -> dict[str, bool]:
    """The five properties a truncation must satisfy, checked exactly."""
    d = before.denominator()
    w = Fraction(1, d)
    nb, na = before.norms(), after.norms()
    keys_l = set(before.lam) | set(after.lam)
    keys_d = set(before.delta) | set(after.delta)
    return {
        "a_valid": verify_witness(after),
        "b_dominated": all(after.lam.get(k, ZERO) <= before.lam.get(k, ZERO) for k in keys_l)
        and all(after.delta.get(k, ZERO) <= before.delta.get(k, ZERO) for k in keys_d),
        "c_progress": na["lam"] >= nb["lam"] - w
        and after.delta.get((0, y), ZERO) <= before.delta.get((0, y), ZERO) - w,
        "d_denominator": d % after.denominator() == 0,
        "e_norm_decrease": d * _sequence_norm(after) <= d * _sequence_norm(before) - 1,
    }


# ---------------------------------------------------------------------------
# flow-network construction


def construct_flownet(ineq: FlowInequality) -> ProofSequence:
    """Proof sequence built by routing ``1/D`` units along shortest network paths."""
    if not verify_witness(ineq):
        raise DomainError("inequality is not certified by its witness")
    n = ineq.n
    universe = full_set(n)
    lam = dict(ineq.lam)
    net = dict(ineq.delta)
    sigma = dict(ineq.sigma)
    for b in range(1, universe + 1):
        t = min(lam.get(b, ZERO), net.get((0, b), ZERO))
        if t:
            _add(lam, b, -t)
            _add(net, (0, b), -t)
    w = Fraction(1, ineq.denominator(include_mu=False))
    seq: ProofSequence = []
    proper_subsets = [[x for x in subsets(z) if x and x != z] for z in range(universe + 1)]

    def bfs() -> dict[AttrSet, tuple[AttrSet, bool] | None]:
        up: dict[AttrSet, list[AttrSet]] = {}
        for (x, y), v in net.items():
            if v > 0:
                up.setdefault(x, []).append(y)
        parent: dict[AttrSet, tuple[AttrSet, bool] | None] = {0: None}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            nbrs = [(y, True) for y in up.get(u, [])] + [(x, False) for x in proper_subsets[u]]
            for v, is_up in sorted(nbrs):
                if v not in parent:
                    parent[v] = (u, is_up)
                    queue.append(v)
        return parent

    def push(parent, target: AttrSet) -> None:
        path = []
        v = target
        while parent[v] is not None:
            u, is_up = parent[v]
            path.append((u, v, is_up))
            v = u
        for u, v, is_up in reversed(path):
            if is_up:
                if u:
                    seq.append(ProofStep(COMP, u, v, w))
                _add(net, (u, v), -w)
            else:
                seq.append(ProofStep(DECOMP, u, v, w))
                _add(net, (v, u), w)

    while lam:
        parent = bfs()
        reach = list(parent)  # BFS order: by distance, ties ascending
        target = next((b for b in reach if lam.get(b, ZERO) > 0), None)
        if target is not None:
            push(parent, target)
            _add(lam, target, -w)
            continue
        k_set = set(parent)
        pair = next(
            (
                (i_set, j_set)
                for (i_set, j_set), v in sorted(sigma.items())
                if v > 0 and i_set in k_set and j_set in k_set and (i_set | j_set) not in k_set
            ),
            None,
        )
        if pair is None:
            raise AssertionError("flow network has neither a target path nor a good pair")
        i_set, j_set = pair
        push(parent, i_set)
        if i_set & j_set:
            seq.append(ProofStep(DECOMP, i_set, i_set & j_set, w))
        seq.append(ProofStep(SUB, i_set, j_set, w))
        _add(sigma, pair, -w)
        _add(net, (j_set, i_set | j_set), w)
        if i_set & j_set:
            _add(net, (0, i_set & j_set), w)
    return seq


def witness_from_lp(n: int, lam: Mapping[AttrSet, Fraction], witness) -> FlowInequality:
    """Bundle a bound-LP dual witness with its target weights."""
    return FlowInequality(n, dict(lam), dict(witness.delta), dict(witness.sigma), dict(witness.mu))

