"""Exact rational linear programming for polymatroid-style bound LPs.

Two solvers share one certificate check:

* :func:`simplex_solve` is a dense two-phase primal simplex over
  :class:`fractions.Fraction` with Bland's rule.  It is exact but slow.
* :func:`solve_lp` first asks HiGHS for a floating-point vertex, rounds its
  primal and dual vectors to nearby rationals, and accepts them only if the
  exact check below proves primal feasibility, dual feasibility and equal
  objectives.  Anything short of that falls back to :func:`simplex_solve`
  when the LP is small enough, and otherwise raises ``ArithmeticError``.

Every optimal :class:`LpSolution` returned by either path has passed
:func:`certify`, so no floating-point value ever leaks into a result.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .core import (
    MAX_LP_VARS,
    AttrSet,
    ClassKind,
    DegreeConstraint,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    elementary_generators,
    format_rational,
    full_set,
    incomparable,
    members,
    subsets,
)

LE, GE, EQ = "<=", ">=", "="
ZERO = Fraction(0)


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpRow:
    coeffs: dict[int, Fraction]
    sense: str
    rhs: Fraction
    tag: tuple = ()


@dataclass
class LinearProgram:
    """``max/min c·x`` subject to sparse rows and ``x >= lower`` (default 0)."""

    num_vars: int
    rows: list[LpRow] = field(default_factory=list)
    objective: dict[int, Fraction] = field(default_factory=dict)
    maximize: bool = True
    lower: list[Fraction] | None = None
    var_names: list[str] | None = None

    def add_row(self, coeffs: Mapping[int, Fraction | int], sense: str, rhs, tag: tuple = ()) -> int:
        if sense not in (LE, GE, EQ):
            raise DomainError(f"unknown row sense {sense!r}")
        clean = {}
        for j, a in coeffs.items():
            if not 0 <= j < self.num_vars:
                raise DomainError(f"row references variable {j} outside 0..{self.num_vars - 1}")
            a = Fraction(a)
            if a:
                clean[j] = a
        self.rows.append(LpRow(clean, sense, Fraction(rhs), tag))
        return len(self.rows) - 1

    def lower_bounds(self) -> list[Fraction]:
        return list(self.lower) if self.lower is not None else [ZERO] * self.num_vars

    def to_text(self) -> str:
        """Debug dump, one row per line: ``coeff*var ... <= rhs``."""

        def var(j: int) -> str:
            return self.var_names[j] if self.var_names else f"x{j}"

        def terms(coeffs: Mapping[int, Fraction]) -> str:
            return " ".join(f"{format_rational(a)}*{var(j)}" for j, a in sorted(coeffs.items())) or "0"

        lines = [("max " if self.maximize else "min ") + terms(self.objective)]
        for row in self.rows:
            lines.append(f"{terms(row.coeffs)} {row.sense} {format_rational(row.rhs)}")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: LpStatus
    primal: list[Fraction] = field(default_factory=list)
    dual: list[Fraction] = field(default_factory=list)
    objective: Fraction | None = None
    method: str = ""


# ---------------------------------------------------------------------------
# certificate check


def certify(lp: LinearProgram, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction | None:
    """Return the common objective if ``(x, y)`` is an exact optimal primal/dual pair.

    Dual sign convention (for either objective sense): ``y_i`` multiplies row ``i``
    and the dual constraint reads ``A^T y >= c`` for a max problem,
    ``A^T y <= c`` for a min problem; ``<=`` rows of a max problem take
    ``y >= 0``, ``>=`` rows ``y <= 0`` (mirrored for min), ``=`` rows are free.
    """
    if len(x) != lp.num_vars or len(y) != len(lp.rows):
        return None
    lower = lp.lower_bounds()
    for j in range(lp.num_vars):
        if x[j] < lower[j]:
            return None
    sgn = 1 if lp.maximize else -1
    reduced = [sgn * lp.objective.get(j, ZERO) for j in range(lp.num_vars)]
    dual_obj = ZERO
    for row, yi in zip(lp.rows, y):
        lhs = sum((a * x[j] for j, a in row.coeffs.items()), ZERO)
        if row.sense == LE and lhs > row.rhs:
            return None
        if row.sense == GE and lhs < row.rhs:
            return None
        if row.sense == EQ and lhs != row.rhs:
            return None
        ys = sgn * yi
        if (row.sense == LE and ys < 0) or (row.sense == GE and ys > 0):
            return None
        if yi:
            shifted = row.rhs - sum((a * lower[j] for j, a in row.coeffs.items()), ZERO)
            dual_obj += yi * shifted
            for j, a in row.coeffs.items():
                reduced[j] -= ys * a
    # reduced[j] = sgn*(c_j - (A^T y)_j) must be <= 0 for every variable.
    for j in range(lp.num_vars):
        if reduced[j] > 0:
            return None
    primal_obj = sum((c * x[j] for j, c in lp.objective.items()), ZERO)
    dual_obj += sum((c * lower[j] for j, c in lp.objective.items()), ZERO)
    if primal_obj != dual_obj:
        return None
    return primal_obj


# ---------------------------------------------------------------------------
# exact simplex


def simplex_solve(lp: LinearProgram) -> LpSolution:
    """Exact two-phase primal simplex with Bland's rule; returns a certified vertex."""
    n = lp.num_vars
    m = len(lp.rows)
    lower = lp.lower_bounds()
    sgn = 1 if lp.maximize else -1
    cost = [sgn * lp.objective.get(j, ZERO) for j in range(n)]

    # Normalise rows to non-negative right-hand sides.
    norm_rows: list[tuple[dict[int, Fraction], str, Fraction, int]] = []
    for row in lp.rows:
        rhs = row.rhs - sum((a * lower[j] for j, a in row.coeffs.items()), ZERO)
        coeffs, sense, flip = dict(row.coeffs), row.sense, 1
        if rhs < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            rhs = -rhs
            sense = {LE: GE, GE: LE, EQ: EQ}[sense]
            flip = -1
        norm_rows.append((coeffs, sense, rhs, flip))

    n_slack = sum(1 for _, s, _, _ in norm_rows if s != EQ)
    n_art = sum(1 for _, s, _, _ in norm_rows if s != LE)
    width = n + n_slack + n_art
    tab: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    unit_col: list[int] = []  # column holding B^{-1} e_i in the final tableau
    slack_at = n
    art_at = n + n_slack
    for coeffs, sense, b, _ in norm_rows:
        row = [ZERO] * width
        for j, a in coeffs.items():
            row[j] = a
        if sense == LE:
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            unit_col.append(slack_at)
            slack_at += 1
        else:
            if sense == GE:
                row[slack_at] = Fraction(-1)
                slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            unit_col.append(art_at)
            art_at += 1
        tab.append(row)
        rhs.append(b)
    first_art = n + n_slack

    def pivot(r: int, c: int) -> None:
        prow = tab[r]
        pv = prow[c]
        if pv != 1:
            inv = 1 / pv
            for j in range(width):
                if prow[j]:
                    prow[j] *= inv
            rhs[r] *= inv
        nz = [j for j in range(width) if prow[j]]
        for k in range(m):
            if k == r:
                continue
            row = tab[k]
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                rhs[k] -= f * rhs[r]
        basis[r] = c

    def run(costs: list[Fraction], allowed: int) -> bool:
        """Maximise ``costs·z`` from the current basis; False on unboundedness."""
        while True:
            cb = [costs[basis[i]] for i in range(m)]
            entering = -1
            for j in range(allowed):
                if j in basis_set:
                    continue
                red = costs[j] - sum((cb[i] * tab[i][j] for i in range(m) if cb[i] and tab[i][j]), ZERO)
                if red > 0:
                    entering = j
                    break
            if entering < 0:
                return True
            best = -1
            best_ratio = None
            for i in range(m):
                a = tab[i][entering]
                if a > 0:
                    ratio = rhs[i] / a
                    if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[best]):
                        best, best_ratio = i, ratio
            if best < 0:
                return False
            basis_set.discard(basis[best])
            pivot(best, entering)
            basis_set.add(entering)

    basis_set = set(basis)
    if n_art:
        phase1 = [ZERO] * width
        for j in range(first_art, width):
            phase1[j] = Fraction(-1)
        run(phase1, width)
        if any(rhs[i] for i in range(m) if basis[i] >= first_art):
            return LpSolution(LpStatus.INFEASIBLE, method="simplex")
        # Drive zero-level artificials out of the basis where possible.
        for i in range(m):
            if basis[i] >= first_art:
                for j in range(first_art):
                    if tab[i][j] and j not in basis_set:
                        basis_set.discard(basis[i])
                        pivot(i, j)
                        basis_set.add(j)
                        break
    phase2 = cost + [ZERO] * (width - n)
    if not run(phase2, first_art):
        return LpSolution(LpStatus.UNBOUNDED, method="simplex")

    z = [ZERO] * width
    for i in range(m):
        z[basis[i]] = rhs[i]
    x = [z[j] + lower[j] for j in range(n)]
    cb = [phase2[basis[i]] for i in range(m)]
    y = []
    for i, (_, _, _, flip) in enumerate(norm_rows):
        col = unit_col[i]
        yi = sum((cb[k] * tab[k][col] for k in range(m) if cb[k] and tab[k][col]), ZERO)
        y.append(yi * flip * sgn)
    obj = certify(lp, x, y)
    if obj is None:
        raise AssertionError("exact simplex produced an uncertified solution")
    return LpSolution(LpStatus.OPTIMAL, x, y, obj, method="simplex")


# ---------------------------------------------------------------------------
# float-guided solve with exact certification


_DENOMINATOR_LIMITS = (1 << 10, 1 << 20, 1 << 30)
_EXACT_FALLBACK_CELLS = 400_000


def _round_vector(values: np.ndarray, limit: int) -> list[Fraction]:
    out = []
    for v in values:
        q = Fraction(float(v)).limit_denominator(limit)
        out.append(q)
    return out


def _highs(lp: LinearProgram):
    n = lp.num_vars
    sgn = 1 if lp.maximize else -1
    c = np.zeros(n)
    for j, a in lp.objective.items():
        c[j] = -sgn * float(a)  # linprog minimises
    ub_rows, ub_rhs, ub_map = [], [], []
    eq_rows, eq_rhs, eq_map = [], [], []
    for i, row in enumerate(lp.rows):
        if row.sense == EQ:
            eq_rows.append(row.coeffs)
            eq_rhs.append(float(row.rhs))
            eq_map.append(i)
        else:
            s = 1.0 if row.sense == LE else -1.0
            ub_rows.append({j: s * float(a) for j, a in row.coeffs.items()})
            ub_rhs.append(s * float(row.rhs))
            ub_map.append((i, s))

    def sparse(rows: list[Mapping[int, float]]):
        data, idx, ptr = [], [], [0]
        for r in rows:
            for j, a in r.items():
                idx.append(j)
                data.append(float(a))
            ptr.append(len(idx))
        return csr_matrix((data, idx, ptr), shape=(len(rows), n))

    bounds = [(float(lo), None) for lo in lp.lower_bounds()]
    res = linprog(
        c,
        A_ub=sparse(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rows else None,
        A_eq=sparse(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rows else None,
        bounds=bounds,
        method="highs-ds",
    )
    return res, ub_map, eq_map


def solve_lp(lp: LinearProgram, exact_only: bool = False) -> LpSolution:
    """Solve exactly; uses a certified float-guided path before exact simplex."""
    if not exact_only:
        res, ub_map, eq_map = _highs(lp)
        if res.status == 0:
            sgn = 1 if lp.maximize else -1
            duals_f = np.zeros(len(lp.rows))
            if ub_map:
                for (i, s), mval in zip(ub_map, res.ineqlin.marginals):
                    duals_f[i] = -sgn * s * mval
            if eq_map:
                for i, mval in zip(eq_map, res.eqlin.marginals):
                    duals_f[i] = -sgn * mval
            for limit in _DENOMINATOR_LIMITS:
                x = _round_vector(res.x, limit)
                y = _round_vector(duals_f, limit)
                obj = certify(lp, x, y)
                if obj is not None:
                    return LpSolution(LpStatus.OPTIMAL, x, y, obj, method="highs+certify")
        cells = len(lp.rows) * (lp.num_vars + 2 * len(lp.rows))
        if cells > _EXACT_FALLBACK_CELLS:
            if res.status == 2:
                return LpSolution(LpStatus.INFEASIBLE, method="highs")
            if res.status == 3:
                return LpSolution(LpStatus.UNBOUNDED, method="highs")
            raise ArithmeticError("could not certify the LP optimum and the LP is too large for exact simplex")
    return simplex_solve(lp)


# ---------------------------------------------------------------------------
# bound LPs over set-function classes


def effective_constraints(constraints: Sequence[DegreeConstraint]) -> list[tuple[AttrSet, AttrSet, Fraction]]:
    """Tightest log bound per ``(X, Y)`` pair, in ascending ``(Y, X)`` order."""
    best: dict[tuple[AttrSet, AttrSet], Fraction] = {}
    for c in constraints:
        key = (c.x, c.y)
        if key not in best or c.log_bound < best[key]:
            best[key] = c.log_bound
    return [(x, y, best[(x, y)]) for (x, y) in sorted(best, key=lambda k: (k[1], k[0]))]


@dataclass
class BoundLP:
    """A bound LP plus the information needed to read its variables and rows back."""

    lp: LinearProgram
    kind: ClassKind
    n: int
    lam: dict[AttrSet, Fraction]
    constraints: list[tuple[AttrSet, AttrSet, Fraction]]
    w_var: int | None = None

    def value_of(self, sol: LpSolution, z: AttrSet) -> Fraction:
        """h(Z) read from a primal solution."""
        if z == 0:
            return ZERO
        if self.kind is ClassKind.MODULAR:
            return sum((sol.primal[v] for v in members(z)), ZERO)
        return sol.primal[z - 1]


def _set_var_names(n: int) -> list[str]:
    return [f"h{''.join(str(v + 1) for v in members(z))}" for z in range(1, 1 << n)]


def _class_rows(lp: LinearProgram, kind: ClassKind, n: int) -> None:
    universe = full_set(n)

    def h(z: AttrSet) -> int:
        return z - 1

    if kind is ClassKind.POLYMATROID:
        sub, mono = elementary_generators(n)
        for i_set, j_set in sub:
            coeffs: dict[int, int] = {h(i_set | j_set): 1, h(i_set): -1, h(j_set): -1}
            if i_set & j_set:
                coeffs[h(i_set & j_set)] = 1
            lp.add_row(coeffs, LE, 0, ("sub", i_set, j_set))
        for x, y in mono:
            if x:
                lp.add_row({h(x): 1, h(y): -1}, LE, 0, ("mono", x, y))
    elif kind is ClassKind.SUBADDITIVE:
        for i_set in range(1, universe + 1):
            for j_set in range(i_set + 1, universe + 1):
                if incomparable(i_set, j_set):
                    lp.add_row({h(i_set | j_set): 1, h(i_set): -1, h(j_set): -1}, LE, 0, ("sa", i_set, j_set))
        for y in range(1, universe + 1):
            for x in subsets(y):
                if x and x != y:
                    lp.add_row({h(x): 1, h(y): -1}, LE, 0, ("mono", x, y))


def _dc_coeffs(kind: ClassKind, x: AttrSet, y: AttrSet) -> dict[int, int]:
    if kind is ClassKind.MODULAR:
        return {v: 1 for v in members(y & ~x)}
    coeffs = {y - 1: 1}
    if x:
        coeffs[x - 1] = -1
    return coeffs


def _check_lambda(lam: Mapping[AttrSet, Fraction], n: int) -> dict[AttrSet, Fraction]:
    out = {}
    for b, v in lam.items():
        v = Fraction(v)
        if v < 0:
            raise DomainError("lambda entries must be non-negative")
        if b == 0 or b >> n:
            raise DomainError(f"target {b:#b} is not a nonempty subset of the universe")
        if v:
            out[b] = out.get(b, ZERO) + v
    return out


def build_bound_lp(
    fclass: FunctionClass, rule: DisjunctiveRule, lam: Mapping[AttrSet, Fraction]
) -> BoundLP:
    """``max Σ λ_B h(B)`` over the class intersected with the degree constraints."""
    n = rule.n
    if n > MAX_LP_VARS:
        raise DomainError(f"LP-backed operations support at most {MAX_LP_VARS} variables")
    lam = _check_lambda(lam, n)
    kind = fclass.kind
    cons = effective_constraints(fclass.constraints_for(rule))
    if kind is ClassKind.MODULAR:
        lp = LinearProgram(n, var_names=[f"h{v + 1}" for v in range(n)])
        objective: dict[int, Fraction] = {}
        for b, v in lam.items():
            for u in members(b):
                objective[u] = objective.get(u, ZERO) + v
    else:
        lp = LinearProgram((1 << n) - 1, var_names=_set_var_names(n))
        objective = {b - 1: v for b, v in lam.items()}
    lp.objective = objective
    for x, y, log_bound in cons:
        lp.add_row(_dc_coeffs(kind, x, y), LE, log_bound, ("dc", x, y))
    _class_rows(lp, kind, n)
    return BoundLP(lp, kind, n, lam, cons)


def build_maximin_lp(fclass: FunctionClass, rule: DisjunctiveRule) -> BoundLP:
    """``max w`` subject to ``w <= h(B)`` for every target and the class constraints."""
    bound = build_bound_lp(fclass, rule, {})
    lp = bound.lp
    w = lp.num_vars
    lp.num_vars += 1
    if lp.var_names is not None:
        lp.var_names.append("w")
    for b in dict.fromkeys(rule.targets):
        coeffs: dict[int, int] = {w: 1}
        if bound.kind is ClassKind.MODULAR:
            for u in members(b):
                coeffs[u] = coeffs.get(u, 0) - 1
        else:
            coeffs[b - 1] = -1
        lp.add_row(coeffs, LE, 0, ("target", b))
    lp.objective = {w: Fraction(1)}
    bound.w_var = w
    return bound


# ---------------------------------------------------------------------------
# dual witnesses


@dataclass
class Witness:
    """Dual solution of a polymatroid bound LP keyed by the sets of its rows."""

    delta: dict[tuple[AttrSet, AttrSet], Fraction]
    sigma: dict[tuple[AttrSet, AttrSet], Fraction]
    mu: dict[tuple[AttrSet, AttrSet], Fraction]


def canonical_pair(i_set: AttrSet, j_set: AttrSet) -> tuple[AttrSet, AttrSet]:
    return (i_set, j_set) if i_set < j_set else (j_set, i_set)


def extract_witness(bound: BoundLP, sol: LpSolution) -> Witness:
    """Map the dual of a polymatroid bound LP to ``(δ, σ, μ)`` and re-check it exactly."""
    if sol.status is not LpStatus.OPTIMAL:
        raise DomainError("witness extraction needs an optimal solution")
    if bound.kind is not ClassKind.POLYMATROID:
        raise DomainError("witnesses are defined for the polymatroid class")
    delta: dict[tuple[AttrSet, AttrSet], Fraction] = {}
    sigma: dict[tuple[AttrSet, AttrSet], Fraction] = {}
    mu: dict[tuple[AttrSet, AttrSet], Fraction] = {}
    objective = ZERO
    logs = {(x, y): v for x, y, v in bound.constraints}
    for row, yi in zip(bound.lp.rows, sol.dual):
        if not yi:
            continue
        kind, a, b = row.tag
        if kind == "dc":
            delta[(a, b)] = delta.get((a, b), ZERO) + yi
            objective += yi * logs[(a, b)]
        elif kind == "sub":
            key = canonical_pair(a, b)
            sigma[key] = sigma.get(key, ZERO) + yi
        elif kind == "mono":
            mu[(a, b)] = mu.get((a, b), ZERO) + yi
        else:
            raise DomainError(f"unexpected row kind {kind} in a polymatroid bound LP")
    if objective != sol.objective:
        raise AssertionError("witness objective differs from the LP optimum")
    balance = {z: ZERO for z in range(1, 1 << bound.n)}
    for (x, y), v in delta.items():
        balance[y] += v
        if x:
            balance[x] -= v
    for (i_set, j_set), v in sigma.items():
        balance[i_set | j_set] += v
        if i_set & j_set:
            balance[i_set & j_set] += v
        balance[i_set] -= v
        balance[j_set] -= v
    for (x, y), v in mu.items():
        balance[y] -= v
        if x:
            balance[x] += v
    for z, v in balance.items():
        if v < bound.lam.get(z, ZERO):
            raise AssertionError(f"witness inflow below lambda at {z:#b}")
    return Witness(delta, sigma, mu)


def solve_bound(
    fclass: FunctionClass, rule: DisjunctiveRule, lam: Mapping[AttrSet, Fraction]
) -> tuple[BoundLP, LpSolution]:
    bound = build_bound_lp(fclass, rule, lam)
    return bound, solve_lp(bound.lp)
