"""Command-line surface: query files, CSV data, instance generators and reports.

Query file grammar, one declaration per line (``#`` starts a comment)::

    relation NAME(A,B,...) [size N]
    constraint NAME deg(Y... | X...) <= N
    fd NAME: X... -> Y...
    rule T1(vars) | T2(vars) :- R1(vars), R2(vars), ...
    query Q(vars) :- R1(vars), ...        # Q() makes a Boolean query

Attribute names get indices in order of first declaration.  Exit codes:
0 ok, 1 usage, 2 parse or input error, 3 data violation, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .bounds import bound_by_kind, compute_lambda
from .core import (
    AttrSet,
    ClassKind,
    DegreeConstraint,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    Hypergraph,
    attrset,
    format_rational,
    format_set,
    full_set,
    members,
    validate_rule,
)
from .engine import EvalStats, eval_boolean_fhtw, eval_boolean_subw, eval_full_wco, greedy_model, model_size
from .panda import DataViolation, check_data, panda_run
from .proofseq import (
    construct_flownet,
    construct_inductive,
    flownet_length_bound,
    format_sequence,
    inductive_length_bound,
    verify_proof_sequence,
    witness_from_lp,
)
from .ratlp import build_bound_lp, extract_witness, solve_lp
from .relalg import Relation
from .widths import classic_width, da_maximin_width, da_minimax_width, gap_hypergraph

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3, 4


class InputError(DomainError):
    """Malformed data file."""


class ParseError(DomainError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class QueryFile:
    """A parsed query file: the rule plus the surface names needed for I/O."""

    rule: DisjunctiveRule
    relations: dict[str, tuple[str, ...]]
    boolean: bool = False
    head_names: tuple[str, ...] = ()

    @property
    def var_names(self) -> tuple[str, ...]:
        return self.rule.names()


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_RELATION_RE = re.compile(rf"^relation\s+({_NAME})\s*\(([^)]*)\)\s*(?:size\s+(\d+))?$")
_CONSTRAINT_RE = re.compile(rf"^constraint\s+({_NAME})\s+deg\s*\(([^|)]*)\|([^)]*)\)\s*<=\s*(\d+)$")
_FD_RE = re.compile(rf"^fd\s+({_NAME})\s*:\s*(.*?)\s*->\s*(.*)$")
_RULE_RE = re.compile(r"^(rule|query)\s+(.*?):-(.*)$")


def _names(text: str, sep: str = ",") -> list[str]:
    parts = [p.strip() for p in re.split(r"[,\s]+" if sep == "any" else sep, text)]
    return [p for p in parts if p]


_ATOM_FIND_RE = re.compile(rf"({_NAME})\s*\(([^)]*)\)")


def _split_atoms(text: str, line: int) -> list[tuple[str, list[str]]]:
    atoms = [(m.group(1), _names(m.group(2))) for m in _ATOM_FIND_RE.finditer(text)]
    leftover = _ATOM_FIND_RE.sub("", text).replace(",", "").replace("|", "").strip()
    if leftover:
        raise ParseError(line, f"unexpected text {leftover!r}")
    return atoms


def parse_query_file(text: str) -> QueryFile:
    """Parse the line-oriented query format into a rule; errors carry line numbers."""
    attrs: list[str] = []
    relations: dict[str, tuple[str, ...]] = {}
    pending: list[tuple[int, str, list[str], list[str], int]] = []
    sizes: list[tuple[int, str, int]] = []
    head: tuple[int, str, list[tuple[str, list[str]]], list[tuple[str, list[str]]]] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split(None, 1)[0]
        if word == "relation":
            m = _RELATION_RE.match(line)
            if not m:
                raise ParseError(lineno, "expected 'relation NAME(A,B,...) [size N]'")
            name, cols = m.group(1), _names(m.group(2))
            if name in relations:
                raise ParseError(lineno, f"relation {name} declared twice")
            if not cols or len(set(cols)) != len(cols):
                raise ParseError(lineno, f"relation {name} needs distinct attributes")
            for c in cols:
                if not re.fullmatch(_NAME, c):
                    raise ParseError(lineno, f"bad attribute name {c!r}")
                if c not in attrs:
                    attrs.append(c)
            relations[name] = tuple(cols)
            if m.group(3) is not None:
                sizes.append((lineno, name, int(m.group(3))))
        elif word == "constraint":
            m = _CONSTRAINT_RE.match(line)
            if not m:
                raise ParseError(lineno, "expected 'constraint NAME deg(Y... | X...) <= N'")
            pending.append((lineno, m.group(1), _names(m.group(2), "any"), _names(m.group(3), "any"), int(m.group(4))))
        elif word == "fd":
            m = _FD_RE.match(line)
            if not m:
                raise ParseError(lineno, "expected 'fd NAME: X... -> Y...'")
            lhs, rhs = _names(m.group(2), "any"), _names(m.group(3), "any")
            if not lhs or not rhs:
                raise ParseError(lineno, "functional dependency needs attributes on both sides")
            pending.append((lineno, m.group(1), lhs + rhs, lhs, 1))
        elif word in ("rule", "query"):
            if head is not None:
                raise ParseError(lineno, "only one rule or query per file")
            m = _RULE_RE.match(line)
            if not m:
                raise ParseError(lineno, f"expected '{word} HEAD :- BODY'")
            heads = _split_atoms(m.group(2), lineno)
            body = _split_atoms(m.group(3), lineno)
            if not heads or not body:
                raise ParseError(lineno, "rule needs a head and a body")
            if word == "query" and len(heads) != 1:
                raise ParseError(lineno, "a query has exactly one head atom")
            head = (lineno, word, heads, body)
        else:
            raise ParseError(lineno, f"unknown declaration {word!r}")

    if head is None:
        raise ParseError(max(1, len(text.splitlines())), "missing rule or query declaration")
    lineno, word, heads, body = head
    n = len(attrs)
    index = {a: i for i, a in enumerate(attrs)}

    def mask(line: int, names: Sequence[str]) -> AttrSet:
        for a in names:
            if a not in index:
                raise ParseError(line, f"unknown attribute {a}")
        return attrset(index[a] for a in names)

    edges = []
    seen_rel = set()
    for rel, cols in body:
        if rel not in relations:
            raise ParseError(lineno, f"unknown relation {rel}")
        if rel in seen_rel:
            raise ParseError(lineno, f"relation {rel} used twice in the body")
        seen_rel.add(rel)
        if set(cols) != set(relations[rel]):
            raise ParseError(lineno, f"atom {rel}({','.join(cols)}) does not match its declared attributes")
        edges.append((mask(lineno, cols), rel))
    covered = 0
    for e, _ in edges:
        covered |= e
    if covered != full_set(n):
        missing = [attrs[v] for v in members(full_set(n) & ~covered)]
        raise ParseError(lineno, f"attributes {missing} appear in no body atom")

    boolean = word == "query" and not heads[0][1]
    targets = [full_set(n)] if boolean else [mask(lineno, cols) for _, cols in heads]
    if any(t == 0 for t in targets):
        raise ParseError(lineno, "a rule target needs at least one attribute")

    constraints = []
    for line, rel, count in sizes:
        if rel in seen_rel:
            constraints.append(DegreeConstraint.from_count(0, mask(line, relations[rel]), count, rel))
    for line, rel, y_names, x_names, count in pending:
        if rel not in relations:
            raise ParseError(line, f"unknown relation {rel}")
        if count < 1:
            raise ParseError(line, "degree bounds must be at least 1")
        y = mask(line, y_names) | mask(line, x_names)
        x = mask(line, x_names)
        if y == x:
            raise ParseError(line, "constraint needs Y to extend X")
        if not set(y_names) | set(x_names) <= set(relations[rel]):
            raise ParseError(line, f"unguarded constraint: relation {rel} does not contain all attributes")
        constraints.append(DegreeConstraint.from_count(x, y, count, rel))

    rule = DisjunctiveRule(Hypergraph(n, tuple(edges)), tuple(targets), tuple(constraints), tuple(attrs))
    diags = validate_rule(rule)
    if diags:
        raise ParseError(lineno, "; ".join(diags))
    head_names = tuple(name for name, _ in heads)
    return QueryFile(rule, {r: relations[r] for _, r in edges}, boolean, head_names)


def ingest_csv(directory: str | Path, qf: QueryFile, trust: bool = False) -> dict[str, Relation]:
    """Read ``NAME.csv`` per relation, check headers and the declared constraints."""
    directory = Path(directory)
    index = {a: i for i, a in enumerate(qf.var_names)}
    data: dict[str, Relation] = {}
    for rel, cols in qf.relations.items():
        path = directory / f"{rel}.csv"
        if not path.exists():
            raise FileNotFoundError(f"missing data file {path}")
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != cols:
                raise InputError(f"{path}: header {header} does not match declared attributes {list(cols)}")
            rows = []
            for k, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(cols):
                    raise InputError(f"{path}:{k}: expected {len(cols)} values, got {len(row)}")
                rows.append(tuple(sys.intern(v) for v in row))
        data[rel] = Relation([index[c] for c in cols], rows)
    if not trust:
        problems = check_data(qf.rule, data)
        if problems:
            raise DataViolation("; ".join(problems))
    return data


# ---------------------------------------------------------------------------
# instance generators


@dataclass
class Instance:
    """A generated query file plus its tables as ``name -> (header, rows)``."""

    query_text: str
    tables: dict[str, tuple[tuple[str, ...], list[tuple[str, ...]]]] = field(default_factory=dict)

    def load(self) -> tuple[QueryFile, dict[str, Relation]]:
        qf = parse_query_file(self.query_text)
        index = {a: i for i, a in enumerate(qf.var_names)}
        data = {
            rel: Relation([index[c] for c in header], rows) for rel, (header, rows) in self.tables.items()
        }
        return qf, data


_C4_BODY = "R12(A1,A2), R23(A2,A3), R34(A3,A4), R41(A4,A1)"


def _c4_text(n: int, extra: Sequence[str] = (), head: str = "Q()") -> str:
    lines = [
        f"relation R12(A1,A2) size {n}",
        f"relation R23(A2,A3) size {n}",
        f"relation R34(A3,A4) size {n}",
        f"relation R41(A4,A1) size {n}",
        *extra,
        f"query {head} :- {_C4_BODY}",
    ]
    return "\n".join(lines) + "\n"


def _pairs(rows) -> list[tuple[str, str]]:
    return [(str(a), str(b)) for a, b in rows]


def make_instance(kind: str, n: int = 16, d: int = 1, m: int = 2, k: int = 2) -> Instance:
    """Build a generator instance in memory; ``n`` is the relation size parameter N."""
    if kind in ("c4-skew", "c4-diag", "c4-band", "zy") and n < 1:
        raise DomainError("N must be positive")
    if kind == "c4-skew":
        star = _pairs((i, 1) for i in range(1, n + 1))
        fan = _pairs((1, i) for i in range(1, n + 1))
        tables = {"R12": (("A1", "A2"), star), "R23": (("A2", "A3"), fan),
                  "R34": (("A3", "A4"), star), "R41": (("A4", "A1"), fan)}
        return Instance(_c4_text(n), tables)
    if kind in ("c4-diag", "c4-band"):
        side = math.isqrt(n)
        band = 1 if kind == "c4-diag" else d
        if not 1 <= band <= side:
            raise DomainError(f"band width D={band} must lie in 1..floor(sqrt(N))={side}")
        grid = [(i, j) for i in range(1, side + 1) for j in range(1, side + 1)]
        r12 = [(i, j) for i, j in grid if (j - i) % side < band]
        extra = [f"constraint R12 deg(A2 | A1) <= {band}", f"constraint R12 deg(A1 | A2) <= {band}"]
        tables = {"R12": (("A1", "A2"), _pairs(r12)), "R23": (("A2", "A3"), _pairs(grid)),
                  "R34": (("A3", "A4"), _pairs(grid)), "R41": (("A4", "A1"), _pairs(grid))}
        return Instance(_c4_text(n, extra), tables)
    if kind == "zy":
        return _zy_instance(n)
    if kind == "gap1":
        h, names = gap_hypergraph(m, k)
        lines = []
        for e, rel in h.edges:
            cols = ",".join(names[v] for v in members(e))
            lines.append(f"relation {rel}({cols}) size {max(n, 2)}")
        body = ", ".join(f"{rel}({','.join(names[v] for v in members(e))})" for e, rel in h.edges)
        lines.append(f"query Q() :- {body}")
        return Instance("\n".join(lines) + "\n", {})
    raise DomainError(f"unknown instance kind {kind!r}")


def _zy_instance(n: int) -> Instance:
    """Keyed relation over A,B,X,Y,C built from affine maps modulo ``s``.

    With ``s`` coprime to 6, the tuples ``(a, b, a+b, a-b, 2a+b)`` make every
    declared key (AB, AXY, BXY, AC, XC, YC) determine the whole tuple.
    """
    s = max(v for v in range(1, max(n, 1) + 1) if math.gcd(v, 6) == 1)
    rows = [(a, b, (a + b) % s, (a - b) % s, (2 * a + b) % s) for a in range(s) for b in range(s)]
    cols = ("A", "B", "X", "Y", "C")
    big, small = n ** 3, n ** 2
    lines = ["relation K(A,B,X,Y,C)"]
    tables = {"K": (cols, [tuple(str(v) for v in r) for r in rows])}
    for rel, pair in (("R", "XY"), ("S", "AX"), ("T", "AY"), ("U", "BX"), ("V", "BY")):
        lines.append(f"relation {rel}({pair[0]},{pair[1]}) size {big}")
        pos = [cols.index(c) for c in pair]
        tables[rel] = ((pair[0], pair[1]), sorted({tuple(str(r[p]) for p in pos) for r in rows}))
    lines.append(f"relation W(C) size {small}")
    tables["W"] = (("C",), sorted({(str(r[4]),) for r in rows}))
    for key in ("A B", "A X Y", "B X Y", "A C", "X C", "Y C"):
        rest = " ".join(c for c in cols if c not in key.split())
        lines.append(f"fd K: {key} -> {rest}")
    lines.append("query Q(A,B,X,Y,C) :- K(A,B,X,Y,C), R(X,Y), S(A,X), T(A,Y), U(B,X), V(B,Y), W(C)")
    return Instance("\n".join(lines) + "\n", tables)


def generate_instance(kind: str, out: str | Path, **params: int) -> Path:
    """Write ``query.ddl`` and one CSV per relation into ``out``; returns the query path."""
    inst = make_instance(kind, **params)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    query_path = out / "query.ddl"
    query_path.write_text(inst.query_text)
    for rel, (header, rows) in inst.tables.items():
        with (out / f"{rel}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    if inst.tables:
        ingest_csv(out, parse_query_file(inst.query_text))
    return query_path


# ---------------------------------------------------------------------------
# reports


def _fmt(q: Fraction) -> str:
    return format_rational(Fraction(q))


def bound_report(qf: QueryFile, kind: str, class_kind: str) -> str:
    rule = qf.rule
    fclass = FunctionClass(ClassKind(class_kind))
    rep = bound_by_kind(kind, rule, fclass)
    names = qf.var_names
    lines = ["bound-report v1", f"kind {kind}", f"class {class_kind if kind == 'poly' else rep.kind}",
             f"value {_fmt(rep.log_value)}"]
    lam = rep.certificate.get("lambda")
    if lam:
        for b in sorted(lam):
            lines.append(f"lambda {format_set(b, names)} {_fmt(lam[b])}")
    cover = rep.certificate.get("cover")
    if isinstance(cover, tuple):
        lines.append("cover " + " ".join(cover))
    elif isinstance(cover, dict):
        for (x, y), v in sorted(cover.items()):
            lines.append(f"cover {format_set(y, names)} {_fmt(v)}")
    return "\n".join(lines)


def width_report(qf: QueryFile, kind: str) -> str:
    names = qf.var_names
    rule = qf.rule
    if kind in ("tw", "ghtw", "fhtw"):
        rep = classic_width(rule.hypergraph, kind)
    elif kind == "dafhtw":
        rep = da_minimax_width(rule)
    elif kind == "dasubw":
        rep = da_maximin_width(rule)
    else:
        raise DomainError(f"unknown width kind {kind!r}")
    lines = ["width-report v1", f"kind {kind}", f"value {_fmt(rep.value)}"]
    if rep.td is not None:
        for bag in rep.td.bags:
            lines.append(f"bag {format_set(bag, names)} {_fmt(rep.bag_values[bag])}")
        for a, b in rep.td.edges:
            lines.append(f"tree-edge {a} {b}")
    for t in rep.targets:
        lines.append(f"target {format_set(t, names)}")
    return "\n".join(lines)


def prove_report(qf: QueryFile, flownet: bool = False) -> tuple[str, bool]:
    rule = qf.rule
    fclass = FunctionClass(ClassKind.POLYMATROID)
    lr = compute_lambda(rule, fclass)
    bound = build_bound_lp(fclass, rule, lr.lam)
    sol = solve_lp(bound.lp)
    ineq = witness_from_lp(rule.n, lr.lam, extract_witness(bound, sol))
    seq = construct_flownet(ineq) if flownet else construct_inductive(ineq)
    check = verify_proof_sequence(ineq, seq)
    limit = flownet_length_bound(ineq) if flownet else inductive_length_bound(ineq)
    names = qf.var_names
    lines = [
        "proof-report v1",
        f"construction {'flownet' if flownet else 'inductive'}",
        f"value {_fmt(sol.objective)}",
        f"verified {'yes' if check.ok else 'no'}",
        f"length {len(seq)}",
        f"length-bound {_fmt(limit)}",
    ]
    if not check.ok:
        lines.append(f"failure {check.message}")
    for b in sorted(ineq.lam):
        lines.append(f"lambda {format_set(b, names)} {_fmt(ineq.lam[b])}")
    for (x, y) in sorted(ineq.delta):
        lines.append(f"delta {format_set(y, names)} | {format_set(x, names)} {_fmt(ineq.delta[(x, y)])}")
    lines.append("steps")
    seq_text = format_sequence(seq, names)
    if seq_text:
        lines.append(seq_text)
    return "\n".join(lines), check.ok


def _relation_csv(rel: Relation, names: Sequence[str]) -> str:
    lines = [",".join(names[v] for v in rel.schema)]
    for row in sorted(rel.rows, key=lambda r: tuple(map(str, r))):
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines)


def eval_report(
    qf: QueryFile, data: Mapping[str, Relation], strategy: str, trace: bool = False, trust: bool = False
) -> str:
    rule = qf.rule
    stats = EvalStats()
    lines = ["eval-report v1", f"strategy {strategy}"]
    body = ""
    if strategy == "wco":
        if qf.boolean:
            out = eval_full_wco(rule, data, stats, trust=trust)
            lines.append(f"answer {'true' if len(out) else 'false'}")
        else:
            out = eval_full_wco(rule.with_targets([full_set(rule.n)]), data, stats, trust=trust)
            lines.append(f"rows {len(out)}")
            body = _relation_csv(out, qf.var_names)
    elif strategy in ("fhtw", "subw"):
        if not qf.boolean:
            raise DomainError(f"strategy {strategy} evaluates Boolean queries only")
        fn = eval_boolean_fhtw if strategy == "fhtw" else eval_boolean_subw
        answer = fn(rule, data, stats=stats, trust=trust)
        lines.append(f"answer {'true' if answer else 'false'}")
    else:
        raise DomainError(f"unknown strategy {strategy!r}")
    lines.append(f"panda-runs {len(stats.panda_reports)}")
    lines.append(f"max-intermediate {stats.max_intermediate}")
    names = qf.var_names
    for targets, rep in stats.panda_reports:
        label = " | ".join(format_set(t, names) for t in targets)
        lines.append(f"run {label} obj {_fmt(rep.obj)} max {rep.max_intermediate} restarts {rep.restarts}")
        if trace:
            lines.extend(f"  trace {t}" for t in rep.trace)
    text = "\n".join(lines)
    return text + ("\n\n" + body if body else "")


def model_report(qf: QueryFile, data: Mapping[str, Relation], greedy: bool = False, trust: bool = False) -> str:
    rule = qf.rule
    names = qf.var_names
    if greedy:
        model = greedy_model(rule, data)
        lines = ["model-report v1", "method greedy"]
    else:
        rep = panda_run(rule, data, trust=trust)
        model = rep.model
        lines = ["model-report v1", "method panda", f"obj {_fmt(rep.obj)}", f"max-intermediate {rep.max_intermediate}"]
    lines.append(f"size {model_size(model)}")
    for b in sorted(model):
        lines.append(f"target {format_set(b, names)} size {len(model[b])}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="artifact", description="Output-size bounds, proof sequences and PANDA evaluation.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="information-theoretic output size bound")
    b.add_argument("file")
    b.add_argument("--kind", choices=["vb", "iec", "agm", "poly"], default="poly")
    b.add_argument("--class", dest="fclass", choices=["mod", "poly", "sa"], default="poly")

    w = sub.add_parser("width", help="width parameter of the query")
    w.add_argument("file")
    w.add_argument("--kind", choices=["tw", "ghtw", "fhtw", "dafhtw", "dasubw"], default="fhtw")

    pr = sub.add_parser("prove", help="emit and verify a proof sequence for the bound")
    pr.add_argument("file")
    pr.add_argument("--flownet", action="store_true")

    e = sub.add_parser("eval", help="evaluate the query on CSV data")
    e.add_argument("file")
    e.add_argument("--data", required=True)
    e.add_argument("--strategy", choices=["wco", "fhtw", "subw"], default="wco")
    e.add_argument("--trace", action="store_true")
    e.add_argument("--trust", action="store_true", help="skip the declared-constraint check")

    mo = sub.add_parser("model", help="compute a model of the rule on CSV data")
    mo.add_argument("file")
    mo.add_argument("--data", required=True)
    mo.add_argument("--greedy", action="store_true")
    mo.add_argument("--trust", action="store_true")

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("kind", choices=["c4-skew", "c4-diag", "c4-band", "zy", "gap1"])
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=16, help="relation size parameter N")
    g.add_argument("--d", type=int, default=1, help="band width D")
    g.add_argument("--m", type=int, default=2, help="block size m")
    g.add_argument("--k", type=int, default=2, help="half the number of blocks k")
    return p


def _load(path: str) -> QueryFile:
    return parse_query_file(Path(path).read_text())


def run_subcommand(argv: Sequence[str]) -> tuple[int, str]:
    """Run one command; returns ``(exit status, report text)``."""
    try:
        args = _build_parser().parse_args(list(argv))
    except _UsageError as exc:
        return EXIT_USAGE, f"usage error: {exc}"
    try:
        if args.command == "bound":
            return EXIT_OK, bound_report(_load(args.file), args.kind, args.fclass)
        if args.command == "width":
            return EXIT_OK, width_report(_load(args.file), args.kind)
        if args.command == "prove":
            text, ok = prove_report(_load(args.file), args.flownet)
            return (EXIT_OK if ok else EXIT_INTERNAL), text
        if args.command == "eval":
            qf = _load(args.file)
            data = ingest_csv(args.data, qf, trust=args.trust)
            return EXIT_OK, eval_report(qf, data, args.strategy, args.trace, args.trust)
        if args.command == "model":
            qf = _load(args.file)
            data = ingest_csv(args.data, qf, trust=args.trust)
            return EXIT_OK, model_report(qf, data, args.greedy, args.trust)
        if args.command == "gen":
            path = generate_instance(args.kind, args.out, n=args.n, d=args.d, m=args.m, k=args.k)
            return EXIT_OK, f"gen-report v1\nkind {args.kind}\nquery {path}"
    except ParseError as exc:
        return EXIT_PARSE, f"parse error: {exc}"
    except (InputError, OSError, UnicodeDecodeError) as exc:
        return EXIT_PARSE, f"input error: {exc}"
    except DataViolation as exc:
        return EXIT_DATA, f"data violation: {exc}"
    except DomainError as exc:
        return EXIT_USAGE, f"error: {exc}"
    except (AssertionError, ArithmeticError) as exc:
        return EXIT_INTERNAL, f"internal error: {exc}"
    return EXIT_USAGE, f"unknown command {args.command}"


def main(argv: Sequence[str] | None = None) -> int:
    status, text = run_subcommand(sys.argv[1:] if argv is None else argv)
    stream = sys.stdout if status == EXIT_OK else sys.stderr
    print(text, file=stream)
    return status


if __name__ == "__main__":
    sys.exit(main())
