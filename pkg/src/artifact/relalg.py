"""In-memory relational algebra over set-semantics relations.

A relation's schema is kept in ascending variable order, so the schema is
fully determined by its attribute mask and projections/joins never need to
carry column permutations around.
"""

from __future__ import annotations

from collections import defaultdict
from operator import itemgetter
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .core import AttrSet, DomainError, attrset, is_proper_subset, is_subset, members

Row = tuple


def _tuple_getter(positions: Sequence[int]) -> Callable[[Row], Row]:
    if len(positions) == 0:
        return lambda row: ()
    if len(positions) == 1:
        p = positions[0]
        return lambda row: (row[p],)
    return itemgetter(*positions)


def _sort_keys(keys: Iterable[Hashable]) -> list:
    keys = list(keys)
    try:
        return sorted(keys)
    except TypeError:
        return sorted(keys, key=repr)


class Relation:
    """Immutable set of tuples over a schema of distinct variable indices."""

    __slots__ = ("schema", "rows", "attrs", "_index")

    def __init__(self, schema: Sequence[int], rows: Iterable[Sequence[Hashable]] = ()):
        schema = tuple(schema)
        if len(set(schema)) != len(schema):
            raise DomainError(f"schema {schema} repeats a variable")
        order = sorted(range(len(schema)), key=schema.__getitem__)
        arity = len(schema)
        canon: set[Row] = set()
        reorder = order != list(range(arity))
        for r in rows:
            r = tuple(r)
            if len(r) != arity:
                raise DomainError(f"tuple {r} does not match arity {arity}")
            canon.add(tuple(r[i] for i in order) if reorder else r)
        self._init(tuple(sorted(schema)), frozenset(canon))

    def _init(self, schema: tuple[int, ...], rows: frozenset) -> None:
        self.schema = schema
        self.rows = rows
        self.attrs = attrset(schema)
        self._index: dict[AttrSet, dict[Row, list[Row]]] = {}

    @classmethod
    def from_mask(cls, attrs: AttrSet, rows: Iterable[Row]) -> "Relation":
        """Build from rows already ordered by ascending variable index."""
        rel = cls.__new__(cls)
        rel._init(tuple(members(attrs)), frozenset(rows))
        return rel

    @classmethod
    def empty(cls, attrs: AttrSet) -> "Relation":
        return cls.from_mask(attrs, ())

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __contains__(self, row: Row) -> bool:
        return row in self.rows

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Relation) and self.schema == other.schema and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.schema, self.rows))

    def __repr__(self) -> str:
        return f"Relation(schema={self.schema}, size={len(self.rows)})"

    def positions(self, attrs: AttrSet) -> list[int]:
        if not is_subset(attrs, self.attrs):
            raise DomainError(f"attributes {attrs:#b} not covered by schema {self.schema}")
        return [i for i, v in enumerate(self.schema) if attrs >> v & 1]

    def index(self, key_attrs: AttrSet) -> dict[Row, list[Row]]:
        """Hash index from key projection to rows; built once and cached."""
        idx = self._index.get(key_attrs)
        if idx is None:
            key = _tuple_getter(self.positions(key_attrs))
            grouped: dict[Row, list[Row]] = defaultdict(list)
            for row in self.rows:
                grouped[key(row)].append(row)
            idx = dict(grouped)
            self._index[key_attrs] = idx
        return idx


Model = dict  # target AttrSet -> Relation over exactly that target


def project(r: Relation, x: AttrSet) -> Relation:
    """Distinct projection of ``r`` onto the variables in ``x``."""
    if x == r.attrs:
        return r
    get = _tuple_getter(r.positions(x))
    return Relation.from_mask(x, {get(row) for row in r.rows})


def join(r: Relation, s: Relation) -> Relation:
    """Natural join; the smaller side is hashed on the shared variables."""
    if len(s) < len(r):
        r, s = s, r
    shared = r.attrs & s.attrs
    out_attrs = r.attrs | s.attrs
    out_vars = members(out_attrs)
    r_pos = {v: i for i, v in enumerate(r.schema)}
    s_pos = {v: len(r.schema) + i for i, v in enumerate(s.schema)}
    assemble = _tuple_getter([r_pos[v] if v in r_pos else s_pos[v] for v in out_vars])
    if not r.rows or not s.rows:
        return Relation.empty(out_attrs)
    idx = r.index(shared)
    key = _tuple_getter(s.positions(shared))
    out = set()
    for b in s.rows:
        matches = idx.get(key(b))
        if matches:
            for a in matches:
                out.add(assemble(a + b))
    return Relation.from_mask(out_attrs, out)


def semijoin(r: Relation, s: Relation) -> Relation:
    """Tuples of ``r`` whose shared-variable projection occurs in ``s``."""
    shared = r.attrs & s.attrs
    if shared == 0:
        return r if s.rows else Relation.empty(r.attrs)
    keys = s.index(shared)
    get = _tuple_getter(r.positions(shared))
    kept = [row for row in r.rows if get(row) in keys]
    if len(kept) == len(r.rows):
        return r
    return Relation.from_mask(r.attrs, kept)


def degree(r: Relation, y: AttrSet, x: AttrSet) -> int:
    """max over ``t_X`` of the number of distinct ``Y``-extensions of ``t_X`` in ``r``."""
    if not is_proper_subset(x, y):
        raise DomainError("degree needs X strictly inside Y")
    ry = project(r, y)
    if x == 0:
        return len(ry)
    if not ry.rows:
        return 0
    return max(len(rows) for rows in ry.index(x).values())


def partition_by_degree(r: Relation, y: AttrSet, x: AttrSet) -> list[tuple[Relation, int, int]]:
    """Split ``Π_Y(r)`` into parts whose (|Π_X| × max degree) stays within ``|Π_Y(r)|``.

    X-values are bucketed by ``floor(log2 degree)``; each bucket is then cut into
    two halves by X-value count, the extra value going to the first half.
    Returns ``(part, n_x, n_yx)`` triples with parts over schema ``Y``.
    """
    if not is_proper_subset(x, y):
        raise DomainError("partition needs X strictly inside Y")
    if not is_subset(y, r.attrs):
        raise DomainError("partition attributes not covered by schema")
    t = project(r, y)
    if not t.rows:
        raise DomainError("partition of an empty relation")
    groups = t.index(x)
    buckets: dict[int, list[Row]] = defaultdict(list)
    for key, rows in groups.items():
        buckets[len(rows).bit_length() - 1].append(key)
    total = len(t)
    parts: list[tuple[Relation, int, int]] = []
    for j in sorted(buckets):
        keys = _sort_keys(buckets[j])
        half = (len(keys) + 1) // 2
        for chunk in (keys[:half], keys[half:]):
            if not chunk:
                continue
            rows = [row for key in chunk for row in groups[key]]
            n_x = len(chunk)
            n_yx = max(len(groups[key]) for key in chunk)
            assert n_x * n_yx <= total, "degree partition exceeded the projection size"
            parts.append((Relation.from_mask(y, rows), n_x, n_yx))
    return parts


def brute_force_join(relations: Sequence[Relation]) -> Relation:
    """Reference natural join by nested iteration over variable assignments."""
    if not relations:
        return Relation.from_mask(0, [()])
    out_attrs = 0
    for rel in relations:
        out_attrs |= rel.attrs
    out_vars = members(out_attrs)
    results = set()

    def extend(i: int, binding: dict[int, Hashable]) -> None:
        if i == len(relations):
            results.add(tuple(binding[v] for v in out_vars))
            return
        rel = relations[i]
        for row in rel.rows:
            ok = True
            added = []
            for v, val in zip(rel.schema, row):
                if v in binding:
                    if binding[v] != val:
                        ok = False
                        break
                else:
                    binding[v] = val
                    added.append(v)
            if ok:
                extend(i + 1, binding)
            for v in added:
                del binding[v]

    extend(0, {})
    return Relation.from_mask(out_attrs, results)


def uncovered_tuples(model: Mapping[AttrSet, Relation], body: Relation) -> list[Row]:
    """Body-join tuples that no target table covers (empty iff ``model`` is a model)."""
    getters = []
    for b, table in model.items():
        getters.append((_tuple_getter(body.positions(b)), table.rows))
    missing = []
    for row in body.rows:
        if not any(get(row) in rows for get, rows in getters):
            missing.append(row)
    return missing


def union(a: Relation, b: Relation) -> Relation:
    if a.attrs != b.attrs:
        raise DomainError("union of relations with different schemas")
    if not b.rows:
        return a
    if not a.rows:
        return b
    return Relation.from_mask(a.attrs, a.rows | b.rows)
