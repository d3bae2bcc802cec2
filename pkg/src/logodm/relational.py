"""Target-set construction: natural join, bag projection, imputation.

The target dataset is ``project(T1 ⋈ T2 ⋈ ... ⋈ Tk, attrs)`` followed by
expansion of coded-flag attributes into one present/absent attribute per
flag, so that every later stage sees purely categorical columns.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DisjointSchemaError,
    EmptyInputError,
    ParameterError,
    PolicyPreconditionError,
    SchemaConflictError,
    SchemaError,
    UnimputedDataError,
    UnknownAttributeError,
)
from .schema import (
    CATEGORICAL,
    CODED_FLAG,
    MISSING,
    AttributeDescriptor,
    Dataset,
    DatasetSchema,
    read_csv,
    load_schema,
    validate_record,
)

UNKNOWN = "?unknown"
FLAG_DOMAIN = ("absent", "present")

POLICIES = {
    "unknown-category": "unknown-category",
    "unknown": "unknown-category",
    "per-class-mode": "per-class-mode",
    "class-mode": "per-class-mode",
    "drop-record": "drop-record",
    "drop": "drop-record",
}


@dataclass(frozen=True, eq=False)
class Relation:
    name: str
    schema: DatasetSchema
    rows: tuple[tuple, ...] = ()

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        for i, row in enumerate(rows):
            bad = validate_record(row, self.schema)
            if bad:
                raise SchemaError(f"{self.name} row {i}: {bad[0].attribute}: {bad[0].reason}")

    def __len__(self):
        return len(self.rows)

    def to_dataset(self) -> Dataset:
        return Dataset(self.schema, self.rows)

    @classmethod
    def from_dataset(cls, name: str, ds: Dataset) -> "Relation":
        return cls(name, ds.schema, ds.records)

    @classmethod
    def load(cls, name: str, csv_path, schema_path) -> "Relation":
        return cls.from_dataset(name, read_csv(csv_path, load_schema(schema_path)))


def _merged_schema(left: DatasetSchema, right: DatasetSchema):
    shared = [n for n in left.names if n in right]
    for n in shared:
        if left.attribute(n) != right.attribute(n):
            raise SchemaConflictError(
                f"attribute {n!r} is declared differently: {left.attribute(n)} vs {right.attribute(n)}"
            )
    if not shared:
        raise DisjointSchemaError("relations share no attribute; refusing a Cartesian product")
    cls_attr = left.class_attribute
    if right.class_attribute is not None:
        if cls_attr is not None and cls_attr != right.class_attribute:
            raise SchemaConflictError(
                f"conflicting class attributes {cls_attr!r} and {right.class_attribute!r}"
            )
        cls_attr = right.class_attribute
    extra = [j for j, a in enumerate(right.attributes) if a.name not in left]
    schema = DatasetSchema(left.attributes + tuple(right.attributes[j] for j in extra), cls_attr)
    return schema, shared, extra


def natural_join(left: Relation, right: Relation) -> Relation:
    """Join on every shared attribute name. Missing keys never match.

    Output rows follow left-row order, then right-row order within each
    left row.
    """
    schema, shared, extra = _merged_schema(left.schema, right.schema)
    lpos = [left.schema.position(n) for n in shared]
    rpos = [right.schema.position(n) for n in shared]

    index: dict[tuple, list[tuple]] = {}
    for row in right.rows:
        key = tuple(row[p] for p in rpos)
        if MISSING in key:
            continue
        index.setdefault(key, []).append(tuple(row[j] for j in extra))

    rows = []
    for row in left.rows:
        key = tuple(row[p] for p in lpos)
        if MISSING in key:
            continue
        for tail in index.get(key, ()):
            rows.append(row + tail)
    return Relation(f"{left.name}*{right.name}", schema, tuple(rows))


def project(rel: Relation, attrs: Sequence[str]) -> Relation:
    """Restrict and reorder columns. Duplicate rows are kept."""
    attrs = list(attrs)
    if not attrs:
        raise ParameterError("projection list is empty")
    if len(set(attrs)) != len(attrs):
        raise ParameterError(f"projection list repeats a name: {attrs}")
    for n in attrs:
        if n not in rel.schema:
            raise UnknownAttributeError(f"cannot project onto unknown attribute {n!r}")
    pos = [rel.schema.position(n) for n in attrs]
    cls_attr = rel.schema.class_attribute if rel.schema.class_attribute in attrs else None
    schema = DatasetSchema(tuple(rel.schema.attributes[p] for p in pos), cls_attr)
    return Relation(rel.name, schema, tuple(tuple(r[p] for p in pos) for r in rel.rows))


def flag_attribute_name(attr: str, flag: str) -> str:
    return f"{attr}.{flag}"


def expand_coded_flags(ds: Dataset) -> Dataset:
    """Replace each coded-flag attribute by one absent/present attribute per flag."""
    if all(a.kind != CODED_FLAG for a in ds.schema.attributes):
        return ds
    attrs = []
    for a in ds.schema.attributes:
        if a.kind == CODED_FLAG:
            attrs.extend(
                AttributeDescriptor(flag_attribute_name(a.name, f), CATEGORICAL, FLAG_DOMAIN)
                for f in a.flag_names
            )
        else:
            attrs.append(a)
    schema = DatasetSchema(tuple(attrs), ds.schema.class_attribute)

    kinds = [(a.kind == CODED_FLAG, a.flag_names) for a in ds.schema.attributes]
    records = []
    for rec in ds.records:
        out = []
        for (is_flag, flags), value in zip(kinds, rec):
            if not is_flag:
                out.append(value)
            elif value is MISSING:
                out.extend([MISSING] * len(flags))
            else:
                out.extend(FLAG_DOMAIN[f in value] for f in flags)
        records.append(tuple(out))
    return Dataset(schema, tuple(records))


def build_target_set(tables: Sequence[Relation], attrs: Sequence[str]) -> Dataset:
    """Left-fold natural join over ``tables``, project onto ``attrs``, expand flags."""
    if not tables:
        raise EmptyInputError("no tables given")
    joined = tables[0]
    for rel in tables[1:]:
        joined = natural_join(joined, rel)
    return expand_coded_flags(project(joined, attrs).to_dataset())


def _mode(counter: Counter):
    best = max(counter.values())
    return min(v for v, c in counter.items() if c == best)


def impute_missing(ds: Dataset, policy: str) -> Dataset:
    """Return a copy of ``ds`` without Missing cells.

    Policies: ``unknown-category`` adds a ``?unknown`` category to every
    attribute that has a Missing cell; ``per-class-mode`` fills with the
    most frequent value among records of the same class (global mode when
    the stratum has no value; smallest value on ties); ``drop-record``
    removes incomplete records. The short CLI names ``unknown``,
    ``class-mode`` and ``drop`` are accepted too.
    """
    try:
        policy = POLICIES[policy]
    except KeyError:
        raise ParameterError(f"unknown imputation policy {policy!r}") from None
    schema = ds.schema
    for a in schema.attributes:
        if a.kind == CODED_FLAG and policy != "drop-record":
            raise SchemaError(f"{a.name}: expand coded-flag attributes before imputing")

    if policy == "drop-record":
        return Dataset(schema, tuple(r for r in ds.records if MISSING not in r))

    holes = [j for j in range(len(schema)) if any(r[j] is MISSING for r in ds.records)]
    if not holes:
        return ds

    if policy == "unknown-category":
        attrs = list(schema.attributes)
        for j in holes:
            a = attrs[j]
            if UNKNOWN not in a.domain:
                attrs[j] = a.with_domain(a.domain + (UNKNOWN,))
        records = tuple(
            tuple(UNKNOWN if v is MISSING else v for v in r) for r in ds.records
        )
        return Dataset(DatasetSchema(tuple(attrs), schema.class_attribute), records)

    if schema.class_attribute is None:
        raise PolicyPreconditionError("per-class-mode needs a class attribute")
    cj = schema.position(schema.class_attribute)
    if any(r[cj] is MISSING for r in ds.records):
        raise PolicyPreconditionError("per-class-mode needs every class label to be present")

    fills: dict[int, dict] = {}
    for j in holes:
        overall = Counter(r[j] for r in ds.records if r[j] is not MISSING)
        if overall:
            fallback = _mode(overall)
        else:
            # column is entirely missing: first declared category
            fallback = schema.attributes[j].domain[0]
        by_class: dict[str, Counter] = {}
        for r in ds.records:
            if r[j] is not MISSING:
                by_class.setdefault(r[cj], Counter())[r[j]] += 1
        fills[j] = {c: _mode(cnt) for c, cnt in by_class.items()}
        fills[j][None] = fallback

    records = []
    for r in ds.records:
        if MISSING in r:
            r = tuple(
                fills[j].get(r[cj], fills[j][None]) if v is MISSING else v
                for j, v in enumerate(r)
            )
        records.append(r)
    return Dataset(schema, tuple(records))


Item = tuple  # (attribute name, category name)


@dataclass(frozen=True)
class TransactionSet:
    transactions: tuple[frozenset, ...] = ()

    def __len__(self):
        return len(self.transactions)

    def __iter__(self):
        return iter(self.transactions)

    @property
    def items(self) -> tuple[Item, ...]:
        return tuple(sorted(set().union(*self.transactions))) if self.transactions else ()


def to_transactions(ds: Dataset, include_class: bool = False) -> TransactionSet:
    names = ds.schema.names
    keep = [
        j for j, n in enumerate(names) if include_class or n != ds.schema.class_attribute
    ]
    out = []
    for i, r in enumerate(ds.records):
        items = []
        for j in keep:
            if r[j] is MISSING:
                raise UnimputedDataError(f"record {i}: {names[j]} is missing; impute first")
            if isinstance(r[j], frozenset):
                raise SchemaError(f"{names[j]}: expand coded-flag attributes first")
            items.append((names[j], r[j]))
        out.append(frozenset(items))
    return TransactionSet(tuple(out))
