"""Data model for categorical records and the decimal-flag codec.

A cell is one of three things:

* a category name (``str``) drawn from the attribute's closed domain,
* a ``frozenset`` of flag labels for coded-flag attributes,
* the :data:`MISSING` marker.

Coded-flag fields store presence flags as decimal digits, most significant
flag first: with flags ``(serious_illness, psychological_trauma, surgery,
accidents, other)`` the integer ``10100`` means serious illness plus surgery.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CodeOverflowError,
    MalformedCodeError,
    SchemaError,
    UnknownAttributeError,
    UnknownFlagError,
)

CATEGORICAL = "categorical"
CODED_FLAG = "coded-flag"
CLASS_LABEL = "class-label"
KINDS = (CATEGORICAL, CODED_FLAG, CLASS_LABEL)

MAX_FLAGS = 9


class _Missing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __reduce__(self):
        return "MISSING"


MISSING = _Missing()
"""Marker for an absent value. Distinct from an empty flag set."""


@dataclass(frozen=True)
class AttributeDescriptor:
    name: str
    kind: str = CATEGORICAL
    domain: tuple[str, ...] = ()
    flag_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "flag_names", tuple(self.flag_names))
        if not isinstance(self.name, str) or not self.name:
            raise SchemaError(f"attribute name must be a non-empty string, got {self.name!r}")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == CODED_FLAG:
            if self.domain:
                raise SchemaError(f"{self.name}: coded-flag attributes take flag_names, not a domain")
            if not 1 <= len(self.flag_names) <= MAX_FLAGS:
                raise SchemaError(f"{self.name}: coded-flag needs 1..{MAX_FLAGS} flag names")
            _check_labels(self.name, self.flag_names, "flag name")
        else:
            if self.flag_names:
                raise SchemaError(f"{self.name}: only coded-flag attributes take flag_names")
            if not self.domain:
                raise SchemaError(f"{self.name}: empty domain")
            _check_labels(self.name, self.domain, "category")

    @property
    def is_categorical(self) -> bool:
        return self.kind != CODED_FLAG

    @property
    def cardinality(self) -> int:
        return len(self.domain)

    def index(self, value: str) -> int:
        try:
            return self._positions[value]
        except KeyError:
            raise SchemaError(f"{self.name}: {value!r} is not in the domain") from None

    @property
    def _positions(self) -> dict[str, int]:
        # computed lazily and memoised on the instance dict (frozen dataclass)
        cache = self.__dict__.get("_pos")
        if cache is None:
            cache = {v: i for i, v in enumerate(self.domain)}
            self.__dict__["_pos"] = cache
        return cache

    def check(self, value) -> str | None:
        """Return a reason string if ``value`` is not admissible, else None."""
        if value is MISSING:
            return None
        if self.kind == CODED_FLAG:
            if not isinstance(value, frozenset):
                return f"expected a flag set, got {value!r}"
            unknown = value - set(self.flag_names)
            if unknown:
                return f"unknown flags {sorted(unknown)}"
            return None
        if not isinstance(value, str) or value not in self._positions:
            return f"{value!r} is not in the domain"
        return None

    def with_domain(self, domain: Sequence[str]) -> "AttributeDescriptor":
        return AttributeDescriptor(self.name, self.kind, tuple(domain))

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind}
        if self.kind == CODED_FLAG:
            out["flag_names"] = list(self.flag_names)
        else:
            out["domain"] = list(self.domain)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AttributeDescriptor":
        try:
            name = obj["name"]
        except (KeyError, TypeError):
            raise SchemaError(f"attribute entry without a name: {obj!r}") from None
        return cls(
            name,
            obj.get("kind", CATEGORICAL),
            tuple(obj.get("domain", ())),
            tuple(obj.get("flag_names", ())),
        )


def _check_labels(owner, labels, what):
    seen = set()
    for label in labels:
        if not isinstance(label, str) or not label:
            raise SchemaError(f"{owner}: {what} must be a non-empty string, got {label!r}")
        if label in seen:
            raise SchemaError(f"{owner}: duplicate {what} {label!r}")
        seen.add(label)


@dataclass(frozen=True)
class DatasetSchema:
    attributes: tuple[AttributeDescriptor, ...]
    class_attribute: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        positions = {}
        for i, attr in enumerate(self.attributes):
            if attr.name in positions:
                raise SchemaError(f"duplicate attribute name {attr.name!r}")
            positions[attr.name] = i
        object.__setattr__(self, "_positions", positions)
        if self.class_attribute is not None:
            if self.class_attribute not in positions:
                raise SchemaError(f"class attribute {self.class_attribute!r} is not in the schema")
            if self.attribute(self.class_attribute).kind != CLASS_LABEL:
                raise SchemaError(f"class attribute {self.class_attribute!r} must have kind {CLASS_LABEL}")

    def __len__(self):
        return len(self.attributes)

    def __contains__(self, name):
        return name in self._positions

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes if a.name != self.class_attribute)

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise UnknownAttributeError(f"unknown attribute {name!r}") from None

    def attribute(self, name: str) -> AttributeDescriptor:
        return self.attributes[self.position(name)]

    @property
    def class_descriptor(self) -> AttributeDescriptor:
        if self.class_attribute is None:
            raise SchemaError("schema has no class attribute")
        return self.attribute(self.class_attribute)

    def to_json(self) -> dict:
        out = {"attributes": [a.to_json() for a in self.attributes]}
        if self.class_attribute is not None:
            out["class_attribute"] = self.class_attribute
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DatasetSchema":
        if not isinstance(obj, dict) or "attributes" not in obj:
            raise SchemaError("schema document needs an 'attributes' array")
        return cls(
            tuple(AttributeDescriptor.from_json(a) for a in obj["attributes"]),
            obj.get("class_attribute"),
        )


def load_schema(path) -> DatasetSchema:
    with open(path, encoding="utf-8") as fh:
        return DatasetSchema.from_json(json.load(fh))


def save_schema(schema: DatasetSchema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_json(), indent=2) + "\n", encoding="utf-8")


# -- coded-flag codec --------------------------------------------------------

def decode_coded_field(raw: int, spec: AttributeDescriptor) -> frozenset[str]:
    """Decode a decimal-flag integer into the set of flags it switches on.

    Digit position ``i`` (0 = least significant) maps to
    ``spec.flag_names[k - 1 - i]``.
    """
    if spec.kind != CODED_FLAG:
        raise SchemaError(f"{spec.name} is not a coded-flag attribute")
    if isinstance(raw, bool) or not isinstance(raw, (int, np.integer)) or raw < 0:
        raise SchemaError(f"{spec.name}: code must be a non-negative integer, got {raw!r}")
    k = len(spec.flag_names)
    digits = str(int(raw))[::-1]
    # reject bad digits before overflow so the position is reported
    for pos, ch in enumerate(digits):
        if ch not in "01":
            raise MalformedCodeError(int(raw), pos, int(ch))
    if int(raw) != 0 and len(digits) > k:
        raise CodeOverflowError(f"{spec.name}: code {raw} has more than {k} digits")
    return frozenset(spec.flag_names[k - 1 - pos] for pos, ch in enumerate(digits) if ch == "1")


def encode_coded_field(flags: Iterable[str], spec: AttributeDescriptor) -> int:
    if spec.kind != CODED_FLAG:
        raise SchemaError(f"{spec.name} is not a coded-flag attribute")
    k = len(spec.flag_names)
    raw = 0
    for flag in set(flags):
        try:
            i = spec.flag_names.index(flag)
        except ValueError:
            raise UnknownFlagError(f"{spec.name}: unknown flag {flag!r}") from None
        raw += 10 ** (k - 1 - i)
    return raw


# -- records and datasets ----------------------------------------------------

@dataclass(frozen=True)
class Violation:
    attribute: str
    reason: str


def validate_record(record: Sequence, schema: DatasetSchema) -> list[Violation]:
    """List every way ``record`` fails to fit ``schema``; empty means valid."""
    if len(record) != len(schema):
        return [Violation("*", f"expected {len(schema)} cells, got {len(record)}")]
    out = []
    for attr, value in zip(schema.attributes, record):
        reason = attr.check(value)
        if reason is not None:
            out.append(Violation(attr.name, reason))
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Records over a schema. Records are tuples aligned to the attributes."""

    schema: DatasetSchema
    records: tuple[tuple, ...] = ()
    _codes: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(tuple(r) for r in self.records)
        object.__setattr__(self, "records", records)
        for i, rec in enumerate(records):
            bad = validate_record(rec, self.schema)
            if bad:
                v = bad[0]
                raise SchemaError(f"record {i}: {v.attribute}: {v.reason}")

    def __len__(self):
        return len(self.records)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and self.records == other.records

    __hash__ = None

    @property
    def class_attribute(self) -> str | None:
        return self.schema.class_attribute

    def column(self, name: str) -> tuple:
        j = self.schema.position(name)
        return tuple(r[j] for r in self.records)

    def codes(self, name: str) -> np.ndarray:
        """Domain indices of a categorical column; -1 marks Missing."""
        cached = self._codes.get(name)
        if cached is not None:
            return cached
        attr = self.schema.attribute(name)
        if not attr.is_categorical:
            raise SchemaError(f"{name} is a coded-flag attribute; expand it first")
        j = self.schema.position(name)
        pos = attr._positions
        arr = np.fromiter(
            (-1 if r[j] is MISSING else pos[r[j]] for r in self.records),
            dtype=np.int64,
            count=len(self.records),
        )
        arr.setflags(write=False)
        self._codes[name] = arr
        return arr

    def code_matrix(self, names: Sequence[str]) -> np.ndarray:
        if not names:
            return np.zeros((len(self), 0), dtype=np.int64)
        return np.column_stack([self.codes(n) for n in names])

    def has_missing(self) -> bool:
        return any(v is MISSING for r in self.records for v in r)

    def take(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(self.schema, tuple(self.records[i] for i in indices))

    def select(self, names: Sequence[str]) -> "Dataset":
        """Keep only ``names`` (plus nothing else), in the given order."""
        pos = [self.schema.position(n) for n in names]
        attrs = tuple(self.schema.attributes[p] for p in pos)
        cls_attr = self.class_attribute if self.class_attribute in names else None
        return Dataset(
            DatasetSchema(attrs, cls_attr),
            tuple(tuple(r[p] for p in pos) for r in self.records),
        )

    @classmethod
    def from_codes(cls, schema: DatasetSchema, matrix) -> "Dataset":
        """Build a fully categorical dataset from an (n, m) array of domain indices."""
        matrix = np.asarray(matrix)
        domains = [a.domain for a in schema.attributes]
        records = tuple(
            tuple(MISSING if c < 0 else domains[j][c] for j, c in enumerate(row))
            for row in matrix.tolist()
        )
        return cls(schema, records)


# -- CSV ---------------------------------------------------------------------

def _parse_cell(attr: AttributeDescriptor, text: str):
    if text == "":
        return MISSING
    if attr.kind == CODED_FLAG:
        try:
            raw = int(text)
        except ValueError:
            raise SchemaError(f"{attr.name}: coded-flag cell {text!r} is not an integer") from None
        if raw < 0 or not text.strip().isdigit():
            raise SchemaError(f"{attr.name}: coded-flag cell {text!r} is not a non-negative integer")
        return decode_coded_field(raw, attr)
    return text


def _format_cell(attr: AttributeDescriptor, value) -> str:
    if value is MISSING:
        return ""
    if attr.kind == CODED_FLAG:
        return str(encode_coded_field(value, attr))
    return value


def parse_rows(rows: Iterable[Sequence[str]], schema: DatasetSchema, source: str = "<csv>") -> Dataset:
    """Build a dataset from CSV rows; the first row must be the header."""
    rows = iter(rows)
    try:
        header = next(rows)
    except StopIteration:
        raise SchemaError(f"{source}: empty file, expected a header row") from None
    if tuple(header) != schema.names:
        raise SchemaError(
            f"{source}: header {list(header)} does not match schema order {list(schema.names)}"
        )
    records = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(schema):
            raise SchemaError(f"{source}:{lineno}: expected {len(schema)} fields, got {len(row)}")
        try:
            rec = tuple(_parse_cell(a, t) for a, t in zip(schema.attributes, row))
        except (SchemaError, MalformedCodeError, CodeOverflowError) as exc:
            raise SchemaError(f"{source}:{lineno}: {exc}") from exc
        bad = validate_record(rec, schema)
        if bad:
            raise SchemaError(f"{source}:{lineno}: {bad[0].attribute}: {bad[0].reason}")
        records.append(rec)
    return Dataset(schema, tuple(records))


def read_csv(path, schema: DatasetSchema) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_rows(csv.reader(fh), schema, source=str(path))


def format_rows(ds: Dataset) -> list[list[str]]:
    attrs = ds.schema.attributes
    rows = [list(ds.schema.names)]
    rows.extend([_format_cell(a, v) for a, v in zip(attrs, rec)] for rec in ds.records)
    return rows


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(format_rows(ds))
