"""Multiway decision trees over categorical attributes (information gain)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence, Union

import numpy as np

from .errors import EmptyInputError, ParameterError, SchemaError, UnimputedDataError
from .schema import MISSING, Dataset, DatasetSchema, validate_record
from .selection import TIE_TOLERANCE, entropy_from_counts


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_records_per_split: int = 2

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError(f"max_depth must be positive, got {self.max_depth}")
        if self.min_records_per_split < 1:
            raise ParameterError(
                f"min_records_per_split must be positive, got {self.min_records_per_split}"
            )


@dataclass(frozen=True)
class Leaf:
    label: str
    counts: Mapping[str, int]

    @property
    def n(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class Internal:
    attribute: str
    branches: Mapping[str, "Node"]
    fallback: str
    counts: Mapping[str, int]

    @property
    def n(self) -> int:
        return sum(self.counts.values())


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class Prediction:
    label: str
    counts: Mapping[str, int]
    fallback: bool = False
    stopped_at: str | None = None


def node_to_json(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label, "counts": dict(node.counts)}
    return {
        "split": node.attribute,
        "branches": {v: node_to_json(c) for v, c in node.branches.items()},
        "fallback": node.fallback,
        "counts": dict(node.counts),
    }


def node_from_json(obj: dict) -> Node:
    if "leaf" in obj:
        return Leaf(obj["leaf"], dict(obj.get("counts", {})))
    try:
        return Internal(
            obj["split"],
            {v: node_from_json(c) for v, c in obj["branches"].items()},
            obj["fallback"],
            dict(obj.get("counts", {})),
        )
    except KeyError as exc:
        raise SchemaError(f"malformed tree node, missing key {exc}") from None


@dataclass(frozen=True)
class DecisionTree:
    root: Node
    schema: DatasetSchema

    def to_json(self) -> dict:
        return {"schema": self.schema.to_json(), "tree": node_to_json(self.root)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, obj: dict) -> "DecisionTree":
        if "schema" not in obj or "tree" not in obj:
            raise SchemaError("model document needs 'schema' and 'tree' keys")
        return cls(node_from_json(obj["tree"]), DatasetSchema.from_json(obj["schema"]))

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, Internal):
                stack.extend(node.branches.values())

    @property
    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(c) for c in node.branches.values())

        return walk(self.root)

    @property
    def n_leaves(self) -> int:
        return sum(isinstance(n, Leaf) for n in self.nodes())


def entropy(class_col: Sequence[Hashable]) -> float:
    if len(class_col) == 0:
        raise EmptyInputError("entropy of an empty column")
    _, counts = np.unique(np.asarray([str(v) for v in class_col]), return_counts=True)
    return entropy_from_counts(counts)


def information_gain(ds: Dataset, attribute: str) -> float:
    if ds.class_attribute is None:
        raise SchemaError("information gain needs a class attribute")
    if attribute == ds.class_attribute:
        raise SchemaError(f"{attribute!r} is the class attribute")
    x = ds.codes(attribute)
    y = ds.codes(ds.class_attribute)
    if len(y) == 0:
        raise EmptyInputError("dataset is empty")
    if (x < 0).any() or (y < 0).any():
        raise UnimputedDataError("dataset has Missing cells; impute first")
    gain = entropy_from_counts(np.bincount(y))
    n = len(y)
    for v in np.unique(x):
        stratum = y[x == v]
        gain -= len(stratum) / n * entropy_from_counts(np.bincount(stratum))
    return gain


def _xlogx(t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=np.float64)
    pos = t > 0
    out[pos] = t[pos] * np.log2(t[pos])
    return out


class _Grower:
    def __init__(self, X, y, names, domains, class_domain, params):
        self.X = X
        self.y = y
        self.names = list(names)
        self.domains = domains
        self.class_domain = tuple(class_domain)
        self.params = params
        self.C = len(class_domain)
        self.vmax = max((len(d) for d in domains), default=1)
        self.name_rank = np.argsort(np.argsort(np.array(self.names, dtype=object)))

    def counts(self, yc):
        return {c: int(k) for c, k in zip(self.class_domain, yc)}

    def majority(self, yc):
        best = yc.max()
        return min(c for c, k in zip(self.class_domain, yc) if k == best)

    def gains(self, idx, cols):
        n = len(idx)
        sub = self.X[np.ix_(idx, cols)]
        joint = (np.arange(len(cols)) * self.vmax)[None, :] + sub
        joint = joint * self.C + self.y[idx][:, None]
        cnt = np.bincount(joint.ravel(), minlength=len(cols) * self.vmax * self.C)
        cnt = cnt.reshape(len(cols), self.vmax, self.C).astype(np.float64)
        per_value = cnt.sum(axis=2)
        cond = (_xlogx(per_value).sum(axis=1) - _xlogx(cnt).sum(axis=(1, 2))) / n
        yc = np.bincount(self.y[idx], minlength=self.C).astype(np.float64)
        h = np.log2(n) - _xlogx(yc).sum() / n
        return h - cond

    def grow(self, idx, available, depth, parent_majority):
        if len(idx) == 0:
            return Leaf(parent_majority, self.counts(np.zeros(self.C, dtype=np.int64)))
        yc = np.bincount(self.y[idx], minlength=self.C)
        maj = self.majority(yc)
        p = self.params
        if (
            np.count_nonzero(yc) == 1
            or not available
            or (p.max_depth is not None and depth >= p.max_depth)
            or len(idx) < p.min_records_per_split
        ):
            return Leaf(maj, self.counts(yc))
        cols = sorted(available)
        g = self.gains(idx, cols)
        tied = [c for c, v in zip(cols, g) if v >= g.max() - TIE_TOLERANCE]
        j = min(tied, key=lambda c: self.name_rank[c])
        rest = available - {j}
        xj = self.X[idx, j]
        branches = {
            value: self.grow(idx[xj == v], rest, depth + 1, maj)
            for v, value in enumerate(self.domains[j])
        }
        return Internal(self.names[j], branches, maj, self.counts(yc))


def grow_codes(X, y, names, domains, class_domain, params: TreeParams) -> Node:
    """Induce a tree from integer-coded columns; returns the root node."""
    grower = _Grower(X, y, names, domains, class_domain, params)
    return grower.grow(np.arange(len(y)), frozenset(range(len(names))), 0, None)


def induce_tree(ds: Dataset, params: TreeParams | None = None) -> DecisionTree:
    """Grow a tree on every non-class attribute of ``ds``.

    Splits maximise information gain (ties, within 1e-12, go to the
    smallest attribute name) and produce one child per declared category.
    """
    params = params or TreeParams()
    if ds.class_attribute is None:
        raise SchemaError("tree induction needs a class attribute")
    if len(ds) == 0:
        raise EmptyInputError("cannot induce a tree from an empty dataset")
    names = list(ds.schema.feature_names)
    X = ds.code_matrix(names)
    y = ds.codes(ds.class_attribute)
    if (X < 0).any() or (y < 0).any():
        raise UnimputedDataError("dataset has Missing cells; impute first")
    domains = [ds.schema.attribute(n).domain for n in names]
    root = grow_codes(X, y, names, domains, ds.schema.class_descriptor.domain, params)
    return DecisionTree(root, ds.schema)


def _as_mapping(tree: DecisionTree, record) -> dict:
    schema = tree.schema
    if isinstance(record, Mapping):
        unknown = set(record) - set(schema.names)
        if unknown:
            raise SchemaError(f"record has fields not in the model schema: {sorted(unknown)}")
        absent = [n for n in schema.feature_names if n not in record]
        if absent:
            raise SchemaError(f"record lacks fields: {absent}")
        values = tuple(record.get(n, MISSING) for n in schema.names)
    else:
        values = tuple(record)
    bad = validate_record(values, schema)
    if bad:
        raise SchemaError("; ".join(f"{v.attribute}: {v.reason}" for v in bad))
    return dict(zip(schema.names, values))


def predict(tree: DecisionTree, record) -> Prediction:
    """Route ``record`` (a tuple aligned to the model schema, or a mapping)
    down the tree. A Missing split value stops at that node and returns its
    fallback class together with the node's class counts."""
    values = _as_mapping(tree, record)
    node = tree.root
    while isinstance(node, Internal):
        child = node.branches.get(values[node.attribute])
        if child is None:
            return Prediction(node.fallback, node.counts, fallback=True, stopped_at=node.attribute)
        node = child
    return Prediction(node.label, node.counts)
