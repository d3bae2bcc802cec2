"""Stratified cross-validation and the error-versus-feature-count curve.

Feature selection always runs on the training part of each fold only.
Error is 0/1 loss (1 - accuracy).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, SchemaError, UnimputedDataError
from .schema import Dataset
from .selection import mrmr_codes
from .tree import Internal, Node, TreeParams, grow_codes


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted, both in declared domain order."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    @classmethod
    def empty(cls, labels: Sequence[str]) -> "ConfusionMatrix":
        return cls(tuple(labels), np.zeros((len(labels), len(labels)), dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix) / self.total) if self.total else 0.0

    @property
    def error(self) -> float:
        return 1.0 - self.accuracy

    def recall(self) -> dict[str, float | None]:
        rows = self.matrix.sum(axis=1)
        return {
            lab: (float(self.matrix[i, i] / rows[i]) if rows[i] else None)
            for i, lab in enumerate(self.labels)
        }

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.tolist(),
            "total": self.total,
            "accuracy": self.accuracy,
            "recall": self.recall(),
        }

    def format_table(self) -> str:
        width = max(8, *(len(l) + 2 for l in self.labels))
        head = "true\\pred".ljust(width) + "".join(l.rjust(width) for l in self.labels)
        lines = [head]
        for lab, row in zip(self.labels, self.matrix):
            lines.append(lab.ljust(width) + "".join(str(int(v)).rjust(width) for v in row))
        lines.append(f"accuracy {self.accuracy:.4f}  error {self.error:.4f}  n={self.total}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ErrorPoint:
    k: int
    mean_error: float
    std_error: float
    fold_errors: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "mean_error": self.mean_error,
            "std_error": self.std_error,
            "fold_errors": list(self.fold_errors),
        }


@dataclass(frozen=True)
class ErrorCurve:
    points: tuple[ErrorPoint, ...]

    @property
    def ks(self) -> list[int]:
        return [p.k for p in self.points]

    @property
    def mean_errors(self) -> list[float]:
        return [p.mean_error for p in self.points]

    @property
    def argmin_k(self) -> int:
        """Smallest k attaining the minimum mean error."""
        best = min(self.mean_errors)
        return next(p.k for p in self.points if p.mean_error == best)

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.points]

    def format_table(self) -> str:
        lines = ["k\tmean_error\tstd_error"]
        lines += [f"{p.k}\t{p.mean_error:.6f}\t{p.std_error:.6f}" for p in self.points]
        return "\n".join(lines) + "\n"


def _class_codes(ds: Dataset) -> np.ndarray:
    if ds.class_attribute is None:
        raise SchemaError("evaluation needs a class attribute")
    y = ds.codes(ds.class_attribute)
    if (y < 0).any():
        raise UnimputedDataError("class labels are missing; impute or drop first")
    return y


def stratified_kfold(ds: Dataset, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified partition into ``folds`` (train, test) index pairs.

    Records of each class are shuffled and dealt round robin, continuing
    the deal across classes so fold sizes also stay within one of each other.
    """
    if folds < 2:
        raise ParameterError(f"folds must be at least 2, got {folds}")
    y = _class_codes(ds)
    present, counts = np.unique(y, return_counts=True)
    if len(present) < 2:
        raise InsufficientDataError("need at least two classes to stratify")
    if counts.min() < folds:
        small = ds.schema.class_descriptor.domain[present[counts.argmin()]]
        raise InsufficientDataError(
            f"class {small!r} has {counts.min()} records, fewer than {folds} folds"
        )
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in present:
        members = rng.permutation(np.flatnonzero(y == c))
        assignment[members] = (offset + np.arange(len(members))) % folds
        offset += len(members)
    idx = np.arange(len(y))
    return [(idx[assignment != f], idx[assignment == f]) for f in range(folds)]


def _predict_rows(root: Node, values: np.ndarray, col: dict[str, int]) -> list[str]:
    out = []
    for row in values:
        node = root
        while isinstance(node, Internal):
            child = node.branches.get(row[col[node.attribute]])
            if child is None:
                break
            node = child
        out.append(node.fallback if isinstance(node, Internal) else node.label)
    return out


class _Prepared:
    """Integer-coded view of a complete dataset, shared by every fold."""

    def __init__(self, ds: Dataset, features: Sequence[str] | None = None):
        self.y = _class_codes(ds)
        self.names = list(features if features is not None else ds.schema.feature_names)
        self.X = ds.code_matrix(self.names)
        if (self.X < 0).any():
            raise UnimputedDataError("dataset has Missing cells; impute first")
        attrs = [ds.schema.attribute(n) for n in self.names]
        self.domains = [a.domain for a in attrs]
        self.cards = [a.cardinality for a in attrs]
        self.class_domain = ds.schema.class_descriptor.domain
        self.values = np.empty(self.X.shape, dtype=object)
        for j, d in enumerate(self.domains):
            self.values[:, j] = np.asarray(d, dtype=object)[self.X[:, j]]

    def fit_predict(self, train, test, cols: Sequence[int], params: TreeParams) -> np.ndarray:
        cols = list(cols)
        names = [self.names[j] for j in cols]
        root = grow_codes(
            self.X[np.ix_(train, cols)], self.y[train], names,
            [self.domains[j] for j in cols], self.class_domain, params,
        )
        pred = _predict_rows(root, self.values[np.ix_(test, cols)], {n: i for i, n in enumerate(names)})
        pos = {c: i for i, c in enumerate(self.class_domain)}
        return np.array([pos[p] for p in pred], dtype=np.int64)

    def select(self, train, k: int) -> list[int]:
        trace = mrmr_codes(
            self.X[train], self.cards, self.y[train], len(self.class_domain), self.names, k
        )
        col = {n: j for j, n in enumerate(self.names)}
        return [col[n] for n in trace.attributes]


def evaluate_classifier(
    ds: Dataset, params: TreeParams | None = None, folds: int = 5, seed: int = 0,
    features: Sequence[str] | None = None, k_features: int | None = None, splits=None,
) -> ConfusionMatrix:
    """Pooled confusion matrix of trees induced on each training fold.

    ``features`` restricts the attributes up front; ``k_features`` runs
    mRMR inside every training fold and keeps the top picks. ``splits``
    replaces the seeded partition with given (train, test) index pairs.
    """
    params = params or TreeParams()
    if k_features is not None and k_features < 1:
        raise ParameterError(f"k_features must be positive, got {k_features}")
    if splits is None:
        splits = stratified_kfold(ds, folds, seed)
    prep = _Prepared(ds, features)
    cm = ConfusionMatrix.empty(prep.class_domain)
    for train, test in splits:
        if k_features is None:
            cols = range(len(prep.names))
        else:
            cols = prep.select(train, k_features)
        pred = prep.fit_predict(train, test, cols, params)
        np.add.at(cm.matrix, (prep.y[test], pred), 1)
    return cm


def error_vs_feature_count(
    ds: Dataset, k_values: Sequence[int], folds: int = 5, seed: int = 0,
    params: TreeParams | None = None, splits=None,
) -> ErrorCurve:
    """Mean and standard deviation (ddof=1) of fold test error for each k.

    Greedy mRMR picks are nested, so one selection of ``max(k_values)``
    attributes per training fold serves every k.
    """
    params = params or TreeParams()
    ks = sorted(set(int(k) for k in k_values))
    if not ks:
        raise ParameterError("k_values is empty")
    if ks[0] < 1:
        raise ParameterError(f"feature counts must be positive, got {ks[0]}")
    n_features = len(ds.schema.feature_names)
    if ks[-1] > n_features:
        raise ParameterError(f"k={ks[-1]} exceeds the {n_features} available attributes")
    if splits is None:
        splits = stratified_kfold(ds, folds, seed)
    prep = _Prepared(ds)
    errors = np.zeros((len(ks), len(splits)))
    for f, (train, test) in enumerate(splits):
        order = prep.select(train, ks[-1])
        for i, k in enumerate(ks):
            pred = prep.fit_predict(train, test, order[:k], params)
            errors[i, f] = float(np.mean(pred != prep.y[test]))
    return ErrorCurve(tuple(
        ErrorPoint(k, float(errors[i].mean()), float(errors[i].std(ddof=1)), tuple(errors[i].tolist()))
        for i, k in enumerate(ks)
    ))
