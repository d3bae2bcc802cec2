"""Mutual information on categorical columns and greedy mRMR selection.

Scores are in bits with plug-in (count / n) probability estimates. The
selection criterion is the difference form: relevance to the class minus
mean mutual information with the features already chosen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import ParameterError, SchemaError, ShapeError, UnimputedDataError
from .schema import MISSING, Dataset

TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ContingencyTable:
    row_labels: tuple
    col_labels: tuple
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _factorize(col: Sequence[Hashable]):
    labels: dict = {}
    codes = np.empty(len(col), dtype=np.int64)
    for i, v in enumerate(col):
        if v is MISSING:
            raise UnimputedDataError(f"Missing value at position {i}; impute first")
        codes[i] = labels.setdefault(v, len(labels))
    return codes, tuple(labels)


def contingency_table(x: Sequence[Hashable], y: Sequence[Hashable]) -> ContingencyTable:
    if len(x) != len(y):
        raise ShapeError(f"column lengths differ: {len(x)} vs {len(y)}")
    if len(x) == 0:
        raise ShapeError("columns are empty")
    xc, xl = _factorize(x)
    yc, yl = _factorize(y)
    counts = np.bincount(xc * len(yl) + yc, minlength=len(xl) * len(yl))
    return ContingencyTable(xl, yl, counts.reshape(len(xl), len(yl)))


def mi_from_counts(counts) -> float:
    """Mutual information in bits of a joint count matrix."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n <= 0:
        raise ShapeError("contingency table has no observations")
    rows = counts.sum(axis=1, keepdims=True)
    cols = counts.sum(axis=0, keepdims=True)
    nz = counts > 0
    expected = (rows * cols)[nz]
    c = counts[nz]
    mi = float(np.sum(c / n * np.log2(c * n / expected)))
    return mi if mi > 0.0 else 0.0


def entropy_from_counts(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    p = counts / counts.sum()
    h = float(-np.sum(p * np.log2(p)))
    return h if h > 0.0 else 0.0


def mutual_information(x: Sequence[Hashable], y: Sequence[Hashable]) -> float:
    """I(X;Y) in bits for two equally long columns of category values."""
    return mi_from_counts(contingency_table(x, y).counts)


def _mi_codes(a: np.ndarray, ca: int, b: np.ndarray, cb: int) -> float:
    counts = np.bincount(a * cb + b, minlength=ca * cb).reshape(ca, cb)
    return mi_from_counts(counts)


def relevance(candidate: Sequence[Hashable], class_col: Sequence[Hashable]) -> float:
    return mutual_information(candidate, class_col)


def redundancy(candidate: str, selected: Sequence[str], ds: Dataset) -> float:
    """Mean MI between ``candidate`` and each already-selected attribute."""
    if not selected:
        return 0.0
    col = ds.column(candidate)
    return float(np.mean([mutual_information(col, ds.column(s)) for s in selected]))


@dataclass(frozen=True)
class SelectionStep:
    rank: int
    attribute: str
    relevance: float
    redundancy: float
    score: float

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "attribute": self.attribute,
            "relevance": self.relevance,
            "redundancy": self.redundancy,
            "score": self.score,
        }


@dataclass(frozen=True)
class SelectionTrace:
    steps: tuple[SelectionStep, ...]

    def __len__(self):
        return len(self.steps)

    @property
    def attributes(self) -> list[str]:
        return [s.attribute for s in self.steps]

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def _argmax_by_name(scores: dict[str, float]) -> str:
    best = max(scores.values())
    return min(n for n, s in scores.items() if s >= best - TIE_TOLERANCE)


def mrmr_codes(
    X: np.ndarray, cards: Sequence[int], y: np.ndarray, n_classes: int,
    names: Sequence[str], k: int,
) -> SelectionTrace:
    """mRMR over integer-coded columns (no Missing, codes in ``range(card)``)."""
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    m = X.shape[1]
    rel = {names[j]: _mi_codes(X[:, j], cards[j], y, n_classes) for j in range(m)}
    col = {names[j]: j for j in range(m)}
    redundancy_sum = dict.fromkeys(names, 0.0)
    remaining = set(names)
    steps = []
    while remaining and len(steps) < k:
        if steps:
            last = col[steps[-1].attribute]
            for n in remaining:
                j = col[n]
                redundancy_sum[n] += _mi_codes(X[:, j], cards[j], X[:, last], cards[last])
            denom = len(steps)
            red = {n: redundancy_sum[n] / denom for n in remaining}
        else:
            red = dict.fromkeys(remaining, 0.0)
        scores = {n: rel[n] - red[n] for n in remaining}
        pick = _argmax_by_name(scores)
        steps.append(SelectionStep(len(steps) + 1, pick, rel[pick], red[pick], scores[pick]))
        remaining.discard(pick)
    return SelectionTrace(tuple(steps))


def _coded_features(ds: Dataset, names: Sequence[str]):
    if ds.class_attribute is None:
        raise SchemaError("feature selection needs a class attribute")
    X = ds.code_matrix(names)
    y = ds.codes(ds.class_attribute)
    if (X < 0).any() or (y < 0).any():
        raise UnimputedDataError("dataset has Missing cells; impute first")
    cards = [ds.schema.attribute(n).cardinality for n in names]
    return X, cards, y, ds.schema.class_descriptor.cardinality


def mrmr_select(ds: Dataset, k: int) -> SelectionTrace:
    """Greedy forward mRMR selection of up to ``k`` non-class attributes.

    Ties (within 1e-12) go to the lexicographically smallest name.
    """
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    names = list(ds.schema.feature_names)
    if ds.class_attribute is not None and not names:
        raise SchemaError("dataset has no non-class attribute to select from")
    X, cards, y, n_classes = _coded_features(ds, names)
    return mrmr_codes(X, cards, y, n_classes, names, k)
