"""Levelwise Apriori over (attribute, value) items, and rule generation.

Supports are fractions of transactions and thresholds are inclusive. Items
are ordered lexicographically by (attribute, value); an itemset is always
a sorted tuple of items.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .errors import EmptyInputError, ParameterError
from .relational import Item, TransactionSet


@dataclass(frozen=True)
class Itemset:
    items: tuple[Item, ...]
    count: int
    n_transactions: int

    @property
    def support(self) -> float:
        return self.count / self.n_transactions

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class AssociationRule:
    antecedent: tuple[Item, ...]
    consequent: tuple[Item, ...]
    support: float
    confidence: float

    def to_json(self) -> dict:
        return {
            "antecedent": [list(i) for i in self.antecedent],
            "consequent": [list(i) for i in self.consequent],
            "support": self.support,
            "confidence": self.confidence,
        }


@dataclass
class FrequentItemsetTable:
    """Frequent itemsets grouped by size."""

    n_transactions: int
    levels: dict[int, list[Itemset]] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {s.items: s for level in self.levels.values() for s in level}

    def add_level(self, size: int, itemsets: list[Itemset]) -> None:
        self.levels[size] = itemsets
        self._index.update((s.items, s) for s in itemsets)

    def __contains__(self, items) -> bool:
        return tuple(sorted(items)) in self._index

    def __len__(self):
        return len(self._index)

    def get(self, items) -> Itemset | None:
        return self._index.get(tuple(sorted(items)))

    def all(self) -> list[Itemset]:
        return [s for size in sorted(self.levels) for s in self.levels[size]]

    def to_json(self) -> list[dict]:
        return [{"items": [list(i) for i in s.items], "support": s.support} for s in self.all()]


def _check_fraction(name: str, value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise ParameterError(f"{name} must be in (0, 1], got {value}")


def count_support(itemset: Iterable[Item], ts: TransactionSet) -> float:
    if len(ts) == 0:
        raise EmptyInputError("support over an empty transaction set")
    wanted = frozenset(itemset)
    return sum(wanted <= t for t in ts) / len(ts)


def generate_candidates(frequent_prev: Sequence[Sequence[Item]]) -> list[tuple[Item, ...]]:
    """Apriori join and prune.

    Two sorted (l-1)-itemsets sharing their first l-2 items join into an
    l-itemset; the candidate survives only if all its (l-1)-subsets are in
    ``frequent_prev``.
    """
    prev = sorted({tuple(sorted(s)) for s in frequent_prev})
    if not prev:
        return []
    sizes = {len(s) for s in prev}
    if len(sizes) != 1:
        raise ParameterError(f"itemsets of mixed sizes {sorted(sizes)}")
    size = sizes.pop()
    known = set(prev)
    out = []
    for i, a in enumerate(prev):
        for b in prev[i + 1:]:
            if a[:-1] != b[:-1]:
                break  # sorted: later b cannot share the prefix either
            cand = a + (b[-1],)
            if all(sub in known for sub in combinations(cand, size)):
                out.append(cand)
    return out


def frequent_itemsets(ts: TransactionSet, min_support: float) -> FrequentItemsetTable:
    """All itemsets with support >= ``min_support``."""
    _check_fraction("min_support", min_support)
    n = len(ts)
    if n == 0:
        raise EmptyInputError("cannot mine an empty transaction set")

    # vertical layout: one bitmap (python int) of transaction ids per item
    bitmaps: dict[tuple, int] = {}
    for tid, t in enumerate(ts):
        bit = 1 << tid
        for item in t:
            key = (item,)
            bitmaps[key] = bitmaps.get(key, 0) | bit

    table = FrequentItemsetTable(n)
    level = []
    for key in sorted(bitmaps):
        count = bitmaps[key].bit_count()
        if count / n >= min_support:
            level.append(Itemset(key, count, n))
    size = 1
    while level:
        table.add_level(size, level)
        current = {s.items: bitmaps[s.items] for s in level}
        size += 1
        level = []
        for cand in generate_candidates(list(current)):
            bm = current[cand[:-1]] & bitmaps[(cand[-1],)]
            count = bm.bit_count()
            if count / n >= min_support:
                bitmaps[cand] = bm
                level.append(Itemset(cand, count, n))
    return table


def generate_rules(table: FrequentItemsetTable, min_confidence: float) -> list[AssociationRule]:
    """Rules X -> Y from every frequent itemset of size >= 2.

    Sorted by descending confidence, then descending support, then
    antecedent and consequent in item order.
    """
    _check_fraction("min_confidence", min_confidence)
    rules = []
    for size in sorted(table.levels):
        if size < 2:
            continue
        for s in table.levels[size]:
            for r in range(1, size):
                for ante in combinations(s.items, r):
                    base = table.get(ante)
                    if base is None:
                        raise ParameterError(f"table is not downward closed: {ante} missing")
                    confidence = s.count / base.count
                    if confidence >= min_confidence:
                        cons = tuple(i for i in s.items if i not in ante)
                        rules.append(AssociationRule(ante, cons, s.support, confidence))
    rules.sort(key=lambda r: (-r.confidence, -r.support, r.antecedent, r.consequent))
    return rules


def _fmt_items(items: Sequence[Item]) -> str:
    return ", ".join(f"{a}={v}" for a, v in items)


def format_rules(rules: Sequence[AssociationRule]) -> str:
    """Plain-text table of rules."""
    header = f"{'support':>8}  {'confidence':>10}  rule"
    lines = [header, "-" * len(header)]
    for r in rules:
        lines.append(
            f"{r.support:8.4f}  {r.confidence:10.4f}  "
            f"{_fmt_items(r.antecedent)} => {_fmt_items(r.consequent)}"
        )
    if not rules:
        lines.append("(no rules)")
    return "\n".join(lines) + "\n"
