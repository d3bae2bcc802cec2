import random
from fractions import Fraction

import pytest

from generators import random_transactions
from oracles import brute_frequent, brute_rules
from logodm.apriori import (
    count_support,
    format_rules,
    frequent_itemsets,
    generate_candidates,
    generate_rules,
)
from logodm.errors import EmptyInputError, ParameterError
from logodm.relational import TransactionSet

A, B, C = ("x", "a"), ("x", "b"), ("x", "c")


def basket(*words):
    items = {"A": A, "B": B, "C": C}
    return TransactionSet(tuple(frozenset(items[ch] for ch in w) for w in words))


ABC = basket("ABC", "AB", "AC", "BC")


def table_as_fractions(table):
    return {s.items: Fraction(s.count, s.n_transactions) for s in table.all()}


def rules_as_fractions(rules, table):
    out = {}
    for r in rules:
        s = table.get(r.antecedent + r.consequent)
        base = table.get(r.antecedent)
        out[(r.antecedent, r.consequent)] = (
            Fraction(s.count, s.n_transactions), Fraction(s.count, base.count)
        )
    return out


class TestSupport:
    def test_examples(self):
        assert count_support([], ABC) == 1.0
        assert count_support([("y", "z")], ABC) == 0.0
        assert count_support([A], ABC) == 0.75

    def test_empty_set(self):
        with pytest.raises(EmptyInputError):
            count_support([A], TransactionSet(()))


class TestCandidates:
    def test_pairs(self):
        assert generate_candidates([(A,), (B,), (C,)]) == [(A, B), (A, C), (B, C)]

    def test_prune(self):
        assert generate_candidates([(A, B), (A, C)]) == []

    def test_empty(self):
        assert generate_candidates([]) == []

    def test_mixed_sizes(self):
        with pytest.raises(ParameterError):
            generate_candidates([(A,), (A, B)])


class TestFrequent:
    def test_example(self):
        table = frequent_itemsets(ABC, 0.5)
        assert table_as_fractions(table) == {
            (A,): Fraction(3, 4), (B,): Fraction(3, 4), (C,): Fraction(3, 4),
            (A, B): Fraction(1, 2), (A, C): Fraction(1, 2), (B, C): Fraction(1, 2),
        }

    def test_no_common_item(self):
        assert len(frequent_itemsets(basket("A", "B"), 1.0)) == 0

    def test_single_transaction(self):
        assert len(frequent_itemsets(basket("ABC"), 1.0)) == 7

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
    def test_threshold_range(self, bad):
        with pytest.raises(ParameterError):
            frequent_itemsets(ABC, bad)
        with pytest.raises(ParameterError):
            generate_rules(frequent_itemsets(ABC, 0.5), bad)

    def test_downward_closure(self):
        rng = random.Random(1)
        for _ in range(50):
            table = frequent_itemsets(TransactionSet(tuple(random_transactions(rng))), 0.2)
            for s in table.all():
                if len(s) < 2:
                    continue
                for i in range(len(s.items)):
                    sub = table.get(s.items[:i] + s.items[i + 1:])
                    assert sub is not None and sub.count >= s.count


class TestRules:
    def test_example_confidence(self):
        table = frequent_itemsets(ABC, 0.5)
        rules = {(r.antecedent, r.consequent): r for r in generate_rules(table, 0.6)}
        assert rules[((A,), (B,))].confidence == pytest.approx(2 / 3, abs=1e-12)
        assert rules[((A,), (B,))].support == 0.5
        assert generate_rules(table, 0.7) == []

    def test_confidence_one_always_emitted(self):
        table = frequent_itemsets(basket("AB", "AB", "B"), 0.5)
        pairs = [(r.antecedent, r.consequent) for r in generate_rules(table, 1.0)]
        assert pairs == [((A,), (B,))]

    def test_singletons_only(self):
        assert generate_rules(frequent_itemsets(basket("A", "B"), 0.5), 0.1) == []

    def test_order(self):
        rules = generate_rules(frequent_itemsets(ABC, 0.25), 0.1)
        keys = [(-r.confidence, -r.support, r.antecedent, r.consequent) for r in rules]
        assert keys == sorted(keys)

    def test_format(self):
        text = format_rules(generate_rules(frequent_itemsets(ABC, 0.5), 0.6))
        assert "x=a => x=b" in text
        assert format_rules([]).rstrip().endswith("(no rules)")


class TestOracle:
    def test_random_instances(self):
        rng = random.Random(2)
        for _ in range(200):
            txns = random_transactions(rng)
            sup = rng.choice([0.05, 0.1, 0.2, 0.25, 0.3, 0.5, 0.75, 1.0, rng.uniform(0.01, 1)])
            conf = rng.choice([0.1, 0.5, 2 / 3, 0.8, 1.0, rng.uniform(0.01, 1)])
            table = frequent_itemsets(TransactionSet(tuple(txns)), sup)
            expected = brute_frequent(txns, sup)
            assert table_as_fractions(table) == expected
            assert rules_as_fractions(generate_rules(table, conf), table) == brute_rules(expected, conf)

    def test_monotonicity(self):
        rng = random.Random(3)
        for _ in range(50):
            ts = TransactionSet(tuple(random_transactions(rng)))
            lo, hi = sorted(rng.uniform(0.05, 1) for _ in range(2))
            assert set(table_as_fractions(frequent_itemsets(ts, hi))) <= set(
                table_as_fractions(frequent_itemsets(ts, lo)))
            table = frequent_itemsets(ts, 0.1)
            strict = {(r.antecedent, r.consequent) for r in generate_rules(table, hi)}
            loose = {(r.antecedent, r.consequent) for r in generate_rules(table, lo)}
            assert strict <= loose

    def test_deterministic(self):
        ts = TransactionSet(tuple(random_transactions(random.Random(4))))
        first = generate_rules(frequent_itemsets(ts, 0.1), 0.3)
        assert first == generate_rules(frequent_itemsets(ts, 0.1), 0.3)
