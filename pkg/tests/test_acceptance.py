"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.
"""

import json
import random
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest

from generators import copy_redundant_weak, random_dataset, random_relation_pair, random_transactions
from oracles import brute_frequent, brute_rules, mi_columns, mi_direct, nested_loop_join
from logodm.apriori import frequent_itemsets, generate_rules
from logodm.demo import bundled_config
from logodm.errors import MalformedCodeError
from logodm.evaluation import error_vs_feature_count, evaluate_classifier
from logodm.relational import TransactionSet, natural_join, project
from logodm.schema import CODED_FLAG, MISSING, AttributeDescriptor, decode_coded_field, encode_coded_field
from logodm.selection import mi_from_counts, mrmr_select, mutual_information
from logodm.synthgen import GeneratorSpec, bayes_error, generate_dataset
from logodm.tree import induce_tree, predict

FLAGS = ("serious_illness", "psychological_trauma", "surgery", "accidents", "other")


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def test_criterion_1_mutual_information(report):
    start = time.perf_counter()
    rng = random.Random(1001)
    worst = 0.0
    for _ in range(100):
        r, c, n = rng.randint(1, 5), rng.randint(1, 5), rng.randint(1, 50)
        counts = [[0] * c for _ in range(r)]
        for _ in range(n):
            counts[rng.randrange(r)][rng.randrange(c)] += 1
        worst = max(worst, abs(mi_from_counts(counts) - mi_direct(counts)))
    identical = abs(mutual_information([0, 1] * 4, [0, 1] * 4) - 1.0)
    factorized = abs(mi_from_counts([[1, 2, 3], [2, 4, 6]]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and identical <= 1e-12 and factorized <= 1e-12 and elapsed < 1.0
    report(1, ok, f"max |MI - oracle| {worst:.1e}, closed forms {identical:.1e}/{factorized:.1e}, "
                  f"{elapsed:.2f}s")
    assert ok


def test_criterion_2_mrmr_first_pick(report):
    rng = random.Random(1002)
    hits = 0
    for _ in range(50):
        ds = random_dataset(rng, n_attrs=rng.randint(2, 8), n=rng.randint(20, 200))
        cls = ds.column(ds.class_attribute)
        mis = {n: mi_columns(ds.column(n), cls) for n in ds.schema.feature_names}
        best = max(mis.values())
        oracle = min(n for n, v in mis.items() if v >= best - 1e-12)
        hits += mrmr_select(ds, 1).attributes[0] == oracle
    order = mrmr_select(copy_redundant_weak(), 2).attributes
    ok = hits == 50 and order == ["f1", "f3"]
    report(2, ok, f"step-1 argmax agreement {hits}/50, copy/redundant/weak picks {order}")
    assert ok


CRIT3_SPEC = dict(n_records=500, n_relevant=5, n_redundant=3, redundancy_noise=0.1,
                  n_noise=12, label_noise=0.05)


def test_criterion_3_planted_recovery(report):
    start = time.perf_counter()
    recovered = 0
    for seed in range(30):
        ds, truth = generate_dataset(GeneratorSpec(**CRIT3_SPEC, seed=seed))
        top = set(mrmr_select(ds, 7).attributes)
        recovered += set(truth.relevant) <= top
    in_band = 0
    argmins = []
    for seed in range(20):
        ds, _ = generate_dataset(GeneratorSpec(**CRIT3_SPEC, seed=seed))
        curve = error_vs_feature_count(ds, range(1, 21), folds=5, seed=seed)
        argmins.append(curve.argmin_k)
        in_band += 3 <= curve.argmin_k <= 7
    elapsed = time.perf_counter() - start
    ok = recovered >= 27 and in_band >= 16 and elapsed < 60
    report(3, ok, f"(a) all relevant in top 7: {recovered}/30 (need 27); "
                  f"(b) argmin in [3,7]: {in_band}/20 (need 16), argmins {dict(sorted(Counter(argmins).items()))}; "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_4_apriori_oracle(report):
    start = time.perf_counter()
    rng = random.Random(1004)
    agree = 0
    for _ in range(200):
        txns = random_transactions(rng)
        sup, conf = rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)
        table = frequent_itemsets(TransactionSet(tuple(txns)), sup)
        got = {s.items: Fraction(s.count, s.n_transactions) for s in table.all()}
        expected = brute_frequent(txns, sup)
        rules = {
            (r.antecedent, r.consequent): (Fraction(table.get(r.antecedent + r.consequent).count, len(txns)),
                                           Fraction(table.get(r.antecedent + r.consequent).count,
                                                    table.get(r.antecedent).count))
            for r in generate_rules(table, conf)
        }
        floats_match = all(
            abs(s.support - float(expected[s.items])) <= 1e-12 for s in table.all()
        )
        agree += got == expected and rules == brute_rules(expected, conf) and floats_match
    elapsed = time.perf_counter() - start
    ok = agree == 200 and elapsed < 5.0
    report(4, ok, f"identical tables and rule lists {agree}/200, {elapsed:.2f}s")
    assert ok


def test_criterion_5_tree_consistency(report):
    rng = random.Random(1005)
    perfect = 0
    for _ in range(100):
        ds = random_dataset(rng, n_attrs=rng.randint(1, 8), n=rng.randint(1, 200))
        # keep the first label seen per attribute tuple so no records contradict
        first = {}
        keep = [i for i, r in enumerate(ds.records) if first.setdefault(r[:-1], r[-1]) == r[-1]]
        ds = ds.take(keep)
        tree = induce_tree(ds)
        perfect += all(predict(tree, r).label == r[-1] for r in ds.records)
    spec = GeneratorSpec(n_records=1000, n_relevant=5, n_noise=3, seed=1005)
    planted, _ = generate_dataset(spec)
    cv_error = evaluate_classifier(planted, folds=5, seed=1005).error
    bound = bayes_error(spec) + 0.05
    ok = perfect == 100 and cv_error <= bound
    report(5, ok, f"100% training accuracy {perfect}/100; planted 5-fold error {cv_error:.4f} "
                  f"(bound {bound:.2f})")
    assert ok


def test_criterion_6_relational_oracle(report):
    start = time.perf_counter()
    rng = random.Random(1006)
    agree = 0
    for _ in range(100):
        left, right = random_relation_pair(rng)
        joined = natural_join(left, right)
        names = list(joined.schema.names)
        keep = rng.sample(names, rng.randint(1, len(names)))
        got = Counter(project(joined, keep).rows)
        merged = nested_loop_join(left.schema.names, left.rows, right.schema.names, right.rows,
                                  lambda v: v is MISSING)
        expected = Counter(tuple(m[n] for n in keep) for m in merged)
        agree += got == expected
    elapsed = time.perf_counter() - start
    ok = agree == 100 and elapsed < 1.0
    report(6, ok, f"join+project equal to nested-loop oracle as bags {agree}/100, {elapsed:.2f}s")
    assert ok


def test_criterion_7_codec_totality(report):
    spec = AttributeDescriptor("health_problems", CODED_FLAG, flag_names=FLAGS)
    round_trips = sum(
        decode_coded_field(encode_coded_field(s, spec), spec) == set(s)
        for r in range(6) for s in combinations(FLAGS, r)
    )
    mismatches = 0
    for raw in range(100000):
        malformed = any(ch not in "01" for ch in str(raw))
        try:
            decode_coded_field(raw, spec)
            rejected = False
        except MalformedCodeError:
            rejected = True
        mismatches += rejected != malformed
    ok = round_trips == 32 and mismatches == 0
    report(7, ok, f"round trips {round_trips}/32, scan 0..99999 mismatches {mismatches}")
    assert ok


def test_criterion_8_end_to_end(report, tmp_path):
    config = bundled_config()
    bodies, times = [], []
    for name in ("first", "second"):
        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "logodm.cli", "run", "--config", str(config),
             "--out-dir", str(tmp_path / name)],
            capture_output=True, text=True,
        )
        times.append(time.perf_counter() - start)
        assert proc.returncode == 0, proc.stderr
        doc = json.loads((tmp_path / name / "report.json").read_text())
        doc.pop("timings")
        bodies.append(doc)
    identical = json.dumps(bodies[0]) == json.dumps(bodies[1])
    total = bodies[0]["confusion_matrix"]["total"]
    records = bodies[0]["target"]["records"]
    ok = identical and total == records and max(times) < 10.0
    report(8, ok, f"runs {times[0]:.1f}s/{times[1]:.1f}s, identical outside timings: {identical}, "
                  f"confusion total {total} vs {records} records")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-v", "-s"]))
