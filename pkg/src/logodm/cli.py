"""``logodm`` command line."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .apriori import format_rules, frequent_itemsets, generate_rules
from .errors import LogoDMError, SchemaError
from .evaluation import error_vs_feature_count, evaluate_classifier
from .relational import Relation, build_target_set, impute_missing, to_transactions
from .schema import MISSING, save_schema, write_csv
from .selection import mrmr_select
from .synthgen import GeneratorSpec, generate_dataset
from .tree import DecisionTree, TreeParams, induce_tree, predict


def _int_list(text: str) -> list[int]:
    """Parse ``1,2,5-8`` into ``[1, 2, 5, 6, 7, 8]``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    return out


def _names(text: str) -> list[str]:
    return [n.strip() for n in text.split(",") if n.strip()]


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_target(args):
    """Read one CSV, expand coded flags, impute."""
    rel = Relation.load(Path(args.data).stem, args.data, args.schema)
    ds = build_target_set([rel], list(rel.schema.names))
    if args.impute != "none":
        ds = impute_missing(ds, args.impute)
    return ds


def _tree_params(args) -> TreeParams:
    return TreeParams(args.max_depth, args.min_split)


def cmd_generate(args):
    with open(args.spec, encoding="utf-8") as fh:
        obj = json.load(fh)
    if args.seed is not None:
        obj["seed"] = args.seed
    spec = GeneratorSpec.from_json(obj)
    ds, truth = generate_dataset(spec)
    write_csv(ds, args.out)
    save_schema(ds.schema, args.schema)
    if args.manifest:
        _emit(truth.to_json(), args.manifest)
    print(f"wrote {len(ds)} records to {args.out}")


def cmd_build(args):
    tables = [Relation.load(Path(c).stem, c, s) for c, s in args.relation]
    if args.project:
        attrs = _names(args.project)
    else:
        attrs = []
        for t in tables:
            attrs += [n for n in t.schema.names if n not in attrs]
    ds = build_target_set(tables, attrs)
    if args.impute != "none":
        ds = impute_missing(ds, args.impute)
    write_csv(ds, args.out)
    save_schema(ds.schema, args.out_schema)
    print(f"target set: {len(ds)} records, {len(ds.schema)} attributes -> {args.out}")


def cmd_select(args):
    trace = mrmr_select(_load_target(args), args.k_features)
    _emit(trace.to_json(), args.out)


def cmd_train(args):
    ds = _load_target(args)
    if args.features:
        ds = ds.select(_names(args.features) + [ds.class_attribute])
    elif args.k_features:
        picked = mrmr_select(ds, args.k_features).attributes
        ds = ds.select(picked + [ds.class_attribute])
    tree = induce_tree(ds, _tree_params(args))
    _emit(tree.to_json(), args.out)
    if args.out:
        print(f"tree with {tree.n_leaves} leaves, depth {tree.depth} -> {args.out}")


def cmd_rules(args):
    ds = _load_target(args)
    table = frequent_itemsets(to_transactions(ds, args.include_class), args.min_support)
    rules = generate_rules(table, args.min_confidence)
    if args.out:
        _emit([r.to_json() for r in rules], args.out)
    sys.stdout.write(format_rules(rules))


def cmd_evaluate(args):
    ds = _load_target(args)
    params = _tree_params(args)
    n_features = len(ds.schema.feature_names)
    k_list = args.k_list or list(range(1, n_features + 1))
    cm = evaluate_classifier(ds, params, args.folds, args.seed, k_features=args.k_features)
    curve = error_vs_feature_count(ds, k_list, args.folds, args.seed, params)
    report = {"confusion_matrix": cm.to_json(), "error_curve": curve.to_json()}
    if args.figures:
        from .plotting import plot_confusion_matrix, plot_error_curve

        figs = Path(args.figures)
        figs.mkdir(parents=True, exist_ok=True)
        plot_error_curve(curve, figs / "error_curve.svg")
        plot_confusion_matrix(cm, figs / "confusion_matrix.svg")
    if args.out:
        _emit(report, args.out)
        sys.stdout.write(cm.format_table() + "\n" + curve.format_table())
    else:
        _emit(report, None)


def cmd_run(args):
    from .pipeline import PipelineConfig, run_pipeline

    config = PipelineConfig.load(args.config)
    report = run_pipeline(config, args.out_dir)
    print(
        f"run complete: {report.target['records']} records, "
        f"{len(report.rules)} rules, CV accuracy {report.confusion_matrix['accuracy']:.4f} "
        f"-> {args.out_dir}"
    )


def _read_records(path, tree: DecisionTree):
    schema = tree.schema
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = rows[0]
    for name in header:
        if name not in schema:
            raise SchemaError(f"field {name!r}: not in the model schema")
    for name in schema.feature_names:
        if name not in header:
            raise SchemaError(f"field {name!r}: required by the model but absent from the record")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        yield lineno, {n: (MISSING if v == "" else v) for n, v in zip(header, row)}


def cmd_predict(args):
    with open(args.model, encoding="utf-8") as fh:
        tree = DecisionTree.from_json(json.load(fh))
    results = []
    for lineno, record in _read_records(args.record, tree):
        try:
            p = predict(tree, record)
        except SchemaError as exc:
            raise SchemaError(f"{args.record}:{lineno}: {exc}") from None
        results.append(p)
    if args.json:
        _emit([
            {"label": p.label, "counts": dict(p.counts), "fallback": p.fallback,
             "stopped_at": p.stopped_at}
            for p in results
        ], None)
        return
    for p in results:
        dist = ",".join(f"{c}={n}" for c, n in p.counts.items())
        note = f"\tfallback at {p.stopped_at}" if p.fallback else ""
        print(f"{p.label}\t{dist}{note}")


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file (header = schema order)")
    p.add_argument("--schema", required=True, help="schema JSON")
    p.add_argument("--impute", default="unknown",
                   choices=["unknown", "class-mode", "drop", "none"],
                   help="missing-value policy (default: unknown)")


def _add_tree_args(p):
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-split", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logodm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"logodm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset with planted structure")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--out", required=True, help="data CSV to write")
    p.add_argument("--schema", required=True, help="schema JSON to write")
    p.add_argument("--manifest", help="ground-truth JSON to write")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="join, project and expand relations into a target set")
    p.add_argument("--relation", nargs=2, action="append", required=True,
                   metavar=("CSV", "SCHEMA"), help="one relation; repeat in join order")
    p.add_argument("--project", help="comma-separated attribute list (default: all)")
    p.add_argument("--impute", default="none", choices=["unknown", "class-mode", "drop", "none"])
    p.add_argument("--out", required=True)
    p.add_argument("--out-schema", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("select", help="mRMR feature selection")
    _add_data_args(p)
    p.add_argument("--k-features", type=int, default=10)
    p.add_argument("--out", help="trace JSON (default: stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="induce a decision tree")
    _add_data_args(p)
    _add_tree_args(p)
    p.add_argument("--features", help="comma-separated attributes to train on")
    p.add_argument("--k-features", type=int, help="train on the top-k mRMR attributes")
    p.add_argument("--out", help="model JSON (default: stdout)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rules", help="Apriori association rules")
    _add_data_args(p)
    p.add_argument("--min-support", type=float, default=0.1)
    p.add_argument("--min-confidence", type=float, default=0.7)
    p.add_argument("--include-class", action="store_true")
    p.add_argument("--out", help="rules JSON; the text table always goes to stdout")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("evaluate", help="stratified CV and error-vs-feature-count curve")
    _add_data_args(p)
    _add_tree_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k-list", type=_int_list, help="e.g. 1,2,3 or 1-20 (default: all)")
    p.add_argument("--k-features", type=int,
                   help="in-fold mRMR size for the confusion matrix (default: all features)")
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.add_argument("--figures", help="directory for SVG figures")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("predict", help="predict the final state of records with a saved tree")
    p.add_argument("--model", required=True, help="model JSON written by train or run")
    p.add_argument("--record", required=True, help="CSV with a header and one or more rows")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("demo", help="write the bundled synthetic example to a directory")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_demo)
    return parser


def cmd_demo(args):
    from .demo import write_demo

    path = write_demo(args.out_dir)
    print(f"demo written; run it with: logodm run --config {path} --out-dir results")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except FileNotFoundError as exc:
        print(f"logodm {args.command}: error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except (LogoDMError, OSError, json.JSONDecodeError) as exc:
        print(f"logodm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
