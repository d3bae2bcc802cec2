"""End-to-end run: ingest, build, impute, select, model, evaluate, rules, report."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .apriori import format_rules, frequent_itemsets, generate_rules
from .errors import LogoDMError, ParameterError
from .evaluation import error_vs_feature_count, evaluate_classifier
from .relational import POLICIES, Relation, build_target_set, impute_missing, to_transactions
from .schema import save_schema, write_csv
from .selection import mrmr_select
from .tree import TreeParams, induce_tree

CONFIG_KEYS = (
    "relations", "projection", "impute", "k_features", "max_depth", "min_split",
    "min_support", "min_confidence", "include_class", "folds", "seed", "k_list", "figures",
)


class StageError(LogoDMError):
    """An error raised inside a named pipeline stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class RelationSource:
    name: str
    csv: str
    schema: str


@dataclass(frozen=True)
class PipelineConfig:
    relations: tuple[RelationSource, ...]
    seed: int
    projection: tuple[str, ...] | None = None
    impute: str = "unknown"
    k_features: int = 10
    max_depth: int | None = None
    min_split: int = 2
    min_support: float = 0.1
    min_confidence: float = 0.7
    include_class: bool = False
    folds: int = 5
    k_list: tuple[int, ...] | None = None
    figures: bool = True
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        if not self.relations:
            raise ParameterError("config lists no relations")
        if self.impute not in POLICIES:
            raise ParameterError(f"impute must be one of unknown, class-mode, drop; got {self.impute!r}")
        if self.k_features < 1:
            raise ParameterError("k_features must be positive")
        if self.folds < 2:
            raise ParameterError("folds must be at least 2")
        for name in ("min_support", "min_confidence"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ParameterError(f"{name} must be in (0, 1], got {v}")
        TreeParams(self.max_depth, self.min_split)
        if self.k_list is not None and (not self.k_list or min(self.k_list) < 1):
            raise ParameterError("k_list must hold positive integers")

    @classmethod
    def from_json(cls, obj: dict, base_dir=".") -> "PipelineConfig":
        unknown = set(obj) - set(CONFIG_KEYS)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in obj:
            raise ParameterError("config must set 'seed' explicitly")
        try:
            rels = tuple(
                RelationSource(r.get("name") or Path(r["csv"]).stem, r["csv"], r["schema"])
                for r in obj.get("relations", ())
            )
        except (KeyError, TypeError, AttributeError):
            raise ParameterError("each relation needs 'csv' and 'schema' paths") from None
        kw = {k: obj[k] for k in CONFIG_KEYS if k in obj and k != "relations"}
        for key in ("projection", "k_list"):
            if kw.get(key) is not None:
                kw[key] = tuple(kw[key])
        return cls(relations=rels, base_dir=Path(base_dir), **kw)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise StageError("config", f"file not found: {path}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StageError("config", f"{path}: invalid JSON: {exc}") from None
        try:
            return cls.from_json(obj, path.parent)
        except LogoDMError as exc:
            raise StageError("config", f"{path}: {exc}") from None

    def resolve(self, p: str) -> Path:
        return (self.base_dir / p) if not Path(p).is_absolute() else Path(p)

    def to_json(self) -> dict:
        return {
            "relations": [{"name": r.name, "csv": r.csv, "schema": r.schema} for r in self.relations],
            "projection": list(self.projection) if self.projection is not None else None,
            "impute": self.impute,
            "k_features": self.k_features,
            "max_depth": self.max_depth,
            "min_split": self.min_split,
            "min_support": self.min_support,
            "min_confidence": self.min_confidence,
            "include_class": self.include_class,
            "folds": self.folds,
            "seed": self.seed,
            "k_list": list(self.k_list) if self.k_list is not None else None,
            "figures": self.figures,
        }


@dataclass
class RunReport:
    config: dict
    target: dict
    selection: list
    tree: dict
    rules: list
    confusion_matrix: dict
    error_curve: list
    timings: dict = field(default_factory=dict)

    def body(self) -> dict:
        """Everything except timings; identical across reruns."""
        return {
            "tool": {"name": "logodm", "version": __version__},
            "config": self.config,
            "target": self.target,
            "selection": self.selection,
            "tree": self.tree,
            "rules": self.rules,
            "confusion_matrix": self.confusion_matrix,
            "error_curve": self.error_curve,
        }

    def to_json(self) -> dict:
        return {**self.body(), "timings": self.timings}


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except (LogoDMError, OSError) as exc:
            raise StageError(name, str(exc)) from exc
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def run_pipeline(config: PipelineConfig, out_dir) -> RunReport:
    """Run every stage and write the report files into ``out_dir``."""
    out = Path(out_dir)
    timer = _Timer()

    with timer.stage("ingest"):
        for r in config.relations:
            for p in (r.csv, r.schema):
                if not config.resolve(p).is_file():
                    raise StageError("ingest", f"file not found: {config.resolve(p)}")
        tables = [
            Relation.load(r.name, config.resolve(r.csv), config.resolve(r.schema))
            for r in config.relations
        ]

    with timer.stage("build"):
        if config.projection is not None:
            attrs = list(config.projection)
        else:
            attrs = []
            for t in tables:
                attrs += [n for n in t.schema.names if n not in attrs]
        raw = build_target_set(tables, attrs)
        if raw.class_attribute is None:
            raise StageError("build", "target set has no class attribute")

    with timer.stage("impute"):
        ds = impute_missing(raw, config.impute)
        if len(ds) == 0:
            raise StageError("impute", "no records left after imputation")

    params = TreeParams(config.max_depth, config.min_split)
    with timer.stage("select"):
        trace = mrmr_select(ds, config.k_features)
        selected = trace.attributes

    with timer.stage("model"):
        model = induce_tree(ds.select(selected + [ds.class_attribute]), params)

    with timer.stage("evaluate"):
        n_features = len(ds.schema.feature_names)
        k_list = config.k_list or tuple(range(1, n_features + 1))
        cm = evaluate_classifier(ds, params, config.folds, config.seed,
                                 k_features=min(config.k_features, n_features))
        curve = error_vs_feature_count(ds, k_list, config.folds, config.seed, params)

    with timer.stage("rules"):
        ts = to_transactions(ds, config.include_class)
        table = frequent_itemsets(ts, config.min_support)
        rules = generate_rules(table, config.min_confidence)

    class_col = ds.column(ds.class_attribute)
    report = RunReport(
        config=config.to_json(),
        target={
            "records_joined": len(raw),
            "records": len(ds),
            "attributes": list(ds.schema.names),
            "class_attribute": ds.class_attribute,
            "class_counts": {c: class_col.count(c) for c in ds.schema.class_descriptor.domain},
            "frequent_itemsets": len(table),
        },
        selection=trace.to_json(),
        tree=model.to_json()["tree"],
        rules=[r.to_json() for r in rules],
        confusion_matrix=cm.to_json(),
        error_curve=curve.to_json(),
    )

    with timer.stage("report"):
        out.mkdir(parents=True, exist_ok=True)
        write_csv(ds, out / "target.csv")
        save_schema(ds.schema, out / "target_schema.json")
        _dump(out / "selection.json", trace.to_json())
        _dump(out / "model.json", model.to_json())
        _dump(out / "rules.json", report.rules)
        (out / "rules.txt").write_text(format_rules(rules), encoding="utf-8")
        (out / "error_curve.txt").write_text(curve.format_table(), encoding="utf-8")
        (out / "confusion_matrix.txt").write_text(cm.format_table(), encoding="utf-8")
        (out / "summary.txt").write_text(_summary(report, trace, cm, curve, rules), encoding="utf-8")
        if config.figures:
            from .plotting import plot_confusion_matrix, plot_error_curve

            figs = out / "figures"
            figs.mkdir(exist_ok=True)
            plot_error_curve(curve, figs / "error_curve.svg", "error vs. number of mRMR features")
            plot_confusion_matrix(cm, figs / "confusion_matrix.svg")

    report.timings = timer.timings
    _dump(out / "report.json", report.to_json())
    return report


def _summary(report: RunReport, trace, cm, curve, rules) -> str:
    t = report.target
    lines = [
        f"logodm {__version__}",
        f"target set: {t['records']} records ({t['records_joined']} joined), "
        f"{len(t['attributes'])} attributes, class {t['class_attribute']}",
        "class counts: " + ", ".join(f"{c}={n}" for c, n in t["class_counts"].items()),
        "",
        "mRMR selection:",
    ]
    lines += [
        f"  {s.rank:>2}. {s.attribute:<32} relevance {s.relevance:.4f}  "
        f"redundancy {s.redundancy:.4f}  score {s.score:.4f}"
        for s in trace.steps
    ]
    lines += ["", "cross-validated confusion matrix:", cm.format_table().rstrip()]
    lines += ["", f"error curve (minimum at k={curve.argmin_k}):", curve.format_table().rstrip()]
    lines += ["", f"association rules: {len(rules)}"]
    return "\n".join(lines) + "\n"
