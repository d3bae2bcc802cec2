"""Bundled synthetic example: two relations joined on ``child_id``.

``fise`` holds the anamnesis (including a coded health-problems field),
``therapy`` holds therapy observations and the final state. Children still
in therapy have no ``therapy`` row and fall out of the join.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .relational import Relation
from .schema import (
    CATEGORICAL,
    CODED_FLAG,
    MISSING,
    AttributeDescriptor,
    DatasetSchema,
    save_schema,
    write_csv,
)
from .synthgen import GeneratorSpec, SplitMix64, generate_dataset

HEALTH_FLAGS = ("serious_illness", "psychological_trauma", "surgery", "accidents", "other")
HEALTH_RATES = (0.05, 0.12, 0.15, 0.2, 0.3)

DEMO_SPEC = GeneratorSpec(
    n_records=300, n_relevant=5, n_redundant=2, redundancy_noise=0.1, n_noise=8,
    label_noise=0.05, missing_rate=0.03, seed=2009,
)

DEMO_CONFIG = {
    "relations": [
        {"name": "fise", "csv": "fise.csv", "schema": "fise.schema.json"},
        {"name": "therapy", "csv": "therapy.csv", "schema": "therapy.schema.json"},
    ],
    "impute": "class-mode",
    "k_features": 6,
    "max_depth": None,
    "min_split": 2,
    "min_support": 0.35,
    "min_confidence": 0.9,
    "include_class": True,
    "folds": 5,
    "seed": 7,
    "k_list": list(range(1, 13)),
}


def demo_relations() -> list[Relation]:
    ds, truth = generate_dataset(DEMO_SPEC)
    n = len(ds)
    ids = tuple(f"c{i:04d}" for i in range(n))
    key = AttributeDescriptor("child_id", CATEGORICAL, ids)
    health = AttributeDescriptor("health_problems", CODED_FLAG, flag_names=HEALTH_FLAGS)

    anamnesis = truth.relevant[:2] + truth.noise
    therapy_cols = truth.relevant[2:] + list(truth.redundant) + [truth.class_attribute]

    rng = SplitMix64(DEMO_SPEC.seed + 1)
    fise_rows, therapy_rows = [], []
    for i, rec in enumerate(ds.records):
        row = dict(zip(ds.schema.names, rec))
        flags = frozenset(f for f, p in zip(HEALTH_FLAGS, HEALTH_RATES) if rng.uniform() < p)
        if rng.uniform() < 0.03:
            flags = MISSING
        finished = rng.uniform() >= 0.08
        fise_rows.append((ids[i], flags) + tuple(row[c] for c in anamnesis))
        if finished:
            therapy_rows.append((ids[i],) + tuple(row[c] for c in therapy_cols))

    fise_schema = DatasetSchema(
        (key, health) + tuple(ds.schema.attribute(c) for c in anamnesis)
    )
    therapy_schema = DatasetSchema(
        (key,) + tuple(ds.schema.attribute(c) for c in therapy_cols), truth.class_attribute
    )
    return [
        Relation("fise", fise_schema, tuple(fise_rows)),
        Relation("therapy", therapy_schema, tuple(therapy_rows)),
    ]


def demo_config(relations: list[Relation] | None = None) -> dict:
    """Pipeline config for the demo; projects every attribute except the key."""
    relations = relations or demo_relations()
    names = [n for rel in relations for n in rel.schema.names if n != "child_id"]
    return {**DEMO_CONFIG, "projection": list(dict.fromkeys(names))}


def write_demo(out_dir) -> Path:
    """Write the demo relations, schemas and ``pipeline.json``; return the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    relations = demo_relations()
    for rel in relations:
        write_csv(rel.to_dataset(), out / f"{rel.name}.csv")
        save_schema(rel.schema, out / f"{rel.name}.schema.json")
    path = out / "pipeline.json"
    path.write_text(json.dumps(demo_config(relations), indent=2) + "\n", encoding="utf-8")
    return path


def bundled_config() -> Path:
    """Path of the demo configuration shipped inside the package."""
    return Path(str(resources.files("logodm") / "data" / "pipeline.json"))
