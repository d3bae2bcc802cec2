"""Seeded synthetic stand-in for therapy records with planted structure.

Every dataset is drawn from a single SplitMix64 stream so that the output
is reproducible bit for bit by any implementation that follows the same
draw order:

``next()``
    ``state = (state + 0x9E3779B97F4A7C15) mod 2**64``; then
    ``z = (state ^ state >> 30) * 0xBF58476D1CE4E5B9``,
    ``z = (z ^ z >> 27) * 0x94D049BB133111EB``, ``z ^ z >> 31`` (all mod
    2**64). The initial state is the seed.
``uniform()``
    ``(next() >> 11) * 2**-53``.
``randint(m)``
    ``(next() * m) >> 64``.

Per record, in this order:

1. each relevant attribute: ``randint(cardinality)``;
2. the label: ``u = uniform()``, ``w = randint(n_classes - 1)``; when
   ``u < label_noise`` the planted label is replaced by the ``w``-th of the
   other classes (declared order);
3. each redundant attribute: ``u = uniform()``, ``v = randint(cardinality)``;
   the value is ``v`` when ``u < redundancy_noise``, else the source value;
4. each noise attribute: ``randint(cardinality)``;
5. each non-class attribute in schema order: ``u = uniform()``; the cell
   becomes Missing when ``u < missing_rate`` of that attribute.

The planted rule sums the relevant attributes' level indices and cuts the
sum at increasing thresholds; higher sums map to earlier classes
(``C`` > ``I`` > ``S`` by default).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError
from .schema import CATEGORICAL, CLASS_LABEL, AttributeDescriptor, Dataset, DatasetSchema

MASK64 = (1 << 64) - 1

RELEVANT_NAMES = (
    "family_receptivity", "phoneme_errors", "hearing_screen", "oral_motor_skill",
    "attention_level", "vocabulary_level", "parental_involvement", "session_attendance",
)
NOISE_NAMES = (
    "birth_order", "residence", "sibling_count", "school_type", "intake_season",
    "handedness", "household_size", "pet_at_home", "commute_time", "screen_time",
    "sport_activity", "music_lessons", "grandparents_nearby", "bilingual_home",
    "daycare_years", "birth_month",
)
CLASS_NAME = "final_state"


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def randint(self, m: int) -> int:
        return (self.next() * m) >> 64


@dataclass(frozen=True)
class GeneratorSpec:
    n_records: int
    n_relevant: int = 5
    n_redundant: int = 0
    redundancy_noise: float = 0.0
    n_noise: int = 0
    cardinality: int | tuple[int, ...] = 2
    classes: tuple[str, ...] = ("C", "I", "S")
    label_noise: float = 0.0
    missing_rate: float | Mapping[str, float] = 0.0
    thresholds: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.cardinality, (list, tuple)):
            object.__setattr__(self, "cardinality", tuple(self.cardinality))
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.thresholds is not None:
            object.__setattr__(self, "thresholds", tuple(self.thresholds))
        if isinstance(self.missing_rate, Mapping):
            object.__setattr__(self, "missing_rate", dict(self.missing_rate))
        self.validate()

    def validate(self) -> None:
        if self.n_records < 1:
            raise ParameterError("n_records must be at least 1")
        if self.n_relevant < 1:
            raise ParameterError("n_relevant must be at least 1")
        if self.n_redundant < 0 or self.n_noise < 0:
            raise ParameterError("attribute counts must be non-negative")
        for name in ("redundancy_noise", "label_noise"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ParameterError(f"{name} must be in [0, 1), got {v}")
        rates = self.missing_rate.values() if isinstance(self.missing_rate, dict) else [self.missing_rate]
        if any(not 0.0 <= r < 1.0 for r in rates):
            raise ParameterError("missing rates must be in [0, 1)")
        if isinstance(self.cardinality, tuple):
            if len(self.cardinality) != self.n_relevant + self.n_noise:
                raise ParameterError("cardinality list needs one entry per relevant and noise attribute")
            cards = self.cardinality
        else:
            cards = (self.cardinality,)
        if any(c < 2 for c in cards):
            raise ParameterError("cardinalities must be at least 2")
        if len(self.classes) < 2 or len(set(self.classes)) != len(self.classes):
            raise ParameterError("need at least two distinct classes")
        if self.thresholds is not None:
            t = self.thresholds
            if len(t) != len(self.classes) - 1 or any(a >= b for a, b in zip(t, t[1:])):
                raise ParameterError("thresholds must be strictly increasing, one fewer than classes")

    def cardinalities(self) -> tuple[list[int], list[int]]:
        """(relevant, noise) cardinalities."""
        if isinstance(self.cardinality, tuple):
            c = list(self.cardinality)
            return c[: self.n_relevant], c[self.n_relevant:]
        return [self.cardinality] * self.n_relevant, [self.cardinality] * self.n_noise

    def to_json(self) -> dict:
        out = asdict(self)
        for key in ("cardinality", "classes", "thresholds"):
            if isinstance(out[key], tuple):
                out[key] = list(out[key])
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ParameterError(f"unknown generator spec keys: {sorted(extra)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ParameterError(str(exc)) from None


def _pick_names(pool: Sequence[str], count: int, prefix: str) -> list[str]:
    return [pool[i] if i < len(pool) else f"{prefix}_{i:02d}" for i in range(count)]


def rule_thresholds(spec: GeneratorSpec) -> tuple[int, ...]:
    """Cut points on the relevant-level sum; balanced classes by default."""
    if spec.thresholds is not None:
        return spec.thresholds
    pmf = np.array([1.0])
    for c in spec.cardinalities()[0]:
        pmf = np.convolve(pmf, np.full(c, 1.0 / c))
    cdf_before = np.concatenate([[0.0], np.cumsum(pmf)[:-1]])  # P(sum < s)
    L = len(spec.classes)
    cuts = []
    for i in range(1, L):
        target = i / L
        lo = cuts[-1] + 1 if cuts else 1
        candidates = range(lo, len(pmf))
        s = min(candidates, key=lambda s: (abs(cdf_before[s] - target), s), default=lo)
        cuts.append(s)
    return tuple(cuts)


def planted_label(spec: GeneratorSpec, levels: Sequence[int], thresholds=None) -> str:
    """Class assigned by the planted rule to relevant-attribute level indices."""
    thresholds = rule_thresholds(spec) if thresholds is None else thresholds
    score = sum(levels)
    bucket = sum(score >= t for t in thresholds)
    return spec.classes[len(spec.classes) - 1 - bucket]


@dataclass
class GroundTruth:
    relevant: list[str]
    redundant: dict[str, str]
    noise: list[str]
    class_attribute: str
    thresholds: list[int]
    bayes_error: float
    spec: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "synthetic": True,
            "note": "synthetic data with planted structure; not clinical records",
            "generator": "splitmix64",
            "relevant": self.relevant,
            "redundant": self.redundant,
            "noise": self.noise,
            "class_attribute": self.class_attribute,
            "rule": {
                "type": "sum-threshold",
                "attributes": self.relevant,
                "thresholds": self.thresholds,
                "labels_by_bucket": list(reversed(self.spec.get("classes", []))),
            },
            "bayes_error": self.bayes_error,
            "spec": self.spec,
        }


def levels(card: int) -> tuple[str, ...]:
    return tuple(f"level{i}" for i in range(card))


def generate_dataset(spec: GeneratorSpec) -> tuple[Dataset, GroundTruth]:
    rel_cards, noise_cards = spec.cardinalities()
    rel_names = _pick_names(RELEVANT_NAMES, spec.n_relevant, "relevant")
    noise_names = _pick_names(NOISE_NAMES, spec.n_noise, "noise")
    sources = [i % spec.n_relevant for i in range(spec.n_redundant)]
    red_names = []
    for i, s in enumerate(sources):
        base = f"{rel_names[s]}_retest"
        red_names.append(base if base not in red_names else f"{base}{i}")

    attrs = (
        [AttributeDescriptor(n, CATEGORICAL, levels(c)) for n, c in zip(rel_names, rel_cards)]
        + [AttributeDescriptor(n, CATEGORICAL, levels(rel_cards[s])) for n, s in zip(red_names, sources)]
        + [AttributeDescriptor(n, CATEGORICAL, levels(c)) for n, c in zip(noise_names, noise_cards)]
        + [AttributeDescriptor(CLASS_NAME, CLASS_LABEL, spec.classes)]
    )
    schema = DatasetSchema(tuple(attrs), CLASS_NAME)
    feature_names = [a.name for a in attrs[:-1]]
    if isinstance(spec.missing_rate, dict):
        unknown = set(spec.missing_rate) - set(feature_names)
        if unknown:
            raise ParameterError(f"missing_rate names unknown attributes: {sorted(unknown)}")
        rates = [spec.missing_rate.get(n, 0.0) for n in feature_names]
    else:
        rates = [spec.missing_rate] * len(feature_names)

    thresholds = rule_thresholds(spec)
    L = len(spec.classes)
    rng = SplitMix64(spec.seed)
    rows = np.empty((spec.n_records, len(attrs)), dtype=np.int64)
    for i in range(spec.n_records):
        rel = [rng.randint(c) for c in rel_cards]
        label = spec.classes.index(planted_label(spec, rel, thresholds))
        u, w = rng.uniform(), rng.randint(L - 1)
        if u < spec.label_noise:
            others = [c for c in range(L) if c != label]
            label = others[w]
        red = []
        for s in sources:
            u, v = rng.uniform(), rng.randint(rel_cards[s])
            red.append(v if u < spec.redundancy_noise else rel[s])
        noise = [rng.randint(c) for c in noise_cards]
        row = rel + red + noise
        for j, r in enumerate(rates):
            if rng.uniform() < r:
                row[j] = -1
        rows[i, :-1] = row
        rows[i, -1] = label

    truth = GroundTruth(
        relevant=rel_names,
        redundant=dict(zip(red_names, (rel_names[s] for s in sources))),
        noise=noise_names,
        class_attribute=CLASS_NAME,
        thresholds=list(thresholds),
        bayes_error=bayes_error(spec),
        spec=spec.to_json(),
    )
    return Dataset.from_codes(schema, rows), truth


def bayes_error(spec: GeneratorSpec) -> float:
    """Lowest achievable 0/1 error when the relevant attributes are observed.

    With a deterministic rule and symmetric label noise ``rho`` over ``L``
    classes the planted class keeps probability ``1 - rho`` and each other
    class gets ``rho / (L - 1)``. Missing cells are not accounted for.
    """
    rho = spec.label_noise
    L = len(spec.classes)
    return 1.0 - max(1.0 - rho, rho / (L - 1))
