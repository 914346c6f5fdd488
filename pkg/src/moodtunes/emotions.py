"""Emotion taxonomy, probability distributions, mood reports, and
classification metrics.

These are the shared currency of the whole system: classifiers emit
:class:`EmotionDistribution`, the recommender consumes it as a user mood or
song profile, and the ledger stores it as tag payloads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TAXONOMY_VERSION = "5emo-v1"

DIST_TOLERANCE = 1e-6


class InvalidDistribution(ValueError):
    """Probability vector has negative entries or does not sum to 1."""


class LengthMismatch(ValueError):
    """Prediction and truth lists have different lengths."""


class EmptyInput(ValueError):
    """Metric computation called with no samples."""


class EmotionLabel(Enum):
    """The five emotions the system recognizes, in fixed ordinal order."""

    HAPPY = 0
    SAD = 1
    SURPRISE = 2
    DISGUST = 3
    NEUTRAL = 4

    def __lt__(self, other: "EmotionLabel") -> bool:
        if not isinstance(other, EmotionLabel):
            return NotImplemented
        return self.value < other.value

    @classmethod
    def parse(cls, text: str) -> "EmotionLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown emotion label: {text!r}") from None

    def serialize(self) -> str:
        return self.name.lower()


LABELS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)
NUM_EMOTIONS = len(LABELS)
LABEL_NAMES: tuple[str, ...] = tuple(lbl.serialize() for lbl in LABELS)


@dataclass(frozen=True)
class EmotionDistribution:
    """Normalized probability vector over the emotion taxonomy.

    Immutable; entries are non-negative and sum to 1 within 1e-6.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != NUM_EMOTIONS:
            raise InvalidDistribution(
                f"expected {NUM_EMOTIONS} probabilities, got {len(self.probs)}"
            )
        p = tuple(float(x) for x in self.probs)
        if any(x < 0.0 or not np.isfinite(x) for x in p):
            raise InvalidDistribution(f"negative or non-finite entry in {p}")
        if abs(sum(p) - 1.0) > DIST_TOLERANCE:
            raise InvalidDistribution(f"probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_array(cls, arr) -> "EmotionDistribution":
        return cls(tuple(float(x) for x in np.asarray(arr, dtype=np.float64)))

    @classmethod
    def one_hot(cls, label: EmotionLabel) -> "EmotionDistribution":
        probs = [0.0] * NUM_EMOTIONS
        probs[label.value] = 1.0
        return cls(tuple(probs))

    @classmethod
    def uniform(cls) -> "EmotionDistribution":
        return cls(tuple(1.0 / NUM_EMOTIONS for _ in range(NUM_EMOTIONS)))

    def __getitem__(self, label: EmotionLabel) -> float:
        return self.probs[label.value]

    def argmax(self) -> EmotionLabel:
        # ties resolved to the lowest ordinal: first max wins
        best = 0
        for i in range(1, NUM_EMOTIONS):
            if self.probs[i] > self.probs[best]:
                best = i
        return LABELS[best]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {lbl.serialize(): p for lbl, p in zip(LABELS, self.probs)}

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "EmotionDistribution":
        probs = [0.0] * NUM_EMOTIONS
        for name, value in d.items():
            probs[EmotionLabel.parse(name).value] = float(value)
        return cls(tuple(probs))


DEFAULT_MOOD_THRESHOLD = 0.30


@dataclass(frozen=True)
class MoodReport:
    """User-facing mood summary: every label at or above the threshold.

    ``reported`` is ordered by descending probability, ties by ordinal, and
    is never empty (falls back to the argmax label).
    """

    distribution: EmotionDistribution
    reported: tuple[EmotionLabel, ...]
    threshold: float

    def as_json(self) -> dict:
        return {
            "reported": [lbl.serialize() for lbl in self.reported],
            "distribution": self.distribution.as_dict(),
            "threshold": self.threshold,
        }


def make_mood_report(
    dist: EmotionDistribution, threshold: float = DEFAULT_MOOD_THRESHOLD
) -> MoodReport:
    """Build the reported-mood set for a distribution.

    Labels with probability >= threshold are reported in descending
    probability order (ties by ordinal); if none qualifies the single
    argmax label is reported.
    """
    if not isinstance(dist, EmotionDistribution):
        dist = EmotionDistribution.from_array(dist)
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    hits = [lbl for lbl in LABELS if dist[lbl] >= threshold]
    hits.sort(key=lambda lbl: (-dist[lbl], lbl.value))
    if not hits:
        hits = [dist.argmax()]
    return MoodReport(distribution=dist, reported=tuple(hits), threshold=threshold)


@dataclass(frozen=True)
class ClassificationMetrics:
    """Accuracy, per-class and macro precision/recall/F1, and the confusion
    matrix (rows = truth, columns = prediction)."""

    accuracy: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: tuple[tuple[int, ...], ...] = field(repr=False)

    def format_table(self) -> str:
        lines = [
            f"accuracy        {self.accuracy:.4f}",
            f"{'class':<10} {'precision':>9} {'recall':>9} {'f1':>9}",
        ]
        for lbl in LABELS:
            i = lbl.value
            lines.append(
                f"{lbl.serialize():<10} {self.per_class_precision[i]:>9.4f}"
                f" {self.per_class_recall[i]:>9.4f} {self.per_class_f1[i]:>9.4f}"
            )
        lines.append(
            f"{'macro':<10} {self.macro_precision:>9.4f}"
            f" {self.macro_recall:>9.4f} {self.macro_f1:>9.4f}"
        )
        return "\n".join(lines)


def _safe_div(num: float, den: float) -> float:
    # 0/0 cases (class absent from both lists) are defined as 0
    return num / den if den > 0 else 0.0


def compute_metrics(
    predictions: list[EmotionLabel], truths: list[EmotionLabel]
) -> ClassificationMetrics:
    """Score a prediction list against truths over the full taxonomy."""
    if len(predictions) != len(truths):
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(truths)} truths"
        )
    if not predictions:
        raise EmptyInput("no samples to score")

    confusion = [[0] * NUM_EMOTIONS for _ in range(NUM_EMOTIONS)]
    for pred, truth in zip(predictions, truths):
        confusion[truth.value][pred.value] += 1

    total = len(truths)
    correct = sum(confusion[i][i] for i in range(NUM_EMOTIONS))
    precision, recall, f1 = [], [], []
    for c in range(NUM_EMOTIONS):
        tp = confusion[c][c]
        fp = sum(confusion[t][c] for t in range(NUM_EMOTIONS)) - tp
        fn = sum(confusion[c]) - tp
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        precision.append(p)
        recall.append(r)
        f1.append(_safe_div(2 * p * r, p + r))

    return ClassificationMetrics(
        accuracy=correct / total,
        per_class_precision=tuple(precision),
        per_class_recall=tuple(recall),
        per_class_f1=tuple(f1),
        macro_precision=sum(precision) / NUM_EMOTIONS,
        macro_recall=sum(recall) / NUM_EMOTIONS,
        macro_f1=sum(f1) / NUM_EMOTIONS,
        confusion=tuple(tuple(row) for row in confusion),
    )
