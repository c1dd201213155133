"""Design scoring: two label classifiers and the binary-weighted match score.

Classifiers are injected contracts; real fine-tuned weights are deployment
plug-ins, while tests run on the deterministic stubs below. The score uses
argmax label equality only; confidences and full distributions are reported
for audit but never enter the score.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from .core import DesignRequest, EvaluationReport, LabelConfig, final_score, labels_equal, normalize_label
from .generation import GeneratedDesign, decode_palette_stamp

PROB_SUM_TOL = 1e-5


class EvaluationError(Exception):
    def __init__(self, message: str, classifier_id: str = ""):
        super().__init__(message)
        self.classifier_id = classifier_id


class CoverageError(EvaluationError):
    """Classifier label set does not cover the configured request labels."""


class LabelClassifier(ABC):
    """Image-to-distribution contract over an ordered label set."""

    classifier_id: str
    label_set: tuple[str, ...]

    @abstractmethod
    def classify_probs(self, image: np.ndarray) -> Sequence[float]:
        """Probability per label, aligned with label_set, summing to 1."""


class FixedLabelClassifier(LabelClassifier):
    """Always answers the same label; handy for forcing match patterns in tests."""

    def __init__(self, label_set: Sequence[str], label: str, confidence: float = 1.0):
        self.label_set = tuple(label_set)
        self.classifier_id = f"fixed:{label}"
        if label not in self.label_set:
            raise ValueError(f"{label!r} not in label set {self.label_set}")
        self._index = self.label_set.index(label)
        self._confidence = confidence

    def classify_probs(self, image):
        n = len(self.label_set)
        rest = (1.0 - self._confidence) / (n - 1) if n > 1 else 0.0
        return [self._confidence if i == self._index else rest for i in range(n)]


class PaletteKeyedClassifier(LabelClassifier):
    """Stub classifier keyed on the palette byte the stub backend stamps.

    Reading the provenance stamp instead of pixels makes the whole stub
    pipeline's evaluation deterministic and checkable by hand.
    """

    def __init__(self, label_set: Sequence[str], peak: float = 0.85):
        self.label_set = tuple(label_set)
        self.classifier_id = f"palette-keyed-{len(self.label_set)}"
        self._peak = peak

    def keyed_index(self, image: np.ndarray) -> int:
        palette = decode_palette_stamp(image)
        key = palette[0] if palette else 0
        return key % len(self.label_set)

    def classify_probs(self, image):
        n = len(self.label_set)
        idx = self.keyed_index(image)
        rest = (1.0 - self._peak) / (n - 1) if n > 1 else 0.0
        probs = [rest] * n
        probs[idx] = self._peak if n > 1 else 1.0
        return probs


def classify(image: np.ndarray, classifier: LabelClassifier):
    """Run one classifier; returns (predicted label, confidence, distribution).

    The prediction is the argmax of the distribution, ties broken by label_set
    order. A classifier that raises or returns a malformed distribution turns
    into an EvaluationError carrying its id.
    """
    if not classifier.label_set:
        raise EvaluationError("classifier has an empty label set", classifier.classifier_id)
    try:
        probs = np.asarray(classifier.classify_probs(image), dtype=np.float64)
    except EvaluationError:
        raise
    except Exception as exc:
        raise EvaluationError(
            f"classifier {classifier.classifier_id} failed: {exc}", classifier.classifier_id
        ) from exc
    if probs.shape != (len(classifier.label_set),):
        raise EvaluationError(
            f"classifier {classifier.classifier_id} returned {probs.shape}, "
            f"expected ({len(classifier.label_set)},)",
            classifier.classifier_id,
        )
    if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL or (probs < -PROB_SUM_TOL).any():
        raise EvaluationError(
            f"classifier {classifier.classifier_id} returned an invalid distribution",
            classifier.classifier_id,
        )
    idx = int(np.argmax(probs))  # argmax takes the first maximum: label_set order
    distribution = {label: float(p) for label, p in zip(classifier.label_set, probs)}
    return classifier.label_set[idx], float(probs[idx]), distribution


def _check_coverage(classifier: LabelClassifier, required: Sequence[str], what: str) -> None:
    have = {normalize_label(l) for l in classifier.label_set}
    missing = [l for l in required if normalize_label(l) not in have]
    if missing:
        raise CoverageError(
            f"{what} classifier {classifier.classifier_id} lacks labels {missing}",
            classifier.classifier_id,
        )


def score_design(
    request: DesignRequest,
    design: GeneratedDesign,
    room_classifier: LabelClassifier,
    style_classifier: LabelClassifier,
    labels: Optional[LabelConfig] = None,
) -> EvaluationReport:
    """Classify a generated design and score it against the request.

    Half a point for a room-type match, half for a style match. Label-set
    coverage is checked before any classification runs.
    """
    labels = labels or LabelConfig()
    _check_coverage(room_classifier, labels.room_types, "room-type")
    _check_coverage(style_classifier, labels.styles, "style")

    room_label, room_conf, room_dist = classify(design.image, room_classifier)
    style_label, style_conf, style_dist = classify(design.image, style_classifier)
    room_match = labels_equal(room_label, request.room_type)
    style_match = labels_equal(style_label, request.style)
    return EvaluationReport(
        predicted_room_type=room_label,
        room_type_confidence=room_conf,
        predicted_style=style_label,
        style_confidence=style_conf,
        room_type_match=room_match,
        style_match=style_match,
        final_score=final_score(room_match, style_match),
        room_type_distribution=room_dist,
        style_distribution=style_dist,
    )
