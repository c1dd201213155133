"""Shared domain vocabulary for the design pipeline.

Pure data types plus request validation. No I/O, no model calls; every type
is immutable after construction and safe to share between pipeline stages.
The ``to_dict``/``from_dict`` pairs define the JSON wire format used by the
service API and the browser UI (snake_case field names throughout).
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

WALLS = ("north", "east", "south", "west")
OPENING_KINDS = ("door", "window")
SOURCE_SPLITS = ("train", "validation", "test")
EXCLUSION_REASONS = ("none", "scene_image", "low_quality")

DEFAULT_ROOM_TYPES = ("bedroom", "living_room", "kitchen", "dining_room")
DEFAULT_STYLES = ("modern", "classic", "minimalist")

# Validation floors blocking degenerate zero-width openings.
MIN_DOOR_WIDTH_M = 0.6
MIN_WINDOW_WIDTH_M = 0.3

_EPS = 1e-9

_NORM_RE = re.compile(r"[\s\-]+")


def normalize_label(label: str) -> str:
    """Canonical label form: lowercase, runs of spaces/hyphens to one underscore."""
    return _NORM_RE.sub("_", str(label).strip().lower()).strip("_")


def denormalize_label(label: str) -> str:
    """Human-readable form of a normalized label ("dining_room" -> "dining room")."""
    return normalize_label(label).replace("_", " ")


def labels_equal(a: str, b: str) -> bool:
    return normalize_label(a) == normalize_label(b)


def canonical_json(data: Any) -> str:
    """Key-sorted, whitespace-free JSON used wherever bytes are hashed."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json_hash(data: Any) -> str:
    return content_hash(canonical_json(data).encode("utf-8"))


@dataclass(frozen=True)
class LabelConfig:
    """Allowed room-type and style labels.

    Shipped defaults mirror the dataset folder names; deployments extend them
    through the service configuration rather than code.
    """

    room_types: tuple[str, ...] = DEFAULT_ROOM_TYPES
    styles: tuple[str, ...] = DEFAULT_STYLES

    def to_dict(self) -> dict:
        return {"room_types": list(self.room_types), "styles": list(self.styles)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LabelConfig":
        return cls(
            room_types=tuple(normalize_label(x) for x in data.get("room_types", DEFAULT_ROOM_TYPES)),
            styles=tuple(normalize_label(x) for x in data.get("styles", DEFAULT_STYLES)),
        )


def wall_length(wall: str, room_width_m: float, room_depth_m: float) -> float:
    """Length of the named wall for an axis-aligned rectangular room."""
    if wall in ("north", "south"):
        return room_width_m
    if wall in ("east", "west"):
        return room_depth_m
    raise ValueError(f"unknown wall: {wall!r}")


@dataclass(frozen=True)
class Opening:
    """A door or window segment on one wall.

    ``offset_m`` is measured from the wall's counter-clockwise start corner,
    walking the room boundary counter-clockwise in room coordinates (origin at
    the north-west corner, x east, y south): north starts at NW, east at NE,
    south at SE, west at SW.
    """

    kind: str
    wall: str
    offset_m: float
    width_m: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "wall": self.wall,
            "offset_m": self.offset_m,
            "width_m": self.width_m,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Opening":
        return cls(
            kind=str(data["kind"]),
            wall=str(data["wall"]),
            offset_m=float(data["offset_m"]),
            width_m=float(data["width_m"]),
        )


@dataclass(frozen=True)
class DesignRequest:
    """The user's full intent for one room design."""

    room_type: str
    style: str
    room_width_m: float
    room_depth_m: float
    openings: tuple[Opening, ...] = ()
    furniture_categories: tuple[str, ...] = ()
    store: str = "ikea"
    seed: Optional[int] = None
    items_per_category: int = 1

    def to_dict(self) -> dict:
        return {
            "room_type": self.room_type,
            "style": self.style,
            "room_width_m": self.room_width_m,
            "room_depth_m": self.room_depth_m,
            "openings": [o.to_dict() for o in self.openings],
            "furniture_categories": list(self.furniture_categories),
            "store": self.store,
            "seed": self.seed,
            "items_per_category": self.items_per_category,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DesignRequest":
        seed = data.get("seed")
        return cls(
            room_type=str(data["room_type"]),
            style=str(data["style"]),
            room_width_m=float(data["room_width_m"]),
            room_depth_m=float(data["room_depth_m"]),
            openings=tuple(Opening.from_dict(o) for o in data.get("openings", [])),
            furniture_categories=tuple(str(c) for c in data.get("furniture_categories", [])),
            store=str(data.get("store", "ikea")),
            seed=None if seed is None else int(seed),
            items_per_category=int(data.get("items_per_category", 1)),
        )

    @classmethod
    def from_json(cls, text: str) -> "DesignRequest":
        return cls.from_dict(json.loads(text))

    def request_hash(self) -> str:
        return canonical_json_hash(self.to_dict())


@dataclass(frozen=True)
class FurnitureAsset:
    """One catalog item."""

    asset_id: str
    category: str
    image_path: str
    has_alpha: bool = False
    source_split: str = "train"
    excluded: bool = False
    exclusion_reason: str = "none"

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "category": self.category,
            "image_path": self.image_path,
            "has_alpha": self.has_alpha,
            "source_split": self.source_split,
            "excluded": self.excluded,
            "exclusion_reason": self.exclusion_reason,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FurnitureAsset":
        return cls(
            asset_id=str(data["asset_id"]),
            category=str(data["category"]),
            image_path=str(data["image_path"]),
            has_alpha=bool(data.get("has_alpha", False)),
            source_split=str(data.get("source_split", "train")),
            excluded=bool(data.get("excluded", False)),
            exclusion_reason=str(data.get("exclusion_reason", "none")),
        )


@dataclass(frozen=True)
class EmbeddingVector:
    """A unit-norm vector in the shared text/image space.

    Values are exact float32 quantities so persistence round-trips bit-exactly.
    """

    values: tuple[float, ...]
    provider_id: str

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))

    def to_dict(self) -> dict:
        return {"values": list(self.values), "provider_id": self.provider_id}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EmbeddingVector":
        return cls(values=tuple(float(v) for v in data["values"]), provider_id=str(data["provider_id"]))


@dataclass(frozen=True)
class RankedPick:
    """One retrieval hit: catalog asset plus its cosine similarity to the query."""

    asset_id: str
    similarity_score: float

    def to_dict(self) -> dict:
        return {"asset_id": self.asset_id, "similarity_score": self.similarity_score}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RankedPick":
        return cls(asset_id=str(data["asset_id"]), similarity_score=float(data["similarity_score"]))


def sort_picks(picks: Sequence[RankedPick]) -> tuple[RankedPick, ...]:
    """Similarity descending, ties broken by ascending asset_id (total order)."""
    return tuple(sorted(picks, key=lambda p: (-p.similarity_score, p.asset_id)))


@dataclass(frozen=True)
class FurnitureSelection:
    """Per-category retrieval results; every requested category appears as a key."""

    picks: Mapping[str, tuple[RankedPick, ...]]

    def to_dict(self) -> dict:
        return {"picks": {cat: [p.to_dict() for p in picks] for cat, picks in self.picks.items()}}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FurnitureSelection":
        return cls(
            picks={
                str(cat): tuple(RankedPick.from_dict(p) for p in picks)
                for cat, picks in data["picks"].items()
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FurnitureSelection":
        return cls.from_dict(json.loads(text))

    def selection_hash(self) -> str:
        return canonical_json_hash(self.to_dict())


def final_score(room_type_match: bool, style_match: bool) -> float:
    """Binary-weighted design score: half for each matching label."""
    return 0.5 * (1 if room_type_match else 0) + 0.5 * (1 if style_match else 0)


@dataclass(frozen=True)
class EvaluationReport:
    """Classifier verdict on one generated design.

    Full per-label distributions are kept alongside the argmax verdict so a
    surprising mismatch can be audited by hand.
    """

    predicted_room_type: str
    room_type_confidence: float
    predicted_style: str
    style_confidence: float
    room_type_match: bool
    style_match: bool
    final_score: float
    room_type_distribution: Optional[Mapping[str, float]] = None
    style_distribution: Optional[Mapping[str, float]] = None

    def to_dict(self) -> dict:
        out = {
            "predicted_room_type": self.predicted_room_type,
            "room_type_confidence": self.room_type_confidence,
            "predicted_style": self.predicted_style,
            "style_confidence": self.style_confidence,
            "room_type_match": self.room_type_match,
            "style_match": self.style_match,
            "final_score": self.final_score,
        }
        if self.room_type_distribution is not None:
            out["room_type_distribution"] = dict(self.room_type_distribution)
        if self.style_distribution is not None:
            out["style_distribution"] = dict(self.style_distribution)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationReport":
        return cls(
            predicted_room_type=str(data["predicted_room_type"]),
            room_type_confidence=float(data["room_type_confidence"]),
            predicted_style=str(data["predicted_style"]),
            style_confidence=float(data["style_confidence"]),
            room_type_match=bool(data["room_type_match"]),
            style_match=bool(data["style_match"]),
            final_score=float(data["final_score"]),
            room_type_distribution=data.get("room_type_distribution"),
            style_distribution=data.get("style_distribution"),
        )


@dataclass(frozen=True)
class ValidationIssue:
    field: str
    message: str

    def to_dict(self) -> dict:
        return {"field": self.field, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    """Every violated invariant of a candidate request, keyed by field."""

    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def fields(self) -> tuple[str, ...]:
        return tuple(i.field for i in self.issues)

    def to_dict(self) -> dict:
        return {"issues": [i.to_dict() for i in self.issues]}


def _positive_finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def validate_request(
    request: DesignRequest, labels: Optional[LabelConfig] = None
):
    """Check every request invariant.

    Returns the request object itself when everything holds, otherwise a
    :class:`ValidationReport` naming each violated field. Validation failures
    are data, never exceptions.
    """
    labels = labels or LabelConfig()
    issues: list[ValidationIssue] = []

    if not _positive_finite(request.room_width_m):
        issues.append(ValidationIssue("room_width_m", "must be a positive number of meters"))
    if not _positive_finite(request.room_depth_m):
        issues.append(ValidationIssue("room_depth_m", "must be a positive number of meters"))

    if normalize_label(request.room_type) not in labels.room_types:
        issues.append(
            ValidationIssue("room_type", f"{request.room_type!r} not in configured room types {list(labels.room_types)}")
        )
    if normalize_label(request.style) not in labels.styles:
        issues.append(
            ValidationIssue("style", f"{request.style!r} not in configured styles {list(labels.styles)}")
        )

    if not request.furniture_categories:
        issues.append(ValidationIssue("furniture_categories", "must not be empty"))
    else:
        seen: set[str] = set()
        for cat in request.furniture_categories:
            norm = normalize_label(cat)
            if not norm:
                issues.append(ValidationIssue("furniture_categories", f"blank category label {cat!r}"))
            elif norm in seen:
                issues.append(ValidationIssue("furniture_categories", f"duplicate category {cat!r}"))
            seen.add(norm)

    for i, opening in enumerate(request.openings):
        fieldname = f"openings[{i}]"
        if opening.kind not in OPENING_KINDS:
            issues.append(ValidationIssue(fieldname, f"kind must be one of {OPENING_KINDS}, got {opening.kind!r}"))
            continue
        if opening.wall not in WALLS:
            issues.append(ValidationIssue(fieldname, f"wall must be one of {WALLS}, got {opening.wall!r}"))
            continue
        floor = MIN_DOOR_WIDTH_M if opening.kind == "door" else MIN_WINDOW_WIDTH_M
        if not (isinstance(opening.width_m, (int, float)) and math.isfinite(opening.width_m)) or opening.width_m < floor:
            issues.append(
                ValidationIssue(fieldname, f"{opening.kind} width {opening.width_m} m below the {floor} m floor")
            )
            continue
        if not (isinstance(opening.offset_m, (int, float)) and math.isfinite(opening.offset_m)) or opening.offset_m < 0:
            issues.append(ValidationIssue(fieldname, f"offset {opening.offset_m} m must be >= 0"))
            continue
        if _positive_finite(request.room_width_m) and _positive_finite(request.room_depth_m):
            length = wall_length(opening.wall, request.room_width_m, request.room_depth_m)
            if opening.offset_m + opening.width_m > length + _EPS:
                issues.append(
                    ValidationIssue(
                        fieldname,
                        f"offset {opening.offset_m} + width {opening.width_m} exceeds the "
                        f"{length} m {opening.wall} wall",
                    )
                )

    if not str(request.store).strip():
        issues.append(ValidationIssue("store", "must name a catalog"))
    if request.seed is not None and (not isinstance(request.seed, int) or request.seed < 0):
        issues.append(ValidationIssue("seed", "must be a non-negative integer when set"))
    if not isinstance(request.items_per_category, int) or request.items_per_category < 1:
        issues.append(ValidationIssue("items_per_category", "must be a positive integer"))

    if issues:
        return ValidationReport(tuple(issues))
    return request


def parse_request(data: Mapping[str, Any]):
    """Build a DesignRequest from raw JSON data.

    Returns ``(request, None)`` on success or ``(None, ValidationReport)``
    when required fields are missing or not coercible.
    """
    issues: list[ValidationIssue] = []
    for name in ("room_type", "style", "room_width_m", "room_depth_m", "furniture_categories"):
        if name not in data:
            issues.append(ValidationIssue(name, "missing required field"))
    if issues:
        return None, ValidationReport(tuple(issues))
    try:
        return DesignRequest.from_dict(data), None
    except (TypeError, ValueError, KeyError) as exc:
        return None, ValidationReport((ValidationIssue("request", f"malformed request: {exc}"),))
