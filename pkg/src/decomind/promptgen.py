"""Prompt bundle construction for the generation backend.

The positive template is frozen and versioned: generated artifacts must stay
reproducible and auditable, so wording changes bump TEMPLATE_VERSION instead
of silently rewriting v1 output.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .core import DesignRequest, FurnitureSelection, canonical_json, denormalize_label

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"
POSITIVE_TEMPLATE = (
    "a photorealistic {style} {room_type} interior, {w}m by {d}m, "
    "containing {categories}, furniture from {store}; "
    "imagine and correct the viewing angles of the furniture; "
    "feel free to add more items to complete the design"
)
DEFAULT_NEGATIVE = "blurry, distorted geometry, extra walls, watermark, text"


class PromptError(Exception):
    pass


@dataclass(frozen=True)
class PromptBundle:
    positive: str
    negative: str
    metadata: Mapping[str, str]

    def to_dict(self) -> dict:
        return {"positive": self.positive, "negative": self.negative, "metadata": dict(self.metadata)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PromptBundle":
        return cls(
            positive=str(data["positive"]),
            negative=str(data["negative"]),
            metadata=dict(data["metadata"]),
        )


def prompt_bundle_hash(bundle: PromptBundle) -> bytes:
    """Digest of the canonical bundle JSON; the stub backend stamps this."""
    return hashlib.sha256(canonical_json(bundle.to_dict()).encode("utf-8")).digest()


def _format_meters(value: float) -> str:
    return f"{value:g}"


def _category_list(categories) -> str:
    phrases = [f"a {denormalize_label(c)}" for c in categories]
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def build_prompt(
    request: DesignRequest,
    selection: FurnitureSelection,
    negative: str = DEFAULT_NEGATIVE,
    warnings: Optional[list] = None,
) -> PromptBundle:
    """Render the positive/negative prompt pair for one request.

    Categories come from the request, so a selection with empty pick lists
    still yields a usable prompt (with a warning).
    """
    if selection.picks and all(len(picks) == 0 for picks in selection.picks.values()):
        message = "selection has no picks for any category; prompt lists categories from the request"
        logger.warning(message)
        if warnings is not None:
            warnings.append(message)
    positive = POSITIVE_TEMPLATE.format(
        style=denormalize_label(request.style),
        room_type=denormalize_label(request.room_type),
        w=_format_meters(request.room_width_m),
        d=_format_meters(request.room_depth_m),
        categories=_category_list(request.furniture_categories),
        store=request.store,
    )
    metadata = {
        "request_hash": request.request_hash(),
        "selection_hash": selection.selection_hash(),
        "template_version": TEMPLATE_VERSION,
    }
    return PromptBundle(positive=positive, negative=negative, metadata=metadata)
