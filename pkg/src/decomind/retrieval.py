"""Dual-encoder furniture retrieval over the catalog.

Text queries and catalog images live in one shared embedding space supplied by
an injectable provider; matching is cosine similarity (plain dot products,
since providers emit unit vectors). A hash-seeded stub provider ships for
tests and desk-scale runs; a real CLIP-family encoder plugs in behind the same
contract.
"""
from __future__ import annotations

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import replace
from typing import Optional

import numpy as np
from PIL import Image

from .catalog import CatalogIndex
from .core import (
    DesignRequest,
    EmbeddingVector,
    FurnitureSelection,
    RankedPick,
    denormalize_label,
    normalize_label,
)

logger = logging.getLogger(__name__)

QUERY_TEMPLATE = "a {style} {category} for a {room_type}"
UNIT_NORM_TOL = 1e-6
_FATAL_FAILURE_RATE = 0.5


class RetrievalError(Exception):
    pass


class QueryError(RetrievalError):
    """Category not part of the request."""


class IndexingError(RetrievalError):
    """Provider failed on more than half the catalog."""


class RankingError(RetrievalError):
    """Query and index were embedded by different providers."""


class EmbeddingProvider(ABC):
    """Dual-encoder contract: text and images into one unit-norm space.

    Implementations must be deterministic (same input, same vector) and emit
    the same dimension from both encoders.
    """

    provider_id: str
    dimension: int

    @abstractmethod
    def embed_text(self, text: str) -> EmbeddingVector:
        ...

    @abstractmethod
    def embed_image(self, image) -> EmbeddingVector:
        ...


class StubEmbeddingProvider(EmbeddingProvider):
    """Deterministic test provider: hash the input, seed an RNG, draw a unit vector.

    No semantics, but the full retrieval contract holds, which is what
    pipeline tests need.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.provider_id = f"stub-sha256-d{dimension}"

    @staticmethod
    def parse_provider_id(provider_id: str) -> Optional["StubEmbeddingProvider"]:
        if provider_id.startswith("stub-sha256-d"):
            try:
                return StubEmbeddingProvider(int(provider_id.rsplit("d", 1)[1]))
            except ValueError:
                return None
        return None

    def _vector_for(self, payload: bytes) -> EmbeddingVector:
        digest = hashlib.sha256(payload).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(self.dimension)
        vec = (vec / np.linalg.norm(vec)).astype("<f4")
        return EmbeddingVector(values=tuple(float(v) for v in vec), provider_id=self.provider_id)

    def embed_text(self, text: str) -> EmbeddingVector:
        return self._vector_for(b"text\x00" + text.encode("utf-8"))

    def embed_image(self, image) -> EmbeddingVector:
        if isinstance(image, Image.Image):
            canonical = image.convert("RGBA")
            payload = (
                f"{canonical.width}x{canonical.height}".encode("ascii")
                + b"\x00"
                + canonical.tobytes()
            )
        else:
            arr = np.ascontiguousarray(np.asarray(image, dtype=np.uint8))
            payload = f"{arr.shape}".encode("ascii") + b"\x00" + arr.tobytes()
        return self._vector_for(b"image\x00" + payload)


def build_query(request: DesignRequest, category: str) -> str:
    """Render the fixed retrieval query for one requested category."""
    if normalize_label(category) not in {normalize_label(c) for c in request.furniture_categories}:
        raise QueryError(f"category {category!r} is not part of the request")
    return QUERY_TEMPLATE.format(
        style=denormalize_label(request.style),
        category=denormalize_label(category),
        room_type=denormalize_label(request.room_type),
    )


def index_embeddings(
    index: CatalogIndex,
    provider: EmbeddingProvider,
    warnings: Optional[list] = None,
) -> CatalogIndex:
    """Embed every non-excluded asset image; excluded assets are skipped.

    A provider failure on one asset excludes it (``low_quality``) with a
    warning; failing on more than half the attempted assets aborts.
    """
    candidates = index.non_excluded()
    if not candidates:
        raise IndexingError("index has no non-excluded assets to embed")

    embeddings: dict[str, EmbeddingVector] = {}
    failed: set[str] = set()
    for asset in candidates:
        try:
            with Image.open(index.image_file(asset)) as im:
                embeddings[asset.asset_id] = provider.embed_image(im)
        except Exception as exc:
            failed.add(asset.asset_id)
            message = f"embedding failed on {asset.asset_id}: {exc}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)

    if len(failed) / len(candidates) > _FATAL_FAILURE_RATE:
        raise IndexingError(
            f"provider {provider.provider_id} failed on {len(failed)}/{len(candidates)} assets"
        )

    assets = tuple(
        asset
        if asset.asset_id not in failed
        else replace(asset, excluded=True, exclusion_reason="low_quality")
        for asset in index.assets
    )
    return index.with_assets(assets).with_embeddings(embeddings, provider.provider_id)


def rank_assets(
    query: EmbeddingVector, index: CatalogIndex, category: str, k: int
) -> tuple[RankedPick, ...]:
    """Top-k non-excluded assets of one category by dot-product similarity.

    Ties break by ascending asset_id; fewer than k candidates returns them
    all. Zero candidates is an empty result, not an error.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if query.provider_id != index.provider_id:
        raise RankingError(
            f"query embedded by {query.provider_id!r} but index by {index.provider_id!r}"
        )
    norm_cat = normalize_label(category)
    q = np.asarray(query.values, dtype=np.float64)
    scored = []
    for asset in index.non_excluded():
        if normalize_label(asset.category) != norm_cat:
            continue
        vec = index.embeddings.get(asset.asset_id)
        if vec is None:
            continue
        similarity = float(np.dot(np.asarray(vec.values, dtype=np.float64), q))
        scored.append(RankedPick(asset_id=asset.asset_id, similarity_score=similarity))
    scored.sort(key=lambda p: (-p.similarity_score, p.asset_id))
    return tuple(scored[:k])


def select_furniture(
    request: DesignRequest, index: CatalogIndex, provider: EmbeddingProvider
) -> FurnitureSelection:
    """Run the per-category retrieval loop; every requested category gets a key."""
    picks: dict[str, tuple[RankedPick, ...]] = {}
    for category in request.furniture_categories:
        query = provider.embed_text(build_query(request, category))
        picks[category] = rank_assets(query, index, category, request.items_per_category)
    return FurnitureSelection(picks=picks)
