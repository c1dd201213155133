"""Furniture catalog: ingestion, cleaning passes, and the on-disk index.

Two cleaning passes run over an ingested tree: exclusion of full-room scene
shots (via an injected detector, fail-open) and background removal (via an
injected matting backend). The persisted index is a zip archive holding a JSON
manifest plus one raw block of little-endian float32 embeddings.
"""
from __future__ import annotations

import json
import logging
import zipfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional

import numpy as np
from PIL import Image

from .core import EmbeddingVector, FurnitureAsset, SOURCE_SPLITS, normalize_label

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
DEFAULT_SCENE_THRESHOLD = 0.5

_MANIFEST_NAME = "manifest.json"
_EMBEDDING_BLOCK = "embeddings.f32"


class CatalogError(Exception):
    pass


class CatalogConfigError(CatalogError):
    """Catalog root missing or unusable."""


class CatalogIngestError(CatalogError):
    """Nothing usable found under the catalog root."""


class CatalogFormatError(CatalogError):
    """Persisted index unreadable or from an incompatible format version."""


class MattingError(CatalogError):
    """Background removal failed for one asset."""


@dataclass(frozen=True)
class CatalogIndex:
    """Immutable snapshot of the ingested catalog; freely shared once built."""

    store: str
    root_path: str
    assets: tuple[FurnitureAsset, ...]
    embeddings: Mapping[str, EmbeddingVector]
    created_at: str
    provider_id: str = ""

    def asset_by_id(self, asset_id: str) -> Optional[FurnitureAsset]:
        return next((a for a in self.assets if a.asset_id == asset_id), None)

    def non_excluded(self) -> tuple[FurnitureAsset, ...]:
        return tuple(a for a in self.assets if not a.excluded)

    def categories(self) -> tuple[str, ...]:
        return tuple(sorted({a.category for a in self.non_excluded()}))

    def image_file(self, asset: FurnitureAsset) -> Path:
        return Path(self.root_path) / asset.image_path

    def with_assets(self, assets: Iterable[FurnitureAsset]) -> "CatalogIndex":
        return replace(self, assets=tuple(assets))

    def with_embeddings(self, embeddings: Mapping[str, EmbeddingVector], provider_id: str) -> "CatalogIndex":
        return replace(self, embeddings=dict(embeddings), provider_id=provider_id)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _split_for(rel_parts: tuple[str, ...]) -> str:
    for part in rel_parts[:-1]:
        norm = part.lower()
        if norm in SOURCE_SPLITS:
            return norm
        if norm == "val":
            return "validation"
    return "train"


def _category_for(rel: Path, category_map: Mapping[str, str]) -> str:
    parent = rel.parent.name
    if not parent or parent.lower() in SOURCE_SPLITS or parent.lower() == "val":
        return category_map.get("", "uncategorized")
    if parent in category_map:
        return category_map[parent]
    return normalize_label(parent)


def _probe_image(path: Path):
    """Return (readable, has_alpha) without decoding full pixel data."""
    try:
        with Image.open(path) as im:
            im.verify()
        with Image.open(path) as im:
            has_alpha = im.mode in ("RGBA", "LA", "PA") or "transparency" in im.info
        return True, has_alpha
    except Exception:
        return False, False


def ingest_catalog(
    root_path, store: str, category_map: Optional[Mapping[str, str]] = None
) -> CatalogIndex:
    """Walk a directory tree of PNG/JPEG files into a catalog index.

    One asset per image file; the containing folder names the category (via
    ``category_map`` when provided). Unreadable files are kept but excluded
    with reason ``low_quality``. The asset list is deterministic: files are
    visited in sorted relative-path order and ``asset_id`` is the relative
    path with separators replaced by underscores.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise CatalogConfigError(f"catalog root does not exist: {root}")
    category_map = dict(category_map or {})

    assets: list[FurnitureAsset] = []
    readable = 0
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        rel = path.relative_to(root)
        ok, has_alpha = _probe_image(path)
        if ok:
            readable += 1
        assets.append(
            FurnitureAsset(
                asset_id=rel.as_posix().replace("/", "_"),
                category=_category_for(rel, category_map),
                image_path=rel.as_posix(),
                has_alpha=has_alpha,
                source_split=_split_for(rel.parts),
                excluded=not ok,
                exclusion_reason="none" if ok else "low_quality",
            )
        )

    if readable == 0:
        raise CatalogIngestError(f"no readable images under {root}")
    return CatalogIndex(
        store=store,
        root_path=str(root),
        assets=tuple(assets),
        embeddings={},
        created_at=_utc_now(),
    )


def flag_scene_images(
    index: CatalogIndex,
    scene_detector: Callable,
    scene_threshold: float = DEFAULT_SCENE_THRESHOLD,
    warnings: Optional[list] = None,
) -> CatalogIndex:
    """Exclude assets the detector classifies as full-room scenes.

    The detector maps a decoded image to a probability in [0, 1]. Detector
    failures leave the asset in place (fail-open): a broken detector must not
    silently empty the catalog. Already-excluded assets are never revisited,
    which makes the pass idempotent and exclusion monotone.
    """
    out: list[FurnitureAsset] = []
    for asset in index.assets:
        if asset.excluded:
            out.append(asset)
            continue
        try:
            with Image.open(index.image_file(asset)) as im:
                probability = float(scene_detector(im))
        except Exception as exc:
            message = f"scene detector failed on {asset.asset_id}: {exc}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            out.append(asset)
            continue
        if probability > scene_threshold:
            out.append(replace(asset, excluded=True, exclusion_reason="scene_image"))
        else:
            out.append(asset)
    return index.with_assets(out)


def _canonical_mask(mask, shape) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.shape[:2] != shape:
        raise ValueError(f"mask shape {arr.shape[:2]} != image shape {shape}")
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    if arr.dtype == np.bool_:
        return arr.astype(np.float64)
    arr = arr.astype(np.float64)
    if arr.max(initial=0.0) > 1.0:
        arr = arr / 255.0
    return np.clip(arr, 0.0, 1.0)


def remove_background(image: Image.Image, matting_backend: Callable, asset_id: str = "") -> Image.Image:
    """Apply a foreground mask as the alpha channel of ``image``.

    Pixels where the mask is 0 become fully transparent, pixels where it is 1
    keep their original color fully opaque; dimensions never change and RGB
    data is untouched everywhere.
    """
    rgb = image.convert("RGB")
    arr = np.asarray(rgb, dtype=np.uint8)
    try:
        mask = _canonical_mask(matting_backend(rgb), arr.shape[:2])
    except ValueError as exc:
        raise MattingError(f"background removal failed for {asset_id or '<image>'}: {exc}") from None
    alpha = np.floor(mask * 255.0 + 0.5).astype(np.uint8)
    rgba = np.dstack([arr, alpha])
    return Image.fromarray(rgba, mode="RGBA")


def white_background_mask(image: Image.Image, tol: int = 24) -> np.ndarray:
    """Default matting backend: near-white pixels count as background.

    A crude but deterministic stand-in for a real matting model; product
    photos on white sweeps are the common case for store catalogs.
    """
    arr = np.asarray(image.convert("RGB"), dtype=np.int16)
    background = (arr >= 255 - tol).all(axis=2)
    return (~background).astype(np.float64)


def process_backgrounds(
    index: CatalogIndex,
    matting_backend: Callable,
    out_root,
    warnings: Optional[list] = None,
) -> CatalogIndex:
    """Write background-removed RGBA copies of every usable asset.

    Returns a new index rooted at ``out_root`` whose assets carry
    ``has_alpha=True``. Per-asset matting failures exclude that asset with a
    warning instead of aborting the batch.
    """
    out_dir = Path(out_root)
    out_dir.mkdir(parents=True, exist_ok=True)
    out: list[FurnitureAsset] = []
    for asset in index.assets:
        if asset.excluded:
            out.append(asset)
            continue
        target_rel = str(Path(asset.image_path).with_suffix(".png"))
        target = out_dir / target_rel
        try:
            with Image.open(index.image_file(asset)) as im:
                rgba = remove_background(im, matting_backend, asset.asset_id)
            target.parent.mkdir(parents=True, exist_ok=True)
            rgba.save(target, format="PNG")
        except Exception as exc:
            message = f"matting failed on {asset.asset_id}: {exc}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            out.append(replace(asset, excluded=True, exclusion_reason="low_quality"))
            continue
        out.append(replace(asset, image_path=Path(target_rel).as_posix(), has_alpha=True))
    return replace(index, root_path=str(out_dir), assets=tuple(out))


def persist_index(index: CatalogIndex, path) -> None:
    """Write the index archive: JSON manifest + raw float32 embedding block."""
    order = [a.asset_id for a in index.assets if a.asset_id in index.embeddings]
    dim = len(index.embeddings[order[0]].values) if order else 0
    manifest = {
        "format_version": FORMAT_VERSION,
        "store": index.store,
        "root_path": index.root_path,
        "created_at": index.created_at,
        "provider_id": index.provider_id,
        "assets": [a.to_dict() for a in index.assets],
        "embedding_dim": dim,
        "embedding_ids": order,
    }
    block = b"".join(
        np.asarray(index.embeddings[aid].values, dtype="<f4").tobytes() for aid in order
    )
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(target, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(_MANIFEST_NAME, json.dumps(manifest, indent=1, sort_keys=True))
        zf.writestr(_EMBEDDING_BLOCK, block)


def load_index(path) -> CatalogIndex:
    """Read an archive written by :func:`persist_index`; lossless round-trip."""
    target = Path(path)
    try:
        with zipfile.ZipFile(target) as zf:
            manifest = json.loads(zf.read(_MANIFEST_NAME))
            block = zf.read(_EMBEDDING_BLOCK)
    except (zipfile.BadZipFile, KeyError, OSError, json.JSONDecodeError) as exc:
        raise CatalogFormatError(
            f"not a readable catalog archive (expected format version {FORMAT_VERSION}): {target}: {exc}"
        ) from None

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CatalogFormatError(
            f"catalog format version mismatch: archive has {version!r}, this build reads {FORMAT_VERSION}"
        )

    order = manifest["embedding_ids"]
    dim = int(manifest["embedding_dim"])
    if len(block) != 4 * dim * len(order):
        raise CatalogFormatError(
            f"embedding block truncated: {len(block)} bytes for {len(order)} vectors of dim {dim} "
            f"(format version {version})"
        )
    provider_id = manifest["provider_id"]
    flat = np.frombuffer(block, dtype="<f4")
    embeddings = {
        aid: EmbeddingVector(
            values=tuple(float(v) for v in flat[i * dim : (i + 1) * dim]),
            provider_id=provider_id,
        )
        for i, aid in enumerate(order)
    }
    return CatalogIndex(
        store=manifest["store"],
        root_path=manifest["root_path"],
        assets=tuple(FurnitureAsset.from_dict(a) for a in manifest["assets"]),
        embeddings=embeddings,
        created_at=manifest["created_at"],
        provider_id=provider_id,
    )
