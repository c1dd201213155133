from __future__ import annotations

import zipfile
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from decomind.catalog import (
    CatalogConfigError,
    CatalogFormatError,
    CatalogIndex,
    CatalogIngestError,
    MattingError,
    flag_scene_images,
    ingest_catalog,
    load_index,
    persist_index,
    process_backgrounds,
    remove_background,
    white_background_mask,
)
from decomind.core import EmbeddingVector, FurnitureAsset
from decomind.retrieval import StubEmbeddingProvider, index_embeddings

from conftest import solid_png, varied_png


class TestIngest:
    def test_folder_maps_to_category(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        sofas = [a for a in index.assets if a.category == "sofa"]
        assert len(sofas) == 3
        assert all(not a.excluded for a in index.assets)

    def test_corrupt_file_excluded(self, tmp_path):
        root = tmp_path / "cat"
        (root / "sofa").mkdir(parents=True)
        for i in range(4):
            varied_png(root / "sofa" / f"ok_{i}.png", f"s:{i}")
        (root / "sofa" / "broken.png").write_bytes(b"this is not a png")
        index = ingest_catalog(root, "ikea")
        assert len(index.assets) == 5
        excluded = [a for a in index.assets if a.excluded]
        assert len(excluded) == 1
        assert excluded[0].exclusion_reason == "low_quality"
        assert "broken" in excluded[0].asset_id

    def test_ingest_deterministic(self, catalog_tree):
        ids_a = [a.asset_id for a in ingest_catalog(catalog_tree, "ikea").assets]
        ids_b = [a.asset_id for a in ingest_catalog(catalog_tree, "ikea").assets]
        assert ids_a == ids_b

    def test_asset_ids_unique_and_path_derived(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        ids = [a.asset_id for a in index.assets]
        assert len(set(ids)) == len(ids)
        assert "sofa_sofa_0.png" in ids

    def test_split_folders(self, tmp_path):
        root = tmp_path / "cat"
        for split in ("Train", "Validation", "Test"):
            (root / split / "chair").mkdir(parents=True)
            varied_png(root / split / "chair" / "c.png", split)
        index = ingest_catalog(root, "ikea")
        assert sorted(a.source_split for a in index.assets) == ["test", "train", "validation"]
        assert all(a.category == "chair" for a in index.assets)

    def test_category_map_override(self, tmp_path):
        root = tmp_path / "cat"
        (root / "SOFA-3seat").mkdir(parents=True)
        varied_png(root / "SOFA-3seat" / "a.png", "x")
        index = ingest_catalog(root, "ikea", {"SOFA-3seat": "sofa"})
        assert index.assets[0].category == "sofa"

    def test_missing_root_fatal(self, tmp_path):
        with pytest.raises(CatalogConfigError):
            ingest_catalog(tmp_path / "nope", "ikea")

    def test_empty_catalog_fatal(self, tmp_path):
        root = tmp_path / "cat"
        root.mkdir()
        (root / "readme.txt").write_text("no images here")
        with pytest.raises(CatalogIngestError):
            ingest_catalog(root, "ikea")


def _filename_detector(image) -> float:
    name = Path(getattr(image, "filename", "")).name
    return 1.0 if "room" in name else 0.0


class TestSceneFlagging:
    def test_all_zero_detector_excludes_nothing(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        flagged = flag_scene_images(index, lambda img: 0.0)
        assert flagged.assets == index.assets

    def test_single_forced_exclusion(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        target = index.assets[0].asset_id

        def detector(image):
            return 1.0 if Path(image.filename).name == "sofa_0.png" else 0.0

        flagged = flag_scene_images(index, detector, 0.5)
        excluded = [a.asset_id for a in flagged.assets if a.excluded]
        assert any("sofa_0" in aid for aid in excluded)
        assert sum(1 for a in flagged.assets if a.excluded) == 1

    def test_fixture_room_filenames(self, tmp_path):
        # oracle: 3 of the 10 fixture names contain "room"
        root = tmp_path / "cat"
        (root / "misc").mkdir(parents=True)
        names = [
            "chair_1.png",
            "living_room_shot.png",
            "sofa_2.png",
            "bedroom_full.png",
            "table_1.png",
            "desk_1.png",
            "room_overview.png",
            "lamp_1.png",
            "shelf_1.png",
            "stool_1.png",
        ]
        for n in names:
            varied_png(root / "misc" / n, n)
        expected = sum(1 for n in names if "room" in n)
        assert expected == 3
        index = flag_scene_images(ingest_catalog(root, "ikea"), _filename_detector)
        assert sum(1 for a in index.assets if a.exclusion_reason == "scene_image") == expected

    def test_idempotent(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        once = flag_scene_images(index, _filename_detector)
        twice = flag_scene_images(once, _filename_detector)
        assert once.assets == twice.assets

    def test_fail_open_on_detector_error(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        warnings: list[str] = []

        def broken(image):
            raise RuntimeError("model fell over")

        flagged = flag_scene_images(index, broken, warnings=warnings)
        assert all(not a.excluded for a in flagged.assets)
        assert len(warnings) == len(index.assets)

    def test_exclusion_monotone(self, catalog_tree):
        index = ingest_catalog(catalog_tree, "ikea")
        flagged = flag_scene_images(index, lambda img: 1.0)
        again = flag_scene_images(flagged, lambda img: 0.0)
        assert all(a.excluded for a in again.assets)


class TestRemoveBackground:
    def test_identity_mask(self, tmp_path):
        path = solid_png(tmp_path / "a.png", color=(10, 200, 30), size=(12, 9))
        with Image.open(path) as im:
            out = remove_background(im, lambda img: np.ones((9, 12)))
        arr = np.asarray(out)
        assert out.size == (12, 9)
        assert (arr[:, :, 3] == 255).all()
        assert (arr[:, :, :3] == np.asarray([10, 200, 30], dtype=np.uint8)).all()

    def test_zero_mask_fully_transparent(self, tmp_path):
        path = solid_png(tmp_path / "a.png")
        with Image.open(path) as im:
            out = remove_background(im, lambda img: np.zeros((24, 24)))
        assert (np.asarray(out)[:, :, 3] == 0).all()

    def test_half_plane_mask_counts(self, tmp_path):
        path = solid_png(tmp_path / "a.png", size=(10, 10))
        mask = np.zeros((10, 10))
        mask[:, :5] = 1.0
        # oracle: opaque pixel count equals the mask's support
        assert int(mask.sum()) == 50
        with Image.open(path) as im:
            out = remove_background(im, lambda img: mask)
        alpha = np.asarray(out)[:, :, 3]
        assert int(np.count_nonzero(alpha)) == 50

    def test_dimension_mismatch_names_asset(self, tmp_path):
        path = solid_png(tmp_path / "a.png", size=(10, 10))
        with Image.open(path) as im:
            with pytest.raises(MattingError, match="sofa_77"):
                remove_background(im, lambda img: np.ones((5, 5)), asset_id="sofa_77")

    def test_rgb_untouched_under_opaque(self, tmp_path):
        rng = np.random.default_rng(3)
        arr = rng.integers(0, 255, size=(16, 16, 3), dtype=np.uint8)
        Image.fromarray(arr).save(tmp_path / "a.png")
        mask = rng.integers(0, 2, size=(16, 16)).astype(float)
        with Image.open(tmp_path / "a.png") as im:
            out = np.asarray(remove_background(im, lambda img: mask))
        assert out.shape == (16, 16, 4)
        assert (out[:, :, :3] == arr).all()  # everywhere, not just opaque

    def test_white_background_heuristic(self, tmp_path):
        arr = np.full((8, 8, 3), 255, dtype=np.uint8)
        arr[2:6, 2:6] = (80, 90, 100)
        Image.fromarray(arr).save(tmp_path / "w.png")
        with Image.open(tmp_path / "w.png") as im:
            mask = white_background_mask(im)
        assert mask[0, 0] == 0.0
        assert mask[3, 3] == 1.0

    def test_process_backgrounds_writes_rgba(self, catalog_tree, tmp_path):
        index = ingest_catalog(catalog_tree, "ikea")
        out = process_backgrounds(index, white_background_mask, tmp_path / "processed")
        assert all(a.has_alpha for a in out.non_excluded())
        sample = out.non_excluded()[0]
        with Image.open(out.image_file(sample)) as im:
            assert im.mode == "RGBA"


def _synthetic_index(n_assets: int, dim: int = 16) -> CatalogIndex:
    provider = StubEmbeddingProvider(dim)
    assets = []
    embeddings = {}
    for i in range(n_assets):
        aid = f"asset_{i:04d}.png"
        assets.append(FurnitureAsset(asset_id=aid, category="sofa", image_path=aid))
        embeddings[aid] = provider.embed_text(aid)
    return CatalogIndex(
        store="ikea",
        root_path="/nonexistent",
        assets=tuple(assets),
        embeddings=embeddings,
        created_at="2026-08-09T00:00:00+00:00",
        provider_id=provider.provider_id,
    )


class TestPersistLoad:
    def test_round_trip_two_assets(self, tmp_path):
        index = _synthetic_index(2)
        persist_index(index, tmp_path / "c.dmc")
        loaded = load_index(tmp_path / "c.dmc")
        assert loaded.store == index.store
        assert loaded.root_path == index.root_path
        assert loaded.created_at == index.created_at
        assert loaded.provider_id == index.provider_id
        assert loaded.assets == index.assets
        assert loaded.embeddings == index.embeddings  # bit-exact values

    def test_empty_file_version_error(self, tmp_path):
        target = tmp_path / "c.dmc"
        target.write_bytes(b"")
        with pytest.raises(CatalogFormatError, match="format version"):
            load_index(target)

    def test_version_mismatch(self, tmp_path):
        index = _synthetic_index(1)
        target = tmp_path / "c.dmc"
        persist_index(index, target)
        import json

        with zipfile.ZipFile(target) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            block = zf.read("embeddings.f32")
        manifest["format_version"] = 99
        with zipfile.ZipFile(target, "w") as zf:
            zf.writestr("manifest.json", json.dumps(manifest))
            zf.writestr("embeddings.f32", block)
        with pytest.raises(CatalogFormatError, match="99"):
            load_index(target)

    def test_truncated_block(self, tmp_path):
        index = _synthetic_index(3)
        target = tmp_path / "c.dmc"
        persist_index(index, target)
        import json

        with zipfile.ZipFile(target) as zf:
            manifest = zf.read("manifest.json")
            block = zf.read("embeddings.f32")
        with zipfile.ZipFile(target, "w") as zf:
            zf.writestr("manifest.json", manifest)
            zf.writestr("embeddings.f32", block[:-5])
        with pytest.raises(CatalogFormatError, match="truncated"):
            load_index(target)

    def test_large_round_trip_preserves_norms(self, tmp_path):
        index = _synthetic_index(200, dim=32)
        persist_index(index, tmp_path / "c.dmc")
        loaded = load_index(tmp_path / "c.dmc")
        for vec in loaded.embeddings.values():
            assert abs(vec.norm() - 1.0) <= 1e-6
        assert loaded.embeddings == index.embeddings
