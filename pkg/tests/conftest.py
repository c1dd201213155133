from __future__ import annotations

import hashlib

import numpy as np
import pytest
from PIL import Image

from decomind.core import DesignRequest


def solid_png(path, color=(200, 60, 30), size=(24, 24)):
    arr = np.full((size[1], size[0], 3), color, dtype=np.uint8)
    Image.fromarray(arr).save(path)
    return path


def varied_png(path, key: str, size=(24, 24)):
    """Deterministic distinct image per key."""
    digest = hashlib.sha256(key.encode()).digest()
    color = tuple(int(b) for b in digest[:3])
    return solid_png(path, color=color, size=size)


@pytest.fixture
def catalog_tree(tmp_path):
    """Small two-category image tree: 3 sofas, 2 beds."""
    root = tmp_path / "catalog"
    for cat, count in (("sofa", 3), ("bed", 2)):
        (root / cat).mkdir(parents=True)
        for i in range(count):
            varied_png(root / cat / f"{cat}_{i}.png", f"{cat}:{i}")
    return root


@pytest.fixture
def basic_request():
    return DesignRequest(
        room_type="bedroom",
        style="modern",
        room_width_m=4.0,
        room_depth_m=3.0,
        furniture_categories=("bed", "wardrobe"),
        seed=7,
    )
