"""Optional smoke test against a real generation sidecar.

Point DECOMIND_REAL_BACKEND_URL at a running sidecar (any server speaking the
POST /generate + GET /health protocol, e.g. a GPU box wrapping a diffusion
model) and run this module. Skipped everywhere else: generative quality is
covered property-based elsewhere, desk machines carry no model weights.
"""
from __future__ import annotations

import os

import pytest

from decomind.core import DesignRequest, FurnitureSelection, RankedPick
from decomind.generation import GenerationParams, HttpBackend, generate, probe_backend
from decomind.layout import compose_layout, place_furniture
from decomind.promptgen import build_prompt

URL = os.environ.get("DECOMIND_REAL_BACKEND_URL")

pytestmark = pytest.mark.skipif(
    not URL, reason="set DECOMIND_REAL_BACKEND_URL to a sidecar to run the smoke test"
)


def test_real_backend_round_trip():
    backend = HttpBackend(URL)
    probe = probe_backend(backend)
    assert probe.status == "healthy", probe

    request = DesignRequest(
        room_type="bedroom",
        style="modern",
        room_width_m=4.0,
        room_depth_m=3.0,
        furniture_categories=("bed", "wardrobe"),
        seed=1,
    )
    selection = FurnitureSelection(
        picks={"bed": (RankedPick("bed_0", 0.9),), "wardrobe": (RankedPick("w_0", 0.8),)}
    )
    plan = place_furniture(request, selection)
    layout = compose_layout(request, plan.placements, 100)
    prompt = build_prompt(request, selection)
    design = generate(prompt, layout, GenerationParams(seed=1), backend)
    assert design.image.shape == (512, 512, 3)
    assert design.backend_id.startswith("http")
