from __future__ import annotations

import re

from decomind.core import DesignRequest, FurnitureSelection, RankedPick
from decomind.promptgen import DEFAULT_NEGATIVE, TEMPLATE_VERSION, build_prompt, prompt_bundle_hash


def _request(style="modern", room="bedroom", categories=("bed", "wardrobe")):
    return DesignRequest(
        room_type=room,
        style=style,
        room_width_m=4.0,
        room_depth_m=3.0,
        furniture_categories=tuple(categories),
    )


def _selection(categories):
    return FurnitureSelection(picks={c: (RankedPick(f"{c}_0", 0.9),) for c in categories})


def phrase_count(text: str, phrase: str) -> int:
    """Whole-word occurrences, so 'bed' does not match inside 'bedroom'."""
    return len(re.findall(rf"\b{re.escape(phrase)}\b", text))


class TestBuildPrompt:
    def test_contains_labels_and_dimensions(self):
        bundle = build_prompt(_request(), _selection(("bed", "wardrobe")))
        assert "modern" in bundle.positive
        assert "bedroom" in bundle.positive
        assert "4m by 3m" in bundle.positive
        assert phrase_count(bundle.positive, "bed") == 1
        assert phrase_count(bundle.positive, "wardrobe") == 1
        assert "furniture from ikea" in bundle.positive

    def test_correction_clause_verbatim(self):
        bundle = build_prompt(_request(), _selection(("bed",)))
        assert "imagine and correct the viewing angles of the furniture" in bundle.positive
        assert "feel free to add more items to complete the design" in bundle.positive

    def test_each_category_exactly_once(self):
        categories = ("bed", "dining_table", "floor_lamp")
        bundle = build_prompt(_request(categories=categories), _selection(categories))
        for category in ("bed", "dining table", "floor lamp"):
            assert phrase_count(bundle.positive, category) == 1, category

    def test_deterministic(self):
        a = build_prompt(_request(), _selection(("bed", "wardrobe")))
        b = build_prompt(_request(), _selection(("bed", "wardrobe")))
        assert a == b
        assert prompt_bundle_hash(a) == prompt_bundle_hash(b)

    def test_metadata(self):
        req = _request()
        sel = _selection(("bed", "wardrobe"))
        bundle = build_prompt(req, sel)
        assert bundle.metadata["template_version"] == TEMPLATE_VERSION
        assert bundle.metadata["request_hash"] == req.request_hash()
        assert bundle.metadata["selection_hash"] == sel.selection_hash()

    def test_style_injectivity(self):
        sel = _selection(("bed",))
        modern = build_prompt(_request(style="modern"), sel)
        classic = build_prompt(_request(style="classic"), sel)
        assert modern.positive != classic.positive
        assert modern.positive.replace("modern", "classic", 1) == classic.positive
        assert modern.negative == classic.negative

    def test_negative_default_and_no_leakage(self):
        req = _request(categories=("bed", "wardrobe"))
        bundle = build_prompt(req, _selection(req.furniture_categories))
        assert bundle.negative == DEFAULT_NEGATIVE
        for label in ("modern", "bedroom", "bed", "wardrobe"):
            assert phrase_count(bundle.negative, label) == 0

    def test_empty_selection_still_valid_with_warning(self):
        warnings: list[str] = []
        req = _request(categories=("bed", "wardrobe"))
        empty = FurnitureSelection(picks={"bed": (), "wardrobe": ()})
        bundle = build_prompt(req, empty, warnings=warnings)
        assert phrase_count(bundle.positive, "bed") == 1
        assert phrase_count(bundle.positive, "wardrobe") == 1
        assert warnings

    def test_fractional_meters_formatting(self):
        req = DesignRequest(
            room_type="bedroom",
            style="modern",
            room_width_m=3.5,
            room_depth_m=2.25,
            furniture_categories=("bed",),
        )
        bundle = build_prompt(req, _selection(("bed",)))
        assert "3.5m by 2.25m" in bundle.positive

    def test_single_category_list(self):
        bundle = build_prompt(_request(categories=("bed",)), _selection(("bed",)))
        assert "containing a bed," in bundle.positive
