"""Floor-plan construction: furniture placement and the conditioning image.

Placement is a greedy, fully deterministic heuristic (largest items first,
walls before interior); the rasterizer is a pure function of its inputs and
always produces byte-identical PNGs for identical inputs.

Room coordinates: origin at the north-west corner, x east, y south, meters.
Walking the boundary counter-clockwise (positive shoelace orientation in
these coordinates) visits north, east, south, west; each wall is parameterized
from its counter-clockwise start corner, matching the Opening convention.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from . import raster
from .core import DesignRequest, FurnitureSelection, denormalize_label, normalize_label, wall_length

logger = logging.getLogger(__name__)

DEFAULT_FOOTPRINTS: dict[str, tuple[float, float]] = {
    "bed": (1.6, 2.0),
    "sofa": (2.0, 0.9),
    "table": (1.2, 0.8),
    "wardrobe": (1.5, 0.6),
    "dining_table": (1.6, 0.9),
    "desk": (1.2, 0.6),
    "chair": (0.5, 0.5),
    "armchair": (0.8, 0.8),
    "bookshelf": (0.8, 0.3),
    "dresser": (1.2, 0.5),
    "nightstand": (0.5, 0.4),
    "coffee_table": (1.0, 0.6),
    "tv_stand": (1.5, 0.4),
    "kitchen_island": (1.8, 0.9),
}
FALLBACK_FOOTPRINT = (1.0, 1.0)

OPENING_CLEARANCE_M = 0.1
INTERIOR_GRID_M = 0.5
DEFAULT_PIXELS_PER_M = 100
MAX_IMAGE_SIDE_PX = 1024
_WALL_ORDER = ("north", "east", "south", "west")  # counter-clockwise from north
_EPS = 1e-9

LEGEND: dict[str, tuple[int, int, int]] = {
    "background": (255, 255, 255),
    "room_boundary": (0, 0, 0),
    "door": (150, 75, 0),
    "window": (0, 120, 255),
    "furniture_fill": (90, 90, 90),
    "furniture_outline": (0, 0, 0),
    "furniture_label": (0, 0, 0),
}
BOUNDARY_PX = 3
OPENING_BAR_PX = 5


class LayoutError(Exception):
    pass


@dataclass(frozen=True)
class Placement:
    """Axis-aligned footprint of one placed item, in room coordinates."""

    asset_id: str
    category: str
    x_m: float
    y_m: float
    w_m: float
    d_m: float
    wall_anchor: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "category": self.category,
            "x_m": self.x_m,
            "y_m": self.y_m,
            "w_m": self.w_m,
            "d_m": self.d_m,
            "wall_anchor": self.wall_anchor,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Placement":
        return cls(
            asset_id=str(data["asset_id"]),
            category=str(data["category"]),
            x_m=float(data["x_m"]),
            y_m=float(data["y_m"]),
            w_m=float(data["w_m"]),
            d_m=float(data["d_m"]),
            wall_anchor=data.get("wall_anchor"),
        )


@dataclass(frozen=True)
class UnplacedItem:
    asset_id: str
    category: str
    reason: str

    def to_dict(self) -> dict:
        return {"asset_id": self.asset_id, "category": self.category, "reason": self.reason}


@dataclass(frozen=True)
class PlacementPlan:
    """Placements plus an explicit report of anything that did not fit."""

    placements: tuple[Placement, ...]
    unplaced: tuple[UnplacedItem, ...] = ()

    def to_dict(self) -> dict:
        return {
            "placements": [p.to_dict() for p in self.placements],
            "unplaced": [u.to_dict() for u in self.unplaced],
        }


@dataclass(eq=False)
class ControlLayout:
    """The rasterized conditioning image plus the placements that produced it."""

    image: np.ndarray
    pixels_per_m: int
    placements: tuple[Placement, ...]
    legend: Mapping[str, tuple[int, int, int]]

    def png_bytes(self) -> bytes:
        return raster.encode_png(self.image)

    def sidecar(self) -> dict:
        return {
            "pixels_per_m": self.pixels_per_m,
            "legend": {k: list(v) for k, v in self.legend.items()},
            "placements": [p.to_dict() for p in self.placements],
        }


def default_footprint(
    category: str,
    table: Optional[Mapping[str, tuple[float, float]]] = None,
    warnings: Optional[list] = None,
) -> tuple[float, float]:
    """Footprint (width, depth) in meters for a category; unknown falls back to 1x1."""
    lookup = dict(DEFAULT_FOOTPRINTS)
    if table:
        lookup.update({normalize_label(k): (float(v[0]), float(v[1])) for k, v in table.items()})
    key = normalize_label(category)
    if key in lookup:
        return lookup[key]
    message = f"no footprint configured for {category!r}, using fallback {FALLBACK_FOOTPRINT}"
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)
    return FALLBACK_FOOTPRINT


def _opening_interval(opening, room_w: float, room_d: float) -> tuple[str, float, float]:
    """Opening span in its wall's counter-clockwise parameterization."""
    return opening.wall, opening.offset_m, opening.offset_m + opening.width_m


def _project_onto_wall(
    wall: str, rect: tuple[float, float, float, float], depth: float, room_w: float, room_d: float
) -> Optional[tuple[float, float]]:
    """Interval of the wall parameter blocked by ``rect`` for an item of ``depth``.

    Only rectangles intersecting the depth band along the wall block anything.
    Intervals are expressed from the wall's counter-clockwise start corner.
    """
    x, y, w, d = rect
    if wall == "north":
        if y < depth - _EPS:
            return (x, x + w)
    elif wall == "east":
        if x + w > room_w - depth + _EPS:
            return (y, y + d)
    elif wall == "south":
        if y + d > room_d - depth + _EPS:
            return (room_w - (x + w), room_w - x)
    elif wall == "west":
        if x < depth - _EPS:
            return (room_d - (y + d), room_d - y)
    return None


def _free_segments(length: float, blocked: list[tuple[float, float]]) -> list[tuple[float, float]]:
    clipped = sorted(
        (max(0.0, lo), min(length, hi)) for lo, hi in blocked if hi > 0 and lo < length
    )
    free: list[tuple[float, float]] = []
    cursor = 0.0
    for lo, hi in clipped:
        if lo > cursor + _EPS:
            free.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < length - _EPS:
        free.append((cursor, length))
    return free


def _anchored_rect(
    wall: str, t0: float, along: float, depth: float, room_w: float, room_d: float
) -> tuple[float, float, float, float]:
    if wall == "north":
        return (t0, 0.0, along, depth)
    if wall == "east":
        return (room_w - depth, t0, depth, along)
    if wall == "south":
        return (room_w - t0 - along, room_d - depth, along, depth)
    if wall == "west":
        return (0.0, room_d - t0 - along, depth, along)
    raise ValueError(wall)


def _rects_overlap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> bool:
    """Open-interior intersection; shared edges do not count."""
    return (
        a[0] < b[0] + b[2] - _EPS
        and b[0] < a[0] + a[2] - _EPS
        and a[1] < b[1] + b[3] - _EPS
        and b[1] < a[1] + a[3] - _EPS
    )


def _try_wall(request, placed: list[Placement], fw: float, fd: float):
    """Best wall slot for an item of footprint (fw, fd): the longest free segment.

    Free segments exclude opening spans (with clearance) and the wall
    projections of everything already placed within the item's depth band.
    Ties prefer counter-clockwise wall order starting north, then the segment
    closer to the wall's start corner. Returns (wall, t0) or None.
    """
    room_w, room_d = request.room_width_m, request.room_depth_m
    best = None  # (-seg_len, wall_idx, t0)
    for wall_idx, wall in enumerate(_WALL_ORDER):
        length = wall_length(wall, room_w, room_d)
        depth_limit = room_d if wall in ("north", "south") else room_w
        if fd > depth_limit + _EPS or fw > length + _EPS:
            continue
        blocked: list[tuple[float, float]] = []
        for opening in request.openings:
            if opening.wall != wall:
                continue
            _, lo, hi = _opening_interval(opening, room_w, room_d)
            blocked.append((lo - OPENING_CLEARANCE_M, hi + OPENING_CLEARANCE_M))
        for p in placed:
            interval = _project_onto_wall(wall, (p.x_m, p.y_m, p.w_m, p.d_m), fd, room_w, room_d)
            if interval is not None:
                blocked.append(interval)
        for lo, hi in _free_segments(length, blocked):
            seg_len = hi - lo
            if seg_len + _EPS < fw:
                continue
            key = (-seg_len, wall_idx, lo)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return _WALL_ORDER[best[1]], best[2]


def _try_interior(request, placed: list[Placement], fw: float, fd: float):
    """First free cell on the interior grid, scanning row-major from the origin."""
    room_w, room_d = request.room_width_m, request.room_depth_m
    y = 0.0
    row = 0
    while y + fd <= room_d + _EPS:
        x = 0.0
        col = 0
        while x + fw <= room_w + _EPS:
            rect = (x, y, fw, fd)
            if not any(_rects_overlap(rect, (p.x_m, p.y_m, p.w_m, p.d_m)) for p in placed):
                return (x, y)
            col += 1
            x = col * INTERIOR_GRID_M
        row += 1
        y = row * INTERIOR_GRID_M
    return None


def place_furniture(
    request: DesignRequest,
    selection: FurnitureSelection,
    footprints: Optional[Mapping[str, tuple[float, float]]] = None,
    warnings: Optional[list] = None,
) -> PlacementPlan:
    """Greedy wall-first placement of every selected item.

    Items are processed by footprint area descending (ties by category then
    asset id). Each is anchored to the longest free wall segment that fits it,
    its width running along the wall; items that fit no wall go to the first
    free interior grid cell. Anything that fits nowhere is reported, never
    dropped.
    """
    items: list[tuple[str, str, float, float]] = []
    for category in request.furniture_categories:
        for pick in selection.picks.get(category, ()):
            fw, fd = default_footprint(category, footprints, warnings)
            items.append((category, pick.asset_id, fw, fd))
    items.sort(key=lambda it: (-(it[2] * it[3]), it[0], it[1]))

    placed: list[Placement] = []
    unplaced: list[UnplacedItem] = []
    for category, asset_id, fw, fd in items:
        slot = _try_wall(request, placed, fw, fd)
        if slot is not None:
            wall, t0 = slot
            x, y, w, d = _anchored_rect(
                wall, t0, fw, fd, request.room_width_m, request.room_depth_m
            )
            placed.append(Placement(asset_id, category, x, y, w, d, wall_anchor=wall))
            continue
        cell = _try_interior(request, placed, fw, fd)
        if cell is not None:
            placed.append(Placement(asset_id, category, cell[0], cell[1], fw, fd))
            continue
        unplaced.append(
            UnplacedItem(asset_id, category, f"no wall segment or interior cell fits {fw}x{fd} m")
        )
    return PlacementPlan(tuple(placed), tuple(unplaced))


def _effective_ppm(room_w: float, room_d: float, pixels_per_m: int) -> int:
    ppm = int(pixels_per_m)
    if ppm < 1:
        raise LayoutError(f"pixels_per_m must be positive, got {pixels_per_m}")
    cap = int(MAX_IMAGE_SIDE_PX // max(room_w, room_d))
    if cap < 1:
        raise LayoutError(f"room {room_w}x{room_d} m too large to rasterize within {MAX_IMAGE_SIDE_PX} px")
    return min(ppm, cap)


def _opening_bar_px(wall: str, lo: float, hi: float, ppm: int, wpx: int, hpx: int):
    """Pixel rectangle of an opening bar, lying on the wall band."""
    t0, t1 = raster.px(lo * ppm), raster.px(hi * ppm)
    if wall == "north":
        return (t0, 0, t1, OPENING_BAR_PX)
    if wall == "east":
        return (wpx - OPENING_BAR_PX, t0, wpx, t1)
    if wall == "south":
        return (wpx - t1, hpx - OPENING_BAR_PX, wpx - t0, hpx)
    if wall == "west":
        return (0, hpx - t1, OPENING_BAR_PX, hpx - t0)
    raise ValueError(wall)


def placement_px_bounds(p: Placement, ppm: int) -> tuple[int, int, int, int]:
    """Half-open pixel bounds of a placement footprint."""
    return (
        raster.px(p.x_m * ppm),
        raster.px(p.y_m * ppm),
        raster.px((p.x_m + p.w_m) * ppm),
        raster.px((p.y_m + p.d_m) * ppm),
    )


def compose_layout(
    request: DesignRequest,
    placements: Sequence[Placement],
    pixels_per_m: int = DEFAULT_PIXELS_PER_M,
) -> ControlLayout:
    """Rasterize room boundary, openings, and footprints into the control image.

    Referentially transparent: identical inputs yield byte-identical images.
    ``pixels_per_m`` is clamped so the longest side stays within 1024 px; the
    value actually used is recorded on the returned layout.
    """
    room_w, room_d = request.room_width_m, request.room_depth_m
    ppm = _effective_ppm(room_w, room_d, pixels_per_m)
    wpx, hpx = raster.px(room_w * ppm), raster.px(room_d * ppm)
    if wpx < 1 or hpx < 1:
        raise LayoutError(f"degenerate image size {wpx}x{hpx} for room {room_w}x{room_d} m")

    img = raster.new_canvas(wpx, hpx, LEGEND["background"])

    # Room boundary: 3-px band along the image edge.
    b = BOUNDARY_PX
    raster.fill_rect(img, 0, 0, wpx, b, LEGEND["room_boundary"])
    raster.fill_rect(img, 0, hpx - b, wpx, hpx, LEGEND["room_boundary"])
    raster.fill_rect(img, 0, 0, b, hpx, LEGEND["room_boundary"])
    raster.fill_rect(img, wpx - b, 0, wpx, hpx, LEGEND["room_boundary"])

    # Furniture: gray fill, 1-px outline just outside the footprint, label inside.
    for p in placements:
        x0, y0, x1, y1 = placement_px_bounds(p, ppm)
        raster.fill_rect(img, x0, y0, x1, y1, LEGEND["furniture_fill"])
        raster.stroke_rect(img, x0 - 1, y0 - 1, x1 + 1, y1 + 1, LEGEND["furniture_outline"])
        label = denormalize_label(p.category)
        raster.draw_text(
            img, x0 + 2, y0 + 2, label, LEGEND["furniture_label"], clip=(x0, y0, x1, y1)
        )

    # Openings last: structural cues must stay visible in the conditioning image.
    for opening in request.openings:
        wall, lo, hi = _opening_interval(opening, room_w, room_d)
        bar = _opening_bar_px(wall, lo, hi, ppm, wpx, hpx)
        raster.fill_rect(img, *bar, LEGEND[opening.kind])

    return ControlLayout(image=img, pixels_per_m=ppm, placements=tuple(placements), legend=dict(LEGEND))
