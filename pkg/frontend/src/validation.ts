// Client-side mirror of the server request validation: a strict subset of
// the server's rules so nothing valid is blocked and the server stays the
// authority on anything else.

import type { DesignRequest, Labels, Opening, ValidationIssue, WallName } from "./types.js";

export const MIN_DOOR_WIDTH_M = 0.6;
export const MIN_WINDOW_WIDTH_M = 0.3;

export function normalizeLabel(label: string): string {
  return label.trim().toLowerCase().replace(/[\s\-]+/g, "_").replace(/^_+|_+$/g, "");
}

export function denormalizeLabel(label: string): string {
  return normalizeLabel(label).replace(/_/g, " ");
}

export function wallLength(wall: WallName, roomWidthM: number, roomDepthM: number): number {
  return wall === "north" || wall === "south" ? roomWidthM : roomDepthM;
}

function positive(value: number): boolean {
  return Number.isFinite(value) && value > 0;
}

export function validateRequest(request: DesignRequest, labels: Labels): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  if (!positive(request.room_width_m)) {
    issues.push({ field: "room_width_m", message: "width must be a positive number of meters" });
  }
  if (!positive(request.room_depth_m)) {
    issues.push({ field: "room_depth_m", message: "depth must be a positive number of meters" });
  }
  if (!labels.room_types.includes(normalizeLabel(request.room_type))) {
    issues.push({ field: "room_type", message: "pick a room type" });
  }
  if (!labels.styles.includes(normalizeLabel(request.style))) {
    issues.push({ field: "style", message: "pick a style" });
  }
  if (request.furniture_categories.length === 0) {
    issues.push({ field: "furniture_categories", message: "pick at least one furniture category" });
  } else {
    const seen = new Set<string>();
    for (const category of request.furniture_categories) {
      const norm = normalizeLabel(category);
      if (seen.has(norm)) {
        issues.push({ field: "furniture_categories", message: `duplicate category ${category}` });
      }
      seen.add(norm);
    }
  }
  request.openings.forEach((opening, i) => {
    const field = `openings[${i}]`;
    const floor = opening.kind === "door" ? MIN_DOOR_WIDTH_M : MIN_WINDOW_WIDTH_M;
    if (!Number.isFinite(opening.width_m) || opening.width_m < floor) {
      issues.push({ field, message: `${opening.kind} must be at least ${floor} m wide` });
      return;
    }
    if (!Number.isFinite(opening.offset_m) || opening.offset_m < 0) {
      issues.push({ field, message: "offset must be >= 0" });
      return;
    }
    if (positive(request.room_width_m) && positive(request.room_depth_m)) {
      const length = wallLength(opening.wall, request.room_width_m, request.room_depth_m);
      if (opening.offset_m + opening.width_m > length + 1e-9) {
        issues.push({ field, message: `opening exceeds the ${length} m ${opening.wall} wall` });
      }
    }
  });
  if (request.seed !== null && (!Number.isInteger(request.seed) || request.seed < 0)) {
    issues.push({ field: "seed", message: "seed must be a non-negative integer" });
  }
  if (!Number.isInteger(request.items_per_category) || request.items_per_category < 1) {
    issues.push({ field: "items_per_category", message: "items per category must be >= 1" });
  }
  return issues;
}

/** Clamp an opening's offset so it stays fully on its wall (used while dragging). */
export function clampOpening(opening: Opening, roomWidthM: number, roomDepthM: number): Opening {
  const length = wallLength(opening.wall, roomWidthM, roomDepthM);
  const width = Math.min(opening.width_m, length);
  const offset = Math.min(Math.max(opening.offset_m, 0), Math.max(0, length - width));
  return { ...opening, width_m: width, offset_m: round2(offset) };
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}
