import { describe, expect, it } from "vitest";

import { emptyRequest, type DesignRequest, type Labels } from "../src/types.js";
import { clampOpening, normalizeLabel, validateRequest, wallLength } from "../src/validation.js";

const LABELS: Labels = {
  room_types: ["bedroom", "living_room", "kitchen", "dining_room"],
  styles: ["modern", "classic", "minimalist"],
};

function validRequest(): DesignRequest {
  return {
    ...emptyRequest(),
    room_type: "bedroom",
    style: "modern",
    room_width_m: 4,
    room_depth_m: 3,
    furniture_categories: ["bed", "wardrobe"],
  };
}

describe("normalizeLabel", () => {
  it("matches the server normalization", () => {
    expect(normalizeLabel("Dining Room")).toBe("dining_room");
    expect(normalizeLabel("  living-room ")).toBe("living_room");
  });
});

describe("validateRequest", () => {
  it("accepts a valid request", () => {
    expect(validateRequest(validRequest(), LABELS)).toEqual([]);
  });

  it("rejects non-positive dimensions by field", () => {
    const issues = validateRequest({ ...validRequest(), room_width_m: 0 }, LABELS);
    expect(issues.map((i) => i.field)).toContain("room_width_m");
  });

  it("rejects empty categories", () => {
    const issues = validateRequest({ ...validRequest(), furniture_categories: [] }, LABELS);
    expect(issues.map((i) => i.field)).toContain("furniture_categories");
  });

  it("rejects duplicate categories", () => {
    const issues = validateRequest(
      { ...validRequest(), furniture_categories: ["bed", "Bed"] },
      LABELS,
    );
    expect(issues.map((i) => i.field)).toContain("furniture_categories");
  });

  it("enforces opening floors and wall bounds", () => {
    const base = validRequest();
    const narrowDoor = validateRequest(
      { ...base, openings: [{ kind: "door", wall: "north", offset_m: 0, width_m: 0.5 }] },
      LABELS,
    );
    expect(narrowDoor.map((i) => i.field)).toContain("openings[0]");

    const overflow = validateRequest(
      { ...base, openings: [{ kind: "door", wall: "north", offset_m: 3.5, width_m: 1.0 }] },
      LABELS,
    );
    expect(overflow.map((i) => i.field)).toContain("openings[0]");

    const fits = validateRequest(
      { ...base, openings: [{ kind: "door", wall: "north", offset_m: 3.0, width_m: 1.0 }] },
      LABELS,
    );
    expect(fits).toEqual([]);
  });

  it("rejects unknown labels", () => {
    const issues = validateRequest({ ...validRequest(), room_type: "garage" }, LABELS);
    expect(issues.map((i) => i.field)).toContain("room_type");
  });

  it("rejects negative seeds", () => {
    const issues = validateRequest({ ...validRequest(), seed: -3 }, LABELS);
    expect(issues.map((i) => i.field)).toContain("seed");
  });
});

describe("clampOpening", () => {
  it("clamps a dragged opening to its wall", () => {
    const clamped = clampOpening(
      { kind: "door", wall: "north", offset_m: 3.8, width_m: 1.0 },
      4,
      3,
    );
    expect(clamped.offset_m).toBe(3.0);
    const negative = clampOpening({ kind: "door", wall: "east", offset_m: -2, width_m: 1.0 }, 4, 3);
    expect(negative.offset_m).toBe(0);
  });

  it("uses the right wall length", () => {
    expect(wallLength("east", 4, 3)).toBe(3);
    const clamped = clampOpening({ kind: "window", wall: "east", offset_m: 2.9, width_m: 1.0 }, 4, 3);
    expect(clamped.offset_m).toBe(2.0);
  });
});
