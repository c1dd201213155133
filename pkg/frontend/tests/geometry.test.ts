import { describe, expect, it } from "vitest";

import { fitPlan, hitWall, openingRect, openingSpan } from "../src/geometry.js";
import type { Opening } from "../src/types.js";

const W = 4;
const D = 3;

describe("openingSpan", () => {
  // counter-clockwise parameterization, mirroring the rasterizer exactly
  it("north offsets run east from the NW corner", () => {
    const span = openingSpan({ kind: "door", wall: "north", offset_m: 0.5, width_m: 1 }, W, D);
    expect(span).toEqual([0.5, 0, 1.5, 0]);
  });

  it("east offsets run south from the NE corner", () => {
    const span = openingSpan({ kind: "window", wall: "east", offset_m: 1, width_m: 1 }, W, D);
    expect(span).toEqual([4, 1, 4, 2]);
  });

  it("south offsets run west from the SE corner", () => {
    const span = openingSpan({ kind: "window", wall: "south", offset_m: 0, width_m: 1 }, W, D);
    expect(span).toEqual([3, 3, 4, 3]);
  });

  it("west offsets run north from the SW corner", () => {
    const span = openingSpan({ kind: "door", wall: "west", offset_m: 0.5, width_m: 1 }, W, D);
    expect(span).toEqual([0, 1.5, 0, 2.5]);
  });
});

describe("fitPlan", () => {
  it("centers the room and preserves aspect ratio", () => {
    const plan = fitPlan(420, 320, 4, 3);
    const roomW = plan.roomWidthM * plan.scale;
    const roomD = plan.roomDepthM * plan.scale;
    expect(roomW / roomD).toBeCloseTo(4 / 3, 6);
    expect(plan.originX).toBeCloseTo((420 - roomW) / 2, 6);
    expect(plan.originY).toBeCloseTo((320 - roomD) / 2, 6);
  });
});

describe("hitWall", () => {
  const plan = fitPlan(420, 320, W, D);

  it("detects a click on the north wall with its CCW parameter", () => {
    const px = plan.originX + 1.0 * plan.scale;
    const hit = hitWall(px, plan.originY + 2, plan);
    expect(hit?.wall).toBe("north");
    expect(hit?.t).toBeCloseTo(1.0, 2);
  });

  it("detects the west wall measured from the SW corner", () => {
    const py = plan.originY + 1.0 * plan.scale; // 1 m below the north wall
    const hit = hitWall(plan.originX - 2, py, plan);
    expect(hit?.wall).toBe("west");
    expect(hit?.t).toBeCloseTo(D - 1.0, 2);
  });

  it("misses the interior", () => {
    const cx = plan.originX + 2 * plan.scale;
    const cy = plan.originY + 1.5 * plan.scale;
    expect(hitWall(cx, cy, plan)).toBeNull();
  });
});

describe("openingRect", () => {
  it("bar straddles the wall line", () => {
    const plan = fitPlan(420, 320, W, D);
    const opening: Opening = { kind: "door", wall: "north", offset_m: 1, width_m: 1 };
    const rect = openingRect(opening, plan, 10);
    expect(rect.y).toBeCloseTo(plan.originY - 5, 6);
    expect(rect.h).toBe(10);
    expect(rect.w).toBeCloseTo(plan.scale, 6);
  });
});
