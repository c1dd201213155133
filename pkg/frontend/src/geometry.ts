// Floor-plan geometry shared by the preview canvas and its hit-testing.
//
// Room coordinates mirror the server: origin at the north-west corner,
// x east, y south, meters. Walking the boundary counter-clockwise in those
// coordinates visits north, east, south, west; each wall's opening offset is
// measured from its counter-clockwise start corner (north: NW, east: NE,
// south: SE, west: SW).

import type { Opening, WallName } from "./types.js";
import { wallLength } from "./validation.js";

export interface PxRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PlanTransform {
  originX: number;
  originY: number;
  scale: number; // px per meter
  roomWidthM: number;
  roomDepthM: number;
}

/** Fit the room into a canvas with a margin; pure function of its inputs. */
export function fitPlan(
  canvasW: number,
  canvasH: number,
  roomWidthM: number,
  roomDepthM: number,
  marginPx = 24,
): PlanTransform {
  const usableW = Math.max(1, canvasW - 2 * marginPx);
  const usableH = Math.max(1, canvasH - 2 * marginPx);
  const scale = Math.min(usableW / roomWidthM, usableH / roomDepthM);
  return {
    originX: (canvasW - roomWidthM * scale) / 2,
    originY: (canvasH - roomDepthM * scale) / 2,
    scale,
    roomWidthM,
    roomDepthM,
  };
}

/** Span of an opening in room coordinates: [x0, y0, x1, y1] on its wall line. */
export function openingSpan(
  opening: Opening,
  roomWidthM: number,
  roomDepthM: number,
): [number, number, number, number] {
  const t0 = opening.offset_m;
  const t1 = opening.offset_m + opening.width_m;
  switch (opening.wall) {
    case "north":
      return [t0, 0, t1, 0];
    case "east":
      return [roomWidthM, t0, roomWidthM, t1];
    case "south":
      return [roomWidthM - t1, roomDepthM, roomWidthM - t0, roomDepthM];
    case "west":
      return [0, roomDepthM - t1, 0, roomDepthM - t0];
  }
}

/** Canvas rectangle of an opening bar (thickness straddles the wall line). */
export function openingRect(opening: Opening, plan: PlanTransform, thicknessPx = 10): PxRect {
  const [x0, y0, x1, y1] = openingSpan(opening, plan.roomWidthM, plan.roomDepthM);
  const ax = plan.originX + x0 * plan.scale;
  const ay = plan.originY + y0 * plan.scale;
  const bx = plan.originX + x1 * plan.scale;
  const by = plan.originY + y1 * plan.scale;
  if (opening.wall === "north" || opening.wall === "south") {
    return { x: ax, y: ay - thicknessPx / 2, w: bx - ax, h: thicknessPx };
  }
  return { x: ax - thicknessPx / 2, y: ay, w: thicknessPx, h: by - ay };
}

export interface WallHit {
  wall: WallName;
  /** position along the wall in its counter-clockwise parameterization, meters */
  t: number;
}

/** Which wall (if any) a canvas point is near, and where along it. */
export function hitWall(px: number, py: number, plan: PlanTransform, tolPx = 12): WallHit | null {
  const xM = (px - plan.originX) / plan.scale;
  const yM = (py - plan.originY) / plan.scale;
  const tolM = tolPx / plan.scale;
  const { roomWidthM: w, roomDepthM: d } = plan;
  const inX = xM >= -tolM && xM <= w + tolM;
  const inY = yM >= -tolM && yM <= d + tolM;
  const candidates: Array<{ wall: WallName; dist: number; t: number }> = [];
  if (inX) {
    candidates.push({ wall: "north", dist: Math.abs(yM), t: xM });
    candidates.push({ wall: "south", dist: Math.abs(yM - d), t: w - xM });
  }
  if (inY) {
    candidates.push({ wall: "east", dist: Math.abs(xM - w), t: yM });
    candidates.push({ wall: "west", dist: Math.abs(xM), t: d - yM });
  }
  let best: { wall: WallName; dist: number; t: number } | null = null;
  for (const c of candidates) {
    if (c.dist <= tolM && (best === null || c.dist < best.dist)) {
      best = c;
    }
  }
  if (!best) return null;
  const length = wallLength(best.wall, w, d);
  return { wall: best.wall, t: Math.min(Math.max(best.t, 0), length) };
}

export function pointInRect(px: number, py: number, rect: PxRect): boolean {
  return px >= rect.x && px <= rect.x + rect.w && py >= rect.y && py <= rect.y + rect.h;
}
