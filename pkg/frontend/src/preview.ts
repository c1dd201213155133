// Live top-down floor-plan preview with click-to-place, drag-to-move openings.
// Pure view over the form state: every redraw derives from the current values,
// so the preview can never go stale.

import { fitPlan, hitWall, openingRect, pointInRect, type PlanTransform } from "./geometry.js";
import type { Opening, OpeningKind } from "./types.js";
import { clampOpening, MIN_DOOR_WIDTH_M, MIN_WINDOW_WIDTH_M } from "./validation.js";

const COLORS = {
  background: "#ffffff",
  boundary: "#111111",
  door: "rgb(150,75,0)",
  window: "rgb(0,120,255)",
  selected: "#f59e0b",
  grid: "#eeeeee",
  label: "#555555",
};

export interface PreviewState {
  roomWidthM: number;
  roomDepthM: number;
  openings: Opening[];
}

export class FloorPlanPreview {
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null;
  private state: PreviewState = { roomWidthM: 4, roomDepthM: 3, openings: [] };
  private plan: PlanTransform | null = null;
  private draggingIndex: number | null = null;
  private pendingKind: OpeningKind | null = null;

  /** Called with the full opening list after any placement or drag. */
  onOpeningsChange: (openings: Opening[]) => void = () => {};

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
    this.ctx = canvas.getContext("2d");
    canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    window.addEventListener("pointerup", () => this.onPointerUp());
  }

  /** Arm click-to-place: the next wall click adds an opening of this kind. */
  armPlacement(kind: OpeningKind | null): void {
    this.pendingKind = kind;
    this.canvas.style.cursor = kind ? "crosshair" : "default";
  }

  get armed(): OpeningKind | null {
    return this.pendingKind;
  }

  update(state: PreviewState): void {
    this.state = {
      roomWidthM: state.roomWidthM,
      roomDepthM: state.roomDepthM,
      openings: state.openings.map((o) => ({ ...o })),
    };
    // hit-testing must work even where canvas painting is unavailable (jsdom)
    this.plan = this.valid()
      ? fitPlan(this.canvas.width, this.canvas.height, this.state.roomWidthM, this.state.roomDepthM)
      : null;
    this.render();
  }

  private valid(): boolean {
    return (
      Number.isFinite(this.state.roomWidthM) &&
      this.state.roomWidthM > 0 &&
      Number.isFinite(this.state.roomDepthM) &&
      this.state.roomDepthM > 0
    );
  }

  render(): void {
    const ctx = this.ctx;
    if (!ctx) return; // headless environments skip painting only
    const { width, height } = this.canvas;
    ctx.fillStyle = COLORS.background;
    ctx.fillRect(0, 0, width, height);
    if (!this.plan) {
      ctx.fillStyle = COLORS.label;
      ctx.fillText("enter room dimensions", 12, 20);
      return;
    }
    const plan = this.plan;

    const roomW = plan.roomWidthM * plan.scale;
    const roomD = plan.roomDepthM * plan.scale;
    ctx.strokeStyle = COLORS.boundary;
    ctx.lineWidth = 3;
    ctx.strokeRect(plan.originX, plan.originY, roomW, roomD);

    for (let i = 0; i < this.state.openings.length; i++) {
      const opening = this.state.openings[i];
      const rect = openingRect(opening, plan);
      ctx.fillStyle = opening.kind === "door" ? COLORS.door : COLORS.window;
      ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
      if (i === this.draggingIndex) {
        ctx.strokeStyle = COLORS.selected;
        ctx.lineWidth = 2;
        ctx.strokeRect(rect.x - 1, rect.y - 1, rect.w + 2, rect.h + 2);
      }
    }

    ctx.fillStyle = COLORS.label;
    ctx.font = "12px sans-serif";
    ctx.fillText(
      `${this.state.roomWidthM} m x ${this.state.roomDepthM} m  (north is up)`,
      plan.originX,
      plan.originY - 8,
    );
  }

  private canvasPoint(e: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    const sx = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const sy = rect.height > 0 ? this.canvas.height / rect.height : 1;
    return { x: (e.clientX - rect.left) * sx, y: (e.clientY - rect.top) * sy };
  }

  private onPointerDown(e: PointerEvent): void {
    if (!this.plan || !this.valid()) return;
    const { x, y } = this.canvasPoint(e);

    for (let i = 0; i < this.state.openings.length; i++) {
      if (pointInRect(x, y, openingRect(this.state.openings[i], this.plan))) {
        this.draggingIndex = i;
        this.render();
        return;
      }
    }

    if (this.pendingKind) {
      const hit = hitWall(x, y, this.plan);
      if (hit) {
        const width = this.pendingKind === "door" ? Math.max(MIN_DOOR_WIDTH_M, 0.9) : Math.max(MIN_WINDOW_WIDTH_M, 1.0);
        const opening = clampOpening(
          { kind: this.pendingKind, wall: hit.wall, offset_m: hit.t - width / 2, width_m: width },
          this.state.roomWidthM,
          this.state.roomDepthM,
        );
        this.pendingKind = null;
        this.canvas.style.cursor = "default";
        this.onOpeningsChange([...this.state.openings, opening]);
      }
    }
  }

  private onPointerMove(e: PointerEvent): void {
    if (this.draggingIndex === null || !this.plan) return;
    const { x, y } = this.canvasPoint(e);
    const current = this.state.openings[this.draggingIndex];
    const hit = hitWall(x, y, this.plan, 40);
    if (!hit || hit.wall !== current.wall) return; // dragging stays on its wall
    const moved = clampOpening(
      { ...current, offset_m: hit.t - current.width_m / 2 },
      this.state.roomWidthM,
      this.state.roomDepthM,
    );
    const openings = this.state.openings.map((o, i) => (i === this.draggingIndex ? moved : o));
    this.state.openings = openings;
    this.render();
  }

  private onPointerUp(): void {
    if (this.draggingIndex === null) return;
    this.draggingIndex = null;
    this.onOpeningsChange(this.state.openings.map((o) => ({ ...o })));
  }
}
