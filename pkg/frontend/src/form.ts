// Room specification form. Submit stays disabled until the client-side
// mirror of the server validation passes; the preview re-renders on every
// edit. The server remains authoritative: its rejections land as inline
// errors too.

import { FloorPlanPreview } from "./preview.js";
import type { DesignRequest, Labels, Opening, ValidationIssue } from "./types.js";
import { emptyRequest } from "./types.js";
import { denormalizeLabel, validateRequest } from "./validation.js";

export interface RoomFormState {
  request: DesignRequest;
  issues: ValidationIssue[];
  valid: boolean;
}

export class RoomForm {
  readonly element: HTMLElement;
  private labels: Labels;
  private categories: string[];
  private request: DesignRequest;
  private preview: FloorPlanPreview;

  onSubmit: (request: DesignRequest) => void = () => {};

  constructor(labels: Labels, categories: string[], initial?: DesignRequest) {
    this.labels = labels;
    this.categories = categories;
    this.request = initial ? structuredClone(initial) : emptyRequest();
    if (!this.request.room_type) this.request.room_type = labels.room_types[0] ?? "";
    if (!this.request.style) this.request.style = labels.styles[0] ?? "";

    this.element = document.createElement("section");
    this.element.className = "room-form";
    this.element.innerHTML = this.template();

    const canvas = this.query<HTMLCanvasElement>("canvas.plan-preview");
    this.preview = new FloorPlanPreview(canvas);
    this.preview.onOpeningsChange = (openings) => {
      this.request.openings = openings;
      this.refresh();
    };

    this.bind();
    this.refresh();
  }

  private template(): string {
    const roomOptions = this.labels.room_types
      .map((label) => `<option value="${label}">${denormalizeLabel(label)}</option>`)
      .join("");
    const styleOptions = this.labels.styles
      .map((label) => `<option value="${label}">${denormalizeLabel(label)}</option>`)
      .join("");
    const categoryBoxes = this.categories
      .map(
        (category) => `
        <label class="category-box">
          <input type="checkbox" data-category="${category}" />
          ${denormalizeLabel(category)}
        </label>`,
      )
      .join("");
    return `
      <h2>Design a room</h2>
      <div class="form-grid">
        <div class="form-fields">
          <label>Room type
            <select id="room-type" data-testid="room-type">${roomOptions}</select>
            <span class="field-error" data-error="room_type"></span>
          </label>
          <label>Style
            <select id="style" data-testid="style">${styleOptions}</select>
            <span class="field-error" data-error="style"></span>
          </label>
          <label>Width (m)
            <input id="room-width" data-testid="room-width" type="number" step="0.1" min="0" />
            <span class="field-error" data-error="room_width_m"></span>
          </label>
          <label>Depth (m)
            <input id="room-depth" data-testid="room-depth" type="number" step="0.1" min="0" />
            <span class="field-error" data-error="room_depth_m"></span>
          </label>
          <label>Seed (optional)
            <input id="seed" type="number" step="1" min="0" placeholder="random per request" />
            <span class="field-error" data-error="seed"></span>
          </label>
          <fieldset class="categories">
            <legend>Furniture</legend>
            ${categoryBoxes || "<em>no catalog categories</em>"}
            <span class="field-error" data-error="furniture_categories"></span>
          </fieldset>
          <div class="opening-tools">
            <button type="button" id="add-door">+ door</button>
            <button type="button" id="add-window">+ window</button>
            <span class="hint">then click a wall; drag bars to move them</span>
          </div>
          <ul class="opening-list" data-testid="opening-list"></ul>
          <button type="button" id="submit-job" data-testid="submit" disabled>Generate design</button>
          <div class="form-error" data-testid="form-error"></div>
        </div>
        <canvas class="plan-preview" width="420" height="320" data-testid="preview"></canvas>
      </div>`;
  }

  private query<T extends Element>(selector: string): T {
    const found = this.element.querySelector(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found as T;
  }

  private bind(): void {
    const roomType = this.query<HTMLSelectElement>("#room-type");
    roomType.value = this.request.room_type;
    roomType.addEventListener("change", () => {
      this.request.room_type = roomType.value;
      this.refresh();
    });

    const style = this.query<HTMLSelectElement>("#style");
    style.value = this.request.style;
    style.addEventListener("change", () => {
      this.request.style = style.value;
      this.refresh();
    });

    const width = this.query<HTMLInputElement>("#room-width");
    width.value = String(this.request.room_width_m);
    width.addEventListener("input", () => {
      this.request.room_width_m = width.value === "" ? NaN : Number(width.value);
      this.refresh();
    });

    const depth = this.query<HTMLInputElement>("#room-depth");
    depth.value = String(this.request.room_depth_m);
    depth.addEventListener("input", () => {
      this.request.room_depth_m = depth.value === "" ? NaN : Number(depth.value);
      this.refresh();
    });

    const seed = this.query<HTMLInputElement>("#seed");
    if (this.request.seed !== null) seed.value = String(this.request.seed);
    seed.addEventListener("input", () => {
      this.request.seed = seed.value === "" ? null : Number(seed.value);
      this.refresh();
    });

    for (const box of this.element.querySelectorAll<HTMLInputElement>("input[data-category]")) {
      box.checked = this.request.furniture_categories.includes(box.dataset.category!);
      box.addEventListener("change", () => {
        const category = box.dataset.category!;
        const picked = new Set(this.request.furniture_categories);
        if (box.checked) picked.add(category);
        else picked.delete(category);
        this.request.furniture_categories = this.categories.filter((c) => picked.has(c));
        this.refresh();
      });
    }

    this.query<HTMLButtonElement>("#add-door").addEventListener("click", () =>
      this.preview.armPlacement(this.preview.armed === "door" ? null : "door"),
    );
    this.query<HTMLButtonElement>("#add-window").addEventListener("click", () =>
      this.preview.armPlacement(this.preview.armed === "window" ? null : "window"),
    );

    this.query<HTMLButtonElement>("#submit-job").addEventListener("click", () => {
      if (this.state().valid) this.onSubmit(structuredClone(this.request));
    });
  }

  state(): RoomFormState {
    const issues = validateRequest(this.request, this.labels);
    return { request: this.request, issues, valid: issues.length === 0 };
  }

  /** Surface a server-side rejection (the authoritative validator). */
  showServerIssues(issues: ValidationIssue[], fallback = "request rejected"): void {
    const banner = this.query<HTMLElement>("[data-testid=form-error]");
    banner.textContent = issues.length
      ? issues.map((i) => `${i.field}: ${i.message}`).join("; ")
      : fallback;
  }

  private refresh(): void {
    const { issues, valid } = this.state();

    for (const span of this.element.querySelectorAll<HTMLElement>(".field-error")) {
      const field = span.dataset.error!;
      const message = issues.find((i) => i.field === field)?.message ?? "";
      span.textContent = message;
    }
    const openingIssues = issues.filter((i) => i.field.startsWith("openings"));
    this.renderOpeningList(openingIssues);

    this.query<HTMLButtonElement>("#submit-job").disabled = !valid;
    this.query<HTMLElement>("[data-testid=form-error]").textContent = "";

    // geometry edits always reach the preview, even while other fields are invalid
    this.preview.update({
      roomWidthM: this.request.room_width_m,
      roomDepthM: this.request.room_depth_m,
      openings: this.request.openings,
    });
  }

  private renderOpeningList(issues: ValidationIssue[]): void {
    const list = this.query<HTMLUListElement>(".opening-list");
    list.innerHTML = "";
    this.request.openings.forEach((opening: Opening, index) => {
      const item = document.createElement("li");
      const issue = issues.find((i) => i.field === `openings[${index}]`);
      item.innerHTML = `
        <span>${opening.kind} on ${opening.wall} wall at ${opening.offset_m.toFixed(2)} m, ${opening.width_m.toFixed(2)} m wide</span>
        <button type="button" data-remove="${index}">remove</button>
        <span class="field-error">${issue ? issue.message : ""}</span>`;
      item.querySelector("button")!.addEventListener("click", () => {
        this.request.openings = this.request.openings.filter((_, i) => i !== index);
        this.refresh();
      });
      list.append(item);
    });
  }
}
