// Paged gallery of finished designs with filters, rerun, and an offline
// fallback to the last page successfully fetched.

import { ApiClient } from "./api.js";
import type { DesignJob, JobPage } from "./types.js";
import { denormalizeLabel, normalizeLabel } from "./validation.js";

export class Gallery {
  readonly element: HTMLElement;
  private client: ApiClient;
  private page = 1;
  private styleFilter = "";
  private lastPage: JobPage | null = null;

  onOpenJob: (jobId: string) => void = () => {};
  onRerun: (job: DesignJob) => void = () => {};

  constructor(client: ApiClient) {
    this.client = client;
    this.element = document.createElement("section");
    this.element.className = "gallery";
  }

  async refresh(): Promise<void> {
    let page: JobPage;
    let offline = false;
    try {
      page = await this.client.listJobs({ state: "done", page: this.page, page_size: 12 });
      this.lastPage = page;
    } catch {
      if (!this.lastPage) {
        this.element.innerHTML = `<h2>Finished designs</h2><p class="offline-banner" data-testid="offline">service unreachable</p>`;
        return;
      }
      page = this.lastPage;
      offline = true;
    }
    this.render(page, offline);
  }

  private render(page: JobPage, offline: boolean): void {
    const jobs = this.styleFilter
      ? page.jobs.filter((j) => normalizeLabel(j.request.style) === this.styleFilter)
      : page.jobs;
    const styles = [...new Set(page.jobs.map((j) => normalizeLabel(j.request.style)))].sort();

    this.element.innerHTML = `
      <h2>Finished designs</h2>
      ${offline ? `<p class="offline-banner" data-testid="offline">offline: showing the last loaded page</p>` : ""}
      <div class="gallery-controls">
        <label>style
          <select data-testid="style-filter">
            <option value="">all</option>
            ${styles.map((s) => `<option value="${s}" ${s === this.styleFilter ? "selected" : ""}>${denormalizeLabel(s)}</option>`).join("")}
          </select>
        </label>
        <span>${page.total} done</span>
        <button type="button" data-page="prev" ${this.page <= 1 ? "disabled" : ""}>&laquo;</button>
        <span>page ${page.page}</span>
        <button type="button" data-page="next" ${page.page * page.page_size >= page.total ? "disabled" : ""}>&raquo;</button>
      </div>
      <div class="gallery-grid" data-testid="gallery-grid">
        ${jobs.length ? jobs.map((job) => this.cardHtml(job)).join("") : `<p class="empty-state" data-testid="empty-state">no designs yet; submit one above</p>`}
      </div>`;

    const filter = this.element.querySelector<HTMLSelectElement>("[data-testid=style-filter]")!;
    filter.addEventListener("change", () => {
      this.styleFilter = filter.value;
      this.refresh();
    });
    this.element.querySelector<HTMLButtonElement>("button[data-page=prev]")!.addEventListener("click", () => {
      this.page = Math.max(1, this.page - 1);
      this.refresh();
    });
    this.element.querySelector<HTMLButtonElement>("button[data-page=next]")!.addEventListener("click", () => {
      this.page += 1;
      this.refresh();
    });

    for (const card of this.element.querySelectorAll<HTMLElement>(".gallery-card")) {
      const jobId = card.dataset.jobId!;
      card.querySelector<HTMLElement>(".thumb")!.addEventListener("click", () => this.onOpenJob(jobId));
      card.querySelector<HTMLButtonElement>("button[data-rerun]")!.addEventListener("click", () => {
        const job = jobs.find((j) => j.job_id === jobId);
        if (job) this.onRerun(job);
      });
    }
  }

  private cardHtml(job: DesignJob): string {
    const score = job.report ? job.report.final_score.toFixed(2) : "?";
    return `
      <div class="gallery-card" data-job-id="${job.job_id}">
        <img class="thumb" src="${this.client.artifactUrl(job.job_id, "design")}" alt="design ${job.job_id}" />
        <div class="card-meta">
          <span class="chip">${denormalizeLabel(job.request.room_type)}</span>
          <span class="chip">${denormalizeLabel(job.request.style)}</span>
          <span class="score-badge">score ${score}</span>
          <button type="button" data-rerun>re-run with new seed</button>
        </div>
      </div>`;
  }
}
