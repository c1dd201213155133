// Live view of one job: stage progress strip, then artifacts and the
// evaluation report. Every number shown comes straight from an API response.

import { ApiClient, pollJob, type PollOptions } from "./api.js";
import type { DesignJob, EvaluationReport, JobState } from "./types.js";
import { denormalizeLabel } from "./validation.js";

const STRIP_STAGES: JobState[] = ["queued", "retrieving", "composing", "generating", "evaluating", "done"];

export class JobView {
  readonly element: HTMLElement;
  private client: ApiClient;
  private pollOptions: PollOptions;

  /** Re-open the form pre-filled with this job's request. */
  onDuplicate: (job: DesignJob) => void = () => {};

  constructor(client: ApiClient, pollOptions: PollOptions = {}) {
    this.client = client;
    this.pollOptions = pollOptions;
    this.element = document.createElement("section");
    this.element.className = "job-view";
  }

  async show(jobId: string): Promise<DesignJob> {
    this.element.innerHTML = `
      <h2>Job <code>${jobId}</code></h2>
      <ol class="progress-strip" data-testid="progress-strip" data-state="loading">
        ${STRIP_STAGES.map((s) => `<li data-stage="${s}">${s}</li>`).join("")}
      </ol>
      <div class="job-body"></div>`;
    try {
      const job = await pollJob(this.client, jobId, (snapshot) => this.renderProgress(snapshot), this.pollOptions);
      this.renderTerminal(job);
      return job;
    } catch (err) {
      this.renderError(err);
      throw err;
    }
  }

  private strip(): HTMLElement {
    return this.element.querySelector("[data-testid=progress-strip]") as HTMLElement;
  }

  private renderProgress(job: DesignJob): void {
    const strip = this.strip();
    strip.dataset.state = job.state;
    const reached = job.state === "failed" ? -1 : STRIP_STAGES.indexOf(job.state);
    strip.querySelectorAll<HTMLElement>("li").forEach((item, index) => {
      item.classList.toggle("stage-current", index === reached);
      item.classList.toggle("stage-done", index < reached || job.state === "done");
      item.classList.toggle("stage-failed", job.state === "failed" && job.error?.stage === item.dataset.stage);
    });
  }

  private renderTerminal(job: DesignJob): void {
    const body = this.element.querySelector(".job-body") as HTMLElement;
    if (job.state === "failed") {
      body.innerHTML = `
        <div class="job-failed" data-testid="job-failed">
          <p>failed during <strong>${job.error?.stage ?? "?"}</strong>: ${job.error?.message ?? "unknown error"}</p>
          <button type="button" data-testid="duplicate">duplicate &amp; edit</button>
        </div>`;
      body.querySelector("button")!.addEventListener("click", () => this.onDuplicate(job));
      return;
    }
    const report = job.report;
    body.innerHTML = `
      <div class="result-images">
        <figure>
          <img src="${this.client.artifactUrl(job.job_id, "layout")}" alt="conditioning layout" />
          <figcaption>layout</figcaption>
        </figure>
        <figure>
          <img src="${this.client.artifactUrl(job.job_id, "design")}" alt="generated design" />
          <figcaption>generated design</figcaption>
        </figure>
      </div>
      ${report ? this.reportHtml(job, report) : "<p>no report</p>"}`;
  }

  private reportHtml(job: DesignJob, report: EvaluationReport): string {
    const chip = (matched: boolean, kind: string, wanted: string, predicted: string, confidence: number) => `
      <span class="chip ${matched ? "chip-match" : "chip-miss"}" data-testid="${kind}-chip" data-match="${matched}">
        ${kind}: wanted ${denormalizeLabel(wanted)}, got ${denormalizeLabel(predicted)}
        (${(confidence * 100).toFixed(0)}%)
      </span>`;
    return `
      <div class="report" data-testid="report">
        <span class="score-badge" data-testid="score">score ${report.final_score.toFixed(2)}</span>
        ${chip(report.room_type_match, "room", job.request.room_type, report.predicted_room_type, report.room_type_confidence)}
        ${chip(report.style_match, "style", job.request.style, report.predicted_style, report.style_confidence)}
        ${this.distributionHtml("room type", report.room_type_distribution)}
        ${this.distributionHtml("style", report.style_distribution)}
      </div>`;
  }

  private distributionHtml(title: string, distribution?: Record<string, number>): string {
    if (!distribution) return "";
    const rows = Object.entries(distribution)
      .sort((a, b) => b[1] - a[1])
      .map(([label, p]) => `<tr><td>${denormalizeLabel(label)}</td><td>${(p * 100).toFixed(1)}%</td></tr>`)
      .join("");
    return `<details><summary>${title} distribution</summary><table>${rows}</table></details>`;
  }

  private renderError(err: unknown): void {
    const body = this.element.querySelector(".job-body") as HTMLElement;
    const status = (err as { status?: number }).status;
    body.innerHTML =
      status === 404
        ? `<p class="not-found" data-testid="not-found">No such job. It may have been created against a different data directory.</p>`
        : `<p class="job-failed">could not load job: ${String(err)}</p>`;
  }
}
