// Application shell: form + gallery on the home view, job view behind
// #/jobs/<id>. All state flows from the API; the hash is the only route.

import { ApiClient, ApiError, type PollOptions } from "./api.js";
import { RoomForm } from "./form.js";
import { Gallery } from "./gallery.js";
import { JobView } from "./jobview.js";
import type { DesignJob, DesignRequest } from "./types.js";

export class App {
  private root: HTMLElement;
  private client: ApiClient;
  private pollOptions: PollOptions;
  private form: RoomForm | null = null;
  private gallery: Gallery | null = null;
  private prefill: DesignRequest | null = null;

  constructor(root: HTMLElement, client: ApiClient, pollOptions: PollOptions = {}) {
    this.root = root;
    this.client = client;
    this.pollOptions = pollOptions;
    window.addEventListener("hashchange", () => void this.route());
  }

  async start(): Promise<void> {
    await this.route();
  }

  private async route(): Promise<void> {
    const match = window.location.hash.match(/^#\/jobs\/([0-9a-f]+)$/);
    if (match) {
      await this.showJob(match[1]);
    } else {
      await this.showHome();
    }
  }

  private async showHome(): Promise<void> {
    this.root.innerHTML = "<p>loading labels…</p>";
    let labels, categories;
    try {
      [labels, categories] = await Promise.all([this.client.labels(), this.client.categories()]);
    } catch (err) {
      this.root.innerHTML = `<p class="offline-banner">cannot reach the service: ${String(err)}</p>`;
      return;
    }
    this.root.innerHTML = "";
    this.form = new RoomForm(labels, categories, this.prefill ?? undefined);
    this.prefill = null;
    this.form.onSubmit = (request) => void this.submit(request);
    this.gallery = new Gallery(this.client);
    this.gallery.onOpenJob = (jobId) => {
      window.location.hash = `#/jobs/${jobId}`;
    };
    this.gallery.onRerun = (job) => void this.rerun(job);
    this.root.append(this.form.element, this.gallery.element);
    await this.gallery.refresh();
  }

  private async submit(request: DesignRequest): Promise<void> {
    try {
      const jobId = await this.client.submitJob(request);
      window.location.hash = `#/jobs/${jobId}`;
      // hashchange fires asynchronously; render now so tests and slow browsers agree
      await this.showJob(jobId);
    } catch (err) {
      if (err instanceof ApiError && this.form) {
        this.form.showServerIssues(err.issues, err.message);
      } else {
        throw err;
      }
    }
  }

  private async rerun(job: DesignJob): Promise<void> {
    const request = { ...job.request, seed: Math.floor(Math.random() * 2 ** 31) };
    await this.submit(request);
  }

  private async showJob(jobId: string): Promise<void> {
    if (this.root.querySelector(`[data-job-view="${jobId}"]`)) return;
    const view = new JobView(this.client, this.pollOptions);
    view.element.dataset.jobView = jobId;
    view.onDuplicate = (job) => {
      this.prefill = job.request;
      window.location.hash = "#/";
      void this.showHome();
    };
    const back = document.createElement("a");
    back.href = "#/";
    back.textContent = "← back to form";
    this.root.innerHTML = "";
    this.root.append(back, view.element);
    try {
      await view.show(jobId);
    } catch {
      // error already rendered inside the view
    }
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new App(root, new ApiClient(""));
  void app.start();
}
